#include "falcon/event_log.hpp"

#include <ostream>
#include <sstream>

namespace falcon {

std::string_view kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::activate: return "activate";
        case EventKind::block_received: return "block_received";
        case EventKind::grade1: return "grade1";
        case EventKind::grade2: return "grade2";
        case EventKind::assisted: return "assisted";
        case EventKind::trigger: return "trigger";
        case EventKind::agreement_start: return "agreement_start";
        case EventKind::aaba_input: return "aaba_input";
        case EventKind::aaba_output: return "aaba_output";
        case EventKind::aaba_exit: return "aaba_exit";
        case EventKind::aaba_halt: return "aaba_halt";
        case EventKind::included: return "included";
        case EventKind::excluded: return "excluded";
        case EventKind::conflict: return "conflict";
        case EventKind::query_sent: return "query_sent";
        case EventKind::returned: return "returned";
        case EventKind::commit: return "commit";
        case EventKind::send: return "send";
        case EventKind::valid_one: return "valid_one";
        case EventKind::crash: return "crash";
    }
    return "unknown";
}

void EventLog::append(std::uint64_t time, std::uint32_t node, LocalEvent event) {
    records_.push_back(Record{time, records_.size(), node, event.kind, event.instance, event.index, event.value,
                              event.digest, std::move(event.detail)});
}

std::string format_record(const Record& r) {
    std::ostringstream line;
    line << r.time << '\t' << r.node << '\t' << kind_name(r.kind) << '\t' << r.instance << '\t' << r.index << '\t'
         << "v=" << r.value;
    if (r.digest) line << " d=" << r.digest->short_hex();
    if (!r.detail.empty()) line << ' ' << r.detail;
    return line.str();
}

void EventLog::write(std::ostream& out) const {
    for (const auto& r : records_) out << format_record(r) << '\n';
}

std::string EventLog::to_string() const {
    std::ostringstream out;
    write(out);
    return out.str();
}

}  // namespace falcon
