#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

enum class EventKind : std::uint8_t {
    activate,          // instance activated (own block proposed)
    block_received,    // a block body for GBC(k, j) is held for the first time
    grade1,            // GBC grade-1 delivery
    grade2,            // GBC grade-2 delivery
    assisted,          // grade-2 certificate adopted from an ASSIST
    trigger,           // agreement trigger of instance k activated
    agreement_start,   // agreement stage entered; value = number of AABA instances
    aaba_input,        // value = bit
    aaba_output,       // value = bit, detail = shortcut|stop|aba
    aaba_exit,         // early-stop exit
    aaba_halt,         // stopped through delivery assistance
    included,          // index decided into the ACS set
    excluded,          // index decided out of the ACS set
    conflict,          // an index received a second, contradicting decision
    query_sent,
    returned,          // instance returned; value = |ACS set|
    commit,            // value = chain slot (1-based)
    send,              // one emission; detail = body and target
    valid_one,         // an AMP carrying a Q-valid <1, v, sigma> was sent
    crash,
};

std::string_view kind_name(EventKind kind);

/// Observation produced inside a node; the harness stamps time and node.
struct LocalEvent {
    EventKind kind;
    std::uint64_t instance = 0;
    std::uint32_t index = 0;
    std::uint64_t value = 0;
    std::optional<Digest> digest;
    std::string detail;
};

struct Record {
    std::uint64_t time = 0;
    std::uint64_t seq = 0;
    std::uint32_t node = 0;
    EventKind kind = EventKind::send;
    std::uint64_t instance = 0;
    std::uint32_t index = 0;
    std::uint64_t value = 0;
    std::optional<Digest> digest;
    std::string detail;
};

/// Append-only, totally ordered by (time, seq).
class EventLog {
public:
    void append(std::uint64_t time, std::uint32_t node, LocalEvent event);

    const std::vector<Record>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    /// One line per record: time, node, kind, instance, index, detail (tab separated).
    void write(std::ostream& out) const;
    std::string to_string() const;

private:
    std::vector<Record> records_;
};

std::string format_record(const Record& r);

}  // namespace falcon
