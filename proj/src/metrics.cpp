#include "falcon/metrics.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace falcon {

namespace {

using NodeBlock = std::tuple<std::uint32_t, std::uint64_t, std::uint32_t>;

std::uint64_t percentile(const std::vector<std::uint64_t>& sorted, double p) {
    // Nearest-rank.
    auto rank = static_cast<std::size_t>(p * static_cast<double>(sorted.size()) + 0.999999);
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

}  // namespace

std::string stage_definitions() {
    return "broadcast: instance activation to decision, or to agreement start for blocks decided by AABA\n"
           "agreement: agreement start to decision for blocks decided by AABA, else 0\n"
           "sorting: decision to commit\n";
}

std::vector<BlockLatency> decompose_latency(const EventLog& log, const std::set<std::uint32_t>& nodes) {
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint64_t> activated, agreement;
    std::map<NodeBlock, std::uint64_t> decided;
    std::set<NodeBlock> via_agreement;
    std::vector<BlockLatency> out;
    for (const auto& r : log.records()) {
        if (!nodes.contains(r.node)) continue;
        const NodeBlock key{r.node, r.instance, r.index};
        switch (r.kind) {
            case EventKind::activate:
                activated.try_emplace({r.node, r.instance}, r.time);
                break;
            case EventKind::agreement_start:
                agreement.try_emplace({r.node, r.instance}, r.time);
                break;
            case EventKind::aaba_input:
                via_agreement.insert(key);
                break;
            case EventKind::included:
                decided.try_emplace(key, r.time);
                break;
            case EventKind::commit: {
                BlockLatency b;
                b.node = r.node;
                b.instance = r.instance;
                b.index = r.index;
                b.digest = r.digest.value_or(Digest{});
                b.committed = r.time;
                auto a = activated.find({r.node, r.instance});
                b.activated = a == activated.end() ? r.time : a->second;
                auto d = decided.find(key);
                b.decided = std::max(b.activated, d == decided.end() ? r.time : d->second);
                b.via_agreement = via_agreement.contains(key);
                if (b.via_agreement) {
                    auto g = agreement.find({r.node, r.instance});
                    const auto start = std::clamp(g == agreement.end() ? b.activated : g->second, b.activated,
                                                  b.decided);
                    b.stages.broadcast = start - b.activated;
                    b.stages.agreement = b.decided - start;
                } else {
                    b.stages.broadcast = b.decided - b.activated;
                }
                b.stages.sorting = b.committed - b.decided;
                out.push_back(b);
                break;
            }
            default:
                break;
        }
    }
    return out;
}

std::vector<MetricRecord> collect_metrics(const Simulation& sim) {
    std::set<std::uint32_t> nodes;
    for (auto id : sim.correct_nodes()) nodes.insert(id.index);
    std::map<NodeBlock, BlockLatency> blocks;
    for (const auto& b : decompose_latency(sim.log(), nodes)) blocks[{b.node, b.instance, b.index}] = b;

    std::vector<MetricRecord> out;
    for (auto i : nodes) {
        std::set<Digest> seen;
        for (const auto& block : sim.node(NodeId{i}).chain().slots()) {
            auto it = blocks.find({i, block.instance, block.creator.index});
            if (it == blocks.end()) continue;
            for (const auto& tx : block.txs) {
                if (!seen.insert(tx.id).second) continue;
                auto s = sim.submit_times().find(tx.id);
                MetricRecord m;
                m.tx = tx.id;
                m.node = i;
                m.submit = s == sim.submit_times().end() ? it->second.activated : s->second;
                m.commit = it->second.committed;
                m.instance = block.instance;
                m.index = block.creator.index;
                m.stages = it->second.stages;
                out.push_back(m);
            }
        }
    }
    return out;
}

void write_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
    out << "node,instance,index,tx,submit,commit,latency,broadcast,agreement,sorting\n";
    for (const auto& m : records) {
        out << m.node << ',' << m.instance << ',' << m.index << ',' << m.tx.short_hex() << ',' << m.submit << ','
            << m.commit << ',' << (m.commit - m.submit) << ',' << m.stages.broadcast << ',' << m.stages.agreement
            << ',' << m.stages.sorting << '\n';
    }
}

void write_jsonl(std::ostream& out, const std::vector<MetricRecord>& records) {
    for (const auto& m : records) {
        nlohmann::ordered_json j;
        j["node"] = m.node;
        j["instance"] = m.instance;
        j["index"] = m.index;
        j["tx"] = m.tx.hex();
        j["submit"] = m.submit;
        j["commit"] = m.commit;
        j["broadcast"] = m.stages.broadcast;
        j["agreement"] = m.stages.agreement;
        j["sorting"] = m.stages.sorting;
        out << j.dump() << '\n';
    }
}

StabilityReport stability_report(const std::vector<MetricRecord>& records, std::uint32_t node, std::size_t min_txs,
                                 std::size_t min_distinct) {
    std::vector<std::uint64_t> latencies;
    std::set<std::uint64_t> times;
    std::map<std::uint64_t, std::set<std::uint64_t>> per_instance;
    for (const auto& m : records) {
        if (m.node != node) continue;
        latencies.push_back(m.commit - m.submit);
        times.insert(m.commit);
        per_instance[m.instance].insert(m.commit);
    }
    if (latencies.empty() || latencies.size() < min_txs)
        throw InsufficientData("only " + std::to_string(latencies.size()) + " committed transactions");
    std::sort(latencies.begin(), latencies.end());
    StabilityReport r;
    r.txs = latencies.size();
    r.min = latencies.front();
    r.max = latencies.back();
    r.p50 = percentile(latencies, 0.50);
    r.p90 = percentile(latencies, 0.90);
    r.p99 = percentile(latencies, 0.99);
    r.distinct_commit_times = times.size();
    r.continuous = times.size() >= min_distinct;
    r.single_burst = std::all_of(per_instance.begin(), per_instance.end(),
                                 [](const auto& kv) { return kv.second.size() == 1; });
    return r;
}

std::string format_stability(const StabilityReport& r) {
    std::ostringstream out;
    out << "txs=" << r.txs << " min=" << r.min << " p50=" << r.p50 << " p90=" << r.p90 << " p99=" << r.p99
        << " max=" << r.max << " distinct_commit_times=" << r.distinct_commit_times
        << " continuous=" << (r.continuous ? "yes" : "no") << " single_burst=" << (r.single_burst ? "yes" : "no");
    return out.str();
}

std::map<std::uint64_t, std::size_t> throughput(const std::vector<MetricRecord>& records, std::uint32_t node,
                                                std::uint64_t bucket) {
    std::map<std::uint64_t, std::size_t> out;
    if (bucket == 0) bucket = 1;
    for (const auto& m : records) {
        if (m.node == node) ++out[m.commit / bucket * bucket];
    }
    return out;
}

}  // namespace falcon
