#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "falcon/simnet.hpp"

namespace falcon {

struct StageBreakdown {
    std::uint64_t broadcast = 0;
    std::uint64_t agreement = 0;
    std::uint64_t sorting = 0;

    std::uint64_t total() const { return broadcast + agreement + sorting; }
};

/// Life of one committed block at one node.
struct BlockLatency {
    std::uint32_t node = 0;
    std::uint64_t instance = 0;
    std::uint32_t index = 0;
    Digest digest;
    std::uint64_t activated = 0;
    std::uint64_t decided = 0;
    std::uint64_t committed = 0;
    bool via_agreement = false;
    StageBreakdown stages;
};

/// Stage definitions used by decompose_latency, one per line.
std::string stage_definitions();

/// One entry per commit record of the listed nodes.
std::vector<BlockLatency> decompose_latency(const EventLog& log, const std::set<std::uint32_t>& nodes);

struct MetricRecord {
    Digest tx;
    std::uint32_t node = 0;
    std::uint64_t submit = 0;
    std::uint64_t commit = 0;
    std::uint64_t instance = 0;
    std::uint32_t index = 0;
    StageBreakdown stages;
};

/// One record per correct node per executed transaction (duplicates skipped).
std::vector<MetricRecord> collect_metrics(const Simulation& sim);

void write_csv(std::ostream& out, const std::vector<MetricRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<MetricRecord>& records);

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StabilityReport {
    std::size_t txs = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    std::uint64_t p50 = 0;
    std::uint64_t p90 = 0;
    std::uint64_t p99 = 0;
    std::size_t distinct_commit_times = 0;
    /// Commits happened at no fewer than `min_distinct` distinct times.
    bool continuous = false;
    /// Every instance committed all of its blocks at one time.
    bool single_burst = false;
};

/// Commit latency spread at one node. Throws InsufficientData below `min_txs` records.
StabilityReport stability_report(const std::vector<MetricRecord>& records, std::uint32_t node,
                                 std::size_t min_txs = 100, std::size_t min_distinct = 2);

std::string format_stability(const StabilityReport& r);

/// Committed transactions per time bucket at one node.
std::map<std::uint64_t, std::size_t> throughput(const std::vector<MetricRecord>& records, std::uint32_t node,
                                                std::uint64_t bucket);

}  // namespace falcon
