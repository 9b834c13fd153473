#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "falcon/event_log.hpp"
#include "falcon/node.hpp"

namespace falcon {

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotLockstep : public std::logic_error {
public:
    NotLockstep() : std::logic_error("round accounting needs lockstep mode") {}
};

enum class DelayMode { lockstep, random, adversarial };

std::string_view mode_name(DelayMode mode);
/// Throws InvalidConfig on an unknown name.
DelayMode parse_mode(std::string_view name);

/// Adds `delay` ticks to every message it matches. Unset fields match anything.
struct DelayRule {
    std::optional<std::uint32_t> from;
    std::optional<std::uint32_t> to;
    std::optional<std::string> body;
    std::optional<SubProtocol> sub;
    std::optional<std::uint64_t> instance;
    std::optional<std::uint32_t> index;
    std::uint64_t delay = 0;

    bool matches(const Envelope& env) const;
};

enum class FaultKind { crash, equivocate, silent, wrong_aaba_bit, delay_target };

std::string_view fault_name(FaultKind kind);
FaultKind parse_fault(std::string_view name);

struct FaultSpec {
    NodeId node;
    FaultKind kind = FaultKind::silent;
    /// CRASH only.
    std::uint64_t at_time = 0;
    /// DELAY_TARGET only; rules without `from` are pinned to this node.
    std::vector<DelayRule> rules;

    /// Byzantine or crashed; a delayed node still counts as correct.
    bool faulty() const { return kind != FaultKind::delay_target; }
};

struct SimConfig {
    SystemParams params;
    std::uint64_t seed = 1;
    DelayMode mode = DelayMode::lockstep;
    std::uint64_t min_delay = 1;
    std::uint64_t max_delay = 5;
    /// Ordered; the first matching rule applies.
    std::vector<DelayRule> rules;
    std::vector<FaultSpec> faults;
    std::uint64_t num_instances = 3;
    /// Extra instances run past num_instances so the last checked one can return.
    std::uint64_t drain_instances = 3;
    /// Own transactions each node adds before each of its proposals.
    std::uint32_t tx_load = 4;
    /// Transactions added to every node's buffer when an instance first starts.
    std::uint32_t universal_txs = 1;
    std::size_t block_cap = 32;
    std::uint64_t prune_horizon = 2;
    SortMode sort_mode = SortMode::partial;
    Mutations mutations;
    std::uint64_t max_time = 1'000'000;
    bool log_sends = true;

    /// Throws InvalidConfig.
    void validate() const;
};

/// A transaction placed into every buffer when instance `instance` first started.
struct UniversalTx {
    Digest id;
    std::uint64_t instance = 0;
    std::uint64_t time = 0;
};

/// Deterministic discrete-event network: (time, seq) ordered queue, every
/// message encoded and decoded on the way, fault plugins that act only through
/// their own node's signer and the delay knobs.
class Simulation {
public:
    explicit Simulation(SimConfig config);
    ~Simulation();

    /// Runs until the queue drains or max_time passes. Returns false on timeout.
    bool run();

    const SimConfig& config() const { return config_; }
    const EventLog& log() const { return log_; }
    const Node& node(NodeId id) const { return *nodes_.at(id.index - 1); }
    bool correct(NodeId id) const;
    std::vector<NodeId> correct_nodes() const;
    const std::optional<FaultSpec>& fault(NodeId id) const { return faults_.at(id.index - 1); }
    const KeyRegistry& registry() const { return registry_; }
    const std::map<Digest, std::uint64_t>& submit_times() const { return submit_times_; }
    const std::vector<UniversalTx>& universal() const { return universal_; }
    std::uint64_t now() const { return now_; }
    bool timed_out() const { return timed_out_; }
    std::uint64_t messages_delivered() const { return delivered_; }

    /// Hop at which a record fired. Throws NotLockstep outside lockstep mode.
    std::uint64_t round_of(const Record& r) const;

private:
    struct Pending {
        std::uint64_t time;
        std::uint64_t seq;
        std::uint32_t to;
        Bytes wire;
        bool operator>(const Pending& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };

    void start_node(std::uint32_t i);
    void deliver(const Pending& p);
    void emit(std::uint32_t from, NodeStep&& step);
    std::vector<Envelope> tamper(std::uint32_t from, const Emission& e);
    void send(const Envelope& env);
    std::uint64_t delay_for(const Envelope& env);
    void record(std::uint32_t node, LocalEvent ev) { log_.append(now_, node, std::move(ev)); }
    void on_activation(std::uint32_t node, std::uint64_t k);
    void note_send(std::uint32_t from, const Emission& e);
    bool crashed(std::uint32_t i) const;

    SimConfig config_;
    KeyRegistry registry_;
    CommonCoin coin_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::optional<FaultSpec>> faults_;
    std::vector<bool> crash_logged_;
    std::mt19937_64 rng_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t now_ = 0;
    std::uint64_t delivered_ = 0;
    bool timed_out_ = false;
    EventLog log_;
    std::map<Digest, std::uint64_t> submit_times_;
    std::vector<UniversalTx> universal_;
    std::uint64_t universal_done_ = 0;
    std::set<std::tuple<std::uint32_t, std::uint64_t, std::uint32_t>> valid_one_seen_;
    struct Equivocation {
        Digest original;
        Block alternate;
    };
    /// Keyed by (node, instance).
    std::map<std::pair<std::uint32_t, std::uint64_t>, Equivocation> alternates_;
};

}  // namespace falcon
