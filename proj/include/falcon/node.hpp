#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "falcon/acsq.hpp"
#include "falcon/sorter.hpp"

namespace falcon {

struct NodeConfig {
    NodeId id;
    SystemParams params;
    std::size_t block_cap = 32;
    /// Highest instance this node activates; 0 means no limit.
    std::uint64_t max_instance = 0;
    SortMode sort_mode = SortMode::partial;
    /// Returned instances older than this many instances are compacted.
    std::uint64_t prune_horizon = 2;
    Mutations mutations;
};

struct NodeStep {
    std::vector<Emission> out;
    std::vector<LocalEvent> events;
};

struct Snapshot {
    std::uint64_t k = 0;
    Digest chain_digest;
    std::uint64_t chain_length = 0;
    std::size_t buffer_size = 0;
};

/// One replica: drives consecutive ACSQ instances, the agreement trigger,
/// the transaction buffer and the commit path.
class Node {
public:
    /// Called right before the node proposes for instance k.
    using ActivationHook = std::function<void(std::uint64_t k)>;

    Node(NodeConfig config, const KeyRegistry& registry, const CommonCoin& coin);

    NodeStep start();
    NodeStep step(const Envelope& env);

    /// Appends to the buffer unless the tx is already buffered or committed.
    void inject_tx(Transaction tx);
    void set_activation_hook(ActivationHook hook) { hook_ = std::move(hook); }

    /// Buffer prefix, up to the block cap.
    Block propose_block(std::uint64_t k) const;

    NodeId id() const { return config_.id; }
    const NodeConfig& config() const { return config_; }
    std::uint64_t current_instance() const { return k_; }
    const AcsqInstance* instance(std::uint64_t k) const;
    const Sorter& sorter() const { return sorter_; }
    const Chain& chain() const { return sorter_.chain(); }
    const std::deque<Transaction>& buffer() const { return buffer_; }
    /// Committed tx ids in execution order, duplicates skipped.
    const std::vector<Digest>& executed() const { return executed_; }
    Snapshot snapshot() const;

private:
    bool may_activate(std::uint64_t k) const { return config_.max_instance == 0 || k <= config_.max_instance; }
    AcsqInstance& instance_for(std::uint64_t k);
    AcsqInstance* find(std::uint64_t k);
    void route(const Envelope& env, NodeStep& out);
    void absorb(AcsqStep&& step, NodeStep& out);
    void activate(std::uint64_t k, NodeStep& out);
    void run_step(NodeStep& out);
    void drive_sort(NodeStep& out);
    void on_commit(const Commit& c, NodeStep& out);

    NodeConfig config_;
    const KeyRegistry* registry_;
    const CommonCoin* coin_;
    Signer signer_;
    ActivationHook hook_;

    std::uint64_t k_ = 1;
    std::map<std::uint64_t, AcsqInstance> instances_;
    std::map<std::uint64_t, std::vector<Envelope>> future_;
    std::uint64_t compacted_up_to_ = 0;
    Sorter sorter_;

    std::deque<Transaction> buffer_;
    std::set<Digest> buffered_ids_;
    std::set<Digest> executed_ids_;
    std::vector<Digest> executed_;
};

}  // namespace falcon
