#include "falcon/node.hpp"

#include <algorithm>

namespace falcon {

Node::Node(NodeConfig config, const KeyRegistry& registry, const CommonCoin& coin)
    : config_(config),
      registry_(&registry),
      coin_(&coin),
      signer_(registry.signer_for(config.id)),
      sorter_(config.params.n, config.sort_mode, !config.mutations.no_instance_gate) {}

const AcsqInstance* Node::instance(std::uint64_t k) const {
    auto it = instances_.find(k);
    return it == instances_.end() ? nullptr : &it->second;
}

AcsqInstance* Node::find(std::uint64_t k) {
    auto it = instances_.find(k);
    return it == instances_.end() ? nullptr : &it->second;
}

AcsqInstance& Node::instance_for(std::uint64_t k) {
    auto it = instances_.find(k);
    if (it == instances_.end())
        it = instances_.try_emplace(k, k, config_.id, *registry_, signer_, *coin_, config_.mutations).first;
    return it->second;
}

void Node::inject_tx(Transaction tx) {
    if (executed_ids_.contains(tx.id) || !buffered_ids_.insert(tx.id).second) return;
    buffer_.push_back(std::move(tx));
}

Block Node::propose_block(std::uint64_t k) const {
    const auto count = std::min(buffer_.size(), config_.block_cap);
    std::vector<Transaction> txs(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(count));
    return make_block(config_.id, k, std::move(txs));
}

Snapshot Node::snapshot() const {
    return Snapshot{k_, chain().digest(), chain().size(), buffer_.size()};
}

NodeStep Node::start() {
    NodeStep out;
    run_step(out);
    return out;
}

NodeStep Node::step(const Envelope& env) {
    NodeStep out;
    route(env, out);
    run_step(out);
    return out;
}

void Node::route(const Envelope& env, NodeStep& out) {
    const auto k = env.addr.acsq_id;
    if (k == 0) return;
    if (k > k_ + 1) {
        future_[k].push_back(env);
        return;
    }
    absorb(instance_for(k).handle(env.from, env.addr, env.body), out);
}

void Node::absorb(AcsqStep&& step, NodeStep& out) {
    for (auto& e : step.out) out.out.push_back(std::move(e));
    for (auto& e : step.events) out.events.push_back(std::move(e));
}

void Node::activate(std::uint64_t k, NodeStep& out) {
    if (hook_) hook_(k);
    absorb(instance_for(k).activate(propose_block(k)), out);
}

void Node::run_step(NodeStep& out) {
    const auto quorum = config_.params.quorum();
    bool changed = true;
    while (changed) {
        changed = false;
        if (may_activate(k_) && !instance_for(k_).activated()) {
            activate(k_, out);
            changed = true;
        }
        AcsqInstance* cur = find(k_);
        if (cur && cur->m2_count() >= quorum && may_activate(k_ + 1) && !instance_for(k_ + 1).activated()) {
            activate(k_ + 1, out);
            changed = true;
            cur = find(k_);
        }
        if (AcsqInstance* next = find(k_ + 1); cur && next && next->m2_count() >= 1 && !cur->trigger_active()) {
            absorb(cur->fire_trigger(), out);
            changed = true;
        }
        drive_sort(out);
        cur = find(k_);
        if (cur && cur->returned()) {
            ++k_;
            while (compacted_up_to_ + config_.prune_horizon < k_) {
                ++compacted_up_to_;
                if (auto* old = find(compacted_up_to_); old && old->returned()) old->compact();
            }
            auto ready = future_.begin();
            while (ready != future_.end() && ready->first <= k_ + 1) {
                auto envs = std::move(ready->second);
                ready = future_.erase(ready);
                for (const auto& env : envs) route(env, out);
                ready = future_.begin();
            }
            changed = true;
        }
    }
}

void Node::drive_sort(NodeStep& out) {
    for (auto& [k, inst] : instances_) {
        if (sorter_.finished(k)) continue;
        for (const auto& c : sorter_.partial_sort(k, inst.m_acs(), inst.excluded())) on_commit(c, out);
    }
}

void Node::on_commit(const Commit& c, NodeStep& out) {
    out.events.push_back(LocalEvent{EventKind::commit, c.instance, c.index, c.slot, c.block.digest, {}});
    std::set<Digest> ids;
    for (const auto& tx : c.block.txs) {
        ids.insert(tx.id);
        if (executed_ids_.insert(tx.id).second) executed_.push_back(tx.id);
    }
    std::erase_if(buffer_, [&](const Transaction& tx) { return ids.contains(tx.id); });
    for (const auto& id : ids) buffered_ids_.erase(id);
}

}  // namespace falcon
