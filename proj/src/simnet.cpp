#include "falcon/simnet.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace falcon {

namespace {

Bytes text_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

Bytes seeded_secret(const char* label, std::uint64_t seed) {
    return text_bytes(std::string(label) + ":" + std::to_string(seed));
}

std::optional<bool> body_bit(const Body& body) {
    if (auto* m = std::get_if<Sho1>(&body)) return m->bit;
    if (auto* m = std::get_if<Sho2>(&body)) return m->bit;
    if (auto* m = std::get_if<Bval>(&body)) return m->bit;
    if (auto* m = std::get_if<Aux>(&body)) return m->bit;
    if (auto* m = std::get_if<Amp>(&body)) return m->input.one;
    return std::nullopt;
}

}  // namespace

std::string_view mode_name(DelayMode mode) {
    switch (mode) {
        case DelayMode::lockstep: return "lockstep";
        case DelayMode::random: return "random";
        case DelayMode::adversarial: return "adversarial";
    }
    return "lockstep";
}

DelayMode parse_mode(std::string_view name) {
    if (name == "lockstep") return DelayMode::lockstep;
    if (name == "random") return DelayMode::random;
    if (name == "adversarial") return DelayMode::adversarial;
    throw InvalidConfig("unknown mode: " + std::string(name));
}

std::string_view fault_name(FaultKind kind) {
    switch (kind) {
        case FaultKind::crash: return "crash";
        case FaultKind::equivocate: return "equivocate";
        case FaultKind::silent: return "silent";
        case FaultKind::wrong_aaba_bit: return "wrong_aaba_bit";
        case FaultKind::delay_target: return "delay_target";
    }
    return "silent";
}

FaultKind parse_fault(std::string_view name) {
    for (auto k : {FaultKind::crash, FaultKind::equivocate, FaultKind::silent, FaultKind::wrong_aaba_bit,
                   FaultKind::delay_target}) {
        if (fault_name(k) == name) return k;
    }
    throw InvalidConfig("unknown fault kind: " + std::string(name));
}

bool DelayRule::matches(const Envelope& env) const {
    if (from && *from != env.from.index) return false;
    if (to && *to != env.to.index) return false;
    if (body && *body != body_name(env.body)) return false;
    if (sub && *sub != env.addr.sub) return false;
    if (instance && *instance != env.addr.acsq_id) return false;
    if (index && *index != env.addr.index.index) return false;
    return true;
}

void SimConfig::validate() const {
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw InvalidConfig(e.what());
    }
    if (num_instances == 0) throw InvalidConfig("num_instances must be positive");
    if (block_cap == 0) throw InvalidConfig("block_cap must be positive");
    if (mode != DelayMode::lockstep && (min_delay == 0 || max_delay < min_delay))
        throw InvalidConfig("delays must satisfy 1 <= min_delay <= max_delay");
    std::set<std::uint32_t> seen;
    std::uint32_t faulty = 0;
    for (const auto& f : faults) {
        if (!params.contains(f.node)) throw InvalidConfig("fault names an unknown node");
        if (!seen.insert(f.node.index).second) throw InvalidConfig("more than one fault for a node");
        if (f.faulty()) ++faulty;
    }
    if (faulty > params.f) throw InvalidConfig("more faulty nodes than f");
}

Simulation::Simulation(SimConfig config)
    : config_((config.validate(), std::move(config))),
      registry_(config_.params, seeded_secret("keys", config_.seed)),
      coin_(seeded_secret("coin", config_.seed)),
      faults_(config_.params.n),
      crash_logged_(config_.params.n, false),
      rng_(config_.seed) {
    for (const auto& f : config_.faults) faults_[f.node.index - 1] = f;
    for (std::uint32_t i = 1; i <= config_.params.n; ++i) {
        NodeConfig nc;
        nc.id = NodeId{i};
        nc.params = config_.params;
        nc.block_cap = config_.block_cap;
        nc.max_instance = config_.num_instances + config_.drain_instances;
        nc.sort_mode = config_.sort_mode;
        nc.prune_horizon = config_.prune_horizon;
        nc.mutations = config_.mutations;
        nodes_.push_back(std::make_unique<Node>(nc, registry_, coin_));
        nodes_.back()->set_activation_hook([this, i](std::uint64_t k) { on_activation(i, k); });
    }
}

Simulation::~Simulation() = default;

bool Simulation::correct(NodeId id) const {
    const auto& f = faults_.at(id.index - 1);
    return !f || !f->faulty();
}

std::vector<NodeId> Simulation::correct_nodes() const {
    std::vector<NodeId> out;
    for (std::uint32_t i = 1; i <= config_.params.n; ++i) {
        if (correct(NodeId{i})) out.push_back(NodeId{i});
    }
    return out;
}

std::uint64_t Simulation::round_of(const Record& r) const {
    if (config_.mode != DelayMode::lockstep) throw NotLockstep();
    return r.time;
}

bool Simulation::crashed(std::uint32_t i) const {
    const auto& f = faults_[i - 1];
    return f && f->kind == FaultKind::crash && now_ >= f->at_time;
}

void Simulation::on_activation(std::uint32_t node, std::uint64_t k) {
    if (correct(NodeId{node}) && k <= config_.num_instances) {
        while (universal_done_ < k) {
            ++universal_done_;
            for (std::uint32_t s = 0; s < config_.universal_txs; ++s) {
                auto tx = Transaction::from_payload(
                    text_bytes("u:" + std::to_string(universal_done_) + ":" + std::to_string(s)));
                universal_.push_back({tx.id, universal_done_, now_});
                submit_times_.try_emplace(tx.id, now_);
                for (auto& n : nodes_) n->inject_tx(tx);
            }
        }
    }
    for (std::uint32_t s = 0; s < config_.tx_load; ++s) {
        auto tx = Transaction::from_payload(
            text_bytes("tx:" + std::to_string(node) + ":" + std::to_string(k) + ":" + std::to_string(s)));
        submit_times_.try_emplace(tx.id, now_);
        nodes_[node - 1]->inject_tx(std::move(tx));
    }
}

bool Simulation::run() {
    now_ = 0;
    for (std::uint32_t i = 1; i <= config_.params.n; ++i) {
        const auto& f = faults_[i - 1];
        if (f && f->kind == FaultKind::silent) continue;
        if (crashed(i)) {
            crash_logged_[i - 1] = true;
            record(i, LocalEvent{EventKind::crash, 0, 0, 0, std::nullopt, {}});
            continue;
        }
        start_node(i);
    }
    while (!queue_.empty()) {
        Pending p = queue_.top();
        queue_.pop();
        if (p.time > config_.max_time) {
            timed_out_ = true;
            break;
        }
        now_ = p.time;
        deliver(p);
    }
    return !timed_out_;
}

void Simulation::start_node(std::uint32_t i) { emit(i, nodes_[i - 1]->start()); }

void Simulation::deliver(const Pending& p) {
    const auto& f = faults_[p.to - 1];
    if (f && f->kind == FaultKind::silent) return;
    if (crashed(p.to)) {
        if (!crash_logged_[p.to - 1]) {
            crash_logged_[p.to - 1] = true;
            record(p.to, LocalEvent{EventKind::crash, 0, 0, 0, std::nullopt, {}});
        }
        return;
    }
    ++delivered_;
    Envelope env = decode(p.wire);
    emit(p.to, nodes_[p.to - 1]->step(env));
}

void Simulation::emit(std::uint32_t from, NodeStep&& step) {
    for (auto& ev : step.events) record(from, std::move(ev));
    for (const auto& e : step.out) {
        if (config_.log_sends && correct(NodeId{from})) note_send(from, e);
        for (const auto& env : tamper(from, e)) send(env);
    }
}

void Simulation::note_send(std::uint32_t from, const Emission& e) {
    LocalEvent ev{EventKind::send, e.addr.acsq_id, e.addr.index.index, 0, std::nullopt, {}};
    if (auto bit = body_bit(e.body)) ev.value = *bit ? 1 : 0;
    if (auto* m = std::get_if<Propose>(&e.body)) ev.digest = m->block.digest;
    if (auto* m = std::get_if<Echo1>(&e.body)) ev.digest = m->partial.tagged_digest;
    if (auto* m = std::get_if<Echo2>(&e.body)) ev.digest = m->partial.tagged_digest;
    ev.detail = std::string(body_name(e.body)) + " to=" + (e.to ? std::to_string(e.to->index) : std::string("*"));
    record(from, std::move(ev));
}

std::vector<Envelope> Simulation::tamper(std::uint32_t from, const Emission& e) {
    std::vector<std::uint32_t> targets;
    if (e.to) {
        targets.push_back(e.to->index);
    } else {
        for (std::uint32_t i = 1; i <= config_.params.n; ++i) targets.push_back(i);
    }

    std::vector<Envelope> out;
    auto to_all = [&](const Body& body) {
        for (auto t : targets) out.push_back(Envelope{NodeId{from}, NodeId{t}, e.addr, body});
    };
    const auto& f = faults_[from - 1];
    const FaultKind kind = f ? f->kind : FaultKind::delay_target;
    const std::uint64_t k = e.addr.acsq_id;
    const bool own_gbc = e.addr.sub == SubProtocol::gbc && e.addr.index.index == from;

    if (kind == FaultKind::equivocate && own_gbc) {
        auto key = std::make_pair(from, k);
        auto alt = alternates_.find(key);
        if (alt == alternates_.end()) {
            const Block* original = nullptr;
            if (auto* m = std::get_if<Propose>(&e.body)) original = &m->block;
            const auto* inst = nodes_[from - 1]->instance(k);
            if (!original && inst && inst->gbc(NodeId{from}).received_block())
                original = &*inst->gbc(NodeId{from}).received_block();
            if (original) {
                auto txs = original->txs;
                txs.push_back(Transaction::from_payload(
                    text_bytes("equivocate:" + std::to_string(from) + ":" + std::to_string(k))));
                alt = alternates_.emplace(key, Equivocation{original->digest, make_block(NodeId{from}, k, std::move(txs))})
                          .first;
            }
        }
        if (alt != alternates_.end()) {
            if (std::holds_alternative<Propose>(e.body)) {
                for (auto t : targets) {
                    Body body = t % 2 == 0 ? Body{Propose{alt->second.alternate}} : e.body;
                    out.push_back(Envelope{NodeId{from}, NodeId{t}, e.addr, std::move(body)});
                }
                return out;
            }
            const auto signer = registry_.signer_for(NodeId{from});
            // Vote for both versions.
            for (const auto& d : {alt->second.original, alt->second.alternate.digest}) {
                const auto msg = gbc_vote_message(k, NodeId{from}, d);
                if (std::holds_alternative<Echo1>(e.body)) to_all(Echo1{signer.partial_sign(msg, kGrade1Tag)});
                if (std::holds_alternative<Echo2>(e.body)) to_all(Echo2{signer.partial_sign(msg, kGrade2Tag)});
            }
            if (!out.empty()) return out;
        }
    }

    if (kind == FaultKind::wrong_aaba_bit && e.addr.sub == SubProtocol::aaba) {
        Body body = e.body;
        if (auto* m = std::get_if<Amp>(&body)) {
            if (m->input.one) {
                m->input = AabaInput::zero();
            } else {
                const auto value = sha256(text_bytes("forged:" + std::to_string(k) + ":" +
                                                     std::to_string(e.addr.index.index)));
                const auto tagged = tagged_digest(gbc_vote_message(k, e.addr.index, value), kGrade1Tag);
                const auto signer = registry_.signer_for(NodeId{from});
                ThresholdSig proof{tagged, {signer.sign_tagged(tagged)}};
                m->input = AabaInput::one_of(value, proof);
            }
        } else if (auto* m = std::get_if<Sho1>(&body)) {
            m->bit = !m->bit;
        } else if (auto* m = std::get_if<Sho2>(&body)) {
            m->bit = !m->bit;
        } else if (auto* m = std::get_if<Bval>(&body)) {
            m->bit = !m->bit;
        } else if (auto* m = std::get_if<Aux>(&body)) {
            m->bit = !m->bit;
        }
        to_all(body);
        return out;
    }

    to_all(e.body);
    return out;
}

std::uint64_t Simulation::delay_for(const Envelope& env) {
    std::uint64_t d = 1;
    if (config_.mode != DelayMode::lockstep) {
        const auto span = config_.max_delay - config_.min_delay + 1;
        d = config_.min_delay + rng_() % span;
    }
    for (const auto& r : config_.rules) {
        if (r.matches(env)) return d + r.delay;
    }
    for (const auto& f : faults_) {
        if (!f || f->kind != FaultKind::delay_target) continue;
        for (auto r : f->rules) {
            if (!r.from) r.from = f->node.index;
            if (r.matches(env)) return d + r.delay;
        }
    }
    return d;
}

void Simulation::send(const Envelope& env) {
    if (auto* m = std::get_if<Amp>(&env.body); m && m->input.one) {
        const Certificate cert{m->input.value, kGrade1Tag, m->input.proof};
        auto key = std::make_tuple(env.from.index, env.addr.acsq_id, env.addr.index.index);
        if (!valid_one_seen_.contains(key) && verify_certificate(cert, env.addr.acsq_id, env.addr.index, registry_)) {
            valid_one_seen_.insert(key);
            record(env.from.index, LocalEvent{EventKind::valid_one, env.addr.acsq_id, env.addr.index.index, 1,
                                              m->input.value, {}});
        }
    }
    const auto when = now_ + delay_for(env);
    queue_.push(Pending{when, seq_++, env.to.index, encode(env)});
}

}  // namespace falcon
