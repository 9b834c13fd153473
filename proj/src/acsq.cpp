#include "falcon/acsq.hpp"

#include <algorithm>

#include "falcon/errors.hpp"

namespace falcon {

namespace {

InstanceAddr gbc_addr(std::uint64_t k, NodeId j) { return {k, SubProtocol::gbc, j}; }
InstanceAddr aaba_addr(std::uint64_t k, NodeId j) { return {k, SubProtocol::aaba, j}; }

const char* source_name(AabaOutputSource s) {
    switch (s) {
        case AabaOutputSource::shortcut: return "shortcut";
        case AabaOutputSource::stop: return "stop";
        case AabaOutputSource::aba: return "aba";
    }
    return "aba";
}

}  // namespace

AcsqInstance::AcsqInstance(std::uint64_t k, NodeId self, const KeyRegistry& registry, Signer signer,
                           const CommonCoin& coin, Mutations mutations)
    : k_(k), self_(self), registry_(&registry), signer_(std::move(signer)), coin_(&coin), mutations_(mutations) {
    const auto count = registry.params().n;
    gbcs_.reserve(count);
    for (std::uint32_t j = 1; j <= count; ++j) {
        GbcInstance::Options options;
        options.emitting = false;
        options.echo2_without_grade1 = mutations.echo2_without_grade1;
        gbcs_.emplace_back(gbc_addr(k, NodeId{j}), registry, signer_, options);
    }
    m1_.resize(count);
    m2_.resize(count);
    m_acs_.resize(count);
    decisions_.resize(count, IndexDecision::undecided);
}

LocalEvent AcsqInstance::event(EventKind kind, NodeId j, std::uint64_t value, std::optional<Digest> digest,
                               std::string detail) const {
    return LocalEvent{kind, k_, j.index, value, digest, std::move(detail)};
}

std::uint32_t AcsqInstance::included_count() const {
    return static_cast<std::uint32_t>(std::count(decisions_.begin(), decisions_.end(), IndexDecision::included));
}

const AabaInstance* AcsqInstance::aaba(NodeId j) const {
    auto it = aabas_.find(j.index);
    return it == aabas_.end() ? nullptr : &it->second;
}

AabaInstance* AcsqInstance::aaba_for(NodeId j) {
    if (aaba_released_.contains(j.index)) return nullptr;
    auto it = aabas_.find(j.index);
    if (it == aabas_.end()) {
        AabaInstance::Options options;
        options.skip_q_check = mutations_.skip_q_check;
        it = aabas_.try_emplace(j.index, aaba_addr(k_, j), *registry_, *coin_, options).first;
    }
    return &it->second;
}

AcsqStep AcsqInstance::activate(Block own) {
    if (activated_) throw ProtocolError(ProtocolErrorKind::already_started, "ACSQ instance already active");
    if (own.instance != k_ || own.creator != self_)
        throw ProtocolError(ProtocolErrorKind::wrong_instance, "own block belongs to another instance");
    AcsqStep out;
    activated_ = true;
    out.events.push_back(event(EventKind::activate, self_, own.txs.size(), own.digest));
    absorb_gbc(self_, gbcs_[self_.index - 1].start_broadcast(std::move(own)), out);
    for (std::uint32_t j = 1; j <= n(); ++j) absorb_gbc(NodeId{j}, gbcs_[j - 1].enable_emission(), out);
    advance(out);
    return out;
}

AcsqStep AcsqInstance::fire_trigger() {
    AcsqStep out;
    if (trigger_) return out;
    trigger_ = true;
    out.events.push_back(event(EventKind::trigger, self_, m2_count_));
    advance(out);
    return out;
}

AcsqStep AcsqInstance::handle(NodeId from, const InstanceAddr& addr, const Body& body) {
    AcsqStep out;
    const NodeId j = addr.index;
    if (addr.acsq_id != k_ || !valid_index(j) || !registry_->params().contains(from)) return out;

    if (addr.sub == SubProtocol::aaba) {
        if (m2_[j.index - 1]) {
            // Delivery assistance: answer AABA traffic with the grade-2 certificate, once per peer.
            if (from != self_ && assisted_peers_.insert({j.index, from.index}).second)
                out.out.push_back({from, gbc_addr(k_, j), Assist{*m2_[j.index - 1]}});
        } else if (auto* a = aaba_for(j)) {
            absorb_aaba(j, a->handle(from, body), out);
        }
    } else {
        auto& g = gbcs_[j.index - 1];
        if (auto* m = std::get_if<Propose>(&body)) {
            absorb_gbc(j, g.on_propose(from, m->block), out);
        } else if (auto* m = std::get_if<Echo1>(&body)) {
            absorb_gbc(j, g.on_echo1(from, m->partial), out);
        } else if (auto* m = std::get_if<Echo2>(&body)) {
            absorb_gbc(j, g.on_echo2(from, m->partial), out);
        } else if (auto* m = std::get_if<Assist>(&body)) {
            on_assist(j, m->delivery, out);
        } else if (auto* m = std::get_if<Query>(&body)) {
            on_query(j, from, *m, out);
        } else if (auto* m = std::get_if<QueryResp>(&body)) {
            on_query_resp(j, *m, out);
        }
    }
    advance(out);
    return out;
}

void AcsqInstance::absorb_gbc(NodeId j, GbcStep&& step, AcsqStep& out) {
    for (auto& o : step.out) out.out.push_back({o.to, gbc_addr(k_, j), std::move(o.body)});
    for (const auto& d : step.received) out.events.push_back(event(EventKind::block_received, j, 0, d));
    if (step.grade1) {
        out.events.push_back(event(EventKind::grade1, j, 1, step.grade1->block.digest));
        if (!m1_[j.index - 1]) m1_[j.index - 1] = std::move(step.grade1);
    }
    if (step.grade2) {
        out.events.push_back(event(EventKind::grade2, j, 2, step.grade2->block.digest));
        on_grade2(j, *step.grade2, false, out);
    }
}

void AcsqInstance::absorb_aaba(NodeId j, AabaStep&& step, AcsqStep& out) {
    for (auto& o : step.out) out.out.push_back({o.to, aaba_addr(k_, j), std::move(o.body)});
    if (step.output) {
        out.events.push_back(event(EventKind::aaba_output, j, *step.output ? 1 : 0, std::nullopt,
                                   source_name(step.source)));
        on_aaba_output(j, *step.output, out);
    }
    if (step.exited) out.events.push_back(event(EventKind::aaba_exit, j));
}

void AcsqInstance::on_grade2(NodeId j, const GradedDelivery& gd, bool assisted, AcsqStep& out) {
    auto& slot = m2_[j.index - 1];
    if (slot) return;
    slot = gd;
    ++m2_count_;
    if (assisted) out.events.push_back(event(EventKind::assisted, j, 2, gd.block.digest));
    include(j, gd.block, out);
    // A grade-2 certificate settles the index; stop participating in its AABA (delivery assistance).
    if (auto it = aabas_.find(j.index); it != aabas_.end() && !it->second.halted() && !it->second.exited()) {
        it->second.halt();
        out.events.push_back(event(EventKind::aaba_halt, j));
    }
    if (s_a_.contains(j.index)) resolved_.insert(j.index);
}

void AcsqInstance::on_aaba_output(NodeId j, bool bit, AcsqStep& out) {
    if (!s_a_.contains(j.index)) return;
    if (!bit) {
        exclude(j, out);
        resolved_.insert(j.index);
        return;
    }
    if (decisions_[j.index - 1] == IndexDecision::included)
        resolved_.insert(j.index);
    else
        pending_inclusion_.insert(j.index);
}

void AcsqInstance::on_assist(NodeId j, const GradedDelivery& gd, AcsqStep& out) {
    if (gd.grade != kGrade2Tag || gd.block.creator != j || gd.block.instance != k_) return;
    if (!verify_delivery(gd, *registry_)) return;
    absorb_gbc(j, gbcs_[j.index - 1].adopt_body(gd.block), out);
    on_grade2(j, gd, true, out);
}

std::optional<Certificate> AcsqInstance::best_certificate(NodeId j) const {
    if (const auto& gd = m2_[j.index - 1]) return Certificate{gd->block.digest, gd->grade, gd->proof};
    if (const auto& gd = m1_[j.index - 1]) return Certificate{gd->block.digest, gd->grade, gd->proof};
    if (auto it = aabas_.find(j.index); it != aabas_.end() && it->second.known_certificate())
        return it->second.known_certificate();
    if (auto it = learned_.find(j.index); it != learned_.end()) return it->second;
    return std::nullopt;
}

bool AcsqInstance::answer_query(NodeId j, NodeId peer, QueryPeer& state, AcsqStep& out) {
    const auto& g = gbcs_[j.index - 1];
    auto cert = best_certificate(j);
    const Block* body = nullptr;
    if (cert) body = g.body(cert->value);
    if (!body && state.wanted) body = g.body(*state.wanted);
    if (!body && g.received_block()) body = &*g.received_block();

    QueryResp resp;
    if (body && !state.bodies_sent.contains(body->digest)) {
        state.bodies_sent.insert(body->digest);
        resp.block = *body;
    }
    if (cert && !state.cert_sent) {
        state.cert_sent = true;
        resp.cert = cert;
    }
    if (resp.block || resp.cert) out.out.push_back({peer, gbc_addr(k_, j), std::move(resp)});
    return cert && state.cert_sent && state.bodies_sent.contains(cert->value);
}

void AcsqInstance::on_query(NodeId j, NodeId from, const Query& q, AcsqStep& out) {
    auto& state = query_peers_[j.index][from];
    if (q.digest) state.wanted = q.digest;
    if (answer_query(j, from, state, out)) query_peers_[j.index].erase(from);
}

void AcsqInstance::on_query_resp(NodeId j, const QueryResp& resp, AcsqStep& out) {
    if (resp.cert && !learned_.contains(j.index) && verify_certificate(*resp.cert, k_, j, *registry_))
        learned_[j.index] = *resp.cert;
    if (resp.block) absorb_gbc(j, gbcs_[j.index - 1].adopt_body(*resp.block), out);
}

void AcsqInstance::include(NodeId j, const Block& block, AcsqStep& out) {
    auto& d = decisions_[j.index - 1];
    if (d == IndexDecision::excluded) {
        out.events.push_back(event(EventKind::conflict, j, 1, block.digest, "include-after-exclude"));
        return;
    }
    if (d == IndexDecision::included) return;
    d = IndexDecision::included;
    m_acs_[j.index - 1] = block;
    out.events.push_back(event(EventKind::included, j, 1, block.digest));
}

void AcsqInstance::exclude(NodeId j, AcsqStep& out) {
    auto& d = decisions_[j.index - 1];
    if (d == IndexDecision::included) {
        out.events.push_back(event(EventKind::conflict, j, 0, std::nullopt, "exclude-after-include"));
        return;
    }
    if (d == IndexDecision::excluded) return;
    d = IndexDecision::excluded;
    s_ex_.insert(j.index);
    out.events.push_back(event(EventKind::excluded, j));
}

void AcsqInstance::enter_agreement(AcsqStep& out) {
    agreement_started_ = true;
    for (auto& g : gbcs_) g.mute();
    out.events.push_back(event(EventKind::agreement_start, self_, n() - m2_count_));
    for (std::uint32_t idx = 1; idx <= n(); ++idx) {
        const NodeId j{idx};
        if (m2_[idx - 1]) continue;
        s_a_.insert(idx);
        AabaInput input = AabaInput::zero();
        if (const auto& gd = m1_[idx - 1]) input = AabaInput::one_of(gd->block.digest, gd->proof);
        out.events.push_back(event(EventKind::aaba_input, j, input.one ? 1 : 0));
        if (auto* a = aaba_for(j)) absorb_aaba(j, a->input(input), out);
    }
}

void AcsqInstance::advance(AcsqStep& out) {
    if (activated_ && !broadcast_done_) {
        if (m2_count_ == n()) {
            broadcast_done_ = true;
        } else if (trigger_ && m2_count_ >= registry_->params().quorum()) {
            broadcast_done_ = true;
            enter_agreement(out);
        }
    }

    for (auto it = pending_inclusion_.begin(); it != pending_inclusion_.end();) {
        const NodeId j{*it};
        if (decisions_[j.index - 1] == IndexDecision::included) {
            resolved_.insert(j.index);
            it = pending_inclusion_.erase(it);
            continue;
        }
        auto cert = best_certificate(j);
        if (cert) {
            if (const Block* body = gbcs_[j.index - 1].body(cert->value)) {
                include(j, *body, out);
                resolved_.insert(j.index);
                it = pending_inclusion_.erase(it);
                continue;
            }
        }
        if (query_sent_.insert(j.index).second) {
            std::optional<Digest> wanted;
            if (cert) wanted = cert->value;
            out.out.push_back({std::nullopt, gbc_addr(k_, j), Query{wanted}});
            out.events.push_back(event(EventKind::query_sent, j));
        }
        ++it;
    }

    for (auto& [idx, peers] : query_peers_) {
        for (auto it = peers.begin(); it != peers.end();) {
            if (answer_query(NodeId{idx}, it->first, it->second, out))
                it = peers.erase(it);
            else
                ++it;
        }
    }

    if (activated_ && broadcast_done_ && !returned_ &&
        std::includes(resolved_.begin(), resolved_.end(), s_a_.begin(), s_a_.end())) {
        returned_ = true;
        out.events.push_back(event(EventKind::returned, self_, included_count()));
    }
}

void AcsqInstance::compact() {
    for (auto& g : gbcs_) g.compact();
    for (auto it = aabas_.begin(); it != aabas_.end();) {
        if (it->second.terminal()) {
            if (it->second.known_certificate() && !learned_.contains(it->first))
                learned_[it->first] = *it->second.known_certificate();
            aaba_released_.insert(it->first);
            it = aabas_.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace falcon
