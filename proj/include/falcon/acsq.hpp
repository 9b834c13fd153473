#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "falcon/aaba.hpp"
#include "falcon/event_log.hpp"
#include "falcon/gbc.hpp"
#include "falcon/messages.hpp"

namespace falcon {

/// Switches that deliberately break one protocol rule. Used only to show that
/// the invariant checks notice.
struct Mutations {
    bool echo2_without_grade1 = false;
    bool skip_q_check = false;
    bool no_instance_gate = false;

    bool any() const { return echo2_without_grade1 || skip_q_check || no_instance_gate; }
};

struct AcsqStep {
    std::vector<Emission> out;
    std::vector<LocalEvent> events;
};

enum class IndexDecision : std::uint8_t { undecided, included, excluded };

/// One ACSQ instance at one node: n graded broadcasts, the agreement stage
/// over AABA instances for indices without a grade-2 delivery, delivery
/// assistance, and block recovery by query.
///
/// An instance created before local activation is passive: it collects and
/// delivers but sends no echoes until `activate`.
class AcsqInstance {
public:
    AcsqInstance(std::uint64_t k, NodeId self, const KeyRegistry& registry, Signer signer, const CommonCoin& coin,
                 Mutations mutations);

    /// Starts GBC(self) with `own`. Throws ProtocolError if already active or `own` is not for this instance.
    AcsqStep activate(Block own);
    AcsqStep handle(NodeId from, const InstanceAddr& addr, const Body& body);
    AcsqStep fire_trigger();

    std::uint64_t id() const { return k_; }
    bool activated() const { return activated_; }
    bool trigger_active() const { return trigger_; }
    bool agreement_started() const { return agreement_started_; }
    bool returned() const { return returned_; }

    std::uint32_t m2_count() const { return m2_count_; }
    const std::optional<GradedDelivery>& m1(NodeId j) const { return m1_.at(j.index - 1); }
    const std::optional<GradedDelivery>& m2(NodeId j) const { return m2_.at(j.index - 1); }
    /// Included blocks, slot i holds index i + 1.
    const std::vector<std::optional<Block>>& m_acs() const { return m_acs_; }
    const std::set<std::uint32_t>& excluded() const { return s_ex_; }
    const std::set<std::uint32_t>& agreement_set() const { return s_a_; }
    IndexDecision decision(NodeId j) const { return decisions_.at(j.index - 1); }
    bool decided(std::uint32_t index) const { return decisions_.at(index - 1) != IndexDecision::undecided; }
    std::uint32_t included_count() const;

    const GbcInstance& gbc(NodeId j) const { return gbcs_.at(j.index - 1); }
    const AabaInstance* aaba(NodeId j) const;

    /// Releases echo pools and finished AABA state. Recovery answers keep working.
    void compact();

private:
    struct QueryPeer {
        std::optional<Digest> wanted;
        std::set<Digest> bodies_sent;
        bool cert_sent = false;
    };

    std::uint32_t n() const { return registry_->params().n; }
    bool valid_index(NodeId j) const { return j.index >= 1 && j.index <= n(); }
    AabaInstance* aaba_for(NodeId j);

    void absorb_gbc(NodeId j, GbcStep&& step, AcsqStep& out);
    void absorb_aaba(NodeId j, AabaStep&& step, AcsqStep& out);
    void on_grade2(NodeId j, const GradedDelivery& gd, bool assisted, AcsqStep& out);
    void on_aaba_output(NodeId j, bool bit, AcsqStep& out);
    void on_assist(NodeId j, const GradedDelivery& gd, AcsqStep& out);
    void on_query(NodeId j, NodeId from, const Query& q, AcsqStep& out);
    void on_query_resp(NodeId j, const QueryResp& resp, AcsqStep& out);
    void include(NodeId j, const Block& block, AcsqStep& out);
    void exclude(NodeId j, AcsqStep& out);
    void enter_agreement(AcsqStep& out);
    void advance(AcsqStep& out);
    bool answer_query(NodeId j, NodeId peer, QueryPeer& state, AcsqStep& out);
    std::optional<Certificate> best_certificate(NodeId j) const;
    LocalEvent event(EventKind kind, NodeId j, std::uint64_t value = 0, std::optional<Digest> digest = std::nullopt,
                     std::string detail = {}) const;

    std::uint64_t k_;
    NodeId self_;
    const KeyRegistry* registry_;
    Signer signer_;
    const CommonCoin* coin_;
    Mutations mutations_;

    std::vector<GbcInstance> gbcs_;
    std::map<std::uint32_t, AabaInstance> aabas_;
    std::set<std::uint32_t> aaba_released_;

    std::vector<std::optional<GradedDelivery>> m1_;
    std::vector<std::optional<GradedDelivery>> m2_;
    std::vector<std::optional<Block>> m_acs_;
    std::vector<IndexDecision> decisions_;
    std::uint32_t m2_count_ = 0;
    std::set<std::uint32_t> s_a_;
    std::set<std::uint32_t> s_ex_;
    std::set<std::uint32_t> resolved_;
    std::set<std::uint32_t> pending_inclusion_;
    std::set<std::uint32_t> query_sent_;
    std::map<std::uint32_t, Certificate> learned_;
    std::set<std::pair<std::uint32_t, std::uint32_t>> assisted_peers_;
    std::map<std::uint32_t, std::map<NodeId, QueryPeer>> query_peers_;

    bool activated_ = false;
    bool trigger_ = false;
    bool broadcast_done_ = false;
    bool agreement_started_ = false;
    bool returned_ = false;
};

}  // namespace falcon
