#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "falcon/aba.hpp"
#include "falcon/crypto.hpp"
#include "falcon/messages.hpp"

namespace falcon {

enum class AabaOutputSource { shortcut, stop, aba };

struct AabaStep {
    Outbox out;
    std::optional<bool> output;
    AabaOutputSource source = AabaOutputSource::aba;
    /// Set on the step that fed the inner ABA, with the bit it received.
    std::optional<bool> aba_input;
    bool exited = false;
};

/// Asymmetrical binary agreement for GBC(j) of one ACSQ instance.
///
/// Input 0 is free; input 1 must carry a grade-1 certificate for the block
/// digest. An amplification round (AMP) and a two-step shortcut (SHO1, SHO2)
/// run before the inner ABA; all-zero SHO2 quorums output 0 immediately and
/// start the STOP exchange that lets nodes leave without finishing the ABA.
///
/// Messages are counted from the moment they arrive. Nothing is sent until the
/// local input is given, and every rule is re-evaluated on every event.
class AabaInstance {
public:
    struct Options {
        /// Mutation switch: accept AMP(1) without checking its certificate.
        bool skip_q_check = false;
    };

    AabaInstance(InstanceAddr addr, const KeyRegistry& registry, const CommonCoin& coin, Options options);

    /// Throws ProtocolError on a second input or an input 1 whose certificate fails Q.
    AabaStep input(const AabaInput& input);

    AabaStep on_amp(NodeId from, const AabaInput& input);
    AabaStep on_sho1(NodeId from, bool bit);
    AabaStep on_sho2(NodeId from, bool bit);
    AabaStep on_stop(NodeId from);
    AabaStep on_bval(NodeId from, std::uint32_t round, bool bit);
    AabaStep on_aux(NodeId from, std::uint32_t round, bool bit);
    /// Routes any AABA-addressed body to the matching handler.
    AabaStep handle(NodeId from, const Body& body);

    /// Stop participating (delivery assistance). Halts the inner ABA too.
    void halt();

    /// Q(v, sigma): sigma is a grade-1 proof for v in this GBC instance.
    bool q_valid(const AabaInput& input) const;

    const InstanceAddr& addr() const { return addr_; }
    bool has_input() const { return input_.has_value(); }
    const std::optional<AabaInput>& input_value() const { return input_; }
    std::optional<bool> output() const { return output_; }
    bool exited() const { return exited_; }
    bool halted() const { return halted_; }
    bool terminal() const { return exited_ || halted_ || inner_.finished(); }
    std::uint32_t cnt0() const { return static_cast<std::uint32_t>(zero_from_.size()); }
    const std::set<bool>& sho1_sent() const { return sho1_sent_; }
    bool sho2_sent() const { return sho2_sent_; }
    bool stop_sent() const { return stop_sent_; }
    std::array<bool, 2> accepted_bits() const { return s_; }
    const AbaInstance& inner() const { return inner_; }
    /// A Q-valid <1, v, sigma> seen in any AMP, or the local one.
    const std::optional<Certificate>& known_certificate() const { return certificate_; }

private:
    bool active() const { return input_.has_value() && !exited_ && !halted_; }
    void progress(AabaStep& step);
    void absorb(AbaStep&& inner, AabaStep& step);
    void set_output(bool bit, AabaOutputSource source, AabaStep& step);

    InstanceAddr addr_;
    const KeyRegistry* registry_;
    Options options_;
    AbaInstance inner_;

    std::optional<AabaInput> input_;
    std::set<NodeId> amp_counted_;
    std::set<NodeId> zero_from_;
    bool valid_one_seen_ = false;
    std::optional<Certificate> certificate_;

    std::array<std::set<NodeId>, 2> sho1_from_;
    std::set<bool> sho1_sent_;
    std::array<bool, 2> s_{false, false};
    std::map<NodeId, bool> sho2_from_;
    bool sho2_sent_ = false;
    bool sho2_quorum_done_ = false;

    std::set<NodeId> stop_from_;
    bool stop_sent_ = false;

    std::optional<bool> output_;
    bool exited_ = false;
    bool halted_ = false;
};

}  // namespace falcon
