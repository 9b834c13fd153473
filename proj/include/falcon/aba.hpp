#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <optional>

#include "falcon/crypto.hpp"
#include "falcon/messages.hpp"

namespace falcon {

struct AbaStep {
    Outbox out;
    std::optional<bool> decided;  // set on the step that decides
};

/// Signature-free binary agreement in the MMR style: per-round BV-broadcast
/// (relay at f + 1, accept into bin_values at n - f), one AUX per round, and a
/// common coin. Messages for future rounds are counted as they arrive.
///
/// A node that decided keeps participating until it completes the next round
/// whose coin equals its decision; every correct node decides by then.
class AbaInstance {
public:
    AbaInstance(InstanceAddr addr, SystemParams params, const CommonCoin& coin);

    /// Throws ProtocolError on a second input.
    AbaStep input(bool bit);
    AbaStep on_bval(NodeId from, std::uint32_t round, bool bit);
    AbaStep on_aux(NodeId from, std::uint32_t round, bool bit);
    /// Stops all further processing and emission. A decision already made is kept.
    void halt() { halted_ = true; }

    bool has_input() const { return estimate_.has_value(); }
    std::uint32_t round() const { return round_; }
    std::optional<bool> decided() const { return decided_; }
    std::uint32_t decided_round() const { return decided_round_; }
    bool halted() const { return halted_; }
    /// True once the node stopped participating after deciding.
    bool finished() const { return finished_; }
    /// Values accepted into bin_values for a round, as {has0, has1}.
    std::array<bool, 2> bin_values(std::uint32_t round) const;

private:
    struct RoundState {
        std::array<std::set<NodeId>, 2> bval_from;
        std::array<bool, 2> bval_sent{false, false};
        std::array<bool, 2> bin{false, false};
        std::optional<bool> first_bin;
        std::map<NodeId, bool> aux_from;
        bool aux_sent = false;
    };

    bool active() const { return estimate_.has_value() && !halted_ && !finished_; }
    void progress(AbaStep& step);
    void send_bval(std::uint32_t round, bool bit, AbaStep& step);

    InstanceAddr addr_;
    SystemParams params_;
    const CommonCoin* coin_;

    std::map<std::uint32_t, RoundState> rounds_;
    std::optional<bool> estimate_;
    std::uint32_t round_ = 1;
    std::optional<bool> decided_;
    std::uint32_t decided_round_ = 0;
    bool halted_ = false;
    bool finished_ = false;
};

}  // namespace falcon
