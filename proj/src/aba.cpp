#include "falcon/aba.hpp"

#include "falcon/errors.hpp"

namespace falcon {

AbaInstance::AbaInstance(InstanceAddr addr, SystemParams params, const CommonCoin& coin)
    : addr_(addr), params_(params), coin_(&coin) {}

std::array<bool, 2> AbaInstance::bin_values(std::uint32_t round) const {
    auto it = rounds_.find(round);
    return it == rounds_.end() ? std::array<bool, 2>{false, false} : it->second.bin;
}

AbaStep AbaInstance::input(bool bit) {
    if (estimate_) throw ProtocolError(ProtocolErrorKind::double_input, "ABA already has an input");
    AbaStep step;
    estimate_ = bit;
    if (halted_) return step;
    send_bval(round_, bit, step);
    progress(step);
    return step;
}

AbaStep AbaInstance::on_bval(NodeId from, std::uint32_t round, bool bit) {
    AbaStep step;
    if (halted_ || finished_ || round == 0 || !params_.contains(from)) return step;
    if (!rounds_[round].bval_from[bit].insert(from).second) return step;
    progress(step);
    return step;
}

AbaStep AbaInstance::on_aux(NodeId from, std::uint32_t round, bool bit) {
    AbaStep step;
    if (halted_ || finished_ || round == 0 || !params_.contains(from)) return step;
    if (!rounds_[round].aux_from.try_emplace(from, bit).second) return step;
    progress(step);
    return step;
}

void AbaInstance::send_bval(std::uint32_t round, bool bit, AbaStep& step) {
    auto& rs = rounds_[round];
    if (rs.bval_sent[bit]) return;
    rs.bval_sent[bit] = true;
    step.out.push_back({std::nullopt, Bval{round, bit}});
}

void AbaInstance::progress(AbaStep& step) {
    if (!active()) return;

    for (auto& [r, rs] : rounds_) {
        for (int b = 0; b < 2; ++b) {
            auto support = rs.bval_from[b].size();
            if (support >= params_.small_quorum() && !rs.bval_sent[b]) {
                rs.bval_sent[b] = true;
                step.out.push_back({std::nullopt, Bval{r, b == 1}});
            }
            if (support >= params_.quorum() && !rs.bin[b]) {
                rs.bin[b] = true;
                if (!rs.first_bin) rs.first_bin = (b == 1);
            }
        }
    }

    while (true) {
        auto& rs = rounds_[round_];
        if (!rs.aux_sent) {
            if (!rs.first_bin) return;
            rs.aux_sent = true;
            step.out.push_back({std::nullopt, Aux{round_, *rs.first_bin}});
        }

        std::size_t accepted = 0;
        std::array<bool, 2> vals{false, false};
        for (const auto& [sender, bit] : rs.aux_from) {
            if (rs.bin[bit]) {
                ++accepted;
                vals[bit] = true;
            }
        }
        if (accepted < params_.quorum()) return;

        bool c = coin_->flip(addr_, round_);
        if (vals[0] != vals[1]) {
            bool v = vals[1];
            estimate_ = v;
            if (v == c) {
                if (!decided_) {
                    decided_ = v;
                    decided_round_ = round_;
                    step.decided = v;
                } else if (round_ > decided_round_) {
                    finished_ = true;
                    return;
                }
            }
        } else {
            estimate_ = c;
        }
        ++round_;
        send_bval(round_, *estimate_, step);
    }
}

}  // namespace falcon
