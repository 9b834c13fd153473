#include "falcon/aaba.hpp"

#include "falcon/errors.hpp"
#include "falcon/gbc.hpp"

namespace falcon {

AabaInstance::AabaInstance(InstanceAddr addr, const KeyRegistry& registry, const CommonCoin& coin, Options options)
    : addr_(addr), registry_(&registry), options_(options), inner_(addr, registry.params(), coin) {}

bool AabaInstance::q_valid(const AabaInput& input) const {
    if (!input.one) return false;
    return verify_certificate(Certificate{input.value, kGrade1Tag, input.proof}, addr_.acsq_id, addr_.index,
                              *registry_);
}

AabaStep AabaInstance::input(const AabaInput& input) {
    if (input_) throw ProtocolError(ProtocolErrorKind::double_input, "AABA already has an input");
    if (input.one && !q_valid(input))
        throw ProtocolError(ProtocolErrorKind::invalid_one_input, "input 1 without a valid grade-1 proof");
    AabaStep step;
    input_ = input;
    if (input.one && !certificate_) certificate_ = Certificate{input.value, kGrade1Tag, input.proof};
    if (halted_) return step;
    step.out.push_back({std::nullopt, Amp{input}});
    progress(step);
    return step;
}

AabaStep AabaInstance::on_amp(NodeId from, const AabaInput& input) {
    AabaStep step;
    if (exited_ || halted_ || amp_counted_.contains(from)) return step;
    if (input.one) {
        if (!options_.skip_q_check && !q_valid(input)) return step;
        amp_counted_.insert(from);
        valid_one_seen_ = true;
        if (!certificate_) certificate_ = Certificate{input.value, kGrade1Tag, input.proof};
    } else {
        amp_counted_.insert(from);
        zero_from_.insert(from);
    }
    progress(step);
    return step;
}

AabaStep AabaInstance::on_sho1(NodeId from, bool bit) {
    AabaStep step;
    if (exited_ || halted_ || !sho1_from_[bit].insert(from).second) return step;
    progress(step);
    return step;
}

AabaStep AabaInstance::on_sho2(NodeId from, bool bit) {
    AabaStep step;
    if (exited_ || halted_ || !sho2_from_.try_emplace(from, bit).second) return step;
    progress(step);
    return step;
}

AabaStep AabaInstance::on_stop(NodeId from) {
    AabaStep step;
    if (exited_ || halted_ || !stop_from_.insert(from).second) return step;
    progress(step);
    return step;
}

AabaStep AabaInstance::on_bval(NodeId from, std::uint32_t round, bool bit) {
    AabaStep step;
    if (exited_ || halted_) return step;
    absorb(inner_.on_bval(from, round, bit), step);
    return step;
}

AabaStep AabaInstance::on_aux(NodeId from, std::uint32_t round, bool bit) {
    AabaStep step;
    if (exited_ || halted_) return step;
    absorb(inner_.on_aux(from, round, bit), step);
    return step;
}

AabaStep AabaInstance::handle(NodeId from, const Body& body) {
    if (auto* m = std::get_if<Amp>(&body)) return on_amp(from, m->input);
    if (auto* m = std::get_if<Sho1>(&body)) return on_sho1(from, m->bit);
    if (auto* m = std::get_if<Sho2>(&body)) return on_sho2(from, m->bit);
    if (std::holds_alternative<Stop>(body)) return on_stop(from);
    if (auto* m = std::get_if<Bval>(&body)) return on_bval(from, m->round, m->bit);
    if (auto* m = std::get_if<Aux>(&body)) return on_aux(from, m->round, m->bit);
    return {};
}

void AabaInstance::halt() {
    halted_ = true;
    inner_.halt();
}

void AabaInstance::set_output(bool bit, AabaOutputSource source, AabaStep& step) {
    if (output_) return;
    output_ = bit;
    step.output = bit;
    step.source = source;
}

void AabaInstance::absorb(AbaStep&& inner, AabaStep& step) {
    for (auto& o : inner.out) step.out.push_back(std::move(o));
    if (inner.decided) set_output(*inner.decided, AabaOutputSource::aba, step);
}

void AabaInstance::progress(AabaStep& step) {
    if (!active()) return;
    const auto n_minus_f = registry_->params().quorum();
    const auto f_plus_1 = registry_->params().small_quorum();

    auto send_sho1 = [&](bool bit) {
        if (sho1_sent_.insert(bit).second) step.out.push_back({std::nullopt, Sho1{bit}});
    };

    // Amplification.
    if (valid_one_seen_ && sho1_sent_.empty()) send_sho1(true);
    if (zero_from_.size() >= n_minus_f && sho1_sent_.empty()) send_sho1(false);

    // Shortcut, first step.
    for (bool b : {false, true}) {
        if (sho1_from_[b].size() >= f_plus_1) send_sho1(b);
    }
    for (bool b : {false, true}) {
        if (sho1_from_[b].size() >= n_minus_f && !s_[b]) {
            s_[b] = true;
            if (!sho2_sent_) {
                sho2_sent_ = true;
                step.out.push_back({std::nullopt, Sho2{b}});
            }
        }
    }

    // Shortcut, second step. Membership in S is re-checked on every event.
    if (!sho2_quorum_done_) {
        std::uint32_t accepted = 0;
        std::uint32_t zeros = 0;
        for (const auto& [sender, bit] : sho2_from_) {
            if (!s_[bit]) continue;
            ++accepted;
            if (!bit) ++zeros;
        }
        if (accepted >= n_minus_f) {
            sho2_quorum_done_ = true;
            if (zeros >= n_minus_f) {
                set_output(false, AabaOutputSource::shortcut, step);
                if (!stop_sent_) {
                    stop_sent_ = true;
                    step.out.push_back({std::nullopt, Stop{}});
                }
            }
            bool aba_bit = zeros == 0;
            step.aba_input = aba_bit;
            absorb(inner_.input(aba_bit), step);
        }
    }

    // Early stopping.
    if (stop_from_.size() >= f_plus_1) {
        if (!stop_sent_) {
            stop_sent_ = true;
            step.out.push_back({std::nullopt, Stop{}});
        }
        set_output(false, AabaOutputSource::stop, step);
    }
    if (stop_from_.size() >= n_minus_f) {
        exited_ = true;
        inner_.halt();
        step.exited = true;
    }
}

}  // namespace falcon
