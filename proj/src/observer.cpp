#include "falcon/observer.hpp"

#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace falcon {

namespace {

using Key = std::pair<std::uint64_t, std::uint32_t>;  // (instance, index)

std::string at(std::uint64_t k, std::uint32_t j) { return "k=" + std::to_string(k) + " j=" + std::to_string(j); }

class Checker {
public:
    explicit Checker(const Simulation& sim) : sim_(sim), params_(sim.config().params) {
        for (auto id : sim.correct_nodes()) correct_.insert(id.index);
    }

    std::vector<Violation> run() {
        if (sim_.timed_out()) fail("termination", "run hit max_time with messages still queued");
        chains();
        acs();
        gbc();
        aaba();
        commits();
        echoes();
        liveness();
        optimistic();
        return out_;
    }

private:
    void fail(std::string check, std::string detail) { out_.push_back({std::move(check), std::move(detail)}); }
    bool correct(std::uint32_t node) const { return correct_.contains(node); }
    bool checked(std::uint64_t k) const { return k >= 1 && k <= sim_.config().num_instances; }

    void chains() {
        std::vector<const Chain*> cs;
        for (auto i : correct_) cs.push_back(&sim_.node(NodeId{i}).chain());
        for (auto& v : check_chain_safety(cs)) out_.push_back(std::move(v));
    }

    void acs() {
        const auto n = params_.n;
        for (std::uint64_t k = 1; k <= sim_.config().num_instances; ++k) {
            std::optional<std::vector<std::optional<Digest>>> reference;
            for (auto i : correct_) {
                const auto* inst = sim_.node(NodeId{i}).instance(k);
                if (!inst || !inst->returned()) {
                    fail("totality", "node " + std::to_string(i) + " did not return instance " + std::to_string(k));
                    continue;
                }
                if (!sim_.node(NodeId{i}).sorter().finished(k))
                    fail("totality", "node " + std::to_string(i) + " did not sort instance " + std::to_string(k));
                if (inst->included_count() < params_.quorum())
                    fail("validity", "node " + std::to_string(i) + " k=" + std::to_string(k) + " |ACS|=" +
                                         std::to_string(inst->included_count()));
                std::vector<std::optional<Digest>> set(n);
                for (std::uint32_t j = 0; j < n; ++j) {
                    if (inst->m_acs()[j]) set[j] = inst->m_acs()[j]->digest;
                }
                if (!reference) {
                    reference = set;
                } else if (*reference != set) {
                    fail("acs_agreement", "node " + std::to_string(i) + " disagrees on instance " + std::to_string(k));
                }
            }
        }
        for (const auto& r : sim_.log().records()) {
            if (r.kind == EventKind::conflict && correct(r.node))
                fail("acs_agreement", "node " + std::to_string(r.node) + " conflicting decision " +
                                          at(r.instance, r.index) + " " + r.detail);
        }
    }

    void gbc() {
        const auto f1 = params_.small_quorum();
        std::map<Key, Digest> delivered;
        // Per (k, j, digest): correct nodes that received / grade-1 delivered so far.
        std::map<std::tuple<std::uint64_t, std::uint32_t, Digest>, std::set<std::uint32_t>> received, graded1;
        for (const auto& r : sim_.log().records()) {
            if (!correct(r.node) || !r.digest) continue;
            const Key key{r.instance, r.index};
            const auto tk = std::make_tuple(r.instance, r.index, *r.digest);
            switch (r.kind) {
                case EventKind::block_received:
                    received[tk].insert(r.node);
                    break;
                case EventKind::grade1:
                case EventKind::grade2: {
                    auto [it, fresh] = delivered.try_emplace(key, *r.digest);
                    if (!fresh && it->second != *r.digest)
                        fail("gbc_consistency", "two digests delivered at " + at(r.instance, r.index));
                    if (r.kind == EventKind::grade1) {
                        if (received[tk].size() < f1)
                            fail("gbc_receipt_correlation", "node " + std::to_string(r.node) + " grade-1 at " +
                                                                at(r.instance, r.index) + " with " +
                                                                std::to_string(received[tk].size()) + " holders");
                        graded1[tk].insert(r.node);
                    } else if (graded1[tk].size() < f1) {
                        fail("gbc_delivery_correlation", "node " + std::to_string(r.node) + " grade-2 at " +
                                                             at(r.instance, r.index) + " with " +
                                                             std::to_string(graded1[tk].size()) + " grade-1");
                    }
                    break;
                }
                default:
                    break;
            }
        }
    }

    void aaba() {
        std::map<Key, std::map<std::uint32_t, bool>> outputs;
        std::map<Key, std::uint32_t> ones_in;
        std::map<Key, std::set<std::uint32_t>> inputs, settled;
        std::set<Key> valid_one;
        for (const auto& r : sim_.log().records()) {
            const Key key{r.instance, r.index};
            if (r.kind == EventKind::valid_one) valid_one.insert(key);
            if (!correct(r.node)) continue;
            switch (r.kind) {
                case EventKind::aaba_input:
                    inputs[key].insert(r.node);
                    if (r.value == 1) ++ones_in[key];
                    break;
                case EventKind::aaba_output:
                    outputs[key][r.node] = r.value == 1;
                    settled[key].insert(r.node);
                    break;
                case EventKind::aaba_halt:
                    settled[key].insert(r.node);
                    break;
                default:
                    break;
            }
        }
        for (const auto& [key, per_node] : outputs) {
            if (!checked(key.first)) continue;
            std::set<bool> bits;
            for (const auto& [node, bit] : per_node) bits.insert(bit);
            if (bits.size() > 1) fail("aaba_agreement", "mixed outputs at " + at(key.first, key.second));
            if (bits.contains(true) && !valid_one.contains(key))
                fail("aaba_one_validity", "output 1 without a valid ONE input at " + at(key.first, key.second));
            if (ones_in[key] >= params_.small_quorum() && bits.contains(false))
                fail("aaba_biased_validity", "output 0 despite f+1 ONE inputs at " + at(key.first, key.second));
        }
        for (const auto& [key, nodes] : inputs) {
            if (!checked(key.first)) continue;
            for (auto node : nodes) {
                if (!settled[key].contains(node))
                    fail("aaba_termination", "node " + std::to_string(node) + " never finished AABA at " +
                                                 at(key.first, key.second));
            }
        }
    }

    void commits() {
        std::map<std::uint32_t, Key> last;
        for (const auto& r : sim_.log().records()) {
            if (r.kind != EventKind::commit || !correct(r.node)) continue;
            const Key key{r.instance, r.index};
            auto it = last.find(r.node);
            if (it != last.end() && !(it->second < key))
                fail("commit_order", "node " + std::to_string(r.node) + " committed " + at(key.first, key.second) +
                                         " after " + at(it->second.first, it->second.second));
            last[r.node] = key;
        }
    }

    void echoes() {
        std::map<std::tuple<std::uint32_t, std::uint64_t, std::uint32_t, std::string>, int> count;
        for (const auto& r : sim_.log().records()) {
            if (r.kind != EventKind::send || !correct(r.node)) continue;
            const auto name = r.detail.substr(0, r.detail.find(' '));
            if (name != "ECHO1" && name != "ECHO2") continue;
            if (++count[{r.node, r.instance, r.index, name}] == 2)
                fail("gbc_single_vote", "node " + std::to_string(r.node) + " sent two " + name + " at " +
                                            at(r.instance, r.index));
        }
    }

    void liveness() {
        for (auto i : correct_) {
            std::map<Digest, std::uint64_t> first;
            for (const auto& b : sim_.node(NodeId{i}).chain().slots()) {
                for (const auto& tx : b.txs) first.try_emplace(tx.id, b.instance);
            }
            for (const auto& u : sim_.universal()) {
                auto it = first.find(u.id);
                if (it == first.end())
                    fail("liveness", "node " + std::to_string(i) + " never committed universal tx of instance " +
                                         std::to_string(u.instance));
                else if (it->second > u.instance + 2)
                    fail("liveness", "node " + std::to_string(i) + " committed universal tx of instance " +
                                         std::to_string(u.instance) + " in instance " + std::to_string(it->second));
            }
        }
    }

    void optimistic() {
        const auto& c = sim_.config();
        if (!c.faults.empty() || c.mode != DelayMode::lockstep || !c.rules.empty()) return;
        for (auto i : correct_) {
            for (std::uint64_t k = 1; k <= c.num_instances; ++k) {
                const auto* inst = sim_.node(NodeId{i}).instance(k);
                if (!inst) continue;
                if (inst->included_count() != params_.n || !inst->agreement_set().empty())
                    fail("optimistic_validity", "node " + std::to_string(i) + " k=" + std::to_string(k) +
                                                    " |ACS|=" + std::to_string(inst->included_count()));
            }
        }
        for (const auto& r : sim_.log().records()) {
            if (r.kind == EventKind::trigger)
                fail("trigger_inertness", "trigger fired at node " + std::to_string(r.node) + " k=" +
                                              std::to_string(r.instance));
        }
    }

    const Simulation& sim_;
    SystemParams params_;
    std::set<std::uint32_t> correct_;
    std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> check_chain_safety(const std::vector<const Chain*>& chains) {
    std::vector<Violation> out;
    for (std::size_t a = 0; a < chains.size(); ++a) {
        for (std::size_t b = a + 1; b < chains.size(); ++b) {
            const auto& x = chains[a]->slots();
            const auto& y = chains[b]->slots();
            const auto common = std::min(x.size(), y.size());
            for (std::size_t r = 0; r < common; ++r) {
                if (x[r].digest != y[r].digest || canonical_encode(x[r]) != canonical_encode(y[r])) {
                    out.push_back({"chain_safety", "chains " + std::to_string(a) + " and " + std::to_string(b) +
                                                       " differ at slot " + std::to_string(r + 1)});
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<Violation> observe_invariants(const Simulation& sim) { return Checker(sim).run(); }

std::string format_report(const std::vector<Violation>& violations) {
    std::ostringstream out;
    if (violations.empty()) {
        out << "no violations\n";
        return out.str();
    }
    out << violations.size() << " violation(s)\n";
    for (const auto& v : violations) out << v.check << ": " << v.detail << '\n';
    return out.str();
}

}  // namespace falcon
