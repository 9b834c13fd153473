#pragma once

// Small in-process networks for driving protocol instances in tests.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "falcon/aaba.hpp"
#include "falcon/acsq.hpp"
#include "falcon/crypto.hpp"

namespace falcon::testing {

inline Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

inline KeyRegistry make_registry(SystemParams p, const std::string& secret = "test-keys") {
    return KeyRegistry(p, bytes_of(secret));
}

/// A grade-`tag` certificate for `digest` in GBC(k, j), signed by the first n - f nodes.
inline ThresholdSig certify(const KeyRegistry& reg, std::uint64_t k, NodeId j, const Digest& digest,
                            std::uint8_t tag = kGrade1Tag) {
    std::vector<PartialSig> partials;
    const auto msg = gbc_vote_message(k, j, digest);
    for (std::uint32_t i = 1; i <= reg.params().quorum(); ++i)
        partials.push_back(reg.signer_for(NodeId{i}).partial_sign(msg, tag));
    return reg.combine(partials);
}

struct Msg {
    std::uint64_t time;
    std::uint64_t seq;
    std::uint32_t from;
    std::uint32_t to;
    Body body;
};

struct MsgOrder {
    bool operator()(const Msg& a, const Msg& b) const { return std::tie(a.time, a.seq) > std::tie(b.time, b.seq); }
};

/// n AABA instances for one index. Lockstep when max_delay == 1, otherwise
/// uniform random delays in [1, max_delay] drawn from a seeded generator.
/// Byzantine nodes either stay silent or flip every bit they send.
class AabaNet {
public:
    enum class Byz { none, silent, flip };

    AabaNet(SystemParams p, std::uint64_t seed = 1, std::uint64_t max_delay = 1)
        : params(p), registry(make_registry(p)), coin(bytes_of("coin:" + std::to_string(seed))), rng(seed),
          max_delay_(max_delay), byz(p.n, Byz::none), output_time(p.n), output_source(p.n), exit_time(p.n) {
        for (std::uint32_t i = 1; i <= p.n; ++i)
            nodes.push_back(std::make_unique<AabaInstance>(addr, registry, coin, AabaInstance::Options{}));
    }

    bool correct(std::uint32_t i) const { return byz[i - 1] == Byz::none; }

    AabaInput one() const {
        return AabaInput::one_of(block_digest, certify(registry, addr.acsq_id, addr.index, block_digest));
    }

    void input(std::uint32_t i, const AabaInput& in) {
        if (byz[i - 1] == Byz::silent) return;
        absorb(i, nodes[i - 1]->input(in));
    }

    /// Returns false when the step budget runs out.
    bool run(std::uint64_t max_steps = 200000) {
        for (std::uint64_t steps = 0; !queue.empty(); ++steps) {
            if (steps == max_steps) return false;
            Msg m = queue.top();
            queue.pop();
            now = m.time;
            if (byz[m.to - 1] == Byz::silent) continue;
            absorb(m.to, nodes[m.to - 1]->handle(NodeId{m.from}, m.body));
        }
        return true;
    }

    AabaInstance& node(std::uint32_t i) { return *nodes[i - 1]; }

    SystemParams params;
    KeyRegistry registry;
    CommonCoin coin;
    std::mt19937_64 rng;
    InstanceAddr addr{1, SubProtocol::aaba, NodeId{1}};
    Digest block_digest = sha256(bytes_of("block"));
    std::vector<Byz> byz;
    std::vector<std::optional<std::uint64_t>> output_time;
    std::vector<std::optional<AabaOutputSource>> output_source;
    std::vector<std::optional<std::uint64_t>> exit_time;
    std::uint64_t now = 0;

private:
    void absorb(std::uint32_t from, AabaStep&& step) {
        if (step.output && !output_time[from - 1]) {
            output_time[from - 1] = now;
            output_source[from - 1] = step.source;
        }
        if (step.exited && !exit_time[from - 1]) exit_time[from - 1] = now;
        for (auto& o : step.out) {
            Body body = o.body;
            if (byz[from - 1] == Byz::flip) flip(body);
            for (std::uint32_t t = 1; t <= params.n; ++t) {
                if (o.to && o.to->index != t) continue;
                const std::uint64_t d = max_delay_ <= 1 ? 1 : 1 + rng() % max_delay_;
                queue.push(Msg{now + d, seq_++, from, t, body});
            }
        }
    }

    static void flip(Body& body) {
        if (auto* m = std::get_if<Amp>(&body)) m->input = AabaInput::zero();
        if (auto* m = std::get_if<Sho1>(&body)) m->bit = !m->bit;
        if (auto* m = std::get_if<Sho2>(&body)) m->bit = !m->bit;
        if (auto* m = std::get_if<Bval>(&body)) m->bit = !m->bit;
        if (auto* m = std::get_if<Aux>(&body)) m->bit = !m->bit;
    }

    std::uint64_t max_delay_;
    std::uint64_t seq_ = 0;
    std::vector<std::unique_ptr<AabaInstance>> nodes;
    std::priority_queue<Msg, std::vector<Msg>, MsgOrder> queue;
};

/// n ACSQ instances for one k in lockstep. `drop` filters messages.
class AcsqNet {
public:
    using Drop = std::function<bool(std::uint32_t from, std::uint32_t to, const InstanceAddr&, const Body&)>;

    struct Packet {
        std::uint64_t time;
        std::uint64_t seq;
        std::uint32_t from;
        std::uint32_t to;
        InstanceAddr addr;
        Body body;
    };

    explicit AcsqNet(SystemParams p, std::uint64_t k = 1)
        : params(p), registry(make_registry(p)), coin(bytes_of("coin")) {
        for (std::uint32_t i = 1; i <= p.n; ++i)
            nodes.push_back(std::make_unique<AcsqInstance>(k, NodeId{i}, registry, registry.signer_for(NodeId{i}),
                                                           coin, Mutations{}));
        events.resize(p.n);
    }

    void activate(std::uint32_t i, Block b) { absorb(i, nodes[i - 1]->activate(std::move(b))); }
    void trigger(std::uint32_t i) { absorb(i, nodes[i - 1]->fire_trigger()); }

    /// Delivers everything due up to and including `until`.
    void run(std::uint64_t until = ~0ULL) {
        while (!queue.empty()) {
            auto it = std::min_element(queue.begin(), queue.end(), [](const Packet& a, const Packet& b) {
                return std::tie(a.time, a.seq) < std::tie(b.time, b.seq);
            });
            if (it->time > until) return;
            Packet p = *it;
            queue.erase(it);
            now = p.time;
            if (crashed.contains(p.to)) continue;
            absorb(p.to, nodes[p.to - 1]->handle(NodeId{p.from}, p.addr, p.body));
        }
    }

    AcsqInstance& node(std::uint32_t i) { return *nodes[i - 1]; }

    std::size_t count(std::uint32_t from, std::string_view kind) const {
        std::size_t c = 0;
        for (const auto& [f, name] : sent) c += f == from && name == kind;
        return c;
    }

    SystemParams params;
    KeyRegistry registry;
    CommonCoin coin;
    Drop drop;
    std::set<std::uint32_t> crashed;
    std::uint64_t now = 0;
    struct Timed {
        std::uint64_t time;
        LocalEvent event;
    };
    std::vector<std::vector<Timed>> events;

    /// Time of node i's first event of `kind` for index j, if any.
    std::optional<std::uint64_t> when(std::uint32_t i, EventKind kind, std::uint32_t j) const {
        for (const auto& t : events[i - 1]) {
            if (t.event.kind == kind && t.event.index == j) return t.time;
        }
        return std::nullopt;
    }
    std::vector<std::pair<std::uint32_t, std::string>> sent;
    std::vector<Packet> queue;

private:
    void absorb(std::uint32_t from, AcsqStep&& step) {
        for (auto& e : step.events) events[from - 1].push_back({now, e});
        for (auto& e : step.out) {
            sent.emplace_back(from, std::string(body_name(e.body)));
            for (std::uint32_t t = 1; t <= params.n; ++t) {
                if (e.to && e.to->index != t) continue;
                if (drop && drop(from, t, e.addr, e.body)) continue;
                queue.push_back(Packet{now + 1, seq_++, from, t, e.addr, e.body});
            }
        }
    }

    std::uint64_t seq_ = 0;
    std::vector<std::unique_ptr<AcsqInstance>> nodes;
};

}  // namespace falcon::testing
