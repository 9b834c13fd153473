#include <doctest.h>

#include <deque>

#include "falcon/node.hpp"
#include "support/harness.hpp"

using namespace falcon;
using falcon::testing::bytes_of;

namespace {

Transaction tx(const std::string& s) { return Transaction::from_payload(bytes_of(s)); }

/// Lockstep network of full nodes; crashed nodes never start.
struct NodeNet {
    struct Packet {
        std::uint64_t time;
        Envelope env;
    };

    NodeNet(SystemParams p, std::uint64_t max_instance, std::set<std::uint32_t> down = {})
        : params(p), registry(falcon::testing::make_registry(p)), coin(bytes_of("coin")), crashed(std::move(down)) {
        for (std::uint32_t i = 1; i <= p.n; ++i) {
            NodeConfig c;
            c.id = NodeId{i};
            c.params = p;
            c.max_instance = max_instance;
            nodes.push_back(std::make_unique<Node>(c, registry, coin));
        }
        events.resize(p.n);
    }

    void start() {
        for (std::uint32_t i = 1; i <= params.n; ++i) {
            if (!crashed.contains(i)) absorb(i, nodes[i - 1]->start());
        }
    }

    void run(std::uint64_t until = ~0ULL) {
        while (!queue.empty() && queue.front().time <= until) {
            Packet p = std::move(queue.front());
            queue.pop_front();
            now = p.time;
            if (crashed.contains(p.env.to.index)) continue;
            absorb(p.env.to.index, nodes[p.env.to.index - 1]->step(p.env));
        }
    }

    std::optional<std::uint64_t> when(std::uint32_t i, EventKind kind, std::uint64_t k, std::uint32_t j = 0) const {
        for (const auto& [t, e] : events[i - 1]) {
            if (e.kind == kind && e.instance == k && (j == 0 || e.index == j)) return t;
        }
        return std::nullopt;
    }

    Node& node(std::uint32_t i) { return *nodes[i - 1]; }

    SystemParams params;
    KeyRegistry registry;
    CommonCoin coin;
    std::set<std::uint32_t> crashed;
    std::vector<std::unique_ptr<Node>> nodes;
    std::deque<Packet> queue;
    std::vector<std::vector<std::pair<std::uint64_t, LocalEvent>>> events;
    std::uint64_t now = 0;

private:
    void absorb(std::uint32_t from, NodeStep&& step) {
        for (auto& e : step.events) events[from - 1].emplace_back(now, e);
        for (auto& e : step.out) {
            for (std::uint32_t t = 1; t <= params.n; ++t) {
                if (e.to && e.to->index != t) continue;
                queue.push_back(Packet{now + 1, Envelope{NodeId{from}, NodeId{t}, e.addr, e.body}});
            }
        }
    }
};

}  // namespace

TEST_SUITE("node") {
    TEST_CASE("a fresh node activates instance 1 and proposes") {
        auto reg = falcon::testing::make_registry(SystemParams{4, 1});
        CommonCoin coin(bytes_of("coin"));
        NodeConfig c;
        c.id = NodeId{2};
        c.params = SystemParams{4, 1};
        Node node(c, reg, coin);
        std::vector<std::uint64_t> hooked;
        node.set_activation_hook([&](std::uint64_t k) { hooked.push_back(k); });
        auto s = node.start();
        CHECK(hooked == std::vector<std::uint64_t>{1});
        REQUIRE(node.instance(1));
        CHECK(node.instance(1)->activated());
        CHECK(node.current_instance() == 1);
        std::size_t proposes = 0;
        for (const auto& e : s.out) proposes += std::holds_alternative<Propose>(e.body);
        CHECK(proposes == 1);
        CHECK(s.events.front().kind == EventKind::activate);
        CHECK(node.start().out.empty());
    }

    TEST_CASE("block proposal takes the buffer prefix up to the cap") {
        auto reg = falcon::testing::make_registry(SystemParams{4, 1});
        CommonCoin coin(bytes_of("coin"));
        NodeConfig c;
        c.id = NodeId{1};
        c.params = SystemParams{4, 1};
        Node node(c, reg, coin);
        CHECK(node.propose_block(1).txs.empty());
        for (int i = 0; i < 50; ++i) node.inject_tx(tx("t" + std::to_string(i)));
        node.inject_tx(tx("t0"));
        CHECK(node.buffer().size() == 50);
        auto b = node.propose_block(1);
        REQUIRE(b.txs.size() == 32);
        CHECK(b.txs.front() == tx("t0"));
        CHECK(b.txs.back() == tx("t31"));
        CHECK(node.buffer().size() == 50);
    }

    TEST_CASE("messages for instances beyond k + 1 are held back") {
        auto reg = falcon::testing::make_registry(SystemParams{4, 1});
        CommonCoin coin(bytes_of("coin"));
        NodeConfig c;
        c.id = NodeId{1};
        c.params = SystemParams{4, 1};
        Node node(c, reg, coin);
        node.start();
        auto b = make_block(NodeId{2}, 4, {});
        auto s = node.step(Envelope{NodeId{2}, NodeId{1}, InstanceAddr{4, SubProtocol::gbc, NodeId{2}}, Propose{b}});
        CHECK(s.out.empty());
        CHECK(node.instance(4) == nullptr);
        node.step(Envelope{NodeId{2}, NodeId{1}, InstanceAddr{0, SubProtocol::gbc, NodeId{2}}, Propose{b}});
        CHECK(node.instance(0) == nullptr);
    }

    TEST_CASE("fault-free: every instance returns at hop 3 after activation and chains agree") {
        NodeNet net(SystemParams{4, 1}, 3);
        for (std::uint32_t i = 1; i <= 4; ++i) net.node(i).inject_tx(tx("x" + std::to_string(i)));
        net.start();
        net.run();
        for (std::uint32_t i = 1; i <= 4; ++i) {
            CHECK(net.when(i, EventKind::returned, 1) == 3);
            CHECK(net.when(i, EventKind::activate, 2) == 3);
            CHECK(net.when(i, EventKind::returned, 3) == 9);
            CHECK_FALSE(net.when(i, EventKind::trigger, 1));
            CHECK(net.node(i).chain().size() == 12);
            CHECK(net.node(i).chain().digest() == net.node(1).chain().digest());
            CHECK(net.node(i).buffer().empty());
            CHECK(net.node(i).executed().size() == 4);
            CHECK(net.node(i).current_instance() == 4);
        }
    }

    TEST_CASE("with one node down: k + 1 starts at n - f grade-2 and fires the trigger of k") {
        NodeNet net(SystemParams{4, 1}, 2, {4});
        net.start();
        net.run(3);
        auto& n1 = net.node(1);
        REQUIRE(n1.instance(1));
        CHECK(n1.instance(1)->m2_count() == 3);
        CHECK_FALSE(n1.instance(1)->returned());
        REQUIRE(n1.instance(2));
        CHECK(n1.instance(2)->activated());
        CHECK(net.when(1, EventKind::activate, 2) == 3);
        net.run();
        for (std::uint32_t i = 1; i <= 3; ++i) {
            CHECK(net.when(i, EventKind::trigger, 1) == 6);
            CHECK(net.node(i).instance(1)->returned());
            CHECK(net.node(i).instance(1)->excluded() == std::set<std::uint32_t>{4});
            CHECK(net.node(i).chain().digest() == net.node(1).chain().digest());
        }
    }

    TEST_CASE("committed transactions leave the buffer and are not re-buffered") {
        NodeNet net(SystemParams{4, 1}, 1);
        net.node(1).inject_tx(tx("a"));
        net.node(1).inject_tx(tx("b"));
        net.node(2).inject_tx(tx("a"));
        net.node(3).inject_tx(tx("keep"));
        net.start();
        net.run();
        for (std::uint32_t i = 1; i <= 4; ++i) {
            CHECK(net.node(i).chain().size() == 4);
            // "a" sits in two blocks; it executes once.
            CHECK(net.node(i).executed().size() == 3);
        }
        CHECK(net.node(1).buffer().empty());
        CHECK(net.node(3).buffer().empty());
        net.node(2).inject_tx(tx("a"));
        CHECK(net.node(2).buffer().empty());
        CHECK(net.node(2).snapshot().chain_length == 4);
    }

    TEST_CASE("an AABA message for a returned instance still draws an ASSIST") {
        NodeNet net(SystemParams{4, 1}, 1);
        net.start();
        net.run();
        auto& n1 = net.node(1);
        REQUIRE(n1.instance(1)->returned());
        auto s = n1.step(Envelope{NodeId{3}, NodeId{1}, InstanceAddr{1, SubProtocol::aaba, NodeId{2}},
                                  Amp{AabaInput::zero()}});
        REQUIRE(s.out.size() == 1);
        CHECK(std::holds_alternative<Assist>(s.out[0].body));
        CHECK(s.out[0].to == NodeId{3});
    }

    TEST_CASE("echoes for k + 1 before local activation are counted passively") {
        auto p = SystemParams{4, 1};
        auto reg = falcon::testing::make_registry(p);
        CommonCoin coin(bytes_of("coin"));
        NodeConfig c;
        c.id = NodeId{1};
        c.params = p;
        Node node(c, reg, coin);
        node.start();
        auto b = make_block(NodeId{2}, 2, {});
        InstanceAddr a{2, SubProtocol::gbc, NodeId{2}};
        auto s = node.step(Envelope{NodeId{2}, NodeId{1}, a, Propose{b}});
        CHECK(s.out.empty());
        const auto msg = gbc_vote_message(2, NodeId{2}, b.digest);
        for (std::uint32_t i = 2; i <= 4; ++i) {
            auto out = node.step(Envelope{NodeId{i}, NodeId{1}, a, Echo2{reg.signer_for(NodeId{i}).partial_sign(msg, kGrade2Tag)}});
            CHECK(out.out.empty());
        }
        REQUIRE(node.instance(2));
        CHECK_FALSE(node.instance(2)->activated());
        CHECK(node.instance(2)->m2_count() == 1);
        CHECK(node.instance(1)->trigger_active());
    }
}
