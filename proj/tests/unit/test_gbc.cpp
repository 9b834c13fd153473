#include <doctest.h>

#include "falcon/errors.hpp"
#include "falcon/gbc.hpp"
#include "support/harness.hpp"

using namespace falcon;
using falcon::testing::bytes_of;

namespace {

struct Fixture {
    SystemParams p{4, 1};
    KeyRegistry reg = falcon::testing::make_registry(p);
    InstanceAddr addr{1, SubProtocol::gbc, NodeId{1}};
    Block block = make_block(NodeId{1}, 1, {Transaction::from_payload(bytes_of("tx"))});
    Block other = make_block(NodeId{1}, 1, {Transaction::from_payload(bytes_of("other"))});

    GbcInstance receiver(std::uint32_t self, bool emitting = true) {
        return GbcInstance(addr, reg, reg.signer_for(NodeId{self}), {emitting, false});
    }
    PartialSig vote(std::uint32_t signer, const Block& b, std::uint8_t tag) {
        return reg.signer_for(NodeId{signer}).partial_sign(gbc_vote_message(1, NodeId{1}, b.digest), tag);
    }
};

std::size_t count_kind(const GbcStep& s, std::size_t index) {
    std::size_t c = 0;
    for (const auto& o : s.out) c += o.body.index() == index;
    return c;
}

}  // namespace

TEST_SUITE("gbc") {
    TEST_CASE_FIXTURE(Fixture, "broadcaster proposes to everyone once") {
        auto g = receiver(1);
        auto step = g.start_broadcast(block);
        REQUIRE(step.out.size() == 1);
        CHECK_FALSE(step.out[0].to.has_value());  // one broadcast reaches all n = 4 nodes
        CHECK(std::holds_alternative<Propose>(step.out[0].body));
        try {
            g.start_broadcast(block);
            FAIL("second start accepted");
        } catch (const ProtocolError& e) {
            CHECK(e.kind() == ProtocolErrorKind::already_started);
        }
        auto g2 = receiver(2);
        CHECK_THROWS_AS(g2.start_broadcast(block), ProtocolError);
    }

    TEST_CASE_FIXTURE(Fixture, "first proposal gets one echo, later ones none") {
        auto g = receiver(2);
        auto s1 = g.on_propose(NodeId{1}, block);
        CHECK(count_kind(s1, 1) == 1);
        CHECK(s1.received.size() == 1);
        auto s2 = g.on_propose(NodeId{1}, other);
        CHECK(s2.out.empty());
        CHECK(g.received_block()->digest == block.digest);
        // A proposal relayed by someone other than the broadcaster is not a proposal.
        auto g3 = receiver(3);
        CHECK(g3.on_propose(NodeId{2}, block).out.empty());
    }

    TEST_CASE_FIXTURE(Fixture, "muted or passive instances do not echo") {
        auto muted = receiver(2);
        muted.mute();
        CHECK(muted.on_propose(NodeId{1}, block).out.empty());
        auto passive = receiver(3, false);
        CHECK(passive.on_propose(NodeId{1}, block).out.empty());
        CHECK(count_kind(passive.enable_emission(), 1) == 1);
    }

    TEST_CASE_FIXTURE(Fixture, "grade-1 at n - f tag-1 partials, then echo2") {
        auto g = receiver(4);
        g.on_propose(NodeId{1}, block);
        CHECK_FALSE(g.on_echo1(NodeId{1}, vote(1, block, 1)).grade1);
        auto dup = g.on_echo1(NodeId{1}, vote(1, block, 1));
        CHECK(g.pool1_size(block.digest) == 1);
        CHECK_FALSE(dup.grade1);
        CHECK_FALSE(g.on_echo1(NodeId{2}, vote(2, block, 1)).grade1);
        auto s = g.on_echo1(NodeId{3}, vote(3, block, 1));
        REQUIRE(s.grade1);
        CHECK(s.grade1->grade == 1);
        CHECK(verify_delivery(*s.grade1, reg));
        CHECK(count_kind(s, 2) == 1);
    }

    TEST_CASE_FIXTURE(Fixture, "votes split across two digests deliver nothing") {
        auto g = receiver(4);
        g.on_propose(NodeId{1}, block);
        g.adopt_body(other);
        g.on_echo1(NodeId{1}, vote(1, block, 1));
        g.on_echo1(NodeId{2}, vote(2, block, 1));
        auto s = g.on_echo1(NodeId{3}, vote(3, other, 1));
        CHECK_FALSE(s.grade1);
        CHECK_FALSE(g.delivered1());
    }

    TEST_CASE_FIXTURE(Fixture, "forged or misattributed partials are dropped") {
        auto g = receiver(4);
        g.on_propose(NodeId{1}, block);
        auto p = vote(1, block, 1);
        CHECK(g.on_echo1(NodeId{2}, p).out.empty());
        CHECK(g.pool1_size(block.digest) == 0);
        p.mac = Digest{};
        g.on_echo1(NodeId{1}, p);
        CHECK(g.pool1_size(block.digest) == 0);
    }

    TEST_CASE_FIXTURE(Fixture, "grade-2 at n - f tag-2 partials, body needed") {
        auto g = receiver(4);
        g.on_echo2(NodeId{1}, vote(1, block, 2));
        g.on_echo2(NodeId{2}, vote(2, block, 2));
        auto early = g.on_echo2(NodeId{3}, vote(3, block, 2));
        CHECK_FALSE(early.grade2);  // no body yet
        CHECK(g.pool2_size(block.digest) == 3);
        auto s = g.on_propose(NodeId{1}, block);
        REQUIRE(s.grade2);
        CHECK(s.grade2->grade == 2);
        CHECK(verify_delivery(*s.grade2, reg));
    }

    TEST_CASE_FIXTURE(Fixture, "delivery verification") {
        auto cert1 = falcon::testing::certify(reg, 1, NodeId{1}, block.digest, kGrade1Tag);
        CHECK(verify_delivery(GradedDelivery{block, 1, cert1}, reg));
        CHECK_FALSE(verify_delivery(GradedDelivery{block, 2, cert1}, reg));
        CHECK_FALSE(verify_delivery(GradedDelivery{other, 1, cert1}, reg));
        auto small = cert1;
        small.partials.resize(p.small_quorum());
        CHECK_FALSE(verify_delivery(GradedDelivery{block, 1, small}, reg));
        CHECK(verify_certificate(Certificate{block.digest, 1, cert1}, 1, NodeId{1}, reg));
        CHECK_FALSE(verify_certificate(Certificate{block.digest, 1, cert1}, 2, NodeId{1}, reg));
        CHECK_FALSE(verify_certificate(Certificate{block.digest, 1, cert1}, 1, NodeId{2}, reg));
    }

    TEST_CASE("grade-1 at hop 2 and grade-2 at hop 3 in lockstep") {
        falcon::testing::AcsqNet net(SystemParams{4, 1});
        for (std::uint32_t i = 1; i <= 4; ++i) net.activate(i, make_block(NodeId{i}, 1, {}));
        net.run();
        for (std::uint32_t i = 1; i <= 4; ++i) {
            for (std::uint32_t j = 1; j <= 4; ++j) {
                CHECK(net.when(i, EventKind::block_received, j) == 1);
                CHECK(net.when(i, EventKind::grade1, j) == 2);
                CHECK(net.when(i, EventKind::grade2, j) == 3);
            }
        }
    }
}
