#include <doctest.h>

#include "falcon/sorter.hpp"

using namespace falcon;

namespace {

Block blk(std::uint32_t creator, std::uint64_t k) {
    const std::string s = "t" + std::to_string(creator) + ":" + std::to_string(k);
    return make_block(NodeId{creator}, k, {Transaction::from_payload(Bytes(s.begin(), s.end()))});
}

using Slots = std::vector<std::optional<Block>>;

}  // namespace

TEST_SUITE("sorter") {
    TEST_CASE("a gap that is excluded does not hold back the blocks after it") {
        Sorter s(3);
        Slots m{blk(1, 1), std::nullopt, blk(3, 1)};
        auto c = s.partial_sort(1, m, {2});
        REQUIRE(c.size() == 2);
        CHECK(c[0].index == 1);
        CHECK(c[0].slot == 1);
        CHECK(c[1].index == 3);
        CHECK(c[1].slot == 2);
        CHECK(s.chain().size() == 2);
        CHECK(s.done_instance() == 1);
        CHECK(s.cursor(1) == 3);
    }

    TEST_CASE("undecided first index blocks the prefix") {
        Sorter s(3);
        Slots m{std::nullopt, blk(2, 1), blk(3, 1)};
        CHECK(s.partial_sort(1, m, {}).empty());
        CHECK(s.cursor(1) == 0);
        m[0] = blk(1, 1);
        auto c = s.partial_sort(1, m, {});
        REQUIRE(c.size() == 3);
        CHECK(c[0].index == 1);
        CHECK(c[2].index == 3);
    }

    TEST_CASE("progressive commit: decided prefix goes out before later indices") {
        Sorter s(4);
        Slots m{blk(1, 1), blk(2, 1), std::nullopt, std::nullopt};
        CHECK(s.partial_sort(1, m, {}).size() == 2);
        CHECK(s.cursor(1) == 2);
        CHECK_FALSE(s.finished(1));
        m[3] = blk(4, 1);
        CHECK(s.partial_sort(1, m, {}).empty());
        auto c = s.partial_sort(1, m, {3});
        REQUIRE(c.size() == 1);
        CHECK(c[0].index == 4);
        CHECK(s.finished(1));
    }

    TEST_CASE("instance 2 waits for instance 1") {
        Sorter s(2);
        Slots m2{blk(1, 2), blk(2, 2)};
        CHECK(s.partial_sort(2, m2, {}).empty());
        CHECK(s.done_instance() == 0);
        Slots m1{blk(1, 1), blk(2, 1)};
        CHECK(s.partial_sort(1, m1, {}).size() == 2);
        auto c = s.partial_sort(2, m2, {});
        REQUIRE(c.size() == 2);
        CHECK(c[0].instance == 2);
        CHECK(c[0].slot == 3);
        CHECK(s.done_instance() == 2);
    }

    TEST_CASE("without the instance gate a later instance can overtake") {
        Sorter s(2, SortMode::partial, false);
        Slots m2{blk(1, 2), blk(2, 2)};
        CHECK(s.partial_sort(2, m2, {}).size() == 2);
        CHECK(s.finished(2));
        CHECK(s.done_instance() == 0);
        Slots m1{blk(1, 1), blk(2, 1)};
        CHECK(s.partial_sort(1, m1, {}).size() == 2);
        CHECK(s.done_instance() == 2);
        CHECK(s.chain().slots()[0].instance == 2);
    }

    TEST_CASE("integral mode commits only when the whole instance is decided") {
        Sorter s(3, SortMode::integral);
        Slots m{blk(1, 1), blk(2, 1), std::nullopt};
        CHECK(s.partial_sort(1, m, {}).empty());
        CHECK(s.cursor(1) == 0);
        auto c = s.partial_sort(1, m, {3});
        CHECK(c.size() == 2);
        CHECK(s.finished(1));
    }

    TEST_CASE("finished instances ignore further calls") {
        Sorter s(1);
        Slots m{blk(1, 1)};
        CHECK(s.partial_sort(1, m, {}).size() == 1);
        CHECK(s.partial_sort(1, m, {}).empty());
        CHECK(s.chain().size() == 1);
    }

    TEST_CASE("chain length grows by one per commit and the digest tracks content") {
        Sorter a(2);
        Sorter b(2);
        Slots m{blk(1, 1), blk(2, 1)};
        a.partial_sort(1, m, {});
        b.partial_sort(1, m, {});
        CHECK(a.chain().size() == 2);
        CHECK(a.chain().digest() == b.chain().digest());
        Sorter c(2);
        Slots other{blk(2, 1), blk(1, 1)};
        c.partial_sort(1, other, {});
        CHECK(c.chain().digest() != a.chain().digest());
        CHECK(Chain{}.digest() == sha256(Bytes{}));
    }
}
