#include <doctest.h>

#include "falcon/scenario.hpp"

using namespace falcon;

TEST_SUITE("scenario") {
    TEST_CASE("a full scenario parses") {
        auto sc = parse_scenario(R"(
# comment
[network]
n = 7
f = 2
seed = 42
mode = adversarial
min_delay = 2
max_delay = 9

[run]
instances = 4
drain = 2
tx_load = 3
universal_txs = 0
block_cap = 8
sort = integral
log_sends = no

[mutation]
skip_q_check = true

[output]
reference_node = 3
stability = false

[expect]
trigger = some
aaba = none

[fault.x]
node = 2
kind = crash
at = 10

[fault.y]
node = 6
kind = delay_target
body = ECHO1
delay = 4

[rule.b]
delay = 2

[rule.a]
from = 1
to = 3
sub = aaba
instance = 2
index = 5
delay = 11
)",
                                 "demo");
        CHECK(sc.name == "demo");
        const auto& c = sc.config;
        CHECK(c.params.n == 7);
        CHECK(c.params.f == 2);
        CHECK(c.seed == 42);
        CHECK(c.mode == DelayMode::adversarial);
        CHECK(c.min_delay == 2);
        CHECK(c.max_delay == 9);
        CHECK(c.num_instances == 4);
        CHECK(c.drain_instances == 2);
        CHECK(c.tx_load == 3);
        CHECK(c.universal_txs == 0);
        CHECK(c.block_cap == 8);
        CHECK(c.sort_mode == SortMode::integral);
        CHECK_FALSE(c.log_sends);
        CHECK(c.mutations.skip_q_check);
        CHECK_FALSE(c.mutations.echo2_without_grade1);
        CHECK(sc.reference_node == 3);
        CHECK_FALSE(sc.stability);
        CHECK(sc.expect_trigger == Expectation::some);
        CHECK(sc.expect_aaba == Expectation::none);
        REQUIRE(c.faults.size() == 2);
        CHECK(c.faults[0].kind == FaultKind::crash);
        CHECK(c.faults[0].at_time == 10);
        CHECK(c.faults[1].kind == FaultKind::delay_target);
        REQUIRE(c.faults[1].rules.size() == 1);
        CHECK(c.faults[1].rules[0].body == "ECHO1");
        REQUIRE(c.rules.size() == 2);
        CHECK(c.rules[0].delay == 11);
        CHECK(c.rules[0].sub == SubProtocol::aaba);
        CHECK(c.rules[0].index == 5u);
        CHECK(c.rules[1].delay == 2);
        CHECK_FALSE(c.rules[1].from);
    }

    TEST_CASE("defaults apply to an almost empty file") {
        auto sc = parse_scenario("[network]\nn = 4\nf = 1\n");
        CHECK(sc.config.mode == DelayMode::lockstep);
        CHECK(sc.config.num_instances == 3);
        CHECK(sc.expect_trigger == Expectation::any);
        CHECK(sc.config.faults.empty());
    }

    TEST_CASE("unknown sections and keys are rejected") {
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\nspeed = 3\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[extra]\na = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[network.x]\nn = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("n = 4\n[network]\nf = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[fault.a]\nnode = 1\nkind = silent\ndelay = 3\n"),
                        ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[fault.a]\nnode = 1\nkind = silent\nsub = gbc\n"),
                        ScenarioError);
    }

    TEST_CASE("malformed values are rejected") {
        const std::string head = "[network]\nn = 4\nf = 1\n";
        CHECK_THROWS_AS(parse_scenario("[network\nn = 4\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = four\nf = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = -4\nf = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4x\nf = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\nmode = warp\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[run]\nsort = random\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[run]\nlog_sends = maybe\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[expect]\ntrigger = often\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[rule.a]\nbody = HELLO\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[rule.a]\nsub = abc\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[fault.a]\nkind = silent\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[fault.a]\nnode = 1\nkind = sleepy\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario(head + "[output]\nreference_node = 5\n"), ScenarioError);
    }

    TEST_CASE("configs that fail validation are rejected") {
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 3\nf = 1\n"), ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[fault.a]\nnode = 1\nkind = silent\n"
                                       "[fault.b]\nnode = 2\nkind = silent\n"),
                        ScenarioError);
        CHECK_THROWS_AS(parse_scenario("[network]\nn = 4\nf = 1\n[run]\ninstances = 0\n"), ScenarioError);
    }

    TEST_CASE("shipped scenarios load") {
        for (const auto& entry : std::filesystem::directory_iterator(FALCON_SCENARIO_DIR)) {
            if (entry.path().extension() != ".ini") continue;
            CAPTURE(entry.path().string());
            auto sc = load_scenario(entry.path());
            CHECK(sc.name == entry.path().stem().string());
        }
        CHECK_THROWS_AS(load_scenario("/nonexistent/x.ini"), ScenarioError);
    }
}
