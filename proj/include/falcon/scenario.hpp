#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "falcon/simnet.hpp"

namespace falcon {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Expectation { any, none, some };

/// A simulation plus what to report and what to expect from it.
struct Scenario {
    std::string name;
    SimConfig config;
    std::uint32_t reference_node = 1;
    std::uint64_t throughput_bucket = 10;
    bool stability = true;
    std::size_t stability_min_txs = 100;
    Expectation expect_trigger = Expectation::any;
    Expectation expect_aaba = Expectation::any;
};

/// INI text with [network], [run], [mutation], [output], [expect], [fault.<tag>]
/// and [rule.<tag>] sections. Unknown sections or keys throw ScenarioError,
/// as does a config that fails validation.
Scenario parse_scenario(const std::string& text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace falcon
