// falcon: run simulation scenarios and check their invariants.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "falcon/metrics.hpp"
#include "falcon/observer.hpp"
#include "falcon/scenario.hpp"

namespace fs = std::filesystem;
using namespace falcon;

namespace {

struct Outcome {
    std::vector<Violation> violations;
    std::string report;
};

void check_expectation(Expectation want, bool happened, const char* what, std::vector<Violation>& out) {
    if (want == Expectation::none && happened) out.push_back({"expectation", std::string(what) + " occurred"});
    if (want == Expectation::some && !happened) out.push_back({"expectation", std::string(what) + " never occurred"});
}

Outcome execute(const Scenario& sc, const fs::path* out_dir) {
    Simulation sim(sc.config);
    sim.run();
    Outcome result;
    result.violations = observe_invariants(sim);

    bool triggered = false;
    bool aaba = false;
    for (const auto& r : sim.log().records()) {
        if (!sim.correct(NodeId{r.node}) || r.instance > sc.config.num_instances) continue;
        triggered = triggered || r.kind == EventKind::trigger;
        aaba = aaba || r.kind == EventKind::aaba_input;
    }
    check_expectation(sc.expect_trigger, triggered, "trigger", result.violations);
    check_expectation(sc.expect_aaba, aaba, "agreement stage", result.violations);

    const auto metrics = collect_metrics(sim);
    std::ostringstream report;
    report << "scenario " << sc.name << " seed=" << sc.config.seed << " mode=" << mode_name(sc.config.mode)
           << " n=" << sc.config.params.n << " f=" << sc.config.params.f
           << " instances=" << sc.config.num_instances << '\n';
    report << "end_time=" << sim.now() << " messages=" << sim.messages_delivered()
           << " records=" << sim.log().size() << '\n';
    report << "stages:\n" << stage_definitions();
    if (sc.stability) {
        try {
            const auto text = format_stability(stability_report(metrics, sc.reference_node, sc.stability_min_txs));
            report << "stability node " << sc.reference_node << ": " << text << '\n';
        } catch (const InsufficientData& e) {
            report << "stability node " << sc.reference_node << ": insufficient data (" << e.what() << ")\n";
        }
    }
    report << "throughput node " << sc.reference_node << " (bucket " << sc.throughput_bucket << "):";
    for (const auto& [t, count] : throughput(metrics, sc.reference_node, sc.throughput_bucket))
        report << ' ' << t << ':' << count;
    report << '\n' << format_report(result.violations);
    result.report = report.str();

    if (out_dir) {
        fs::create_directories(*out_dir);
        std::ofstream(*out_dir / "report.txt") << result.report;
        std::ofstream csv(*out_dir / "metrics.csv");
        write_csv(csv, metrics);
        std::ofstream jsonl(*out_dir / "metrics.jsonl");
        write_jsonl(jsonl, metrics);
        std::ofstream events(*out_dir / "events.log");
        sim.log().write(events);
        std::ofstream chains(*out_dir / "chains.txt");
        for (std::uint32_t i = 1; i <= sc.config.params.n; ++i) {
            const auto snap = sim.node(NodeId{i}).snapshot();
            chains << "node " << i << (sim.correct(NodeId{i}) ? "" : " faulty") << " k=" << snap.k
                   << " length=" << snap.chain_length << " digest=" << snap.chain_digest.hex()
                   << " buffer=" << snap.buffer_size << '\n';
        }
    }
    return result;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Falcon BFT simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<std::string> mode;
    auto* run = app.add_subcommand("run", "run one scenario and write metrics and reports");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--mode", mode, "override the network mode")
        ->check(CLI::IsMember({"lockstep", "random", "adversarial"}));

    std::string dir;
    auto* check = app.add_subcommand("check", "run every scenario in a directory and report pass/fail");
    check->add_option("scenario-dir", dir, "directory of .ini scenarios")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            Scenario sc = load_scenario(scenario_path);
            if (seed) sc.config.seed = *seed;
            if (mode) sc.config.mode = parse_mode(*mode);
            sc.config.validate();
            const fs::path out = out_dir;
            const auto result = execute(sc, &out);
            std::cout << result.report;
            return result.violations.empty() ? 0 : 1;
        }

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".ini") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            std::cerr << "no scenarios in " << dir << '\n';
            return 2;
        }
        int failed = 0;
        for (const auto& file : files) {
            try {
                const auto result = execute(load_scenario(file), nullptr);
                std::cout << (result.violations.empty() ? "PASS " : "FAIL ") << file.filename().string();
                if (!result.violations.empty())
                    std::cout << " (" << result.violations.front().check << ": " << result.violations.front().detail
                              << ")";
                std::cout << '\n';
                failed += result.violations.empty() ? 0 : 1;
            } catch (const std::exception& e) {
                std::cout << "FAIL " << file.filename().string() << " (" << e.what() << ")\n";
                ++failed;
            }
        }
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
