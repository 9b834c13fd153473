#include "falcon/scenario.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace falcon {

namespace {

using boost::property_tree::ptree;

class Section {
public:
    Section(std::string name, const ptree& tree) : name_(std::move(name)), tree_(tree) {}

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [key, value] : tree_) {
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) throw ScenarioError("unknown key '" + key + "' in [" + name_ + "]");
        }
    }

    bool has_any(std::initializer_list<const char*> keys) const {
        for (const char* k : keys) {
            if (tree_.find(k) != tree_.not_found()) return true;
        }
        return false;
    }

    std::optional<std::string> str(const char* key) const {
        auto it = tree_.find(key);
        if (it == tree_.not_found()) return std::nullopt;
        return it->second.data();
    }

    template <typename T>
    std::optional<T> num(const char* key) const {
        auto s = str(key);
        if (!s) return std::nullopt;
        std::istringstream in(*s);
        T value{};
        if (s->empty() || s->front() == '-' || !(in >> value) || !in.eof())
            throw ScenarioError("bad number for '" + std::string(key) + "' in [" + name_ + "]: '" + *s + "'");
        return value;
    }

    template <typename T>
    void set(const char* key, T& target) const {
        if (auto v = num<T>(key)) target = *v;
    }

    void set_bool(const char* key, bool& target) const {
        auto s = str(key);
        if (!s) return;
        if (*s == "true" || *s == "yes" || *s == "1")
            target = true;
        else if (*s == "false" || *s == "no" || *s == "0")
            target = false;
        else
            throw ScenarioError("bad boolean for '" + std::string(key) + "' in [" + name_ + "]: '" + *s + "'");
    }

private:
    std::string name_;
    const ptree& tree_;
};

Expectation parse_expectation(const std::string& s) {
    if (s == "any") return Expectation::any;
    if (s == "none") return Expectation::none;
    if (s == "some") return Expectation::some;
    throw ScenarioError("expectation must be any, none or some: '" + s + "'");
}

SubProtocol parse_sub(const std::string& s) {
    if (s == "gbc") return SubProtocol::gbc;
    if (s == "aaba") return SubProtocol::aaba;
    throw ScenarioError("sub must be gbc or aaba: '" + s + "'");
}

void read_rule_keys(const Section& sec, DelayRule& rule) {
    rule.from = sec.num<std::uint32_t>("from");
    rule.to = sec.num<std::uint32_t>("to");
    rule.body = sec.str("body");
    if (auto s = sec.str("sub")) rule.sub = parse_sub(*s);
    rule.instance = sec.num<std::uint64_t>("instance");
    rule.index = sec.num<std::uint32_t>("index");
    if (auto d = sec.num<std::uint64_t>("delay")) rule.delay = *d;
    if (rule.body) {
        static const std::set<std::string> names{"PROPOSE", "ECHO1", "ECHO2", "AMP", "SHO1", "SHO2",
                                                 "STOP", "BVAL", "AUX", "ASSIST", "QUERY", "QUERY-RESP"};
        if (!names.contains(*rule.body)) throw ScenarioError("unknown message kind '" + *rule.body + "'");
    }
}

}  // namespace

Scenario parse_scenario(const std::string& text, std::string name) {
    ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ScenarioError(std::string("parse error: ") + e.what());
    }

    Scenario sc;
    sc.name = std::move(name);
    auto& c = sc.config;
    std::map<std::string, DelayRule> rules;

    for (const auto& [section_name, body] : tree) {
        if (!body.data().empty()) throw ScenarioError("key '" + section_name + "' outside a section");
        const Section sec(section_name, body);
        const auto dot = section_name.find('.');
        const auto kind = section_name.substr(0, dot);
        if (dot != std::string::npos && kind != "fault" && kind != "rule")
            throw ScenarioError("unknown section [" + section_name + "]");

        if (kind == "network") {
            sec.allow({"n", "f", "seed", "mode", "min_delay", "max_delay", "max_time"});
            sec.set("n", c.params.n);
            sec.set("f", c.params.f);
            sec.set("seed", c.seed);
            if (auto m = sec.str("mode")) {
                try {
                    c.mode = parse_mode(*m);
                } catch (const InvalidConfig& e) {
                    throw ScenarioError(e.what());
                }
            }
            sec.set("min_delay", c.min_delay);
            sec.set("max_delay", c.max_delay);
            sec.set("max_time", c.max_time);
        } else if (kind == "run") {
            sec.allow({"instances", "drain", "tx_load", "universal_txs", "block_cap", "prune_horizon", "sort",
                       "log_sends"});
            sec.set("instances", c.num_instances);
            sec.set("drain", c.drain_instances);
            sec.set("tx_load", c.tx_load);
            sec.set("universal_txs", c.universal_txs);
            sec.set("block_cap", c.block_cap);
            sec.set("prune_horizon", c.prune_horizon);
            if (auto s = sec.str("sort")) {
                if (*s == "partial")
                    c.sort_mode = SortMode::partial;
                else if (*s == "integral")
                    c.sort_mode = SortMode::integral;
                else
                    throw ScenarioError("sort must be partial or integral: '" + *s + "'");
            }
            sec.set_bool("log_sends", c.log_sends);
        } else if (kind == "mutation") {
            sec.allow({"echo2_without_grade1", "skip_q_check", "no_instance_gate"});
            sec.set_bool("echo2_without_grade1", c.mutations.echo2_without_grade1);
            sec.set_bool("skip_q_check", c.mutations.skip_q_check);
            sec.set_bool("no_instance_gate", c.mutations.no_instance_gate);
        } else if (kind == "output") {
            sec.allow({"reference_node", "throughput_bucket", "stability", "stability_min_txs"});
            sec.set("reference_node", sc.reference_node);
            sec.set("throughput_bucket", sc.throughput_bucket);
            sec.set_bool("stability", sc.stability);
            sec.set("stability_min_txs", sc.stability_min_txs);
        } else if (kind == "expect") {
            sec.allow({"trigger", "aaba"});
            if (auto s = sec.str("trigger")) sc.expect_trigger = parse_expectation(*s);
            if (auto s = sec.str("aaba")) sc.expect_aaba = parse_expectation(*s);
        } else if (kind == "fault") {
            sec.allow({"node", "kind", "at", "from", "to", "body", "sub", "instance", "index", "delay"});
            FaultSpec f;
            auto node = sec.num<std::uint32_t>("node");
            auto k = sec.str("kind");
            if (!node || !k) throw ScenarioError("[" + section_name + "] needs node and kind");
            f.node = NodeId{*node};
            try {
                f.kind = parse_fault(*k);
            } catch (const InvalidConfig& e) {
                throw ScenarioError(e.what());
            }
            sec.set("at", f.at_time);
            if (f.kind == FaultKind::delay_target) {
                DelayRule r;
                read_rule_keys(sec, r);
                f.rules.push_back(r);
            } else if (sec.has_any({"from", "to", "body", "sub", "instance", "index", "delay"})) {
                throw ScenarioError("[" + section_name + "] rule keys need kind = delay_target");
            }
            c.faults.push_back(f);
        } else if (kind == "rule") {
            sec.allow({"from", "to", "body", "sub", "instance", "index", "delay"});
            DelayRule r;
            read_rule_keys(sec, r);
            rules[section_name] = r;
        } else {
            throw ScenarioError("unknown section [" + section_name + "]");
        }
    }
    // Rules apply in section-name order.
    for (auto& [n, r] : rules) c.rules.push_back(r);
    if (sc.reference_node == 0 || sc.reference_node > c.params.n)
        throw ScenarioError("reference_node out of range");

    try {
        c.validate();
    } catch (const InvalidConfig& e) {
        throw ScenarioError(std::string("invalid config: ") + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read " + path.string());
    std::stringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path.stem().string());
}

}  // namespace falcon
