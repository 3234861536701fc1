// Copyright 2026-present the metapop project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "metapop/config.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "metapop/errors.hpp"
#include "metapop/io_util.hpp"

namespace metapop {

namespace {

std::string seeds_to_string(const std::vector<std::uint64_t>& seeds) {
    std::ostringstream out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out << ',';
        out << seeds[i];
    }
    return out.str();
}

std::string priority_name(PriorityMode mode) {
    return mode == PriorityMode::uniform ? "uniform" : "proportional";
}

PriorityMode parse_priority(const std::string& name) {
    if (name == "uniform") return PriorityMode::uniform;
    if (name == "proportional") return PriorityMode::proportional;
    throw ConfigError("unknown priority mode '" + name + "'");
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("key '" + key + "' expects true/false, got '" + value + "'");
}

int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto range_pos = text.find("..");
    if (range_pos != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
        const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
        if (hi < lo) throw ConfigError("seed range '" + text + "' is empty");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw ConfigError("seed list '" + text + "' is empty");
    return seeds;
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    return canonical_text() == other.canonical_text();
}

PayoffMatrix ExperimentConfig::make_matrix() const {
    return generate_shifted_block_matrix(blocks, block_size, eps_reward);
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "[env]\n";
    out << "blocks = " << blocks << "\n";
    out << "block_size = " << block_size << "\n";
    out << "eps = " << format_double(eps_reward) << "\n";
    out << "\n[run]\n";
    out << "method = " << method_name(method) << "\n";
    out << "mode = " << mode_name(mode) << "\n";
    out << "population_size = " << train.population_size << "\n";
    out << "alpha = " << format_double(train.alpha) << "\n";
    out << "seeds = " << seeds_to_string(seeds) << "\n";
    out << "\n[train]\n";
    out << "gamma = " << format_double(train.gamma) << "\n";
    out << "lr = " << format_double(train.lr) << "\n";
    out << "batch_size = " << train.batch_size << "\n";
    out << "iterations = " << train.iterations << "\n";
    out << "eps_start = " << format_double(train.eps_start) << "\n";
    out << "eps_end = " << format_double(train.eps_end) << "\n";
    out << "eps_decay_steps = " << train.eps_decay_steps << "\n";
    out << "target_sync = " << train.target_sync << "\n";
    out << "buffer_capacity = " << train.buffer_capacity << "\n";
    out << "priority = " << priority_name(train.priority) << "\n";
    out << "per_alpha = " << format_double(train.per_alpha) << "\n";
    out << "per_beta = " << format_double(train.per_beta) << "\n";
    out << "per_eps = " << format_double(train.per_eps) << "\n";
    out << "double_dqn = " << (train.double_dqn ? "true" : "false") << "\n";
    out << "role_observations = " << (train.role_observations ? "true" : "false") << "\n";
    out << "checkpoint_interval = " << train.checkpoint_interval << "\n";
    out << "\n[net]\n";
    out << "trunk_hidden = " << train.sizes.trunk_hidden << "\n";
    out << "feature_dim = " << train.sizes.feature_dim << "\n";
    out << "head_hidden = " << train.sizes.head_hidden << "\n";
    out << "value_hidden = " << train.sizes.value_hidden << "\n";
    return out.str();
}

std::string ExperimentConfig::hash() const { return fnv1a64_hex(canonical_text()); }

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["env"] = {{"blocks", blocks}, {"block_size", block_size}, {"eps", eps_reward}};
    j["run"] = {{"method", method_name(method)},
                {"mode", mode_name(mode)},
                {"population_size", train.population_size},
                {"alpha", train.alpha},
                {"seeds", seeds}};
    j["train"] = {{"gamma", train.gamma},
                  {"lr", train.lr},
                  {"batch_size", train.batch_size},
                  {"iterations", train.iterations},
                  {"eps_start", train.eps_start},
                  {"eps_end", train.eps_end},
                  {"eps_decay_steps", train.eps_decay_steps},
                  {"target_sync", train.target_sync},
                  {"buffer_capacity", train.buffer_capacity},
                  {"priority", priority_name(train.priority)},
                  {"per_alpha", train.per_alpha},
                  {"per_beta", train.per_beta},
                  {"per_eps", train.per_eps},
                  {"double_dqn", train.double_dqn},
                  {"role_observations", train.role_observations},
                  {"checkpoint_interval", train.checkpoint_interval}};
    j["net"] = {{"trunk_hidden", train.sizes.trunk_hidden},
                {"feature_dim", train.sizes.feature_dim},
                {"head_hidden", train.sizes.head_hidden},
                {"value_hidden", train.sizes.value_hidden}};
    j["hash"] = hash();
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            if (section != "env" && section != "run" && section != "train" && section != "net") {
                throw ConfigError("unknown config section '[" + section + "]'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qualified = section + "." + key;
        if (qualified == "env.blocks") cfg.blocks = parse_int(value, qualified);
        else if (qualified == "env.block_size") cfg.block_size = parse_int(value, qualified);
        else if (qualified == "env.eps") cfg.eps_reward = parse_double(value);
        else if (qualified == "run.method") cfg.method = parse_method(value);
        else if (qualified == "run.mode") cfg.mode = parse_mode(value);
        else if (qualified == "run.population_size")
            cfg.train.population_size = parse_int(value, qualified);
        else if (qualified == "run.alpha") cfg.train.alpha = parse_double(value);
        else if (qualified == "run.seeds") cfg.seeds = parse_seed_list(value);
        else if (qualified == "train.gamma") cfg.train.gamma = parse_double(value);
        else if (qualified == "train.lr") cfg.train.lr = parse_double(value);
        else if (qualified == "train.batch_size")
            cfg.train.batch_size = parse_int(value, qualified);
        else if (qualified == "train.iterations")
            cfg.train.iterations = parse_int(value, qualified);
        else if (qualified == "train.eps_start") cfg.train.eps_start = parse_double(value);
        else if (qualified == "train.eps_end") cfg.train.eps_end = parse_double(value);
        else if (qualified == "train.eps_decay_steps")
            cfg.train.eps_decay_steps = parse_int(value, qualified);
        else if (qualified == "train.target_sync")
            cfg.train.target_sync = parse_int(value, qualified);
        else if (qualified == "train.buffer_capacity")
            cfg.train.buffer_capacity = static_cast<std::size_t>(parse_int(value, qualified));
        else if (qualified == "train.priority") cfg.train.priority = parse_priority(value);
        else if (qualified == "train.per_alpha") cfg.train.per_alpha = parse_double(value);
        else if (qualified == "train.per_beta") cfg.train.per_beta = parse_double(value);
        else if (qualified == "train.per_eps") cfg.train.per_eps = parse_double(value);
        else if (qualified == "train.double_dqn")
            cfg.train.double_dqn = parse_bool(value, qualified);
        else if (qualified == "train.role_observations")
            cfg.train.role_observations = parse_bool(value, qualified);
        else if (qualified == "train.checkpoint_interval")
            cfg.train.checkpoint_interval = parse_int(value, qualified);
        else if (qualified == "net.trunk_hidden")
            cfg.train.sizes.trunk_hidden = parse_int(value, qualified);
        else if (qualified == "net.feature_dim")
            cfg.train.sizes.feature_dim = parse_int(value, qualified);
        else if (qualified == "net.head_hidden")
            cfg.train.sizes.head_hidden = parse_int(value, qualified);
        else if (qualified == "net.value_hidden")
            cfg.train.sizes.value_hidden = parse_int(value, qualified);
        else throw ConfigError("unknown config key '" + qualified + "'");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    try {
        return parse(read_file(path));
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError("cannot load config " + path.string() + ": " + e.what());
    }
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    write_file(path, canonical_text());
}

}  // namespace metapop
