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

#include "metapop/meta_agent.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace metapop {

namespace {

constexpr char kCkptMagic[8] = {'M', 'P', 'C', 'K', 'P', 'T', '0', '1'};

Vec dueling_q(double state_value, const Vec& advantage) {
    const double mean = std::accumulate(advantage.begin(), advantage.end(), 0.0) /
                        static_cast<double>(advantage.size());
    Vec q(advantage.size());
    for (std::size_t a = 0; a < advantage.size(); ++a) {
        q[a] = state_value + advantage[a] - mean;
    }
    return q;
}

}  // namespace

MetaAgent MetaAgent::init(int obs_dim, int num_actions, int k,
                          const NetSizes& sizes, Rng& rng) {
    if (k < 1) throw std::invalid_argument("MetaAgent: population size must be >= 1");
    MetaAgent agent;
    agent.trunk = DenseNet::init({obs_dim, sizes.trunk_hidden, sizes.feature_dim}, rng);
    agent.heads.reserve(k);
    for (int u = 0; u < k; ++u) {
        agent.heads.push_back(
            DenseNet::init({sizes.feature_dim, sizes.head_hidden, num_actions}, rng));
    }
    agent.value = DenseNet::init({sizes.feature_dim, sizes.value_hidden, 1}, rng);
    return agent;
}

std::size_t MetaAgent::param_count() const {
    std::size_t count = trunk.param_count() + value.param_count();
    for (const auto& head : heads) count += head.param_count();
    return count;
}

bool MetaAgent::all_finite() const {
    if (!trunk.all_finite() || !value.all_finite()) return false;
    for (const auto& head : heads) {
        if (!head.all_finite()) return false;
    }
    return true;
}

Vec q_values(const MetaAgent& agent, std::span<const double> obs, int head) {
    if (head < 0 || head >= agent.population_size()) {
        throw std::out_of_range("q_values: head index outside population");
    }
    const Vec feature = net_forward(agent.trunk, obs);
    const Vec advantage = net_forward(agent.heads[head], feature);
    const double v = net_forward(agent.value, feature)[0];
    return dueling_q(v, advantage);
}

std::vector<Vec> q_values_all_heads(const MetaAgent& agent, std::span<const double> obs) {
    const Vec feature = net_forward(agent.trunk, obs);
    const double v = net_forward(agent.value, feature)[0];
    std::vector<Vec> rows;
    rows.reserve(agent.heads.size());
    for (const auto& head : agent.heads) {
        rows.push_back(dueling_q(v, net_forward(head, feature)));
    }
    return rows;
}

int greedy_action(std::span<const double> q) {
    if (q.empty()) throw std::invalid_argument("greedy_action: empty q vector");
    int best = 0;
    for (int a = 1; a < static_cast<int>(q.size()); ++a) {
        if (q[a] > q[best]) best = a;
    }
    return best;
}

int select_action(std::span<const double> q, double eps, Rng& rng) {
    if (q.empty()) throw std::invalid_argument("select_action: empty q vector");
    if (rng.next_double() < eps) {
        return static_cast<int>(rng.next_below(q.size()));
    }
    return greedy_action(q);
}

MetaAgent clone_to_target(const MetaAgent& online) { return online; }

void save_checkpoint(const MetaAgent& agent, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
    nlohmann::json j;
    j["population_size"] = agent.population_size();
    j["trunk_dims"] = agent.trunk.dims;
    j["head_dims"] = agent.heads.front().dims;
    j["value_dims"] = agent.value.dims;
    j["training_step"] = meta.training_step;
    j["seed"] = meta.seed;
    j["config_hash"] = meta.config_hash;
    const std::string header = j.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    out.write(kCkptMagic, sizeof(kCkptMagic));
    const std::uint64_t len = header.size();
    char lenb[8];
    for (int i = 0; i < 8; ++i) lenb[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    out.write(lenb, 8);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    save_net(agent.trunk, out);
    for (const auto& head : agent.heads) save_net(head, out);
    save_net(agent.value, out);
    if (!out) throw std::runtime_error("save_checkpoint: write failure " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string_view(magic, 8) != std::string_view(kCkptMagic, 8)) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
    }
    char lenb[8];
    in.read(lenb, 8);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) {
        len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenb[i])) << (8 * i);
    }
    if (len > (1u << 20)) throw std::runtime_error("load_checkpoint: oversized header");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    const nlohmann::json j = nlohmann::json::parse(header);

    Checkpoint ckpt;
    ckpt.meta.population_size = j.at("population_size").get<int>();
    ckpt.meta.trunk_dims = j.at("trunk_dims").get<std::vector<int>>();
    ckpt.meta.head_dims = j.at("head_dims").get<std::vector<int>>();
    ckpt.meta.value_dims = j.at("value_dims").get<std::vector<int>>();
    ckpt.meta.training_step = j.at("training_step").get<std::int64_t>();
    ckpt.meta.seed = j.at("seed").get<std::uint64_t>();
    ckpt.meta.config_hash = j.at("config_hash").get<std::string>();

    ckpt.agent.trunk = load_net(in);
    ckpt.agent.heads.reserve(ckpt.meta.population_size);
    for (int u = 0; u < ckpt.meta.population_size; ++u) {
        ckpt.agent.heads.push_back(load_net(in));
    }
    ckpt.agent.value = load_net(in);
    return ckpt;
}

}  // namespace metapop
