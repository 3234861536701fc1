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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metapop/net.hpp"
#include "metapop/rng.hpp"

namespace metapop {

struct NetSizes {
    int trunk_hidden = 64;
    int feature_dim = 64;
    int head_hidden = 32;
    int value_hidden = 32;
};

/// Hierarchical agent: one shared trunk (observation -> feature), K
/// sub-decision heads (feature -> advantage over actions) and one shared
/// value stream (feature -> scalar). K = 1 gives the plain single agent; the
/// population grows by adding head subsets only.
struct MetaAgent {
    DenseNet trunk;
    std::vector<DenseNet> heads;
    DenseNet value;

    static MetaAgent init(int obs_dim, int num_actions, int k,
                          const NetSizes& sizes, Rng& rng);

    int population_size() const { return static_cast<int>(heads.size()); }
    int obs_dim() const { return trunk.input_dim(); }
    int num_actions() const { return heads.front().output_dim(); }
    std::size_t param_count() const;
    bool all_finite() const;
};

/// Intermediate activations for one observation, reusable across heads.
struct MetaForward {
    ForwardCache trunk;
    ForwardCache value;
    std::vector<ForwardCache> heads;  // indexed by head; may be sparse
    Vec feature;
    double state_value = 0.0;
};

/// Dueling composition Q(u,h,.) = v(h) + A(u,h,.) - mean_a A(u,h,a).
Vec q_values(const MetaAgent& agent, std::span<const double> obs, int head);

/// All heads in one pass; the trunk and value stream are evaluated once.
/// Row u equals q_values(agent, obs, u).
std::vector<Vec> q_values_all_heads(const MetaAgent& agent, std::span<const double> obs);

/// Lowest index wins ties.
int greedy_action(std::span<const double> q);

/// With probability 1-eps the greedy action, otherwise uniform over all
/// actions.
int select_action(std::span<const double> q, double eps, Rng& rng);

/// Deep copy for the target network; later online updates leave it untouched.
MetaAgent clone_to_target(const MetaAgent& online);

struct CheckpointMeta {
    int population_size = 0;
    std::vector<int> trunk_dims;
    std::vector<int> head_dims;
    std::vector<int> value_dims;
    std::int64_t training_step = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

void save_checkpoint(const MetaAgent& agent, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
struct Checkpoint {
    MetaAgent agent;
    CheckpointMeta meta;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace metapop
