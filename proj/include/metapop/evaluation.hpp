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

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metapop/matrix_game.hpp"
#include "metapop/meta_agent.hpp"
#include "metapop/training.hpp"

namespace metapop {

/// A greedy (eps = 0) policy over one agent or one population head.
struct PolicyHandle {
    enum class Kind { main_agent, meta_head, stranger };
    Kind kind = Kind::main_agent;
    std::shared_ptr<const MetaAgent> params;
    int head = 0;
    std::string label;

    /// Greedy action for the given seat. The acting context is inferred from
    /// the trunk input width (constant context or role observation).
    int action(Role role) const;
};

PolicyHandle make_policy(PolicyHandle::Kind kind, std::shared_ptr<const MetaAgent> params,
                         int head, std::string label);

struct MeanStderr {
    double mean = 0.0;
    double stderr = 0.0;
    int count = 0;
};

MeanStderr mean_stderr(std::span<const double> values);

/// Mean return of `row_player` vs `col_player` over `episodes` episodes.
/// Greedy policies on a deterministic game give the same value for any
/// episode count.
double estimate_J(const PolicyHandle& row_player, const PolicyHandle& col_player,
                  const PayoffMatrix& env, int episodes, Rng& rng);

/// Intra-algorithm cross-play: mean of J over all ordered pairs i != j (both
/// seatings), stderr over the pair values. Requires >= 2 models.
MeanStderr intra_xp(const std::vector<PolicyHandle>& models, const PayoffMatrix& env,
                    std::vector<std::vector<double>>* pairwise_out = nullptr);

struct OneSidedReport {
    MeanStderr score;                          // stderr over per-model means
    std::vector<std::vector<double>> matrix;   // models x strangers
};

/// One-sided zero-shot score: every model paired with every stranger, each
/// entry averaged over both seatings. The matrix rows follow the model pool
/// (heatmap layout: one row per tested agent).
OneSidedReport one_sided_zsc_xp(const std::vector<PolicyHandle>& models,
                                const std::vector<PolicyHandle>& strangers,
                                const PayoffMatrix& env);

/// Trains n independent self-play agents (plain Q-learning, parameter
/// sharing, no MI term) on distinct seeds and returns greedy handles.
std::vector<PolicyHandle> build_stranger_pool(const PayoffMatrix& env, int n,
                                              std::span<const std::uint64_t> seeds,
                                              const TrainConfig& base);

struct EvalReport {
    std::vector<std::string> model_labels;
    std::vector<std::string> partner_labels;
    std::vector<std::vector<double>> pairwise;
    MeanStderr intra;
    MeanStderr one_sided;
    bool has_intra = false;
    bool has_one_sided = false;
    int episodes_per_pair = 1;

    void save_csv(const std::filesystem::path& path) const;
    void save_json(const std::filesystem::path& path) const;
};

/// Standalone SVG heatmap with a sequential color scale (deeper = higher)
/// and per-cell values.
void write_heatmap_svg(const std::filesystem::path& path,
                       const std::vector<std::vector<double>>& matrix,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::string& title);

}  // namespace metapop
