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

#include <utility>
#include <vector>

#include "metapop/meta_agent.hpp"
#include "metapop/net.hpp"

namespace metapop {

/// How a head's favor for an action is read off the network.
enum class FavorForm { probability, q_value, advantage };

/// Per transition, every head's favor for the action that was actually taken.
struct FavorTable {
    FavorForm form = FavorForm::q_value;
    std::vector<Vec> values;  // [transition][head]
};

/// Uniform module prior p(u_i | h_j). Heads are drawn uniformly while acting,
/// so the empirical prior is uniform.
Vec uniform_prior(int k);

/// Monte-Carlo estimate of the conditional mutual information I(A;U|H):
///   (1/N) sum_j [ log p(a_j|u_j,h_j) - log sum_i p(u_i|h_j) p(a_j|u_i,h_j) ]
/// cond_probs[j] is the K x |A| table of head-conditional action
/// probabilities in context h_j; samples[j] = (u_j, a_j). Rows must sum to 1
/// (tolerance 1e-9) and every sampled probability must be positive.
double exact_cmi(const std::vector<std::vector<Vec>>& cond_probs, const Vec& prior,
                 const std::vector<std::pair<int, int>>& samples);

/// Trainable surrogate: -(1/N) sum_j sum_{i != u_j} F(u_i, h_j, a_j).
/// Returns 0 (with a warning) for singleton populations where the inner sum
/// is empty.
double surrogate_mi(const FavorTable& favors, const std::vector<int>& taken_heads);

/// Favor extraction at the taken action across all heads.
FavorTable favor_from_probs(const std::vector<std::vector<Vec>>& action_distributions,
                            const std::vector<int>& taken_actions);
FavorTable favor_from_q(const std::vector<std::vector<Vec>>& q_tables,
                        const std::vector<int>& taken_actions,
                        FavorForm form = FavorForm::q_value);

struct Theorem1Result {
    bool applicable = false;
    bool holds = false;
    double i_before = 0.0;
    double i_after = 0.0;
};

/// Checks the monotonicity guarantee for a single transition: applicable when
/// exactly one off-head v (v != u_j) whose argmax favor is a_j has its favor
/// for a_j reduced while every other entry relevant to I_j stays fixed. When
/// applicable, computes I_j under the induced policies (probability form
/// directly; q/advantage forms via the greedy policy, or eps-greedy when
/// greedy_eps > 0) and reports holds = (I_j after >= I_j before).
Theorem1Result theorem1_check(FavorForm form, const std::vector<Vec>& favors_before,
                              const std::vector<Vec>& favors_after, int taken_head,
                              int taken_action, const Vec& prior,
                              double greedy_eps = 0.0);

/// Fraction of unordered head pairs whose greedy actions agree, over the
/// given contexts. Lower means a more diverse population. Requires K >= 2.
double diff_prob(const MetaAgent& agent, const std::vector<Vec>& contexts);

}  // namespace metapop
