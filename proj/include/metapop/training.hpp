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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metapop/matrix_game.hpp"
#include "metapop/meta_agent.hpp"
#include "metapop/replay.hpp"

namespace metapop {

enum class TrainMode { I = 1, II, III, IV, V, VI };

TrainMode parse_mode(const std::string& name);  // "I".."VI"
std::string mode_name(TrainMode mode);

/// One row of the feasible-mode table: which pairings act, which objective
/// terms each side optimizes, and (derived) where each transition goes. A
/// transition feeds a loss exactly when the matching objective term exists:
/// main-main episodes feed buffer A when the main optimizes self-play, the
/// main's side of main-partner episodes always feeds A, the partner's side
/// feeds B only when the partner objective includes the with-main term, and
/// partner-partner episodes feed B when the partner optimizes self-play.
struct ModeSpec {
    TrainMode mode;
    bool act_mm, act_mp, act_pp;
    bool main_self_play;     // J(pi_m, pi_m) in the main objective
    bool partner_self_play;  // J(pi_p, pi_p) in the partner objective
    bool partner_with_main;  // J(pi_m, pi_p) in the partner objective

    bool mm_to_buffer_a() const { return act_mm && main_self_play; }
    static constexpr bool mp_main_to_buffer_a() { return true; }
    bool mp_partner_to_buffer_b() const { return partner_with_main; }
    bool pp_to_buffer_b() const { return act_pp && partner_self_play; }
};

ModeSpec mode_spec(TrainMode mode);

struct TrainConfig {
    double gamma = 0.999;
    double alpha = 1.0;
    double lr = 1e-3;
    int batch_size = 128;
    int iterations = 2000;
    double eps_start = 1.0;
    double eps_end = 0.05;
    int eps_decay_steps = 1000;
    int target_sync = 100;
    int population_size = 2;  // K
    std::uint64_t seed = 0;
    std::size_t buffer_capacity = 10000;
    PriorityMode priority = PriorityMode::uniform;
    double per_alpha = 0.6;
    double per_beta = 0.4;
    double per_eps = 1e-3;
    bool double_dqn = false;
    // The matrix game carries no observation, so agents act on a constant
    // context by default; role_observations feeds the seat one-hot instead,
    // which lets policies specialize per seat at the cost of seat-specific
    // conventions.
    bool role_observations = false;
    NetSizes sizes;
    int checkpoint_interval = 0;  // 0 disables periodic checkpoints
    std::filesystem::path checkpoint_dir;
};

/// Gradient and optimizer state mirroring a MetaAgent.
struct MetaGrads {
    NetGrads trunk;
    std::vector<NetGrads> heads;
    NetGrads value;
    static MetaGrads zeros_like(const MetaAgent& agent);
    void set_zero();
};

struct MetaAdam {
    AdamState trunk;
    std::vector<AdamState> heads;
    AdamState value;
    static MetaAdam init(const MetaAgent& agent, double lr);
};

void meta_adam_step(MetaAdam& opt, MetaAgent& agent, const MetaGrads& grads);

struct LossResult {
    double loss = 0.0;
    Vec td_errors;  // per item, for prioritized replay
};

/// Squared TD residual for the single-head main agent:
///   delta_j = r_j + gamma (1-done_j) max_a Q_target(h'_j, a) - Q_online(h_j, a_j)
/// loss = (1/N) sum w_j delta_j^2. Gradients (accumulated into `grads`) flow
/// only through the online net.
LossResult main_td_loss(const MetaAgent& online, const MetaAgent& target,
                        std::span<const Transition> batch, std::span<const double> weights,
                        double gamma, MetaGrads& grads, bool double_dqn = false);

/// Partner loss: per item, delta_j^2 + alpha sum_{i != u_j} Q_online(u_i, h_j, a_j),
/// averaged with importance weights. Minimizing the alpha term maximizes the
/// q-form favor surrogate; its gradients reach the off-heads, the shared
/// trunk and the value stream, never head u_j.
LossResult partner_loss(const MetaAgent& online, const MetaAgent& target,
                        std::span<const Transition> batch, std::span<const double> weights,
                        double gamma, double alpha, MetaGrads& grads,
                        bool double_dqn = false);

struct ActStats {
    double mm = std::numeric_limits<double>::quiet_NaN();
    double mp = std::numeric_limits<double>::quiet_NaN();
    double pp = std::numeric_limits<double>::quiet_NaN();
};

/// Plays one episode per act group, seats per the acting protocol (the first
/// listed agent is player 1/row): main-main, then main-partner with a
/// uniformly drawn head as player 2, then partner-partner with two
/// independently drawn heads. Stores transitions per the mode's routing and
/// returns the per-group episode rewards.
ActStats act_phase(const ModeSpec& spec, const MetaAgent& main, const MetaAgent& partners,
                   const PayoffMatrix& env, ReplayBuffer& buffer_a, ReplayBuffer& buffer_b,
                   double eps, Rng& rng, bool role_observations = false);

struct MetricsRow {
    int iteration;
    double mm_score, mp_score, pp_score;
    double diff_prob;
    double main_loss, partner_loss;
    double epsilon;
};

struct MetricsTrace {
    std::vector<MetricsRow> rows;
    void save_csv(const std::filesystem::path& path) const;
    static MetricsTrace load_csv(const std::filesystem::path& path);
};

enum class Method { scapt, alpha_zero_ablation, self_play, individual_population };

Method parse_method(const std::string& name);
std::string method_name(Method method);

struct TrainResult {
    MetaAgent main;                     // single-head policy; for
                                        // individual_population, agent 0
    std::optional<MetaAgent> partners;  // population (scapt variants)
    std::vector<MetaAgent> individuals; // individual_population only
    MetricsTrace trace;
};

/// Runs the full loop: act, one gradient step per buffer per iteration,
/// target sync every target_sync steps, linear epsilon decay, metrics per
/// iteration. Throws DivergenceError on a non-finite loss.
TrainResult train(const TrainConfig& cfg, const PayoffMatrix& env, TrainMode mode,
                  Method method = Method::scapt);

/// Contexts the partner population encounters under a mode's act groups
/// (used as the diff-prob context batch).
std::vector<Vec> partner_contexts(const ModeSpec& spec, bool role_observations = false);

}  // namespace metapop
