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

#include "metapop/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "metapop/diversity.hpp"
#include "metapop/errors.hpp"
#include "metapop/io_util.hpp"
#include "metapop/kernels.hpp"

namespace metapop {

TrainMode parse_mode(const std::string& name) {
    if (name == "I") return TrainMode::I;
    if (name == "II") return TrainMode::II;
    if (name == "III") return TrainMode::III;
    if (name == "IV") return TrainMode::IV;
    if (name == "V") return TrainMode::V;
    if (name == "VI") return TrainMode::VI;
    throw ConfigError("unknown training mode '" + name + "' (expected I..VI)");
}

std::string mode_name(TrainMode mode) {
    switch (mode) {
        case TrainMode::I: return "I";
        case TrainMode::II: return "II";
        case TrainMode::III: return "III";
        case TrainMode::IV: return "IV";
        case TrainMode::V: return "V";
        case TrainMode::VI: return "VI";
    }
    throw ConfigError("invalid training mode value");
}

ModeSpec mode_spec(TrainMode mode) {
    switch (mode) {
        case TrainMode::I:
            return {mode, false, true, false, false, false, true};
        case TrainMode::II:
            return {mode, true, true, false, true, false, true};
        case TrainMode::III:
            return {mode, false, true, true, false, true, false};
        case TrainMode::IV:
            return {mode, true, true, true, true, true, false};
        case TrainMode::V:
            return {mode, false, true, true, false, true, true};
        case TrainMode::VI:
            return {mode, true, true, true, true, true, true};
    }
    throw ConfigError("invalid training mode value");
}

Method parse_method(const std::string& name) {
    if (name == "scapt") return Method::scapt;
    if (name == "alpha_zero_ablation") return Method::alpha_zero_ablation;
    if (name == "self_play") return Method::self_play;
    if (name == "individual_population") return Method::individual_population;
    throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method method) {
    switch (method) {
        case Method::scapt: return "scapt";
        case Method::alpha_zero_ablation: return "alpha_zero_ablation";
        case Method::self_play: return "self_play";
        case Method::individual_population: return "individual_population";
    }
    throw ConfigError("invalid method value");
}

MetaGrads MetaGrads::zeros_like(const MetaAgent& agent) {
    MetaGrads g;
    g.trunk = NetGrads::zeros_like(agent.trunk);
    g.heads.reserve(agent.heads.size());
    for (const auto& head : agent.heads) g.heads.push_back(NetGrads::zeros_like(head));
    g.value = NetGrads::zeros_like(agent.value);
    return g;
}

void MetaGrads::set_zero() {
    trunk.set_zero();
    for (auto& h : heads) h.set_zero();
    value.set_zero();
}

MetaAdam MetaAdam::init(const MetaAgent& agent, double lr) {
    MetaAdam opt;
    opt.trunk = AdamState::init(agent.trunk, lr);
    opt.heads.reserve(agent.heads.size());
    for (const auto& head : agent.heads) opt.heads.push_back(AdamState::init(head, lr));
    opt.value = AdamState::init(agent.value, lr);
    return opt;
}

void meta_adam_step(MetaAdam& opt, MetaAgent& agent, const MetaGrads& grads) {
    adam_step(opt.trunk, agent.trunk, grads.trunk);
    for (std::size_t u = 0; u < agent.heads.size(); ++u) {
        adam_step(opt.heads[u], agent.heads[u], grads.heads[u]);
    }
    adam_step(opt.value, agent.value, grads.value);
}

namespace {

double td_target_value(const MetaAgent& online, const MetaAgent& target,
                       const Transition& t, int head, double gamma, bool double_dqn) {
    if (t.done) return t.reward;
    if (double_dqn) {
        const Vec q_next_online = q_values(online, t.next_obs, head);
        const int a_star = greedy_action(q_next_online);
        return t.reward + gamma * q_values(target, t.next_obs, head)[a_star];
    }
    const Vec q_next = q_values(target, t.next_obs, head);
    return t.reward + gamma * *std::max_element(q_next.begin(), q_next.end());
}

LossResult td_loss_impl(const MetaAgent& online, const MetaAgent& target,
                        std::span<const Transition> batch, std::span<const double> weights,
                        double gamma, double alpha, bool is_partner, MetaGrads& grads,
                        bool double_dqn) {
    if (batch.empty()) throw std::invalid_argument("td loss: empty batch");
    if (weights.size() != batch.size()) {
        throw std::invalid_argument("td loss: weight count mismatch");
    }
    const int k = online.population_size();
    const int actions = online.num_actions();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const bool all_heads = is_partner && alpha != 0.0 && k > 1;

    LossResult result;
    result.td_errors.reserve(batch.size());
    double loss = 0.0;

    ForwardCache trunk_cache, value_cache;
    std::vector<ForwardCache> head_caches(k);
    std::vector<Vec> advantages(k);
    Vec g_adv(actions);
    Vec g_feature;

    for (std::size_t j = 0; j < batch.size(); ++j) {
        const Transition& t = batch[j];
        int u = 0;
        if (is_partner) {
            if (t.head < 0 || t.head >= k) {
                throw std::invalid_argument(
                    "partner_loss: transition carries no valid head index");
            }
            u = t.head;
        }
        const double w = weights[j];

        net_forward(online.trunk, t.obs, &trunk_cache);
        const Vec& feature = trunk_cache.act.empty() ? trunk_cache.input : trunk_cache.act.back();
        const double v = net_forward(online.value, feature, &value_cache)[0];
        const int first = all_heads ? 0 : u;
        const int last = all_heads ? k - 1 : u;
        for (int i = first; i <= last; ++i) {
            advantages[i] = net_forward(online.heads[i], feature, &head_caches[i]);
        }
        auto q_of = [&](int head, int a) {
            const Vec& adv = advantages[head];
            const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) /
                                static_cast<double>(actions);
            return v + adv[a] - mean;
        };

        const double q_taken = q_of(u, t.action);
        const double delta = td_target_value(online, target, t, u, gamma, double_dqn) - q_taken;
        double item_loss = delta * delta;

        g_feature.assign(feature.size(), 0.0);
        double g_value = 0.0;
        bool any = false;
        for (int i = first; i <= last; ++i) {
            double gq = 0.0;
            if (i == u) {
                gq = -2.0 * delta;
            } else {
                gq = alpha;
                item_loss += alpha * q_of(i, t.action);
            }
            if (gq == 0.0) continue;
            gq *= w * inv_n;
            std::fill(g_adv.begin(), g_adv.end(), -gq / actions);
            g_adv[t.action] += gq;
            net_backward_acc(online.heads[i], head_caches[i], g_adv, grads.heads[i], g_feature);
            g_value += gq;
            any = true;
        }
        if (any) {
            const Vec g_v{g_value};
            net_backward_acc(online.value, value_cache, g_v, grads.value, g_feature);
            net_backward(online.trunk, trunk_cache, g_feature, grads.trunk);
        }
        loss += w * item_loss;
        result.td_errors.push_back(delta);
    }
    result.loss = loss * inv_n;
    return result;
}

}  // namespace

LossResult main_td_loss(const MetaAgent& online, const MetaAgent& target,
                        std::span<const Transition> batch, std::span<const double> weights,
                        double gamma, MetaGrads& grads, bool double_dqn) {
    if (online.population_size() != 1) {
        throw std::invalid_argument("main_td_loss: the main agent has exactly one head");
    }
    return td_loss_impl(online, target, batch, weights, gamma, 0.0, false, grads, double_dqn);
}

LossResult partner_loss(const MetaAgent& online, const MetaAgent& target,
                        std::span<const Transition> batch, std::span<const double> weights,
                        double gamma, double alpha, MetaGrads& grads, bool double_dqn) {
    return td_loss_impl(online, target, batch, weights, gamma, alpha, true, grads, double_dqn);
}

ActStats act_phase(const ModeSpec& spec, const MetaAgent& main, const MetaAgent& partners,
                   const PayoffMatrix& env, ReplayBuffer& buffer_a, ReplayBuffer& buffer_b,
                   double eps, Rng& rng, bool role_observations) {
    ActStats stats;
    const Vec row_obs = acting_context(Role::row, role_observations);
    const Vec col_obs = acting_context(Role::col, role_observations);
    const int k = partners.population_size();
    auto act = [&](const MetaAgent& agent, int head, const Vec& obs) {
        return select_action(q_values(agent, obs, head), eps, rng);
    };
    if (spec.act_mm) {
        const int a_row = act(main, 0, row_obs);
        const int a_col = act(main, 0, col_obs);
        const double r = play(env, a_row, a_col).reward;
        if (spec.mm_to_buffer_a()) {
            buffer_a.push({row_obs, kMainAgentHead, a_row, r, row_obs, true});
            buffer_a.push({col_obs, kMainAgentHead, a_col, r, col_obs, true});
        }
        stats.mm = r;
    }
    if (spec.act_mp) {
        const int u = static_cast<int>(rng.next_below(k));
        const int a_row = act(main, 0, row_obs);
        const int a_col = act(partners, u, col_obs);
        const double r = play(env, a_row, a_col).reward;
        // The partner head index rides along on the main's transition for
        // bookkeeping; the main loss does not condition on it.
        buffer_a.push({row_obs, u, a_row, r, row_obs, true});
        if (spec.mp_partner_to_buffer_b()) {
            buffer_b.push({col_obs, u, a_col, r, col_obs, true});
        }
        stats.mp = r;
    }
    if (spec.act_pp) {
        const int u1 = static_cast<int>(rng.next_below(k));
        const int u2 = static_cast<int>(rng.next_below(k));
        const int a_row = act(partners, u1, row_obs);
        const int a_col = act(partners, u2, col_obs);
        const double r = play(env, a_row, a_col).reward;
        if (spec.pp_to_buffer_b()) {
            buffer_b.push({row_obs, u1, a_row, r, row_obs, true});
            buffer_b.push({col_obs, u2, a_col, r, col_obs, true});
        }
        stats.pp = r;
    }
    return stats;
}

std::vector<Vec> partner_contexts(const ModeSpec& spec, bool role_observations) {
    if (!role_observations) return {acting_context(Role::col, false)};
    std::vector<Vec> contexts;
    contexts.push_back(observation(Role::col));  // partner seat in MP
    if (spec.act_pp) contexts.push_back(observation(Role::row));
    return contexts;
}

void MetricsTrace::save_csv(const std::filesystem::path& path) const {
    std::ostringstream out;
    out << "iteration,mm_score,mp_score,pp_score,diff_prob,main_loss,partner_loss,epsilon\n";
    for (const MetricsRow& r : rows) {
        out << r.iteration << ',' << format_double(r.mm_score) << ','
            << format_double(r.mp_score) << ',' << format_double(r.pp_score) << ','
            << format_double(r.diff_prob) << ',' << format_double(r.main_loss) << ','
            << format_double(r.partner_loss) << ',' << format_double(r.epsilon) << '\n';
    }
    write_file(path, out.str());
}

MetricsTrace MetricsTrace::load_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw MissingArtifactError("empty metrics csv: " + path.string());
    MetricsTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8) throw MissingArtifactError("bad metrics row in " + path.string());
        MetricsRow r;
        r.iteration = std::stoi(cells[0]);
        r.mm_score = parse_double(cells[1]);
        r.mp_score = parse_double(cells[2]);
        r.pp_score = parse_double(cells[3]);
        r.diff_prob = parse_double(cells[4]);
        r.main_loss = parse_double(cells[5]);
        r.partner_loss = parse_double(cells[6]);
        r.epsilon = parse_double(cells[7]);
        trace.rows.push_back(r);
    }
    return trace;
}

namespace {

double eps_at(const TrainConfig& cfg, int iteration) {
    const double f = std::min(1.0, static_cast<double>(iteration) /
                                       static_cast<double>(std::max(1, cfg.eps_decay_steps)));
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * f;
}

void guard_finite(double loss, const char* which, int iteration) {
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << which << " loss diverged (non-finite) at iteration " << iteration;
        throw DivergenceError(msg.str());
    }
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) throw ConfigError("gamma must be in (0, 1]");
    if (cfg.alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (cfg.lr <= 0.0) throw ConfigError("lr must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");
    if (cfg.target_sync < 1) throw ConfigError("target_sync must be >= 1");
    if (cfg.population_size < 1) throw ConfigError("population size K must be >= 1");
    if (cfg.buffer_capacity == 0) throw ConfigError("buffer_capacity must be > 0");
    if (cfg.eps_start < 0.0 || cfg.eps_start > 1.0 || cfg.eps_end < 0.0 || cfg.eps_end > 1.0) {
        throw ConfigError("epsilon schedule must stay within [0, 1]");
    }
    if (cfg.eps_decay_steps < 1) throw ConfigError("eps_decay_steps must be >= 1");
}

ReplayBuffer make_buffer(const TrainConfig& cfg) {
    return ReplayBuffer(cfg.buffer_capacity, cfg.priority, cfg.per_alpha, cfg.per_beta,
                        cfg.per_eps);
}

void maybe_checkpoint(const TrainConfig& cfg, int iteration, const MetaAgent& main,
                      const MetaAgent* partners) {
    if (cfg.checkpoint_interval <= 0 || cfg.checkpoint_dir.empty()) return;
    if (iteration % cfg.checkpoint_interval != 0) return;
    CheckpointMeta meta;
    meta.training_step = iteration;
    meta.seed = cfg.seed;
    save_checkpoint(main, meta,
                    cfg.checkpoint_dir / ("main_" + std::to_string(iteration) + ".ckpt"));
    if (partners) {
        save_checkpoint(*partners, meta,
                        cfg.checkpoint_dir / ("partners_" + std::to_string(iteration) + ".ckpt"));
    }
}

TrainResult train_scapt(const TrainConfig& cfg, const PayoffMatrix& env, TrainMode mode,
                        double alpha) {
    Rng rng(cfg.seed);
    const int actions = env.dim();
    const int ctx_dim = context_dim(cfg.role_observations);
    MetaAgent main = MetaAgent::init(ctx_dim, actions, 1, cfg.sizes, rng);
    MetaAgent partners =
        MetaAgent::init(ctx_dim, actions, cfg.population_size, cfg.sizes, rng);
    MetaAgent main_target = clone_to_target(main);
    MetaAgent partners_target = clone_to_target(partners);
    MetaAdam main_opt = MetaAdam::init(main, cfg.lr);
    MetaAdam partner_opt = MetaAdam::init(partners, cfg.lr);
    MetaGrads main_grads = MetaGrads::zeros_like(main);
    MetaGrads partner_grads = MetaGrads::zeros_like(partners);
    ReplayBuffer buffer_a = make_buffer(cfg);
    ReplayBuffer buffer_b = make_buffer(cfg);
    const ModeSpec spec = mode_spec(mode);
    const std::vector<Vec> contexts = partner_contexts(spec, cfg.role_observations);

    TrainResult result{std::move(main), std::nullopt, {}, {}};
    result.partners = std::move(partners);
    MetaAgent& m = result.main;
    MetaAgent& p = *result.partners;

    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double eps = eps_at(cfg, iter);
        const ActStats stats =
            act_phase(spec, m, p, env, buffer_a, buffer_b, eps, rng, cfg.role_observations);
        double main_loss_v = nan;
        double partner_loss_v = nan;
        if (buffer_a.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            auto batch = buffer_a.sample(cfg.batch_size, rng);
            main_grads.set_zero();
            const LossResult res = main_td_loss(m, main_target, batch.items, batch.weights,
                                                cfg.gamma, main_grads, cfg.double_dqn);
            guard_finite(res.loss, "main", iter);
            meta_adam_step(main_opt, m, main_grads);
            buffer_a.update_priorities(batch.indices, res.td_errors);
            main_loss_v = res.loss;
        }
        if (buffer_b.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            auto batch = buffer_b.sample(cfg.batch_size, rng);
            partner_grads.set_zero();
            const LossResult res = partner_loss(p, partners_target, batch.items, batch.weights,
                                                cfg.gamma, alpha, partner_grads, cfg.double_dqn);
            guard_finite(res.loss, "partner", iter);
            meta_adam_step(partner_opt, p, partner_grads);
            buffer_b.update_priorities(batch.indices, res.td_errors);
            partner_loss_v = res.loss;
        }
        if (iter % cfg.target_sync == 0) {
            main_target = clone_to_target(m);
            partners_target = clone_to_target(p);
        }
        const double dp = cfg.population_size >= 2 ? diff_prob(p, contexts) : nan;
        result.trace.rows.push_back(
            {iter, stats.mm, stats.mp, stats.pp, dp, main_loss_v, partner_loss_v, eps});
        maybe_checkpoint(cfg, iter, m, &p);
    }
    return result;
}

TrainResult train_self_play(const TrainConfig& cfg, const PayoffMatrix& env) {
    Rng rng(cfg.seed);
    const int actions = env.dim();
    MetaAgent agent =
        MetaAgent::init(context_dim(cfg.role_observations), actions, 1, cfg.sizes, rng);
    MetaAgent target = clone_to_target(agent);
    MetaAdam opt = MetaAdam::init(agent, cfg.lr);
    MetaGrads grads = MetaGrads::zeros_like(agent);
    ReplayBuffer buffer = make_buffer(cfg);
    const Vec row_obs = acting_context(Role::row, cfg.role_observations);
    const Vec col_obs = acting_context(Role::col, cfg.role_observations);

    TrainResult result{std::move(agent), std::nullopt, {}, {}};
    MetaAgent& a = result.main;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double eps = eps_at(cfg, iter);
        const int a_row = select_action(q_values(a, row_obs, 0), eps, rng);
        const int a_col = select_action(q_values(a, col_obs, 0), eps, rng);
        const double r = play(env, a_row, a_col).reward;
        buffer.push({row_obs, kMainAgentHead, a_row, r, row_obs, true});
        buffer.push({col_obs, kMainAgentHead, a_col, r, col_obs, true});
        double loss_v = nan;
        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            auto batch = buffer.sample(cfg.batch_size, rng);
            grads.set_zero();
            const LossResult res = main_td_loss(a, target, batch.items, batch.weights,
                                                cfg.gamma, grads, cfg.double_dqn);
            guard_finite(res.loss, "self-play", iter);
            meta_adam_step(opt, a, grads);
            buffer.update_priorities(batch.indices, res.td_errors);
            loss_v = res.loss;
        }
        if (iter % cfg.target_sync == 0) target = clone_to_target(a);
        result.trace.rows.push_back({iter, r, nan, nan, nan, loss_v, nan, eps});
        maybe_checkpoint(cfg, iter, a, nullptr);
    }
    return result;
}

TrainResult train_individuals(const TrainConfig& cfg, const PayoffMatrix& env) {
    Rng rng(cfg.seed);
    const int actions = env.dim();
    const int k = cfg.population_size;
    std::vector<MetaAgent> agents;
    agents.reserve(k);
    for (int i = 0; i < k; ++i) {
        agents.push_back(
            MetaAgent::init(context_dim(cfg.role_observations), actions, 1, cfg.sizes, rng));
    }
    std::vector<MetaAgent> targets;
    targets.reserve(k);
    for (const auto& a : agents) targets.push_back(clone_to_target(a));
    std::vector<MetaAdam> opts;
    std::vector<MetaGrads> grads;
    std::vector<ReplayBuffer> buffers;
    opts.reserve(k);
    grads.reserve(k);
    buffers.reserve(k);
    for (const auto& a : agents) {
        opts.push_back(MetaAdam::init(a, cfg.lr));
        grads.push_back(MetaGrads::zeros_like(a));
        buffers.push_back(make_buffer(cfg));
    }
    const Vec row_obs = acting_context(Role::row, cfg.role_observations);
    const Vec col_obs = acting_context(Role::col, cfg.role_observations);
    const auto nan = std::numeric_limits<double>::quiet_NaN();

    TrainResult result{MetaAgent{}, std::nullopt, {}, {}};
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double eps = eps_at(cfg, iter);
        double reward_sum = 0.0;
        for (int i = 0; i < k; ++i) {
            const int a_row = select_action(q_values(agents[i], row_obs, 0), eps, rng);
            const int a_col = select_action(q_values(agents[i], col_obs, 0), eps, rng);
            const double r = play(env, a_row, a_col).reward;
            reward_sum += r;
            buffers[i].push({row_obs, kMainAgentHead, a_row, r, row_obs, true});
            buffers[i].push({col_obs, kMainAgentHead, a_col, r, col_obs, true});
        }
        double loss_sum = 0.0;
        int loss_count = 0;
        for (int i = 0; i < k; ++i) {
            if (buffers[i].size() < static_cast<std::size_t>(cfg.batch_size)) continue;
            auto batch = buffers[i].sample(cfg.batch_size, rng);
            grads[i].set_zero();
            const LossResult res = main_td_loss(agents[i], targets[i], batch.items,
                                                batch.weights, cfg.gamma, grads[i],
                                                cfg.double_dqn);
            guard_finite(res.loss, "individual", iter);
            meta_adam_step(opts[i], agents[i], grads[i]);
            buffers[i].update_priorities(batch.indices, res.td_errors);
            loss_sum += res.loss;
            ++loss_count;
        }
        if (iter % cfg.target_sync == 0) {
            for (int i = 0; i < k; ++i) targets[i] = clone_to_target(agents[i]);
        }
        double dp = nan;
        if (k >= 2) {
            std::int64_t agree = 0, total = 0;
            std::vector<Vec> dp_contexts{row_obs};
            if (cfg.role_observations) dp_contexts.push_back(col_obs);
            for (const Vec& obs : dp_contexts) {
                std::vector<int> acts(k);
                for (int i = 0; i < k; ++i) acts[i] = greedy_action(q_values(agents[i], obs, 0));
                for (int i = 0; i < k; ++i) {
                    for (int j = i + 1; j < k; ++j) {
                        agree += acts[i] == acts[j];
                        ++total;
                    }
                }
            }
            dp = static_cast<double>(agree) / static_cast<double>(total);
        }
        result.trace.rows.push_back({iter, reward_sum / k, nan, nan, dp,
                                     loss_count ? loss_sum / loss_count : nan, nan, eps});
    }
    result.main = agents.front();
    result.individuals = std::move(agents);
    return result;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const PayoffMatrix& env, TrainMode mode,
                  Method method) {
    validate_config(cfg);
    switch (method) {
        case Method::scapt:
            return train_scapt(cfg, env, mode, cfg.alpha);
        case Method::alpha_zero_ablation:
            return train_scapt(cfg, env, mode, 0.0);
        case Method::self_play:
            return train_self_play(cfg, env);
        case Method::individual_population:
            return train_individuals(cfg, env);
    }
    throw ConfigError("invalid method value");
}

}  // namespace metapop
