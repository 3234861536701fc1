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

#include "metapop/diversity.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace metapop {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_distribution(const Vec& row, const char* what) {
    double sum = 0.0;
    for (double p : row) {
        if (p < -1e-12 || p > 1.0 + 1e-12) {
            throw std::invalid_argument(std::string(what) + ": entry outside [0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
        throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
    }
}

/// Policy induced by a favor table row: probability rows pass through, q and
/// advantage rows induce the greedy (or eps-greedy) action distribution.
Vec induced_policy(FavorForm form, const Vec& favors, double greedy_eps) {
    if (form == FavorForm::probability) return favors;
    const int n = static_cast<int>(favors.size());
    const int best = greedy_action(favors);
    Vec p(n, greedy_eps > 0.0 ? greedy_eps / (n - 1) : 0.0);
    p[best] = greedy_eps > 0.0 ? 1.0 - greedy_eps : 1.0;
    return p;
}

double cmi_term(const std::vector<Vec>& policy_rows, const Vec& prior, int u, int a) {
    const double own = policy_rows[u][a];
    double mixture = 0.0;
    for (std::size_t i = 0; i < policy_rows.size(); ++i) {
        mixture += prior[i] * policy_rows[i][a];
    }
    if (own <= 0.0 || mixture <= 0.0) {
        throw std::domain_error("conditional MI term undefined: zero probability at sample");
    }
    return std::log(own) - std::log(mixture);
}

}  // namespace

Vec uniform_prior(int k) {
    if (k < 1) throw std::invalid_argument("uniform_prior: k must be >= 1");
    return Vec(k, 1.0 / k);
}

double exact_cmi(const std::vector<std::vector<Vec>>& cond_probs, const Vec& prior,
                 const std::vector<std::pair<int, int>>& samples) {
    if (cond_probs.empty() || cond_probs.size() != samples.size()) {
        throw std::invalid_argument("exact_cmi: need one probability table per sample");
    }
    const int k = static_cast<int>(prior.size());
    check_distribution(prior, "exact_cmi prior");
    double total = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const auto& table = cond_probs[j];
        if (static_cast<int>(table.size()) != k) {
            throw std::invalid_argument("exact_cmi: table head count mismatch");
        }
        for (const Vec& row : table) check_distribution(row, "exact_cmi table");
        const auto [u, a] = samples[j];
        if (u < 0 || u >= k || a < 0 || a >= static_cast<int>(table[u].size())) {
            throw std::invalid_argument("exact_cmi: sample index out of range");
        }
        total += cmi_term(table, prior, u, a);
    }
    return total / static_cast<double>(samples.size());
}

double surrogate_mi(const FavorTable& favors, const std::vector<int>& taken_heads) {
    if (favors.values.empty() || favors.values.size() != taken_heads.size()) {
        throw std::invalid_argument("surrogate_mi: need one favor column per transition");
    }
    const std::size_t k = favors.values.front().size();
    if (k == 1) {
        std::fprintf(stderr,
                     "metapop: warning: surrogate MI is undefined for a singleton "
                     "population (K=1); returning 0\n");
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < favors.values.size(); ++j) {
        const Vec& column = favors.values[j];
        if (column.size() != k) {
            throw std::invalid_argument("surrogate_mi: ragged favor table");
        }
        const int u = taken_heads[j];
        if (u < 0 || u >= static_cast<int>(k)) {
            throw std::invalid_argument("surrogate_mi: taken head out of range");
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (static_cast<int>(i) != u) sum += column[i];
        }
    }
    return -sum / static_cast<double>(favors.values.size());
}

FavorTable favor_from_probs(const std::vector<std::vector<Vec>>& action_distributions,
                            const std::vector<int>& taken_actions) {
    if (action_distributions.size() != taken_actions.size()) {
        throw std::invalid_argument("favor_from_probs: size mismatch");
    }
    FavorTable table;
    table.form = FavorForm::probability;
    table.values.reserve(action_distributions.size());
    for (std::size_t j = 0; j < action_distributions.size(); ++j) {
        const int a = taken_actions[j];
        Vec column;
        column.reserve(action_distributions[j].size());
        for (const Vec& row : action_distributions[j]) {
            check_distribution(row, "favor_from_probs");
            if (a < 0 || a >= static_cast<int>(row.size())) {
                throw std::out_of_range("favor_from_probs: taken action out of range");
            }
            column.push_back(row[a]);
        }
        table.values.push_back(std::move(column));
    }
    return table;
}

FavorTable favor_from_q(const std::vector<std::vector<Vec>>& q_tables,
                        const std::vector<int>& taken_actions, FavorForm form) {
    if (q_tables.size() != taken_actions.size()) {
        throw std::invalid_argument("favor_from_q: size mismatch");
    }
    if (form == FavorForm::probability) {
        throw std::invalid_argument("favor_from_q: use favor_from_probs for distributions");
    }
    FavorTable table;
    table.form = form;
    table.values.reserve(q_tables.size());
    for (std::size_t j = 0; j < q_tables.size(); ++j) {
        const int a = taken_actions[j];
        Vec column;
        column.reserve(q_tables[j].size());
        for (const Vec& row : q_tables[j]) {
            if (a < 0 || a >= static_cast<int>(row.size())) {
                throw std::out_of_range("favor_from_q: taken action out of range");
            }
            if (!std::isfinite(row[a])) {
                throw std::invalid_argument("favor_from_q: non-finite favor value");
            }
            column.push_back(row[a]);
        }
        table.values.push_back(std::move(column));
    }
    return table;
}

Theorem1Result theorem1_check(FavorForm form, const std::vector<Vec>& favors_before,
                              const std::vector<Vec>& favors_after, int taken_head,
                              int taken_action, const Vec& prior, double greedy_eps) {
    Theorem1Result result;
    const int k = static_cast<int>(favors_before.size());
    if (static_cast<int>(favors_after.size()) != k || k == 0) {
        throw std::invalid_argument("theorem1_check: favor shape mismatch");
    }
    for (int i = 0; i < k; ++i) {
        if (favors_before[i].size() != favors_after[i].size() ||
            favors_before[i].size() != favors_before[0].size()) {
            throw std::invalid_argument("theorem1_check: favor shape mismatch");
        }
    }
    const int actions = static_cast<int>(favors_before[0].size());
    if (taken_head < 0 || taken_head >= k || taken_action < 0 || taken_action >= actions) {
        throw std::invalid_argument("theorem1_check: sample index out of range");
    }

    // Exactly one head may move at the taken action, and it may only move
    // down. The probability form leaves non-taken entries free (they
    // renormalize and do not enter I_j); the greedy forms pin every other
    // entry, since any other change can move an argmax and with it the
    // induced policy.
    int changed_head = -1;
    for (int i = 0; i < k; ++i) {
        if (favors_before[i][taken_action] != favors_after[i][taken_action]) {
            if (changed_head != -1) return result;
            changed_head = i;
        }
    }
    if (form != FavorForm::probability) {
        for (int i = 0; i < k; ++i) {
            for (int a = 0; a < actions; ++a) {
                if (a == taken_action) continue;
                if (favors_before[i][a] != favors_after[i][a]) return result;
            }
        }
    }
    if (changed_head == -1 || changed_head == taken_head) return result;
    const int v = changed_head;
    if (!(favors_after[v][taken_action] < favors_before[v][taken_action])) return result;
    if (greedy_action(favors_before[v]) != taken_action) return result;

    if (form == FavorForm::probability) {
        for (int i = 0; i < k; ++i) {
            check_distribution(favors_before[i], "theorem1_check before");
            check_distribution(favors_after[i], "theorem1_check after");
        }
        if (favors_before[taken_head][taken_action] <= 0.0) return result;
    } else if (greedy_eps <= 0.0 &&
               greedy_action(favors_before[taken_head]) != taken_action) {
        // Strict greedy induces p(a_j|u_j) = 0: I_j is undefined.
        return result;
    }

    std::vector<Vec> before_policy, after_policy;
    before_policy.reserve(k);
    after_policy.reserve(k);
    for (int i = 0; i < k; ++i) {
        before_policy.push_back(induced_policy(form, favors_before[i], greedy_eps));
        after_policy.push_back(induced_policy(form, favors_after[i], greedy_eps));
    }
    result.applicable = true;
    result.i_before = cmi_term(before_policy, prior, taken_head, taken_action);
    result.i_after = cmi_term(after_policy, prior, taken_head, taken_action);
    result.holds = result.i_after >= result.i_before - 1e-12;
    return result;
}

double diff_prob(const MetaAgent& agent, const std::vector<Vec>& contexts) {
    const int k = agent.population_size();
    if (k < 2) throw std::invalid_argument("diff_prob: requires a population of K >= 2");
    if (contexts.empty()) throw std::invalid_argument("diff_prob: empty context batch");
    std::int64_t agree = 0;
    std::int64_t total = 0;
    for (const Vec& ctx : contexts) {
        const std::vector<Vec> qs = q_values_all_heads(agent, ctx);
        std::vector<int> actions(k);
        for (int u = 0; u < k; ++u) actions[u] = greedy_action(qs[u]);
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                agree += actions[i] == actions[j];
                ++total;
            }
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace metapop
