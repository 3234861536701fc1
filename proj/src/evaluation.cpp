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

#include "metapop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "metapop/errors.hpp"
#include "metapop/io_util.hpp"

namespace metapop {

int PolicyHandle::action(Role role) const {
    if (!params) throw std::invalid_argument("PolicyHandle: empty parameters");
    const int in = params->trunk.input_dim();
    Vec ctx;
    if (in == kObservationDim) {
        ctx = observation(role);
    } else if (in == 1) {
        ctx = Vec{1.0};
    } else {
        throw std::invalid_argument("PolicyHandle: unsupported context width");
    }
    return greedy_action(q_values(*params, ctx, head));
}

PolicyHandle make_policy(PolicyHandle::Kind kind, std::shared_ptr<const MetaAgent> params,
                         int head, std::string label) {
    if (!params) throw std::invalid_argument("make_policy: null parameters");
    if (head < 0 || head >= params->population_size()) {
        throw std::out_of_range("make_policy: head outside population");
    }
    return PolicyHandle{kind, std::move(params), head, std::move(label)};
}

MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr out;
    out.count = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return out;
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(sq / static_cast<double>(values.size() - 1));
    out.stderr = sd / std::sqrt(static_cast<double>(values.size()));
    return out;
}

double estimate_J(const PolicyHandle& row_player, const PolicyHandle& col_player,
                  const PayoffMatrix& env, int episodes, Rng& rng) {
    (void)rng;  // greedy policies on a deterministic game
    if (episodes < 1) throw std::invalid_argument("estimate_J: episodes must be >= 1");
    if (row_player.params->num_actions() != env.dim() ||
        col_player.params->num_actions() != env.dim()) {
        throw std::invalid_argument("estimate_J: policy action space does not match game");
    }
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        const int a_row = row_player.action(Role::row);
        const int a_col = col_player.action(Role::col);
        total += play(env, a_row, a_col).reward;
    }
    return total / static_cast<double>(episodes);
}

MeanStderr intra_xp(const std::vector<PolicyHandle>& models, const PayoffMatrix& env,
                    std::vector<std::vector<double>>* pairwise_out) {
    if (models.size() < 2) throw std::invalid_argument("intra_xp: need at least 2 models");
    Rng rng(0);
    const int n = static_cast<int>(models.size());
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
    std::vector<double> off_diagonal;
    off_diagonal.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            matrix[i][j] = estimate_J(models[i], models[j], env, 1, rng);
            if (i != j) off_diagonal.push_back(matrix[i][j]);
        }
    }
    if (pairwise_out) *pairwise_out = std::move(matrix);
    return mean_stderr(off_diagonal);
}

OneSidedReport one_sided_zsc_xp(const std::vector<PolicyHandle>& models,
                                const std::vector<PolicyHandle>& strangers,
                                const PayoffMatrix& env) {
    if (models.empty()) throw std::invalid_argument("one_sided_zsc_xp: empty model pool");
    if (strangers.empty()) throw std::invalid_argument("one_sided_zsc_xp: empty stranger pool");
    Rng rng(0);
    OneSidedReport report;
    report.matrix.assign(models.size(), std::vector<double>(strangers.size(), 0.0));
    std::vector<double> per_model_means;
    per_model_means.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t t = 0; t < strangers.size(); ++t) {
            const double as_row = estimate_J(models[i], strangers[t], env, 1, rng);
            const double as_col = estimate_J(strangers[t], models[i], env, 1, rng);
            report.matrix[i][t] = 0.5 * (as_row + as_col);
            row_sum += report.matrix[i][t];
        }
        per_model_means.push_back(row_sum / static_cast<double>(strangers.size()));
    }
    // stderr over seed-level (per-model) means, not over individual pairings
    report.score = mean_stderr(per_model_means);
    return report;
}

std::vector<PolicyHandle> build_stranger_pool(const PayoffMatrix& env, int n,
                                              std::span<const std::uint64_t> seeds,
                                              const TrainConfig& base) {
    if (n < 1) throw std::invalid_argument("build_stranger_pool: n must be >= 1");
    if (static_cast<int>(seeds.size()) < n) {
        throw std::invalid_argument("build_stranger_pool: need one seed per stranger");
    }
    std::vector<PolicyHandle> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i) {
        TrainConfig cfg = base;
        cfg.seed = seeds[i];
        TrainResult res = train(cfg, env, TrainMode::II, Method::self_play);
        auto params = std::make_shared<MetaAgent>(std::move(res.main));
        pool.push_back(make_policy(PolicyHandle::Kind::stranger, std::move(params), 0,
                                   "stranger_" + std::to_string(seeds[i])));
    }
    return pool;
}

void EvalReport::save_csv(const std::filesystem::path& path) const {
    std::ostringstream out;
    out << "model";
    for (const auto& label : partner_labels) out << ',' << label;
    out << '\n';
    for (std::size_t i = 0; i < pairwise.size(); ++i) {
        out << model_labels[i];
        for (double v : pairwise[i]) out << ',' << format_double(v);
        out << '\n';
    }
    write_file(path, out.str());
}

void EvalReport::save_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["model_labels"] = model_labels;
    j["partner_labels"] = partner_labels;
    j["episodes_per_pair"] = episodes_per_pair;
    if (has_intra) {
        j["intra_xp"] = {{"mean", intra.mean}, {"stderr", intra.stderr}, {"pairs", intra.count}};
    }
    if (has_one_sided) {
        j["one_sided_zsc_xp"] = {{"mean", one_sided.mean},
                                 {"stderr", one_sided.stderr},
                                 {"models", one_sided.count}};
    }
    write_file(path, j.dump(2) + "\n");
}

namespace {

std::string heat_color(double t) {
    // White to deep blue.
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 - 205.0 * t));
    const int g = static_cast<int>(std::lround(255.0 - 175.0 * t));
    const int b = static_cast<int>(std::lround(255.0 - 80.0 * t));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_heatmap_svg(const std::filesystem::path& path,
                       const std::vector<std::vector<double>>& matrix,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::string& title) {
    if (matrix.empty()) throw std::invalid_argument("write_heatmap_svg: empty matrix");
    const int rows = static_cast<int>(matrix.size());
    const int cols = static_cast<int>(matrix[0].size());
    double lo = matrix[0][0], hi = matrix[0][0];
    for (const auto& row : matrix) {
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const int cell = 46;
    const int left = 110, top = 48;
    const int width = left + cols * cell + 20;
    const int height = top + rows * cell + 40;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
    svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    for (int c = 0; c < cols; ++c) {
        svg << "<text x=\"" << left + c * cell + cell / 2 << "\" y=\"" << top - 8
            << "\" font-size=\"9\" text-anchor=\"middle\">" << col_labels[c] << "</text>\n";
    }
    for (int r = 0; r < rows; ++r) {
        svg << "<text x=\"" << left - 6 << "\" y=\"" << top + r * cell + cell / 2 + 3
            << "\" font-size=\"9\" text-anchor=\"end\">" << row_labels[r] << "</text>\n";
        for (int c = 0; c < cols; ++c) {
            const double v = matrix[r][c];
            svg << "<rect x=\"" << left + c * cell << "\" y=\"" << top + r * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << heat_color((v - lo) / span) << "\" stroke=\"#ffffff\"/>\n";
            svg << "<text x=\"" << left + c * cell + cell / 2 << "\" y=\""
                << top + r * cell + cell / 2 + 3
                << "\" font-size=\"9\" text-anchor=\"middle\">" << trim_number(v)
                << "</text>\n";
        }
    }
    svg << "</svg>\n";
    write_file(path, svg.str());
}

}  // namespace metapop
