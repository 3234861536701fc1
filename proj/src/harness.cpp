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

#include "metapop/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "metapop/errors.hpp"
#include "metapop/io_util.hpp"

namespace metapop {

namespace fs = std::filesystem;

std::filesystem::path default_out_root() {
    if (const char* env = std::getenv("METAPOP_OUT")) return fs::path(env);
    return fs::path("runs");
}

void RunManifest::save(const fs::path& run_dir) const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["seeds"] = nlohmann::json::array();
    for (const auto& s : seeds) {
        nlohmann::json js;
        js["seed"] = s.seed;
        js["checkpoint_main"] = s.checkpoint_main;
        js["checkpoint_partners"] = s.checkpoint_partners;
        js["checkpoint_individuals"] = s.checkpoint_individuals;
        js["metrics_csv"] = s.metrics_csv;
        j["seeds"].push_back(js);
    }
    j["file_hashes"] = file_hashes;
    write_file(run_dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest RunManifest::load(const fs::path& run_dir) {
    const fs::path path = run_dir / "manifest.json";
    if (!fs::exists(path)) {
        throw MissingArtifactError("missing manifest: " + path.string());
    }
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    for (const auto& js : j.at("seeds")) {
        SeedArtifacts s;
        s.seed = js.at("seed").get<std::uint64_t>();
        s.checkpoint_main = js.at("checkpoint_main").get<std::string>();
        s.checkpoint_partners = js.at("checkpoint_partners").get<std::string>();
        s.checkpoint_individuals = js.at("checkpoint_individuals").get<std::vector<std::string>>();
        s.metrics_csv = js.at("metrics_csv").get<std::string>();
        m.seeds.push_back(std::move(s));
    }
    m.file_hashes = j.at("file_hashes").get<std::map<std::string, std::string>>();
    return m;
}

void RunManifest::verify(const fs::path& run_dir) const {
    for (const auto& [rel, expected] : file_hashes) {
        const fs::path path = run_dir / rel;
        if (!fs::exists(path)) {
            throw MissingArtifactError("manifest references missing file: " + path.string());
        }
        const std::string actual = hash_file_hex(path);
        if (actual != expected) {
            throw MissingArtifactError("content hash mismatch for " + path.string());
        }
    }
}

namespace {

CheckpointMeta make_meta(const ExperimentConfig& cfg, std::uint64_t seed,
                         const MetaAgent& agent) {
    CheckpointMeta meta;
    meta.population_size = agent.population_size();
    meta.trunk_dims = agent.trunk.dims;
    meta.head_dims = agent.heads.front().dims;
    meta.value_dims = agent.value.dims;
    meta.training_step = cfg.train.iterations;
    meta.seed = seed;
    meta.config_hash = cfg.hash();
    return meta;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg, const fs::path& run_dir) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(run_dir);
    cfg.save(run_dir / "config.cfg");
    write_file(run_dir / "config.json", cfg.to_json());
    const PayoffMatrix matrix = cfg.make_matrix();
    save_matrix_csv(matrix, run_dir / "matrix.csv");

    RunManifest manifest;
    manifest.config_hash = cfg.hash();
    auto record = [&](const std::string& rel) {
        manifest.file_hashes[rel] = hash_file_hex(run_dir / rel);
    };
    record("config.cfg");
    record("matrix.csv");

    for (const std::uint64_t seed : cfg.seeds) {
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        const std::string seed_dir = "seed_" + std::to_string(seed);
        if (tc.checkpoint_interval > 0) {
            tc.checkpoint_dir = run_dir / seed_dir / "checkpoints";
        }
        TrainResult res = train(tc, matrix, cfg.mode, cfg.method);

        RunManifest::SeedArtifacts art;
        art.seed = seed;
        art.metrics_csv = seed_dir + "/metrics.csv";
        res.trace.save_csv(run_dir / art.metrics_csv);
        record(art.metrics_csv);

        art.checkpoint_main = seed_dir + "/main.ckpt";
        save_checkpoint(res.main, make_meta(cfg, seed, res.main), run_dir / art.checkpoint_main);
        record(art.checkpoint_main);
        if (res.partners) {
            art.checkpoint_partners = seed_dir + "/partners.ckpt";
            save_checkpoint(*res.partners, make_meta(cfg, seed, *res.partners),
                            run_dir / art.checkpoint_partners);
            record(art.checkpoint_partners);
        }
        for (std::size_t i = 0; i < res.individuals.size(); ++i) {
            const std::string rel = seed_dir + "/individual_" + std::to_string(i) + ".ckpt";
            save_checkpoint(res.individuals[i], make_meta(cfg, seed, res.individuals[i]),
                            run_dir / rel);
            record(rel);
            art.checkpoint_individuals.push_back(rel);
        }
        manifest.seeds.push_back(std::move(art));
    }
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.save(run_dir);
    return manifest;
}

std::vector<PolicyHandle> load_run_policies(const ExperimentConfig& cfg,
                                            const fs::path& run_dir) {
    RunManifest manifest = RunManifest::load(run_dir);
    manifest.verify(run_dir);
    if (manifest.config_hash != cfg.hash()) {
        throw MissingArtifactError("run at " + run_dir.string() +
                                   " was produced by a different config");
    }
    std::vector<PolicyHandle> models;
    for (const auto& art : manifest.seeds) {
        Checkpoint ckpt = load_checkpoint(run_dir / art.checkpoint_main);
        auto params = std::make_shared<MetaAgent>(std::move(ckpt.agent));
        models.push_back(make_policy(PolicyHandle::Kind::main_agent, std::move(params), 0,
                                     "seed_" + std::to_string(art.seed)));
    }
    return models;
}

EvalReport evaluate_run(const ExperimentConfig& cfg, const fs::path& run_dir,
                        int n_strangers, std::uint64_t stranger_seed_base) {
    const PayoffMatrix matrix = cfg.make_matrix();
    const std::vector<PolicyHandle> models = load_run_policies(cfg, run_dir);

    EvalReport report;
    report.episodes_per_pair = 1;
    for (const auto& m : models) report.model_labels.push_back(m.label);

    std::vector<std::vector<double>> intra_matrix;
    if (models.size() >= 2) {
        report.intra = intra_xp(models, matrix, &intra_matrix);
        report.has_intra = true;
    }
    const fs::path eval_dir = run_dir / "eval";
    fs::create_directories(eval_dir);

    if (n_strangers > 0) {
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < n_strangers; ++i) seeds.push_back(stranger_seed_base + i);
        const std::vector<PolicyHandle> strangers =
            build_stranger_pool(matrix, n_strangers, seeds, cfg.train);
        const OneSidedReport one_sided = one_sided_zsc_xp(models, strangers, matrix);
        report.one_sided = one_sided.score;
        report.has_one_sided = true;
        report.pairwise = one_sided.matrix;
        for (const auto& s : strangers) report.partner_labels.push_back(s.label);
    } else {
        report.pairwise = intra_matrix;
        report.partner_labels = report.model_labels;
    }

    report.save_csv(eval_dir / "pairwise.csv");
    report.save_json(eval_dir / "summary.json");
    write_heatmap_svg(eval_dir / "heatmap.svg", report.pairwise, report.model_labels,
                      report.partner_labels,
                      report.has_one_sided ? "pairwise one-sided cross-play"
                                           : "pairwise intra cross-play");
    return report;
}

std::vector<SweepCell> expand_sweep(const ExperimentConfig& base, const SweepAxes& axes) {
    const auto blocks = axes.blocks.empty() ? std::vector<int>{base.blocks} : axes.blocks;
    const auto modes = axes.modes.empty() ? std::vector<TrainMode>{base.mode} : axes.modes;
    const auto ks = axes.population_sizes.empty()
                        ? std::vector<int>{base.train.population_size}
                        : axes.population_sizes;
    const auto alphas =
        axes.alphas.empty() ? std::vector<double>{base.train.alpha} : axes.alphas;
    std::vector<SweepCell> cells;
    for (int b : blocks) {
        for (TrainMode mode : modes) {
            for (int k : ks) {
                for (double alpha : alphas) {
                    ExperimentConfig cfg = base;
                    cfg.blocks = b;
                    cfg.mode = mode;
                    cfg.train.population_size = k;
                    cfg.train.alpha = alpha;
                    std::ostringstream name;
                    name << "b" << b << "_mode" << mode_name(mode) << "_K" << k << "_a"
                         << format_double(alpha);
                    cells.push_back({std::move(cfg), fs::path(name.str())});
                }
            }
        }
    }
    return cells;
}

void run_sweep(const ExperimentConfig& base, const SweepAxes& axes,
               const fs::path& sweep_dir, int jobs) {
    const std::vector<SweepCell> cells = expand_sweep(base, axes);
    fs::create_directories(sweep_dir);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                run_experiment(cells[i].config, sweep_dir / cells[i].run_dir);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    nlohmann::json index;
    index["cells"] = nlohmann::json::array();
    for (const auto& cell : cells) {
        index["cells"].push_back({{"dir", cell.run_dir.string()},
                                  {"hash", cell.config.hash()},
                                  {"population_size", cell.config.train.population_size},
                                  {"alpha", cell.config.train.alpha},
                                  {"mode", mode_name(cell.config.mode)},
                                  {"blocks", cell.config.blocks}});
    }
    write_file(sweep_dir / "sweep.json", index.dump(2) + "\n");
}

ExperimentConfig experiment_preset(const std::string& name) {
    ExperimentConfig cfg;  // dim-10 desk defaults
    cfg.blocks = 1;
    cfg.train.iterations = 2000;
    cfg.train.eps_decay_steps = 1000;
    cfg.train.buffer_capacity = 10000;
    cfg.train.lr = 1e-3;
    cfg.seeds = {0, 1, 2, 3, 4};
    if (name == "dim10") return cfg;
    if (name == "alpha_ablation") {
        cfg.train.population_size = 4;
        return cfg;
    }
    if (name == "mode_comparison") {
        cfg.train.population_size = 2;
        return cfg;
    }
    if (name == "fig3" || name == "fig4") {
        // dim-50: longer exploration so coordination conventions settle on
        // the payoff structure rather than early noise.
        cfg.blocks = 5;
        cfg.train.iterations = 20000;
        cfg.train.eps_decay_steps = 14000;
        cfg.train.buffer_capacity = 40000;
        cfg.train.lr = 1e-3;
        cfg.train.population_size = name == "fig3" ? 2 : 30;
        return cfg;
    }
    if (name == "hanabi_appendix") {
        // Published large-scale hyperparameters, reachable as a named preset.
        cfg.train.lr = 6.25e-5;
        cfg.train.buffer_capacity = 35000;
        cfg.train.iterations = 500;
        cfg.train.gamma = 0.999;
        return cfg;
    }
    throw ConfigError("unknown experiment preset '" + name + "'");
}

namespace {

struct SummaryRow {
    std::string label;
    double intra_mean = 0.0, intra_stderr = 0.0;
    double selfplay_mean = 0.0, selfplay_stderr = 0.0;
    double zsc_mean = 0.0, zsc_stderr = 0.0;
    bool has_zsc = false;
};

MeanStderr selfplay_score(const std::vector<PolicyHandle>& models, const PayoffMatrix& env) {
    Rng rng(0);
    std::vector<double> scores;
    scores.reserve(models.size());
    for (const auto& m : models) scores.push_back(estimate_J(m, m, env, 1, rng));
    return mean_stderr(scores);
}

std::string svg_header(int width, int height) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\">\n";
    return out.str();
}

/// Grouped bars with error whiskers; one group per label, one bar per series.
void write_bar_svg(const fs::path& path, const std::string& title,
                   const std::vector<std::string>& labels,
                   const std::vector<std::string>& series_names,
                   const std::vector<std::vector<double>>& means,
                   const std::vector<std::vector<double>>& errs) {
    const int width = 640, height = 360, left = 60, bottom = 300, top = 50;
    double hi = 1e-9;
    for (const auto& row : means)
        for (double v : row) hi = std::max(hi, v);
    hi *= 1.15;
    const char* palette[] = {"#4878a8", "#e49444", "#6a9f58", "#d1615d"};
    std::ostringstream svg;
    svg << svg_header(width, height);
    svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    const double group_w = static_cast<double>(width - left - 20) / labels.size();
    const double bar_w = group_w / (series_names.size() + 1);
    for (std::size_t g = 0; g < labels.size(); ++g) {
        for (std::size_t s = 0; s < series_names.size(); ++s) {
            const double v = means[g][s];
            const double e = errs[g][s];
            const double x = left + g * group_w + s * bar_w + bar_w / 2;
            const double h = (bottom - top) * (v / hi);
            svg << "<rect x=\"" << x << "\" y=\"" << bottom - h << "\" width=\"" << bar_w * 0.9
                << "\" height=\"" << h << "\" fill=\"" << palette[s % 4] << "\"/>\n";
            const double eh = (bottom - top) * (e / hi);
            const double cx = x + bar_w * 0.45;
            svg << "<line x1=\"" << cx << "\" y1=\"" << bottom - h - eh << "\" x2=\"" << cx
                << "\" y2=\"" << bottom - h + eh << "\" stroke=\"#333\"/>\n";
        }
        svg << "<text x=\"" << left + g * group_w + group_w / 2 << "\" y=\"" << bottom + 16
            << "\" font-size=\"10\" text-anchor=\"middle\">" << labels[g] << "</text>\n";
    }
    for (std::size_t s = 0; s < series_names.size(); ++s) {
        svg << "<rect x=\"" << left + 120 * s << "\" y=\"" << height - 24
            << "\" width=\"12\" height=\"12\" fill=\"" << palette[s % 4] << "\"/>\n";
        svg << "<text x=\"" << left + 120 * s + 16 << "\" y=\"" << height - 14
            << "\" font-size=\"10\">" << series_names[s] << "</text>\n";
    }
    svg << "</svg>\n";
    write_file(path, svg.str());
}

/// One or more polylines over a shared x axis, optional error whiskers.
void write_line_svg(const fs::path& path, const std::string& title,
                    const std::vector<double>& xs,
                    const std::vector<std::string>& series_names,
                    const std::vector<std::vector<double>>& ys,
                    const std::vector<std::vector<double>>* yerrs) {
    const int width = 640, height = 360, left = 60, right = 610, bottom = 300, top = 50;
    double x_lo = xs.front(), x_hi = xs.back();
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    double y_hi = 1e-9, y_lo = 0.0;
    for (const auto& row : ys)
        for (double v : row)
            if (std::isfinite(v)) y_hi = std::max(y_hi, v);
    y_hi *= 1.1;
    if (y_hi <= y_lo) y_hi = 1.0;
    auto px = [&](double x) { return left + (right - left) * (x - x_lo) / (x_hi - x_lo); };
    auto py = [&](double y) { return bottom - (bottom - top) * (y - y_lo) / (y_hi - y_lo); };
    const char* palette[] = {"#4878a8", "#e49444", "#6a9f58", "#d1615d", "#a87cb4", "#8a8a8a"};
    std::ostringstream svg;
    svg << svg_header(width, height);
    svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"#333\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << left << "\" y2=\""
        << top << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << left - 4 << "\" y=\"" << py(y_hi / 1.1) + 4
        << "\" font-size=\"9\" text-anchor=\"end\">" << format_double(y_hi / 1.1)
        << "</text>\n";
    for (std::size_t s = 0; s < series_names.size(); ++s) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(ys[s][i])) continue;
            pts << px(xs[i]) << ',' << py(ys[s][i]) << ' ';
        }
        svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\""
            << palette[s % 6] << "\" stroke-width=\"1.5\"/>\n";
        if (yerrs) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!std::isfinite(ys[s][i])) continue;
                svg << "<line x1=\"" << px(xs[i]) << "\" y1=\"" << py(ys[s][i] - (*yerrs)[s][i])
                    << "\" x2=\"" << px(xs[i]) << "\" y2=\"" << py(ys[s][i] + (*yerrs)[s][i])
                    << "\" stroke=\"" << palette[s % 6] << "\"/>\n";
            }
        }
        svg << "<text x=\"" << left + 110 * s << "\" y=\"" << height - 14
            << "\" font-size=\"10\" fill=\"" << palette[s % 6] << "\">" << series_names[s]
            << "</text>\n";
    }
    svg << "</svg>\n";
    write_file(path, svg.str());
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows,
                       const std::string& label_name) {
    std::ostringstream out;
    out << label_name
        << ",selfplay_mean,selfplay_stderr,intra_xp_mean,intra_xp_stderr,"
           "one_sided_zsc_mean,one_sided_zsc_stderr\n";
    for (const auto& r : rows) {
        out << r.label << ',' << format_double(r.selfplay_mean) << ','
            << format_double(r.selfplay_stderr) << ',' << format_double(r.intra_mean) << ','
            << format_double(r.intra_stderr) << ','
            << (r.has_zsc ? format_double(r.zsc_mean) : "") << ','
            << (r.has_zsc ? format_double(r.zsc_stderr) : "") << '\n';
    }
    write_file(path, out.str());
}

fs::path reproduce_fig3(const fs::path& out_dir) {
    const fs::path report = out_dir / "fig3";
    std::vector<SummaryRow> rows;
    for (const Method method :
         {Method::scapt, Method::alpha_zero_ablation, Method::self_play,
          Method::individual_population}) {
        ExperimentConfig cfg = experiment_preset("fig3");
        cfg.method = method;
        const fs::path run_dir = report / method_name(method);
        run_experiment(cfg, run_dir);
        // Strangers only for the headline method; they are shared context for
        // the fig5-style heatmap.
        const int strangers = method == Method::scapt ? 10 : 0;
        const EvalReport eval = evaluate_run(cfg, run_dir, strangers);
        const PayoffMatrix matrix = cfg.make_matrix();
        const auto models = load_run_policies(cfg, run_dir);
        const MeanStderr sp = selfplay_score(models, matrix);
        SummaryRow row;
        row.label = method_name(method);
        row.selfplay_mean = sp.mean;
        row.selfplay_stderr = sp.stderr;
        row.intra_mean = eval.intra.mean;
        row.intra_stderr = eval.intra.stderr;
        if (eval.has_one_sided) {
            row.has_zsc = true;
            row.zsc_mean = eval.one_sided.mean;
            row.zsc_stderr = eval.one_sided.stderr;
        }
        rows.push_back(row);
    }
    write_summary_csv(report / "fig3.csv", rows, "method");
    export_figure("fig3", report, report);
    return report;
}

fs::path reproduce_fig4(const fs::path& out_dir) {
    const fs::path report = out_dir / "fig4";
    std::ostringstream csv;
    csv << "population_size,intra_xp_mean,intra_xp_stderr,selfplay_mean,selfplay_stderr\n";
    for (const int k : {2, 10, 20, 30}) {
        ExperimentConfig cfg = experiment_preset("fig4");
        cfg.train.population_size = k;
        const fs::path run_dir = report / ("K" + std::to_string(k));
        run_experiment(cfg, run_dir);
        const EvalReport eval = evaluate_run(cfg, run_dir);
        const auto models = load_run_policies(cfg, run_dir);
        const MeanStderr sp = selfplay_score(models, cfg.make_matrix());
        csv << k << ',' << format_double(eval.intra.mean) << ','
            << format_double(eval.intra.stderr) << ',' << format_double(sp.mean) << ','
            << format_double(sp.stderr) << '\n';
    }
    write_file(report / "fig4.csv", csv.str());
    export_figure("fig4", report, report);
    return report;
}

fs::path reproduce_alpha_ablation(const fs::path& out_dir) {
    const fs::path report = out_dir / "alpha_ablation";
    const std::vector<double> alphas{0.0, 1.0, 10.0};
    std::vector<std::vector<double>> mean_traces;  // per alpha, per iteration
    std::ostringstream final_csv;
    final_csv << "alpha,final_diff_prob_mean,final_diff_prob_stderr\n";
    int iterations = 0;
    for (const double alpha : alphas) {
        ExperimentConfig cfg = experiment_preset("alpha_ablation");
        cfg.train.alpha = alpha;
        const fs::path run_dir = report / ("alpha" + format_double(alpha));
        const RunManifest manifest = run_experiment(cfg, run_dir);
        iterations = cfg.train.iterations;
        std::vector<double> mean_trace(iterations, 0.0);
        std::vector<double> finals;
        for (const auto& art : manifest.seeds) {
            const MetricsTrace trace = MetricsTrace::load_csv(run_dir / art.metrics_csv);
            for (int i = 0; i < iterations; ++i) mean_trace[i] += trace.rows[i].diff_prob;
            finals.push_back(trace.rows.back().diff_prob);
        }
        for (double& v : mean_trace) v /= static_cast<double>(manifest.seeds.size());
        mean_traces.push_back(std::move(mean_trace));
        const MeanStderr fin = mean_stderr(finals);
        final_csv << format_double(alpha) << ',' << format_double(fin.mean) << ','
                  << format_double(fin.stderr) << '\n';
    }
    std::ostringstream traces;
    traces << "iteration";
    for (const double alpha : alphas) traces << ",diff_prob_alpha" << format_double(alpha);
    traces << '\n';
    for (int i = 0; i < iterations; ++i) {
        traces << i;
        for (const auto& trace : mean_traces) traces << ',' << format_double(trace[i]);
        traces << '\n';
    }
    write_file(report / "alpha_traces.csv", traces.str());
    write_file(report / "alpha_final.csv", final_csv.str());
    export_figure("fig7", report, report);
    return report;
}

fs::path reproduce_mode_comparison(const fs::path& out_dir) {
    const fs::path report = out_dir / "mode_comparison";
    std::vector<SummaryRow> rows;
    for (const TrainMode mode : {TrainMode::I, TrainMode::II, TrainMode::III, TrainMode::IV,
                                 TrainMode::V, TrainMode::VI}) {
        ExperimentConfig cfg = experiment_preset("mode_comparison");
        cfg.mode = mode;
        const fs::path run_dir = report / ("mode" + mode_name(mode));
        run_experiment(cfg, run_dir);
        const EvalReport eval = evaluate_run(cfg, run_dir, /*n_strangers=*/10);
        const auto models = load_run_policies(cfg, run_dir);
        const MeanStderr sp = selfplay_score(models, cfg.make_matrix());
        SummaryRow row;
        row.label = mode_name(mode);
        row.selfplay_mean = sp.mean;
        row.selfplay_stderr = sp.stderr;
        row.intra_mean = eval.intra.mean;
        row.intra_stderr = eval.intra.stderr;
        row.has_zsc = eval.has_one_sided;
        row.zsc_mean = eval.one_sided.mean;
        row.zsc_stderr = eval.one_sided.stderr;
        rows.push_back(row);
    }
    write_summary_csv(report / "modes.csv", rows, "mode");
    // Directional expectation: the self-play-augmented main objective should
    // not lose to the bare one.
    nlohmann::json j;
    j["intra_xp_mode_II"] = rows[1].intra_mean;
    j["intra_xp_mode_I"] = rows[0].intra_mean;
    j["mode_II_ge_mode_I"] = rows[1].intra_mean >= rows[0].intra_mean;
    write_file(report / "direction.json", j.dump(2) + "\n");
    return report;
}

}  // namespace

fs::path reproduce_experiment(const std::string& name, const fs::path& out_dir) {
    if (name == "fig3") return reproduce_fig3(out_dir);
    if (name == "fig4") return reproduce_fig4(out_dir);
    if (name == "alpha_ablation") return reproduce_alpha_ablation(out_dir);
    if (name == "mode_comparison") return reproduce_mode_comparison(out_dir);
    throw ConfigError("unknown experiment name '" + name +
                      "' (expected fig3, fig4, alpha_ablation, mode_comparison)");
}

void export_figure(const std::string& name, const fs::path& report_dir,
                   const fs::path& out_dir) {
    fs::create_directories(out_dir);
    if (name == "fig3") {
        const auto rows = read_csv(report_dir / "fig3.csv");
        if (rows.size() < 2) throw MissingArtifactError("fig3.csv has no data rows");
        std::vector<std::string> labels;
        std::vector<std::vector<double>> means, errs;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            labels.push_back(rows[i][0]);
            means.push_back({parse_double(rows[i][1]), parse_double(rows[i][3])});
            errs.push_back({parse_double(rows[i][2]), parse_double(rows[i][4])});
        }
        write_bar_svg(out_dir / "fig3.svg", "self-play vs intra cross-play", labels,
                      {"self-play", "intra-XP"}, means, errs);
        return;
    }
    if (name == "fig4") {
        const auto rows = read_csv(report_dir / "fig4.csv");
        if (rows.size() < 2) throw MissingArtifactError("fig4.csv has no data rows");
        std::vector<double> xs;
        std::vector<std::vector<double>> ys(1), es(1);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            xs.push_back(parse_double(rows[i][0]));
            ys[0].push_back(parse_double(rows[i][1]));
            es[0].push_back(parse_double(rows[i][2]));
        }
        write_line_svg(out_dir / "fig4.svg", "intra cross-play vs population size", xs,
                       {"intra-XP"}, ys, &es);
        return;
    }
    if (name == "fig7") {
        const auto rows = read_csv(report_dir / "alpha_traces.csv");
        if (rows.size() < 2) throw MissingArtifactError("alpha_traces.csv has no data rows");
        std::vector<std::string> series;
        for (std::size_t c = 1; c < rows[0].size(); ++c) series.push_back(rows[0][c]);
        std::vector<double> xs;
        std::vector<std::vector<double>> ys(series.size());
        for (std::size_t i = 1; i < rows.size(); ++i) {
            xs.push_back(parse_double(rows[i][0]));
            for (std::size_t c = 0; c < series.size(); ++c) {
                ys[c].push_back(parse_double(rows[i][c + 1]));
            }
        }
        write_line_svg(out_dir / "fig7.svg", "diff-prob traces by alpha", xs, series, ys,
                       nullptr);
        return;
    }
    if (name == "fig5") {
        // Heatmap from any eval pairwise matrix.
        const fs::path src = fs::exists(report_dir / "pairwise.csv")
                                 ? report_dir / "pairwise.csv"
                                 : report_dir / "eval" / "pairwise.csv";
        const auto rows = read_csv(src);
        if (rows.size() < 2) throw MissingArtifactError("pairwise.csv has no data rows");
        std::vector<std::string> col_labels(rows[0].begin() + 1, rows[0].end());
        std::vector<std::string> row_labels;
        std::vector<std::vector<double>> matrix;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            row_labels.push_back(rows[i][0]);
            std::vector<double> vals;
            for (std::size_t c = 1; c < rows[i].size(); ++c) {
                vals.push_back(parse_double(rows[i][c]));
            }
            matrix.push_back(std::move(vals));
        }
        write_heatmap_svg(out_dir / "fig5.svg", matrix, row_labels, col_labels,
                          "pairwise cross-play scores");
        return;
    }
    throw ConfigError("unknown figure name '" + name + "' (expected fig3, fig4, fig5, fig7)");
}

}  // namespace metapop
