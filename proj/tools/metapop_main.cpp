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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metapop/config.hpp"
#include "metapop/errors.hpp"
#include "metapop/harness.hpp"
#include "metapop/io_util.hpp"

namespace {

using namespace metapop;

std::vector<TrainMode> parse_mode_list(const std::string& text) {
    std::vector<TrainMode> modes;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) modes.push_back(parse_mode(item));
    }
    return modes;
}

template <typename T>
std::vector<T> parse_number_list(const std::string& text) {
    std::vector<T> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if constexpr (std::is_integral_v<T>) {
            out.push_back(static_cast<T>(std::stoll(item)));
        } else {
            out.push_back(parse_double(item));
        }
    }
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"population training for the cooperative shifted-block matrix game"};
    app.require_subcommand(1);

    // gen-matrix
    auto* gen = app.add_subcommand("gen-matrix", "generate a shifted-block payoff matrix CSV");
    int gen_blocks = 5;
    int gen_block_size = 10;
    double gen_eps = 0.1;
    std::string gen_out = "matrix.csv";
    gen->add_option("--blocks", gen_blocks, "number of diagonal blocks")->required();
    gen->add_option("--block-size", gen_block_size, "block size d");
    gen->add_option("--eps", gen_eps, "off-band distractor reward");
    gen->add_option("--out", gen_out, "output CSV path");

    // train
    auto* tr = app.add_subcommand("train", "train all seeds of an experiment config");
    std::string tr_config;
    std::string tr_seeds;
    std::string tr_out;
    tr->add_option("--config", tr_config, "experiment config file")->required();
    tr->add_option("--seeds", tr_seeds, "override seed list, e.g. 0..4 or 0,3,7");
    tr->add_option("--out", tr_out, "run directory (default <out-root>/<config-hash>)");

    // eval
    auto* ev = app.add_subcommand("eval", "cross-play evaluation of a finished run");
    std::string ev_config, ev_run;
    int ev_strangers = 0;
    std::uint64_t ev_stranger_base = 10000;
    ev->add_option("--config", ev_config, "experiment config file")->required();
    ev->add_option("--run", ev_run, "run directory")->required();
    ev->add_option("--strangers", ev_strangers, "stranger pool size for 1ZSC-XP (0 = skip)");
    ev->add_option("--stranger-seed-base", ev_stranger_base, "first stranger seed");

    // sweep
    auto* sw = app.add_subcommand("sweep", "cross-product of (K, alpha, mode, blocks) cells");
    std::string sw_config, sw_out, sw_k, sw_alpha, sw_modes, sw_blocks;
    int sw_jobs = 1;
    sw->add_option("--config", sw_config, "base experiment config")->required();
    sw->add_option("--out", sw_out, "sweep directory");
    sw->add_option("--K", sw_k, "population sizes, e.g. 2,30");
    sw->add_option("--alpha", sw_alpha, "alpha values, e.g. 0,1,10");
    sw->add_option("--modes", sw_modes, "training modes, e.g. I,II,IV");
    sw->add_option("--blocks", sw_blocks, "block counts, e.g. 1,5");
    sw->add_option("--jobs", sw_jobs, "parallel worker threads");

    // export-figure
    auto* ex = app.add_subcommand("export-figure", "emit figure CSV/SVG from a report dir");
    std::string ex_name, ex_report, ex_out;
    ex->add_option("--name", ex_name, "fig3 | fig4 | fig5 | fig7")->required();
    ex->add_option("--report", ex_report, "report or run directory with source CSVs")
        ->required();
    ex->add_option("--out", ex_out, "output directory (default: report dir)");

    // reproduce
    auto* rp = app.add_subcommand("reproduce", "run a named experiment pipeline end to end");
    std::string rp_name, rp_out;
    rp->add_option("--name", rp_name, "fig3 | fig4 | alpha_ablation | mode_comparison")
        ->required();
    rp->add_option("--out", rp_out, "output root (default METAPOP_OUT or ./runs)");

    app.parse(argc, argv);

    if (gen->parsed()) {
        const PayoffMatrix m = generate_shifted_block_matrix(gen_blocks, gen_block_size, gen_eps);
        save_matrix_csv(m, gen_out);
        std::cout << "wrote " << gen_out << " (" << m.dim() << "x" << m.dim() << ")\n";
        return 0;
    }
    if (tr->parsed()) {
        ExperimentConfig cfg = ExperimentConfig::load(tr_config);
        if (!tr_seeds.empty()) cfg.seeds = parse_seed_list(tr_seeds);
        const std::filesystem::path run_dir =
            tr_out.empty() ? default_out_root() / cfg.hash() : std::filesystem::path(tr_out);
        const RunManifest manifest = run_experiment(cfg, run_dir);
        std::cout << "trained " << manifest.seeds.size() << " seed(s) into " << run_dir.string()
                  << " (config " << manifest.config_hash << ", "
                  << format_double(manifest.wall_clock_seconds) << "s)\n";
        return 0;
    }
    if (ev->parsed()) {
        const ExperimentConfig cfg = ExperimentConfig::load(ev_config);
        const EvalReport report = evaluate_run(cfg, ev_run, ev_strangers, ev_stranger_base);
        if (report.has_intra) {
            std::cout << "intra-XP: " << format_double(report.intra.mean) << " +- "
                      << format_double(report.intra.stderr) << " over " << report.intra.count
                      << " ordered pairs\n";
        }
        if (report.has_one_sided) {
            std::cout << "1ZSC-XP: " << format_double(report.one_sided.mean) << " +- "
                      << format_double(report.one_sided.stderr) << " over "
                      << report.one_sided.count << " models\n";
        }
        return 0;
    }
    if (sw->parsed()) {
        const ExperimentConfig base = ExperimentConfig::load(sw_config);
        SweepAxes axes;
        if (!sw_k.empty()) axes.population_sizes = parse_number_list<int>(sw_k);
        if (!sw_alpha.empty()) axes.alphas = parse_number_list<double>(sw_alpha);
        if (!sw_modes.empty()) axes.modes = parse_mode_list(sw_modes);
        if (!sw_blocks.empty()) axes.blocks = parse_number_list<int>(sw_blocks);
        const std::filesystem::path out =
            sw_out.empty() ? default_out_root() / ("sweep_" + base.hash())
                           : std::filesystem::path(sw_out);
        run_sweep(base, axes, out, sw_jobs);
        std::cout << "sweep finished: " << out.string() << "\n";
        return 0;
    }
    if (ex->parsed()) {
        const std::filesystem::path out(ex_out.empty() ? ex_report : ex_out);
        export_figure(ex_name, ex_report, out);
        std::cout << "wrote " << (out / (ex_name + ".svg")).string() << "\n";
        return 0;
    }
    if (rp->parsed()) {
        const std::filesystem::path out =
            rp_out.empty() ? default_out_root() : std::filesystem::path(rp_out);
        const std::filesystem::path report = reproduce_experiment(rp_name, out);
        std::cout << "report: " << report.string() << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::ParseError& e) {
        return CLI::App().exit(e) == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
