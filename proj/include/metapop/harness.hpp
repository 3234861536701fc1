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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metapop/config.hpp"
#include "metapop/evaluation.hpp"

namespace metapop {

inline constexpr const char* kToolVersion = "0.1.0";

/// Default output root: METAPOP_OUT env var, falling back to ./runs.
std::filesystem::path default_out_root();

/// Everything one experiment run produced, with content hashes so stale or
/// tampered artifacts are detected at load time.
struct RunManifest {
    std::string config_hash;
    std::string tool_version = kToolVersion;
    double wall_clock_seconds = 0.0;

    struct SeedArtifacts {
        std::uint64_t seed = 0;
        std::string checkpoint_main;                  // relative to the run dir
        std::string checkpoint_partners;              // empty when not written
        std::vector<std::string> checkpoint_individuals;
        std::string metrics_csv;
    };
    std::vector<SeedArtifacts> seeds;
    std::map<std::string, std::string> file_hashes;  // relative path -> fnv hex

    void save(const std::filesystem::path& run_dir) const;
    static RunManifest load(const std::filesystem::path& run_dir);
    /// Throws MissingArtifactError if a referenced file is absent or its
    /// content hash changed.
    void verify(const std::filesystem::path& run_dir) const;
};

/// Trains every seed of the experiment, writing per-seed metrics CSVs and
/// final checkpoints plus config.cfg, config.json and manifest.json under
/// run_dir.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& run_dir);

/// Loads the per-seed main policies of a finished run.
std::vector<PolicyHandle> load_run_policies(const ExperimentConfig& cfg,
                                            const std::filesystem::path& run_dir);

/// Cross-play evaluation of a finished run: Intra-XP always; 1ZSC-XP against
/// a freshly trained stranger pool when n_strangers > 0. Writes eval CSV,
/// JSON summary and heatmap SVG into run_dir/eval.
EvalReport evaluate_run(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                        int n_strangers = 0, std::uint64_t stranger_seed_base = 10000);

struct SweepAxes {
    std::vector<int> population_sizes;   // empty = keep base
    std::vector<double> alphas;
    std::vector<TrainMode> modes;
    std::vector<int> blocks;
};

struct SweepCell {
    ExperimentConfig config;
    std::filesystem::path run_dir;  // relative cell directory name under the sweep root
};

std::vector<SweepCell> expand_sweep(const ExperimentConfig& base, const SweepAxes& axes);

/// Runs every cell (cross product over the axes) with `jobs` worker threads.
/// Cells share nothing and write to disjoint directories, so parallel output
/// is identical to serial output.
void run_sweep(const ExperimentConfig& base, const SweepAxes& axes,
               const std::filesystem::path& sweep_dir, int jobs);

/// Named paper-experiment setups at desk scale. Every numeric budget below is
/// pinned here so the CLI, the reproduce pipelines and the acceptance suite
/// all run the same configurations.
ExperimentConfig experiment_preset(const std::string& name);

/// Runs the full pipeline for a named setup (fig3, fig4, alpha_ablation,
/// mode_comparison) and writes summary tables (mean +- stderr) plus figure
/// CSV/SVG under out_dir. Returns the report directory.
std::filesystem::path reproduce_experiment(const std::string& name,
                                           const std::filesystem::path& out_dir);

/// Re-emits a figure (fig3, fig4, fig5, fig7) from an existing report
/// directory produced by reproduce_experiment.
void export_figure(const std::string& name, const std::filesystem::path& report_dir,
                   const std::filesystem::path& out_dir);

}  // namespace metapop
