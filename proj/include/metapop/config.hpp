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

#include "metapop/training.hpp"

namespace metapop {

/// One experiment: environment spec, method/mode/population, training
/// hyperparameters and the seed list. Serializes to a sectioned `key = value`
/// text form with stable ordering; the FNV-1a hash of that canonical form
/// identifies the experiment. Unknown keys are a hard error.
struct ExperimentConfig {
    // [env]
    int blocks = 5;
    int block_size = 10;
    double eps_reward = 0.1;
    // [run]
    Method method = Method::scapt;
    TrainMode mode = TrainMode::II;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    // [train] + [net] live inside TrainConfig (population_size, alpha, ...)
    TrainConfig train;

    bool operator==(const ExperimentConfig& other) const;

    PayoffMatrix make_matrix() const;
    std::string canonical_text() const;
    std::string hash() const;  // hex FNV-1a of canonical_text()
    std::string to_json() const;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);  // "0..4" or "0,3,7"

}  // namespace metapop
