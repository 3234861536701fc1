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

#include <cstddef>
#include <span>
#include <vector>

#include "metapop/net.hpp"
#include "metapop/rng.hpp"

namespace metapop {

/// One environment interaction. `head` is the sub-decision index for partner
/// transitions, or kMainAgentHead for main-agent transitions. Single-step
/// games always terminate, so `next_obs` is carried but masked by done.
struct Transition {
    Vec obs;
    int head = -1;
    int action = 0;
    double reward = 0.0;
    Vec next_obs;
    bool done = true;
};

inline constexpr int kMainAgentHead = -1;

enum class PriorityMode { uniform, proportional };

/// FIFO ring buffer with uniform or proportional (prioritized) sampling.
/// Proportional mode keeps priorities in a sum tree: P(j) proportional to
/// (|td_error_j| + priority_eps)^priority_exponent, with importance weights
/// (N P(j))^-beta normalized by the batch maximum. New items enter at the
/// current maximum priority.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity,
                          PriorityMode mode = PriorityMode::uniform,
                          double priority_exponent = 0.6,
                          double importance_exponent = 0.4,
                          double priority_eps = 1e-3);

    void push(Transition t);

    struct Batch {
        std::vector<Transition> items;
        std::vector<std::size_t> indices;  // slot ids for priority updates
        Vec weights;
    };
    Batch sample(std::size_t n, Rng& rng) const;

    void update_priorities(std::span<const std::size_t> indices,
                           std::span<const double> td_errors);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    PriorityMode mode() const { return mode_; }
    const Transition& at(std::size_t slot) const { return storage_[slot]; }

    /// Total mass in the sum tree (proportional mode), for invariant tests.
    double priority_total() const;

private:
    void set_priority(std::size_t slot, double priority);
    std::size_t sample_proportional(double mass) const;

    std::size_t capacity_;
    PriorityMode mode_;
    double priority_exponent_;
    double importance_exponent_;
    double priority_eps_;
    std::vector<Transition> storage_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
    double max_priority_ = 1.0;
    // Sum tree over capacity_ leaves, 1-indexed heap layout.
    std::vector<double> tree_;
    std::size_t leaf_base_ = 0;
};

}  // namespace metapop
