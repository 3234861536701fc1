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

#include "metapop/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metapop {

ReplayBuffer::ReplayBuffer(std::size_t capacity, PriorityMode mode,
                           double priority_exponent, double importance_exponent,
                           double priority_eps)
    : capacity_(capacity),
      mode_(mode),
      priority_exponent_(priority_exponent),
      importance_exponent_(importance_exponent),
      priority_eps_(priority_eps) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
    storage_.resize(capacity_);
    if (mode_ == PriorityMode::proportional) {
        leaf_base_ = 1;
        while (leaf_base_ < capacity_) leaf_base_ *= 2;
        tree_.assign(2 * leaf_base_, 0.0);
    }
}

void ReplayBuffer::set_priority(std::size_t slot, double priority) {
    std::size_t node = leaf_base_ + slot;
    tree_[node] = priority;
    for (node /= 2; node >= 1; node /= 2) {
        tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
        if (node == 1) break;
    }
}

std::size_t ReplayBuffer::sample_proportional(double mass) const {
    std::size_t node = 1;
    while (node < leaf_base_) {
        const std::size_t left = 2 * node;
        if (mass < tree_[left] || tree_[left + 1] <= 0.0) {
            node = left;
        } else {
            mass -= tree_[left];
            node = left + 1;
        }
    }
    return std::min(node - leaf_base_, size_ - 1);
}

void ReplayBuffer::push(Transition t) {
    storage_[next_] = std::move(t);
    if (mode_ == PriorityMode::proportional) {
        set_priority(next_, std::pow(max_priority_, priority_exponent_));
    }
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (size_ == 0) throw std::runtime_error("ReplayBuffer: sample from empty buffer");
    if (n == 0) throw std::invalid_argument("ReplayBuffer: sample size must be > 0");
    Batch batch;
    batch.items.reserve(n);
    batch.indices.reserve(n);
    batch.weights.assign(n, 1.0);
    if (mode_ == PriorityMode::uniform) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t slot = rng.next_below(size_);
            batch.indices.push_back(slot);
            batch.items.push_back(storage_[slot]);
        }
        return batch;
    }
    const double total = tree_[1];
    if (total <= 0.0) throw std::runtime_error("ReplayBuffer: zero total priority");
    double max_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t slot = sample_proportional(rng.next_double() * total);
        batch.indices.push_back(slot);
        batch.items.push_back(storage_[slot]);
        const double p = tree_[leaf_base_ + slot] / total;
        batch.weights[i] = std::pow(static_cast<double>(size_) * p, -importance_exponent_);
        max_weight = std::max(max_weight, batch.weights[i]);
    }
    for (double& w : batch.weights) w /= max_weight;
    return batch;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> td_errors) {
    if (mode_ == PriorityMode::uniform) return;
    if (indices.size() != td_errors.size()) {
        throw std::invalid_argument("update_priorities: size mismatch");
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double magnitude = std::abs(td_errors[i]) + priority_eps_;
        max_priority_ = std::max(max_priority_, magnitude);
        set_priority(indices[i], std::pow(magnitude, priority_exponent_));
    }
}

double ReplayBuffer::priority_total() const {
    return mode_ == PriorityMode::proportional ? tree_[1] : static_cast<double>(size_);
}

}  // namespace metapop
