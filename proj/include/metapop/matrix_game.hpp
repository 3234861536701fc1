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
#include <vector>

#include "metapop/net.hpp"

namespace metapop {

/// Two-player cooperative single-step game over a shifted-block payoff
/// matrix: player 1 picks a row, player 2 picks a column, both receive the
/// entry at the intersection. Entries are only 0, 1 or eps, and eps < 1, so
/// the maximum achievable payoff is 1. Immutable after generation.
class PayoffMatrix {
public:
    PayoffMatrix(int n_b, int d, double eps, std::vector<double> entries);

    int dim() const { return dim_; }
    int blocks() const { return n_b_; }
    int block_size() const { return d_; }
    double eps() const { return eps_; }
    double at(int row, int col) const { return entries_[static_cast<std::size_t>(row) * dim_ + col]; }
    const std::vector<double>& entries() const { return entries_; }

private:
    int n_b_;
    int d_;
    int dim_;
    double eps_;
    std::vector<double> entries_;
};

struct GameOutcome {
    int row_action;
    int col_action;
    double reward;
};

enum class Role { row, col };

/// Builds the block-diagonal payoff matrix: block k is the base pattern
/// (identity with cell (1,1) cleared, (1,0) set to 1, and an eps band next to
/// the diagonal on rows 2..d-1), flattened and cyclically shifted by k
/// positions. All indexing is 0-based. Requires d >= 3 and 0 <= eps < 1.
PayoffMatrix generate_shifted_block_matrix(int n_b, int d = 10, double eps = 0.1);

/// Single step: both players reveal their action and share the entry at the
/// intersection. Out-of-range actions are rejected.
GameOutcome play(const PayoffMatrix& m, int row, int col);

/// Fixed observation per seat: one-hot role plus a constant bias, identical
/// across episodes (the single-step game carries no state).
Vec observation(Role role);
inline constexpr int kObservationDim = 3;

/// Decision context agents consume while acting. The single-step game carries
/// no information, so the default is the constant bias alone, which keeps a
/// policy seat-invariant; with role_observations the seat one-hot observation
/// is used instead and policies may specialize per seat.
Vec acting_context(Role role, bool role_observations);
inline constexpr int kConstantContextDim = 1;
inline int context_dim(bool role_observations) {
    return role_observations ? kObservationDim : kConstantContextDim;
}

/// CSV of dim x dim entries with a leading metadata line (n_b, d, eps).
void save_matrix_csv(const PayoffMatrix& m, const std::filesystem::path& path);
PayoffMatrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace metapop
