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

#include "metapop/matrix_game.hpp"

#include <sstream>
#include <stdexcept>

#include "metapop/io_util.hpp"

namespace metapop {

PayoffMatrix::PayoffMatrix(int n_b, int d, double eps, std::vector<double> entries)
    : n_b_(n_b), d_(d), dim_(n_b * d), eps_(eps), entries_(std::move(entries)) {
    if (n_b_ < 1) throw std::invalid_argument("PayoffMatrix: n_b must be >= 1");
    if (d_ < 3) throw std::invalid_argument("PayoffMatrix: d must be >= 3");
    if (eps_ < 0.0 || eps_ >= 1.0) {
        throw std::invalid_argument("PayoffMatrix: eps must be in [0, 1)");
    }
    if (entries_.size() != static_cast<std::size_t>(dim_) * dim_) {
        throw std::invalid_argument("PayoffMatrix: entry count mismatch");
    }
}

PayoffMatrix generate_shifted_block_matrix(int n_b, int d, double eps) {
    if (n_b < 1) throw std::invalid_argument("generate_shifted_block_matrix: n_b must be >= 1");
    if (d < 3) throw std::invalid_argument("generate_shifted_block_matrix: d must be >= 3");
    if (eps < 0.0 || eps >= 1.0) {
        throw std::invalid_argument("generate_shifted_block_matrix: eps must be in [0, 1)");
    }
    const int dim = n_b * d;
    std::vector<double> entries(static_cast<std::size_t>(dim) * dim, 0.0);

    // Base pattern: identity with cell (1,1) cleared and (1,0) set, plus an
    // eps band at (i, i-1) and (i, i+1) for rows 2..d-1, restricted to
    // columns 1 < j < d.
    std::vector<double> base(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) base[static_cast<std::size_t>(i) * d + i] = 1.0;
    base[static_cast<std::size_t>(1) * d + 1] = 0.0;
    base[static_cast<std::size_t>(1) * d + 0] = 1.0;
    for (int i = 2; i <= d - 1; ++i) {
        for (int j : {i - 1, i + 1}) {
            if (j > 1 && j < d) base[static_cast<std::size_t>(i) * d + j] = eps;
        }
    }

    const int flat = d * d;
    for (int k = 0; k < n_b; ++k) {
        // Shifted block: position t reads the base at (t + k) mod d^2.
        for (int t = 0; t < flat; ++t) {
            const double value = base[(t + k) % flat];
            const int r = t / d;
            const int c = t % d;
            entries[static_cast<std::size_t>(k * d + r) * dim + (k * d + c)] = value;
        }
    }
    return PayoffMatrix(n_b, d, eps, std::move(entries));
}

GameOutcome play(const PayoffMatrix& m, int row, int col) {
    if (row < 0 || row >= m.dim() || col < 0 || col >= m.dim()) {
        throw std::out_of_range("play: action outside [0, dim)");
    }
    return GameOutcome{row, col, m.at(row, col)};
}

Vec observation(Role role) {
    return role == Role::row ? Vec{1.0, 0.0, 1.0} : Vec{0.0, 1.0, 1.0};
}

Vec acting_context(Role role, bool role_observations) {
    return role_observations ? observation(role) : Vec{1.0};
}

void save_matrix_csv(const PayoffMatrix& m, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# n_b=" << m.blocks() << ",d=" << m.block_size()
        << ",eps=" << format_double(m.eps()) << "\n";
    for (int r = 0; r < m.dim(); ++r) {
        for (int c = 0; c < m.dim(); ++c) {
            if (c) out << ',';
            out << format_double(m.at(r, c));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

PayoffMatrix load_matrix_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("# n_b=", 0) != 0) {
        throw std::runtime_error("load_matrix_csv: missing metadata line in " + path.string());
    }
    int n_b = 0, d = 0;
    double eps = 0.0;
    {
        std::string meta = line.substr(2);
        std::istringstream ms(meta);
        std::string item;
        while (std::getline(ms, item, ',')) {
            const auto pos = item.find('=');
            if (pos == std::string::npos) {
                throw std::runtime_error("load_matrix_csv: bad metadata item '" + item + "'");
            }
            const std::string key = item.substr(0, pos);
            const std::string value = item.substr(pos + 1);
            if (key == "n_b") n_b = std::stoi(value);
            else if (key == "d") d = std::stoi(value);
            else if (key == "eps") eps = parse_double(value);
            else throw std::runtime_error("load_matrix_csv: unknown metadata key '" + key + "'");
        }
    }
    const int dim = n_b * d;
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(dim) * dim);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) entries.push_back(parse_double(cell));
    }
    return PayoffMatrix(n_b, d, eps, std::move(entries));
}

}  // namespace metapop
