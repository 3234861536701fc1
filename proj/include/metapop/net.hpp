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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "metapop/rng.hpp"

namespace metapop {

using Vec = std::vector<double>;

/// Fully connected net: rectifier on hidden layers, identity on the output
/// layer. Weights are row-major [dims[l+1] x dims[l]]. dims with a single
/// entry is the empty (identity) net.
struct DenseNet {
    std::vector<int> dims;
    std::vector<Vec> weights;
    std::vector<Vec> biases;

    /// He-style uniform init: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)),
    /// biases zero.
    static DenseNet init(std::vector<int> dims, Rng& rng);

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    std::size_t param_count() const;
    bool all_finite() const;
};

/// Activations recorded by forward, sufficient for backward.
struct ForwardCache {
    Vec input;
    std::vector<Vec> pre;  // pre-activation per layer
    std::vector<Vec> act;  // post-activation per layer; act.back() is the output
};

/// Gradients with the same shapes as the net's parameters.
struct NetGrads {
    std::vector<Vec> weights;
    std::vector<Vec> biases;

    static NetGrads zeros_like(const DenseNet& net);
    void set_zero();
    void add_scaled(const NetGrads& other, double factor);
    void scale(double factor);
};

Vec net_forward(const DenseNet& net, std::span<const double> input,
                ForwardCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` and returns the gradient with
/// respect to the input. The cache must come from a forward call on the same
/// net shape.
Vec net_backward(const DenseNet& net, const ForwardCache& cache,
                 std::span<const double> output_grad, NetGrads& grads);

/// As net_backward, but adds the input gradient into `input_grad_acc`
/// (must be sized to the net's input dim). Allocation-free on reuse.
void net_backward_acc(const DenseNet& net, const ForwardCache& cache,
                      std::span<const double> output_grad, NetGrads& grads,
                      Vec& input_grad_acc);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
    std::int64_t step = 0;
    std::vector<Vec> m_weights, v_weights;
    std::vector<Vec> m_biases, v_biases;

    static AdamState init(const DenseNet& net, double lr);
};

/// Bias-corrected Adam update in place. Throws std::runtime_error naming the
/// offending tensor if a gradient is not finite.
void adam_step(AdamState& state, DenseNet& params, const NetGrads& grads);

struct FiniteDiffReport {
    struct TensorError {
        std::string name;
        double max_rel_err;
    };
    bool pass = true;
    double worst_rel_err = 0.0;
    std::vector<TensorError> tensors;
};

/// Central finite differences of `loss` around the current parameters,
/// compared against the caller-supplied analytic gradient. Relative error per
/// entry is |analytic - fd| / max(|analytic|, |fd|, floor).
FiniteDiffReport finite_diff_check(DenseNet& net,
                                   const std::function<double(const DenseNet&)>& loss,
                                   const NetGrads& analytic, double tolerance,
                                   double fd_step = 1e-5,
                                   double rel_floor = 1e-6);

/// Versioned binary blob: header (magic, version, layer_dims), then row-major
/// little-endian float64 per tensor in declaration order (weights then bias,
/// layer by layer).
void save_net(const DenseNet& net, std::ostream& out);
DenseNet load_net(std::istream& in);

}  // namespace metapop
