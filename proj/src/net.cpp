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

#include "metapop/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "metapop/kernels.hpp"

namespace metapop {

namespace {

constexpr char kNetMagic[8] = {'M', 'P', 'N', 'E', 'T', 'B', 'L', 'B'};
constexpr std::uint32_t kNetVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void check_dims(const std::vector<int>& dims) {
    if (dims.empty()) throw std::invalid_argument("layer_dims must not be empty");
    for (int d : dims) {
        if (d <= 0) throw std::invalid_argument("layer_dims entries must be positive");
    }
}

}  // namespace

DenseNet DenseNet::init(std::vector<int> dims, Rng& rng) {
    check_dims(dims);
    DenseNet net;
    net.dims = std::move(dims);
    const int layers = static_cast<int>(net.dims.size()) - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (int l = 0; l < layers; ++l) {
        const int fan_in = net.dims[l];
        const int fan_out = net.dims[l + 1];
        const double bound = std::sqrt(6.0 / fan_in);
        net.weights[l].resize(static_cast<std::size_t>(fan_out) * fan_in);
        for (double& w : net.weights[l]) w = rng.uniform(-bound, bound);
        net.biases[l].assign(fan_out, 0.0);
    }
    return net;
}

std::size_t DenseNet::param_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        count += weights[l].size() + biases[l].size();
    }
    return count;
}

bool DenseNet::all_finite() const {
    auto finite = [](const Vec& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!finite(weights[l]) || !finite(biases[l])) return false;
    }
    return true;
}

NetGrads NetGrads::zeros_like(const DenseNet& net) {
    NetGrads g;
    g.weights.resize(net.weights.size());
    g.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights[l].assign(net.weights[l].size(), 0.0);
        g.biases[l].assign(net.biases[l].size(), 0.0);
    }
    return g;
}

void NetGrads::set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void NetGrads::add_scaled(const NetGrads& other, double factor) {
    const auto& k = kern::active_kernels();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        k.axpy(factor, other.weights[l].data(), weights[l].data(), weights[l].size());
        k.axpy(factor, other.biases[l].data(), biases[l].data(), biases[l].size());
    }
}

void NetGrads::scale(double factor) {
    for (auto& w : weights)
        for (double& x : w) x *= factor;
    for (auto& b : biases)
        for (double& x : b) x *= factor;
}

Vec net_forward(const DenseNet& net, std::span<const double> input, ForwardCache* cache) {
    if (static_cast<int>(input.size()) != net.input_dim()) {
        throw std::invalid_argument("net_forward: input length does not match layer_dims[0]");
    }
    const auto& k = kern::active_kernels();
    const int layers = net.num_layers();
    if (!cache) {
        Vec current(input.begin(), input.end());
        Vec next;
        for (int l = 0; l < layers; ++l) {
            const int rows = net.dims[l + 1];
            const int cols = net.dims[l];
            next.resize(rows);
            const double* w = net.weights[l].data();
            for (int r = 0; r < rows; ++r) {
                next[r] = net.biases[l][r] + k.dot(w + static_cast<std::size_t>(r) * cols,
                                                   current.data(), cols);
            }
            if (l + 1 < layers) k.relu(next.data(), next.data(), next.size());
            std::swap(current, next);
        }
        return current;
    }
    // Cached path reuses the cache's storage across calls of the same shape.
    cache->input.assign(input.begin(), input.end());
    cache->pre.resize(layers);
    cache->act.resize(layers);
    const Vec* current = &cache->input;
    for (int l = 0; l < layers; ++l) {
        const int rows = net.dims[l + 1];
        const int cols = net.dims[l];
        Vec& pre = cache->pre[l];
        pre.resize(rows);
        const double* w = net.weights[l].data();
        for (int r = 0; r < rows; ++r) {
            pre[r] = net.biases[l][r] + k.dot(w + static_cast<std::size_t>(r) * cols,
                                              current->data(), cols);
        }
        Vec& out = cache->act[l];
        out.resize(rows);
        if (l + 1 < layers) {
            k.relu(pre.data(), out.data(), pre.size());
        } else {
            std::copy(pre.begin(), pre.end(), out.begin());
        }
        current = &out;
    }
    return layers == 0 ? cache->input : cache->act.back();
}

void net_backward_acc(const DenseNet& net, const ForwardCache& cache,
                      std::span<const double> output_grad, NetGrads& grads,
                      Vec& input_grad_acc) {
    const int layers = net.num_layers();
    if (static_cast<int>(cache.pre.size()) != layers ||
        static_cast<int>(cache.input.size()) != net.input_dim()) {
        throw std::invalid_argument("net_backward: cache does not match this net");
    }
    for (int l = 0; l < layers; ++l) {
        if (static_cast<int>(cache.pre[l].size()) != net.dims[l + 1]) {
            throw std::invalid_argument("net_backward: cache does not match this net");
        }
    }
    if (static_cast<int>(output_grad.size()) != net.output_dim()) {
        throw std::invalid_argument("net_backward: output_grad length mismatch");
    }
    if (static_cast<int>(input_grad_acc.size()) != net.input_dim()) {
        throw std::invalid_argument("net_backward: input_grad_acc length mismatch");
    }
    const auto& k = kern::active_kernels();
    thread_local Vec g, g_prev;
    g.assign(output_grad.begin(), output_grad.end());
    for (int l = layers - 1; l >= 0; --l) {
        const int rows = net.dims[l + 1];
        const int cols = net.dims[l];
        const Vec& layer_input = l == 0 ? cache.input : cache.act[l - 1];
        const double* w = net.weights[l].data();
        double* gw = grads.weights[l].data();
        double* out = nullptr;
        if (l == 0) {
            out = input_grad_acc.data();
        } else {
            g_prev.assign(cols, 0.0);
            out = g_prev.data();
        }
        for (int r = 0; r < rows; ++r) {
            grads.biases[l][r] += g[r];
            const std::size_t off = static_cast<std::size_t>(r) * cols;
            k.axpy(g[r], layer_input.data(), gw + off, cols);
            k.axpy(g[r], w + off, out, cols);
        }
        if (l > 0) {
            k.relu_mask(cache.pre[l - 1].data(), out, cols);
            std::swap(g, g_prev);
        }
    }
    if (layers == 0) {
        k.axpy(1.0, g.data(), input_grad_acc.data(), g.size());
    }
}

Vec net_backward(const DenseNet& net, const ForwardCache& cache,
                 std::span<const double> output_grad, NetGrads& grads) {
    Vec input_grad(net.input_dim(), 0.0);
    net_backward_acc(net, cache, output_grad, grads, input_grad);
    return input_grad;
}

AdamState AdamState::init(const DenseNet& net, double lr) {
    if (lr <= 0.0) throw std::invalid_argument("adam: lr must be positive");
    AdamState s;
    s.lr = lr;
    s.m_weights.resize(net.weights.size());
    s.v_weights.resize(net.weights.size());
    s.m_biases.resize(net.biases.size());
    s.v_biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        s.m_weights[l].assign(net.weights[l].size(), 0.0);
        s.v_weights[l].assign(net.weights[l].size(), 0.0);
        s.m_biases[l].assign(net.biases[l].size(), 0.0);
        s.v_biases[l].assign(net.biases[l].size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& state, DenseNet& params, const NetGrads& grads) {
    if (state.m_weights.size() != params.weights.size()) {
        throw std::invalid_argument("adam_step: state does not match net");
    }
    auto check_finite = [](const Vec& g, const std::string& name) {
        for (double x : g) {
            if (!std::isfinite(x)) {
                throw std::runtime_error("adam_step: non-finite gradient in " + name);
            }
        }
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        check_finite(grads.weights[l], "layer" + std::to_string(l) + ".weight");
        check_finite(grads.biases[l], "layer" + std::to_string(l) + ".bias");
    }
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const auto& k = kern::active_kernels();
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        k.adam(params.weights[l].data(), state.m_weights[l].data(),
               state.v_weights[l].data(), grads.weights[l].data(),
               params.weights[l].size(), state.lr, state.beta1, state.beta2,
               state.eps_stab, c1, c2);
        k.adam(params.biases[l].data(), state.m_biases[l].data(),
               state.v_biases[l].data(), grads.biases[l].data(),
               params.biases[l].size(), state.lr, state.beta1, state.beta2,
               state.eps_stab, c1, c2);
    }
}

FiniteDiffReport finite_diff_check(DenseNet& net,
                                   const std::function<double(const DenseNet&)>& loss,
                                   const NetGrads& analytic, double tolerance,
                                   double fd_step, double rel_floor) {
    FiniteDiffReport report;
    auto check_tensor = [&](Vec& params, const Vec& grad, const std::string& name) {
        double max_rel = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + fd_step;
            const double up = loss(net);
            params[i] = saved - fd_step;
            const double down = loss(net);
            params[i] = saved;
            const double fd = (up - down) / (2.0 * fd_step);
            const double a = grad[i];
            const double denom = std::max({std::abs(a), std::abs(fd), rel_floor});
            max_rel = std::max(max_rel, std::abs(a - fd) / denom);
        }
        report.tensors.push_back({name, max_rel});
        report.worst_rel_err = std::max(report.worst_rel_err, max_rel);
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        check_tensor(net.weights[l], analytic.weights[l], "layer" + std::to_string(l) + ".weight");
        check_tensor(net.biases[l], analytic.biases[l], "layer" + std::to_string(l) + ".bias");
    }
    report.pass = report.worst_rel_err <= tolerance;
    return report;
}

void save_net(const DenseNet& net, std::ostream& out) {
    out.write(kNetMagic, sizeof(kNetMagic));
    write_u32(out, kNetVersion);
    write_u32(out, static_cast<std::uint32_t>(net.dims.size()));
    for (int d : net.dims) write_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (double w : net.weights[l]) write_f64(out, w);
        for (double b : net.biases[l]) write_f64(out, b);
    }
    if (!out) throw std::runtime_error("save_net: write failure");
}

DenseNet load_net(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kNetMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("load_net: bad magic");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kNetVersion) {
        throw std::runtime_error("load_net: unsupported version " + std::to_string(version));
    }
    const std::uint32_t n_dims = read_u32(in);
    if (n_dims == 0 || n_dims > 64) throw std::runtime_error("load_net: corrupt dims");
    DenseNet net;
    net.dims.resize(n_dims);
    for (auto& d : net.dims) d = static_cast<int>(read_u32(in));
    check_dims(net.dims);
    const int layers = static_cast<int>(n_dims) - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (int l = 0; l < layers; ++l) {
        net.weights[l].resize(static_cast<std::size_t>(net.dims[l + 1]) * net.dims[l]);
        net.biases[l].resize(net.dims[l + 1]);
        for (double& w : net.weights[l]) w = read_f64(in);
        for (double& b : net.biases[l]) b = read_f64(in);
    }
    if (!in) throw std::runtime_error("load_net: truncated stream");
    return net;
}

}  // namespace metapop
