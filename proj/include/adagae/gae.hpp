#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adagae/errors.hpp"
#include "adagae/graph.hpp"

// Graph auto-encoder over a weighted graph: stacked graph-convolution layers
// encode, a softmax over negative squared embedding distances decodes, and the
// loss couples the reconstruction cross entropy with a local consistency
// penalty on the graph edges. Gradients are accumulated in closed form.

namespace adagae {

enum class Activation { Rectifier, Linear };

struct EncoderConfig {
    std::vector<Index> layer_dims;         // output width per layer
    std::vector<Activation> activations;   // per-layer activation
    std::uint64_t seed = 0;

    // Paper defaults: 256-64 for wide inputs, 128-64 otherwise; ReLU then linear.
    static EncoderConfig defaults_for_input(Index input_dim, std::uint64_t seed = 0) {
        EncoderConfig c;
        c.layer_dims = input_dim >= 1024 ? std::vector<Index>{256, 64}
                                         : std::vector<Index>{128, 64};
        c.activations = {Activation::Rectifier, Activation::Linear};
        c.seed = seed;
        return c;
    }

    void validate() const {
        if (layer_dims.empty()) throw ConfigError("EncoderConfig: need at least one layer");
        for (Index w : layer_dims)
            if (w < 1) throw ConfigError("EncoderConfig: layer width must be >= 1");
        if (activations.size() != layer_dims.size())
            throw ConfigError("EncoderConfig: one activation per layer required");
    }
};

struct GaeParams {
    std::vector<Matrix> weights;  // W_l, shape chain d x h_1, h_1 x h_2, ...
};

struct LossTerms {
    double total = 0.0;
    double cross_entropy = 0.0;  // sum_ij P_ij log(1 / Q_ij)
    double trace = 0.0;          // sum_ij A~_ij ||z_i - z_j||^2
};

struct FitOptions {
    double lr = 1e-2;
    int max_iters = 100;
    double tol = 1e-6;
    bool adam = false;  // adaptive-moment variant; plain descent by default
};

// Fan-balanced uniform init on [-sqrt(6/(fan_in+fan_out)), +...], seeded.
inline GaeParams init_params(const EncoderConfig& config, Index input_dim) {
    config.validate();
    if (input_dim < 1) throw ConfigError("init_params: input dimension must be >= 1");
    std::mt19937_64 rng(config.seed);
    GaeParams params;
    Index fan_in = input_dim;
    for (Index width : config.layer_dims) {
        const double bound = std::sqrt(6.0 / double(fan_in + width));
        std::uniform_real_distribution<double> unif(-bound, bound);
        Matrix w(fan_in, width);
        for (Index r = 0; r < fan_in; ++r)
            for (Index c = 0; c < width; ++c) w(r, c) = unif(rng);
        params.weights.push_back(std::move(w));
        fan_in = width;
    }
    return params;
}

namespace detail {

inline Matrix apply_activation(const Matrix& s, Activation act) {
    return act == Activation::Rectifier ? s.cwiseMax(0.0) : s;
}

struct ForwardCache {
    std::vector<Matrix> propagated;  // A^ H_{l-1} per layer
    std::vector<Matrix> pre;         // S_l = A^ H_{l-1} W_l
    std::vector<Matrix> post;        // H_l = phi_l(S_l); back() is Z
};

inline ForwardCache encode_forward(const SparseMatrix& a_hat, const Matrix& x,
                                   const GaeParams& params, const EncoderConfig& config) {
    config.validate();
    if (params.weights.size() != config.layer_dims.size())
        throw ConfigError("encode: parameter count does not match layer count");
    if (a_hat.rows() != x.rows())
        throw ConfigError("encode: adjacency and feature row counts differ");
    ForwardCache cache;
    const Matrix* h = &x;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        const Matrix& w = params.weights[l];
        if (w.rows() != h->cols())
            throw ConfigError("encode: weight shape mismatch at layer " + std::to_string(l));
        cache.propagated.push_back(a_hat * (*h));
        cache.pre.push_back(cache.propagated.back() * w);
        cache.post.push_back(apply_activation(cache.pre.back(), config.activations[l]));
        if (!cache.post.back().allFinite())
            throw NumericError("encode: non-finite activation at layer " + std::to_string(l));
        h = &cache.post.back();
    }
    return cache;
}

}  // namespace detail

// Z = phi_m(A^ phi_{m-1}(... phi_1(A^ X W_1) ...) W_m)
inline Matrix encode(const SparseMatrix& a_hat, const Matrix& x, const GaeParams& params,
                     const EncoderConfig& config) {
    return detail::encode_forward(a_hat, x, params, config).post.back();
}

// Row-stochastic reconstruction: q(v_j | v_i) = exp(-||z_i - z_j||^2) / row sum.
// The row maximum of the logits is the zero self distance, so the plain
// exponential is already the max-shifted form.
inline Matrix decode(const Matrix& z) {
    const Matrix dist = pairwise_sq_distances(z);
    Matrix q = (-dist.array()).exp();
    const Vector row_sums = q.rowwise().sum();
    q = row_sums.cwiseInverse().asDiagonal() * q;
    return q;
}

// total = sum_ij P_ij log(1/Q_ij) + lambda * sum_ij A~_ij ||z_i - z_j||^2.
// The penalty is the edge-sum over ordered pairs, i.e. 2 tr(Z^T L~ Z).
inline LossTerms loss(const ConnectivityDistribution& p, const Matrix& q, const Matrix& z,
                      const WeightedGraph& graph, double lambda) {
    if (lambda < 0.0) throw ConfigError("loss: lambda must be >= 0");
    if (q.rows() != p.size || q.cols() != p.size)
        throw ConfigError("loss: reconstruction shape mismatch");
    LossTerms terms;
    for (Index i = 0; i < p.size; ++i)
        for (const auto& e : p.rows[i]) {
            const double qv = q(i, e.index);
            if (!(qv > 0.0))
                throw NumericError("loss: zero reconstruction mass under positive target");
            terms.cross_entropy -= e.value * std::log(qv);
        }
    const Index n = graph.size();
    for (Index i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(graph.adjacency, i); it; ++it)
            terms.trace += it.value() * (z.row(it.row()) - z.row(it.col())).squaredNorm();
    terms.total = terms.cross_entropy + lambda * terms.trace;
    return terms;
}

namespace detail {

// Shared forward + reverse pass. The gradient of the total loss w.r.t. Z is
// 2 (diag(S 1) - S) Z with S = P + P^T + 2 lambda A~ - Q - Q^T; the sparse
// part K = P + P^T + 2 lambda A~ is precomputed by callers that iterate.
struct BackwardResult {
    LossTerms terms;
    std::vector<Matrix> grads;
    Matrix z;
};

inline SparseMatrix build_static_coeff(const ConnectivityDistribution& p,
                                       const WeightedGraph& graph, double lambda) {
    SparseMatrix psp = p.to_sparse();
    SparseMatrix k = psp + SparseMatrix(psp.transpose());
    if (lambda != 0.0) k = k + SparseMatrix(graph.adjacency * (2.0 * lambda));
    return k;
}

inline BackwardResult forward_backward(const ConnectivityDistribution& p, const Matrix& x,
                                       const WeightedGraph& graph, const SparseMatrix& k,
                                       const Vector& k_row_sums, const GaeParams& params,
                                       const EncoderConfig& config, double lambda) {
    ForwardCache cache = encode_forward(graph.normalized, x, params, config);
    const Matrix& z = cache.post.back();
    const Index n = z.rows();

    const Matrix dist = pairwise_sq_distances(z);
    const Matrix expd = (-dist.array()).exp();
    const Vector row_sums = expd.rowwise().sum();
    const Matrix q = row_sums.cwiseInverse().asDiagonal() * expd;

    BackwardResult out;
    for (Index i = 0; i < n; ++i) {
        for (const auto& e : p.rows[i])
            out.terms.cross_entropy += e.value * dist(i, e.index);
        out.terms.cross_entropy += std::log(row_sums[i]);
    }
    for (Index i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(graph.adjacency, i); it; ++it)
            out.terms.trace += it.value() * dist(it.row(), it.col());
    out.terms.total = out.terms.cross_entropy + lambda * out.terms.trace;

    const Matrix b = q + q.transpose();
    const Vector b_row_sums = b.rowwise().sum();
    Matrix grad_z =
        2.0 * ((k_row_sums - b_row_sums).asDiagonal() * z - (k * z - b * z));

    out.grads.resize(params.weights.size());
    Matrix delta = std::move(grad_z);  // dL/dH_l while walking backwards
    for (int l = int(params.weights.size()) - 1; l >= 0; --l) {
        if (config.activations[l] == Activation::Rectifier)
            delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
        out.grads[l] = cache.propagated[l].transpose() * delta;
        if (!out.grads[l].allFinite())
            throw NumericError("gradients: non-finite gradient at layer " + std::to_string(l));
        if (l > 0)
            delta = graph.normalized * (delta * params.weights[l].transpose());
    }
    out.z = z;
    return out;
}

}  // namespace detail

// dTotal/dW_l for every layer, by reverse accumulation through the decoder
// softmax, the edge penalty and the graph convolutions.
inline std::vector<Matrix> gradients(const ConnectivityDistribution& p, const Matrix& x,
                                     const WeightedGraph& graph, const GaeParams& params,
                                     const EncoderConfig& config, double lambda) {
    const SparseMatrix k = detail::build_static_coeff(p, graph, lambda);
    const Vector k_row_sums = k * Vector::Ones(k.rows());
    return detail::forward_backward(p, x, graph, k, k_row_sums, params, config, lambda).grads;
}

struct FitResult {
    GaeParams params;
    std::vector<double> trace;  // loss at each visited iterate
    LossTerms final_terms;
    Matrix embedding;
    bool converged = false;
};

// Full-batch first-order descent on the composite loss. Stops on the relative
// loss change |l_t - l_{t-1}| / max(1, |l_{t-1}|) < tol or at max_iters.
inline FitResult fit(const ConnectivityDistribution& p, const Matrix& x,
                     const WeightedGraph& graph, GaeParams params, const EncoderConfig& config,
                     double lambda, const FitOptions& opts) {
    if (opts.lr <= 0.0) throw ConfigError("fit: learning rate must be > 0");
    if (opts.max_iters < 1) throw ConfigError("fit: max_iters must be >= 1");
    if (opts.tol < 0.0) throw ConfigError("fit: tol must be >= 0");

    const SparseMatrix k = detail::build_static_coeff(p, graph, lambda);
    const Vector k_row_sums = k * Vector::Ones(k.rows());

    // Adam state, used only when opts.adam is set.
    std::vector<Matrix> m1, m2;
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    if (opts.adam)
        for (const Matrix& w : params.weights) {
            m1.push_back(Matrix::Zero(w.rows(), w.cols()));
            m2.push_back(Matrix::Zero(w.rows(), w.cols()));
        }

    FitResult result;
    double prev = 0.0;
    int steps = 0;
    for (int t = 0; t < opts.max_iters; ++t) {
        auto bw = detail::forward_backward(p, x, graph, k, k_row_sums, params, config, lambda);
        if (!std::isfinite(bw.terms.total))
            throw NumericError("fit: loss diverged at iteration " + std::to_string(t) +
                               " with lr " + std::to_string(opts.lr));
        result.trace.push_back(bw.terms.total);
        result.final_terms = bw.terms;
        result.embedding = std::move(bw.z);
        if (t > 0 && std::abs(bw.terms.total - prev) / std::max(1.0, std::abs(prev)) < opts.tol) {
            result.converged = true;
            break;
        }
        prev = bw.terms.total;
        ++steps;
        for (size_t l = 0; l < params.weights.size(); ++l) {
            if (opts.adam) {
                m1[l] = beta1 * m1[l] + (1.0 - beta1) * bw.grads[l];
                m2[l] = beta2 * m2[l].array().matrix() +
                        (1.0 - beta2) * bw.grads[l].array().square().matrix();
                const double c1 = 1.0 - std::pow(beta1, steps);
                const double c2 = 1.0 - std::pow(beta2, steps);
                params.weights[l] -=
                    (opts.lr * (m1[l] / c1).array() / ((m2[l] / c2).array().sqrt() + adam_eps))
                        .matrix();
            } else {
                params.weights[l] -= opts.lr * bw.grads[l];
            }
        }
    }
    if (!result.converged) {
        // account for the last update so the reported loss matches the
        // returned parameters
        auto bw = detail::forward_backward(p, x, graph, k, k_row_sums, params, config, lambda);
        if (!std::isfinite(bw.terms.total))
            throw NumericError("fit: loss diverged after final update with lr " +
                               std::to_string(opts.lr));
        result.trace.push_back(bw.terms.total);
        result.final_terms = bw.terms;
        result.embedding = std::move(bw.z);
    }
    result.params = std::move(params);
    return result;
}

}  // namespace adagae
