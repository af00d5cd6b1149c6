#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "adagae/errors.hpp"

// Adaptive sparse graph construction: the closed-form solution of the
// l2-regularized connectivity problem turns pairwise distances into a
// row-stochastic k-sparse neighbor distribution, which is then symmetrized
// into a weighted graph with adaptive self-loops.

namespace adagae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

struct SparseEntry {
    Index index;
    double value;
};

// Row-stochastic sparse matrix: row i holds p(. | v_i) as (index, probability)
// pairs sorted by index.
struct ConnectivityDistribution {
    Index size = 0;
    std::vector<std::vector<SparseEntry>> rows;

    SparseMatrix to_sparse() const {
        std::vector<Eigen::Triplet<double>> trips;
        for (Index i = 0; i < size; ++i)
            for (const auto& e : rows[i]) trips.emplace_back(int(i), int(e.index), e.value);
        SparseMatrix m(size, size);
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    }
};

// Symmetric weighted adjacency with degree vector, degree-normalized form
// and unnormalized Laplacian.
struct WeightedGraph {
    SparseMatrix adjacency;   // A~ = (P + P^T)/2
    Vector degrees;           // D~_ii = sum_j A~_ij
    SparseMatrix normalized;  // A^ = D~^{-1/2} A~ D~^{-1/2}
    SparseMatrix laplacian;   // L~ = D~ - A~

    Index size() const { return adjacency.rows(); }
};

namespace detail {

inline void check_sparsity_range(Index n, Index k, const char* where) {
    if (k < 2 || k > n - 1)
        throw ConfigError(std::string(where) + ": sparsity k = " + std::to_string(k) +
                          " outside [2, n-1] with n = " + std::to_string(n));
}

inline void check_row(const Vector& row, Index self_index, const char* where) {
    if (self_index < 0 || self_index >= row.size())
        throw ConfigError(std::string(where) + ": self index out of range");
    if (!row.allFinite())
        throw InvalidInputError(std::string(where) + ": non-finite distance in row");
}

// Indices of the m smallest row entries, ties broken by ascending index.
inline std::vector<Index> smallest_indices(const Vector& row, Index m) {
    std::vector<Index> order(row.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + m, order.end(),
                      [&row](Index a, Index b) {
                          return row[a] < row[b] || (row[a] == row[b] && a < b);
                      });
    order.resize(m);
    return order;
}

}  // namespace detail

// Squared Euclidean distances between all row pairs of Z. Exactly symmetric,
// zero diagonal, negatives from cancellation clamped to zero.
inline Matrix pairwise_sq_distances(const Matrix& Z) {
    if (Z.rows() < 2) throw ConfigError("pairwise_sq_distances: need at least 2 rows");
    if (!Z.allFinite()) throw InvalidInputError("pairwise_sq_distances: non-finite input");
    const Index n = Z.rows();
    const Vector sq = Z.rowwise().squaredNorm();
    const Matrix gram = Z * Z.transpose();
    Matrix dist(n, n);
    for (Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            const double d = std::max(0.0, sq[i] + sq[j] - 2.0 * gram(i, j));
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

// Per-row regularizer gamma_i = (k d^(k+1) - sum_{v<=k} d^(v)) / 2, the upper
// bound of the k-sparsity interval. d^(v) is the v-th smallest row entry with
// the self distance participating in the ranking.
inline double compute_gamma(const Vector& row, Index self_index, Index k) {
    detail::check_sparsity_range(row.size(), k, "compute_gamma");
    detail::check_row(row, self_index, "compute_gamma");
    const auto order = detail::smallest_indices(row, k + 1);
    double head = 0.0;
    for (Index v = 0; v < k; ++v) head += row[order[v]];
    return 0.5 * (double(k) * row[order[k]] - head);
}

// Closed-form minimizer of  sum_j p_j d_j + gamma ||p||^2  on the simplex at
// the gamma of compute_gamma: p_j = (d^(k+1) - d_j)_+ / sum_v (d^(k+1) - d^(v)).
// Ties at rank k resolve by index order; a zero denominator (first k+1
// distances equal) yields the uniform limit 1/k over the selected neighbors.
inline std::vector<SparseEntry> solve_connectivity_row(const Vector& row, Index self_index,
                                                       Index k) {
    detail::check_sparsity_range(row.size(), k, "solve_connectivity_row");
    detail::check_row(row, self_index, "solve_connectivity_row");
    const auto order = detail::smallest_indices(row, k + 1);
    const double dk1 = row[order[k]];
    double denom = 0.0;
    for (Index v = 0; v < k; ++v) denom += dk1 - row[order[v]];

    std::vector<SparseEntry> entries;
    entries.reserve(k);
    if (denom <= 0.0) {
        for (Index v = 0; v < k; ++v) entries.push_back({order[v], 1.0 / double(k)});
    } else {
        for (Index v = 0; v < k; ++v) {
            const double p = (dk1 - row[order[v]]) / denom;
            if (p > 0.0) entries.push_back({order[v], p});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    return entries;
}

// Solves every row of the distance matrix independently.
inline ConnectivityDistribution build_distribution(const Matrix& distances, Index k) {
    if (distances.rows() != distances.cols())
        throw ConfigError("build_distribution: distance matrix must be square");
    const Index n = distances.rows();
    detail::check_sparsity_range(n, k, "build_distribution");
    ConnectivityDistribution p;
    p.size = n;
    p.rows.resize(n);
    for (Index i = 0; i < n; ++i) {
        try {
            p.rows[i] = solve_connectivity_row(distances.row(i), i, k);
        } catch (const Error& e) {
            throw InvalidInputError("build_distribution: row " + std::to_string(i) + ": " +
                                    e.what());
        }
    }
    return p;
}

// Recomputes A^ = D~^{-1/2} A~ D~^{-1/2} from the adjacency and degree fields.
inline void normalize(WeightedGraph& g) {
    const Index n = g.size();
    if ((g.degrees.array() <= 0.0).any())
        throw NumericError("normalize: degenerate graph with non-positive degree");
    Vector inv_sqrt = g.degrees.array().sqrt().inverse();
    g.normalized = g.adjacency;
    for (Index i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(g.normalized, i); it; ++it)
            it.valueRef() *= inv_sqrt[it.row()] * inv_sqrt[it.col()];
}

// Undirected graph from the directed distribution: A~_ij = (P_ij + P_ji)/2,
// with degrees, normalized adjacency and Laplacian filled in.
inline WeightedGraph symmetrize(const ConnectivityDistribution& p) {
    const Index n = p.size;
    std::vector<Eigen::Triplet<double>> trips;
    for (Index i = 0; i < n; ++i)
        for (const auto& e : p.rows[i]) {
            trips.emplace_back(int(i), int(e.index), 0.5 * e.value);
            trips.emplace_back(int(e.index), int(i), 0.5 * e.value);
        }
    WeightedGraph g;
    g.adjacency.resize(n, n);
    g.adjacency.setFromTriplets(trips.begin(), trips.end());
    g.degrees = g.adjacency * Vector::Ones(n);
    if ((g.degrees.array() <= 0.0).any())
        throw NumericError("symmetrize: zero degree after symmetrization");
    normalize(g);

    std::vector<Eigen::Triplet<double>> lap;
    lap.reserve(trips.size() + size_t(n));
    for (Index i = 0; i < n; ++i) {
        lap.emplace_back(int(i), int(i), g.degrees[i]);
        for (SparseMatrix::InnerIterator it(g.adjacency, i); it; ++it)
            lap.emplace_back(int(it.row()), int(it.col()), -it.value());
    }
    g.laplacian.resize(n, n);
    g.laplacian.setFromTriplets(lap.begin(), lap.end());
    return g;
}

}  // namespace adagae
