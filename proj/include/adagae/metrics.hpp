#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "adagae/errors.hpp"

// Clustering evaluation: accuracy under the optimal injective label matching
// (Hungarian method on the contingency table) and normalized mutual
// information with natural logarithms.

namespace adagae {

struct ContingencyTable {
    std::vector<std::vector<long long>> counts;  // true clusters x predicted clusters
    long long total = 0;
};

namespace detail {

inline std::vector<int> compact_labels(const std::vector<int>& labels) {
    std::vector<int> sorted(labels);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::map<int, int> remap;
    for (size_t i = 0; i < sorted.size(); ++i) remap[sorted[i]] = int(i);
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
    return out;
}

// Minimum-cost perfect assignment on a square matrix (Hungarian method with
// potentials, O(n^3)). Returns the column matched to each row.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<long long>>& cost) {
    const int n = int(cost.size());
    const long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0), minv(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            long long delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta) {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace detail

inline ContingencyTable contingency_table(const std::vector<int>& truth,
                                          const std::vector<int>& pred) {
    if (truth.size() != pred.size())
        throw ConfigError("contingency_table: label vectors differ in length");
    if (truth.empty()) throw ConfigError("contingency_table: empty labels");
    const auto t = detail::compact_labels(truth);
    const auto p = detail::compact_labels(pred);
    const int ct = 1 + *std::max_element(t.begin(), t.end());
    const int cp = 1 + *std::max_element(p.begin(), p.end());
    ContingencyTable table;
    table.counts.assign(ct, std::vector<long long>(cp, 0));
    for (size_t i = 0; i < t.size(); ++i) ++table.counts[t[i]][p[i]];
    table.total = (long long)t.size();
    return table;
}

// ACC: best injective matching of predicted to true labels, padded square so
// unequal cluster counts stay well defined.
inline double accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
    const ContingencyTable table = contingency_table(truth, pred);
    const int ct = int(table.counts.size());
    const int cp = int(table.counts[0].size());
    const int s = std::max(ct, cp);
    std::vector<std::vector<long long>> cost(s, std::vector<long long>(s, 0));
    for (int i = 0; i < ct; ++i)
        for (int j = 0; j < cp; ++j) cost[i][j] = -table.counts[i][j];
    const auto assign = detail::min_cost_assignment(cost);
    long long matched = 0;
    for (int i = 0; i < ct; ++i)
        if (assign[i] < cp) matched += table.counts[i][assign[i]];
    return double(matched) / double(table.total);
}

// NMI = I(T;P) / sqrt(H(T) H(P)). Ties down the 0-entropy corner cases: 1.0
// when both partitions are trivial (identical single-cluster), 0.0 when only
// one of them is.
inline double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
    const ContingencyTable table = contingency_table(truth, pred);
    const int ct = int(table.counts.size());
    const int cp = int(table.counts[0].size());
    const double n = double(table.total);
    std::vector<long long> row_sums(ct, 0), col_sums(cp, 0);
    for (int i = 0; i < ct; ++i)
        for (int j = 0; j < cp; ++j) {
            row_sums[i] += table.counts[i][j];
            col_sums[j] += table.counts[i][j];
        }
    if (ct == 1 && cp == 1) return 1.0;
    if (ct == 1 || cp == 1) return 0.0;
    double h_truth = 0.0, h_pred = 0.0, mutual = 0.0;
    for (int i = 0; i < ct; ++i)
        if (row_sums[i] > 0) h_truth -= double(row_sums[i]) / n * std::log(double(row_sums[i]) / n);
    for (int j = 0; j < cp; ++j)
        if (col_sums[j] > 0) h_pred -= double(col_sums[j]) / n * std::log(double(col_sums[j]) / n);
    for (int i = 0; i < ct; ++i)
        for (int j = 0; j < cp; ++j)
            if (table.counts[i][j] > 0)
                mutual += double(table.counts[i][j]) / n *
                          std::log(double(table.total * table.counts[i][j]) /
                                   double(row_sums[i] * col_sums[j]));
    return mutual / std::sqrt(h_truth * h_pred);
}

}  // namespace adagae
