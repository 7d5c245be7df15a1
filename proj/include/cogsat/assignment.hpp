// Copyright 2026 the cogsat-ra authors
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

#include <limits>
#include <vector>

#include "cogsat/core.hpp"

namespace cogsat {

// Kuhn-Munkres with potentials (square matrix, minimization, O(n^3)).
// row_of_col[j] = row matched to column j.
inline double hungarian_min_cost(const std::vector<double>& cost, int n,
                                 std::vector<int>& row_of_col) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    double cur = cost[static_cast<size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    row_of_col.assign(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        row_of_col[j - 1] = p[j] - 1;
        total += cost[static_cast<size_t>(p[j] - 1) * n + (j - 1)];
    }
    return total;
}

/// Maximum-weight perfect matching on an n x n weight matrix (row-major).
/// row_to_col[i] = column matched to row i. Returns the matching weight.
inline double max_weight_perfect_matching(const std::vector<double>& weight, int n,
                                          std::vector<int>& row_to_col) {
    if (n == 0) {
        row_to_col.clear();
        return 0.0;
    }
    std::vector<double> cost(weight.size());
    for (size_t i = 0; i < weight.size(); ++i) cost[i] = -weight[i];
    std::vector<int> row_of_col;
    hungarian_min_cost(cost, n, row_of_col);
    row_to_col.assign(n, -1);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        row_to_col[row_of_col[j]] = j;
        total += weight[static_cast<size_t>(row_of_col[j]) * n + j];
    }
    return total;
}

/// Maximum-weight perfect matching that resolves ties toward the
/// lexicographically smallest row->col vector. Rows are fixed one at a time to
/// the smallest column that still permits an optimal completion.
inline std::vector<int> lex_max_weight_matching(const std::vector<double>& weight, int n,
                                                double* value_out = nullptr) {
    std::vector<int> scratch;
    const double best = max_weight_perfect_matching(weight, n, scratch);
    const double tol = 1e-9 * std::max(1.0, std::abs(best));

    std::vector<int> result(n, -1);
    std::vector<int> cols;  // columns still available
    cols.reserve(n);
    for (int j = 0; j < n; ++j) cols.push_back(j);

    double fixed_weight = 0.0;
    for (int i = 0; i < n; ++i) {
        const int rem = n - i - 1;
        for (size_t cj = 0; cj < cols.size(); ++cj) {
            const int j = cols[cj];
            double completion = 0.0;
            if (rem > 0) {
                std::vector<double> sub(static_cast<size_t>(rem) * rem);
                int rr = 0;
                for (int r = i + 1; r < n; ++r, ++rr) {
                    int cc = 0;
                    for (size_t ck = 0; ck < cols.size(); ++ck) {
                        if (cols[ck] == j) continue;
                        sub[static_cast<size_t>(rr) * rem + cc] =
                            weight[static_cast<size_t>(r) * n + cols[ck]];
                        ++cc;
                    }
                }
                completion = max_weight_perfect_matching(sub, rem, scratch);
            }
            const double w_ij = weight[static_cast<size_t>(i) * n + j];
            if (fixed_weight + w_ij + completion >= best - tol) {
                result[i] = j;
                fixed_weight += w_ij;
                cols.erase(cols.begin() + cj);
                break;
            }
        }
        if (result[i] < 0) throw Error("lex_max_weight_matching: no admissible column");
    }
    if (value_out) *value_out = fixed_weight;
    return result;
}

}  // namespace cogsat
