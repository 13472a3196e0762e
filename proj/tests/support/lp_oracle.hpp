#pragma once

// Test-only reference solver. Solves the transport linear program directly
// with a dense two-phase tableau simplex, as an independent check on the
// production transportation-simplex implementation. Slow on purpose; keep
// problem sizes small.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lp_oracle {

// Minimize c.x  s.t.  A.x (<=|=) b, x >= 0.  Rows with eq[i] true are
// equalities. Returns the optimal objective; throws on infeasible/unbounded.
// Bland's rule throughout, so no cycling.
inline double solve_lp(const std::vector<std::vector<double>>& A,
                       const std::vector<double>& b,
                       const std::vector<double>& c,
                       const std::vector<bool>& eq) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();

    // Columns: n structural, then one slack per inequality row, then one
    // artificial per row (artificials priced in phase 1 only).
    std::size_t n_slack = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (!eq[i]) ++n_slack;
    const std::size_t n_art = m;
    const std::size_t cols = n + n_slack + n_art;

    std::vector<std::vector<double>> T(m, std::vector<double>(cols + 1, 0.0));
    std::vector<std::size_t> basis(m);

    std::size_t slack_at = n;
    for (std::size_t i = 0; i < m; ++i) {
        double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) T[i][j] = sign * A[i][j];
        T[i][cols] = sign * b[i];
        if (!eq[i]) T[i][slack_at++] = sign;
        T[i][n + n_slack + i] = 1.0;
        basis[i] = n + n_slack + i;
    }

    const auto pivot = [&](std::size_t pr, std::size_t pc) {
        const double pv = T[pr][pc];
        for (double& v : T[pr]) v /= pv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == pr) continue;
            const double f = T[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) T[i][j] -= f * T[pr][j];
        }
        basis[pr] = pc;
    };

    const auto run_simplex = [&](const std::vector<double>& obj,
                                 std::size_t usable_cols) {
        std::vector<double> z(usable_cols + 1, 0.0);
        for (;;) {
            // Reduced costs: obj[j] - sum over basis rows.
            for (std::size_t j = 0; j <= usable_cols; ++j) z[j] = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double cb = basis[i] < obj.size() ? obj[basis[i]] : 0.0;
                if (cb == 0.0) continue;
                for (std::size_t j = 0; j < usable_cols; ++j)
                    z[j] += cb * T[i][j];
                z[usable_cols] += cb * T[i][cols];
            }
            std::size_t pc = usable_cols;
            for (std::size_t j = 0; j < usable_cols; ++j) {
                const double cj = (j < obj.size() ? obj[j] : 0.0) - z[j];
                if (cj < -1e-9) { pc = j; break; } // Bland: first improving
            }
            if (pc == usable_cols) return z[usable_cols];
            std::size_t pr = m;
            double best = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (T[i][pc] <= 1e-11) continue;
                const double ratio = T[i][cols] / T[i][pc];
                if (pr == m || ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && basis[i] < basis[pr])) {
                    pr = i;
                    best = ratio;
                }
            }
            if (pr == m) throw std::runtime_error("lp_oracle: unbounded");
            pivot(pr, pc);
        }
    };

    // Phase 1: minimize artificial sum.
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = n + n_slack; j < cols; ++j) phase1[j] = 1.0;
    const double art_sum = run_simplex(phase1, cols);
    if (art_sum > 1e-7) throw std::runtime_error("lp_oracle: infeasible");

    // Drive any artificial still basic out (or confirm its row is null).
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n + n_slack) continue;
        std::size_t pc = cols;
        for (std::size_t j = 0; j < n + n_slack; ++j)
            if (std::abs(T[i][j]) > 1e-9) { pc = j; break; }
        if (pc != cols) pivot(i, pc);
    }

    // Phase 2: real objective over structural + slack columns only.
    std::vector<double> phase2(n + n_slack, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    return run_simplex(phase2, n + n_slack);
}

// Reference EMD per the transport formulation: flows f[i][j] >= 0, row sums
// <= supply, column sums <= demand, total flow = min(total supply, total
// demand); objective sum f.d normalized by the total flow.
inline double emd_reference(const std::vector<double>& supply,
                            const std::vector<double>& demand,
                            const std::vector<std::vector<double>>& dist) {
    const std::size_t m = supply.size();
    const std::size_t n = demand.size();
    const double total =
        std::min(std::accumulate(supply.begin(), supply.end(), 0.0),
                 std::accumulate(demand.begin(), demand.end(), 0.0));
    if (!(total > 0.0))
        throw std::runtime_error("lp_oracle: zero total mass");

    const std::size_t vars = m * n;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<bool> eq;

    for (std::size_t i = 0; i < m; ++i) { // row sums <= supply
        std::vector<double> row(vars, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(supply[i]);
        eq.push_back(false);
    }
    for (std::size_t j = 0; j < n; ++j) { // col sums <= demand
        std::vector<double> row(vars, 0.0);
        for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(demand[j]);
        eq.push_back(false);
    }
    { // total flow pinned to min(total supply, total demand)
        A.emplace_back(vars, 1.0);
        b.push_back(total);
        eq.push_back(true);
    }

    std::vector<double> c(vars);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dist[i][j];

    return solve_lp(A, b, c, eq) / total;
}

} // namespace lp_oracle
