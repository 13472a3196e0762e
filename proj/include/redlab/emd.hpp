#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "redlab/errors.hpp"

namespace redlab {

/// A weighted cluster set: the input form for the transport solver.
/// Clusters are opaque ids (activity labels) or real numbers (bin
/// boundaries); weights are non-negative masses.
template <typename Cluster>
struct Signature {
    std::vector<Cluster> clusters;
    std::vector<double> weights;

    Signature() = default;
    Signature(std::vector<Cluster> c, std::vector<double> w)
        : clusters(std::move(c)), weights(std::move(w)) {}

    std::size_t size() const { return clusters.size(); }
    bool empty() const { return clusters.empty(); }

    double total_weight() const {
        return std::accumulate(weights.begin(), weights.end(), 0.0);
    }

    void validate() const {
        if (clusters.size() != weights.size())
            throw Error("signature: cluster/weight length mismatch");
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw Error("signature: weights must be finite and non-negative");
        }
        std::set<Cluster> seen(clusters.begin(), clusters.end());
        if (seen.size() != clusters.size())
            throw Error("signature: duplicate cluster ids");
    }
};

/// Zero cost for identical clusters, unit cost otherwise.
struct UnitGround {
    template <typename Cluster>
    double operator()(const Cluster& a, const Cluster& b) const {
        return a == b ? 0.0 : 1.0;
    }
};

/// Absolute difference between numeric clusters.
struct AbsoluteGround {
    double operator()(double a, double b) const { return std::abs(a - b); }
};

struct FlowEntry {
    std::size_t from = 0; // index into P.clusters
    std::size_t to = 0;   // index into Q.clusters
    double amount = 0.0;
};

struct Flow {
    std::vector<FlowEntry> entries;
    double total_moved = 0.0;
};

struct EmdResult {
    double value = 0.0;
    Flow flow;
};

namespace detail {

struct TransportPlan {
    std::vector<std::vector<double>> flow; // original m x n, dummies stripped
    double cost = 0.0;
    double moved = 0.0;
};

/// Exact transportation solver:
///     minimize   sum f[i][j] * c[i][j]
///     subject to row sums <= supply[i], column sums <= demand[j],
///                total flow = min(sum supply, sum demand), f >= 0.
/// A zero-cost dummy node balances unequal totals; the balanced problem is
/// solved with the transportation simplex (northwest-corner start, MODI
/// duals, Bland's pivoting rule so degenerate bases cannot cycle).
inline TransportPlan solve_transport(std::vector<double> supply,
                                     std::vector<double> demand,
                                     std::vector<std::vector<double>> cost) {
    const std::size_t m0 = supply.size();
    const std::size_t n0 = demand.size();
    if (m0 == 0 || n0 == 0) throw Error("transport: empty side");

    const double total_supply =
        std::accumulate(supply.begin(), supply.end(), 0.0);
    const double total_demand =
        std::accumulate(demand.begin(), demand.end(), 0.0);
    const double moved = std::min(total_supply, total_demand);
    if (!(moved > 0.0)) throw Error("transport: zero total mass");

    std::size_t m = m0;
    std::size_t n = n0;
    const double imbalance = total_supply - total_demand;
    if (imbalance > 0.0) {
        demand.push_back(imbalance);
        for (auto& row : cost) row.push_back(0.0);
        ++n;
    } else if (imbalance < 0.0) {
        supply.push_back(-imbalance);
        cost.emplace_back(n, 0.0);
        ++m;
    }

    double cost_scale = 1.0;
    for (const auto& row : cost)
        for (double c : row) {
            if (!std::isfinite(c) || c < 0.0)
                throw Error("transport: ground distances must be finite and >= 0");
            cost_scale = std::max(cost_scale, c);
        }
    const double reduced_tol = 1e-12 * cost_scale;

    std::vector<std::vector<double>> flow(m, std::vector<double>(n, 0.0));
    std::vector<std::vector<char>> basic(m, std::vector<char>(n, 0));

    // Northwest-corner start: m+n-1 basic cells forming a spanning tree
    // (degenerate zero-flow cells included).
    {
        std::vector<double> a = supply;
        std::vector<double> b = demand;
        std::size_t i = 0, j = 0;
        for (;;) {
            const double q = std::min(a[i], b[j]);
            flow[i][j] = q;
            basic[i][j] = 1;
            a[i] -= q;
            b[j] -= q;
            if (i + 1 == m && j + 1 == n) break;
            if (i + 1 == m) ++j;
            else if (j + 1 == n) ++i;
            else if (a[i] <= b[j]) ++i;
            else ++j;
        }
    }

    std::vector<double> u(m), v(n);
    std::vector<char> u_set(m), v_set(n);
    std::vector<std::size_t> stack;
    std::vector<int> parent(m + n);       // node ids: rows 0..m-1, cols m..m+n-1
    std::vector<std::size_t> cycle_rows, cycle_cols;

    const std::size_t max_iters = 4000 * (m + n) * (m + n) + 1000;
    for (std::size_t iter = 0;; ++iter) {
        if (iter > max_iters)
            throw Error("transport: pivot limit exceeded");

        // Duals on the basis tree: u[i] + v[j] = c[i][j] for basic (i,j).
        std::fill(u_set.begin(), u_set.end(), 0);
        std::fill(v_set.begin(), v_set.end(), 0);
        u[0] = 0.0;
        u_set[0] = 1;
        stack.assign(1, 0);
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            if (node < m) {
                for (std::size_t j = 0; j < n; ++j)
                    if (basic[node][j] && !v_set[j]) {
                        v[j] = cost[node][j] - u[node];
                        v_set[j] = 1;
                        stack.push_back(m + j);
                    }
            } else {
                const std::size_t j = node - m;
                for (std::size_t i = 0; i < m; ++i)
                    if (basic[i][j] && !u_set[i]) {
                        u[i] = cost[i][j] - v[j];
                        u_set[i] = 1;
                        stack.push_back(i);
                    }
            }
        }

        // Entering cell: Bland's rule, first negative reduced cost in
        // row-major order.
        std::size_t ei = m, ej = n;
        for (std::size_t i = 0; i < m && ei == m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (basic[i][j]) continue;
                if (cost[i][j] - u[i] - v[j] < -reduced_tol) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        if (ei == m) break; // optimal

        // Unique tree path from row node ei to column node m+ej.
        std::fill(parent.begin(), parent.end(), -1);
        parent[ei] = static_cast<int>(ei);
        stack.assign(1, ei);
        while (!stack.empty() && parent[m + ej] == -1) {
            const std::size_t node = stack.back();
            stack.pop_back();
            if (node < m) {
                for (std::size_t j = 0; j < n; ++j)
                    if (basic[node][j] && parent[m + j] == -1) {
                        parent[m + j] = static_cast<int>(node);
                        stack.push_back(m + j);
                    }
            } else {
                const std::size_t j = node - m;
                for (std::size_t i = 0; i < m; ++i)
                    if (basic[i][j] && parent[i] == -1 && i != ei) {
                        parent[i] = static_cast<int>(m + j);
                        stack.push_back(i);
                    }
            }
        }
        if (parent[m + ej] == -1)
            throw Error("transport: basis lost connectivity");

        // Walk back from col ej to row ei, collecting the cycle cells.
        // Positions alternate: entering cell gets +theta, then -,+,-,...
        cycle_rows.clear();
        cycle_cols.clear();
        cycle_rows.push_back(ei);
        cycle_cols.push_back(ej);
        {
            std::size_t node = m + ej;
            while (node != ei) {
                const std::size_t prev = static_cast<std::size_t>(parent[node]);
                if (node >= m) {
                    cycle_rows.push_back(prev);       // basic cell (prev, node-m)
                    cycle_cols.push_back(node - m);
                } else {
                    cycle_rows.push_back(node);       // basic cell (node, prev-m)
                    cycle_cols.push_back(prev - m);
                }
                node = prev;
            }
        }

        // theta = min flow over the decreasing (odd) positions; leaving cell
        // is the lowest row-major index among the minimizers (Bland again).
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < cycle_rows.size(); k += 2)
            theta = std::min(theta, flow[cycle_rows[k]][cycle_cols[k]]);
        std::size_t leave_k = 0;
        std::size_t leave_index = m * n;
        for (std::size_t k = 1; k < cycle_rows.size(); k += 2) {
            if (flow[cycle_rows[k]][cycle_cols[k]] == theta) {
                const std::size_t idx = cycle_rows[k] * n + cycle_cols[k];
                if (idx < leave_index) {
                    leave_index = idx;
                    leave_k = k;
                }
            }
        }

        for (std::size_t k = 0; k < cycle_rows.size(); ++k) {
            double& f = flow[cycle_rows[k]][cycle_cols[k]];
            f += (k % 2 == 0) ? theta : -theta;
            if (f < 0.0) f = 0.0;
        }
        basic[ei][ej] = 1;
        basic[cycle_rows[leave_k]][cycle_cols[leave_k]] = 0;
        flow[cycle_rows[leave_k]][cycle_cols[leave_k]] = 0.0;
    }

    TransportPlan plan;
    plan.moved = moved;
    plan.flow.assign(m0, std::vector<double>(n0, 0.0));
    for (std::size_t i = 0; i < m0; ++i)
        for (std::size_t j = 0; j < n0; ++j) {
            plan.flow[i][j] = flow[i][j];
            plan.cost += flow[i][j] * cost[i][j];
        }
    return plan;
}

inline void check_nearly_normalized(double total, const char* who) {
    if (std::abs(total - 1.0) > 1e-6)
        throw ConfigError(std::string(who) +
                          ": signature weights must sum to 1");
}

} // namespace detail

/// Exact Earth Mover's Distance between two signatures under an arbitrary
/// non-negative ground distance. Returns the normalized optimal cost
/// (total transport cost divided by total mass moved) together with the
/// optimal flow. Both signatures must carry positive total weight.
template <typename Cluster, typename Distance>
EmdResult emd(const Signature<Cluster>& p, const Signature<Cluster>& q,
              Distance&& ground) {
    p.validate();
    q.validate();
    if (p.empty() || q.empty())
        throw Error("emd: signatures must be non-empty");
    if (!(p.total_weight() > 0.0) || !(q.total_weight() > 0.0))
        throw Error("emd: undefined for zero-total-weight signatures");

    std::vector<std::vector<double>> cost(p.size(),
                                          std::vector<double>(q.size(), 0.0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            cost[i][j] = ground(p.clusters[i], q.clusters[j]);

    const auto plan = detail::solve_transport(p.weights, q.weights, cost);

    EmdResult result;
    result.value = plan.cost / plan.moved;
    if (result.value < 0.0) result.value = 0.0;
    result.flow.total_moved = plan.moved;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            if (plan.flow[i][j] > 0.0)
                result.flow.entries.push_back({i, j, plan.flow[i][j]});
    return result;
}

/// EMD under the unit ground distance, in closed form: 1 minus the summed
/// shared minimum weights. Weights are fractions of a unit whole; totals
/// slightly off 1 (within 1e-6) are renormalized, totals below 1 carry the
/// deficit as mass on an implicit private cluster that matches nothing on
/// the other side, and totals above 1 are rejected.
template <typename Cluster>
double emd_unit_ground(const Signature<Cluster>& p,
                       const Signature<Cluster>& q) {
    p.validate();
    q.validate();
    if (p.empty() || q.empty())
        throw Error("emd_unit_ground: signatures must be non-empty");
    double tp = p.total_weight();
    double tq = q.total_weight();
    if (!(tp > 0.0) || !(tq > 0.0))
        throw Error("emd_unit_ground: zero total weight");
    if (tp > 1.0 + 1e-6 || tq > 1.0 + 1e-6)
        throw ConfigError("emd_unit_ground: weights must sum to at most 1");
    const double scale_p = (std::abs(tp - 1.0) <= 1e-6) ? 1.0 / tp : 1.0;
    const double scale_q = (std::abs(tq - 1.0) <= 1e-6) ? 1.0 / tq : 1.0;

    std::map<Cluster, double> qw;
    for (std::size_t j = 0; j < q.size(); ++j)
        qw[q.clusters[j]] = q.weights[j] * scale_q;
    double shared = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto it = qw.find(p.clusters[i]);
        if (it != qw.end())
            shared += std::min(p.weights[i] * scale_p, it->second);
    }
    return std::clamp(1.0 - shared, 0.0, 1.0);
}

/// EMD between signatures over the reals with absolute-difference ground
/// distance, in closed form: the area between the two CDFs over the merged
/// support. Requires normalized signatures (renormalized within 1e-6).
inline double emd_1d(const Signature<double>& p, const Signature<double>& q) {
    p.validate();
    q.validate();
    if (p.empty() || q.empty())
        throw Error("emd_1d: signatures must be non-empty");
    const double tp = p.total_weight();
    const double tq = q.total_weight();
    if (!(tp > 0.0) || !(tq > 0.0))
        throw Error("emd_1d: zero total weight");
    detail::check_nearly_normalized(tp, "emd_1d");
    detail::check_nearly_normalized(tq, "emd_1d");

    std::map<double, std::pair<double, double>> support;
    for (std::size_t i = 0; i < p.size(); ++i)
        support[p.clusters[i]].first += p.weights[i] / tp;
    for (std::size_t j = 0; j < q.size(); ++j)
        support[q.clusters[j]].second += q.weights[j] / tq;

    double area = 0.0;
    double cdf_gap = 0.0;
    double prev_x = 0.0;
    bool first = true;
    for (const auto& [x, w] : support) {
        if (!first) area += std::abs(cdf_gap) * (x - prev_x);
        cdf_gap += w.first - w.second;
        prev_x = x;
        first = false;
    }
    return area;
}

} // namespace redlab
