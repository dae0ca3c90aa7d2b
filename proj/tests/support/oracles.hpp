#pragma once

// Reference computations for the test suites. Each one is a slow, direct
// evaluation written independently of the library code it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "czvar/grid.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// max over all 2^m index subsets of (Σ |a_{i_{j+1}} - a_{i_j}|^ρ)^{1/ρ}.
inline double enumerate_variation(std::span<const double> a, double rho) {
    const std::size_t m = a.size();
    double best = 0;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        double s = 0, prev = 0;
        bool first = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (!(mask >> i & 1)) continue;
            if (!first) s += std::pow(std::abs(a[i] - prev), rho);
            prev = a[i];
            first = false;
        }
        best = std::max(best, s);
    }
    return std::pow(best, 1 / rho);
}

/// (1/π) ∫_{y ∈ [-1, 1], |x - y| > ε} dy / (x - y) from the antiderivative
/// -log|x - y|.
inline double hilbert_indicator(double x, double eps) {
    auto piece = [x](double a, double b) {
        return a < b ? (std::log(std::abs(x - a)) - std::log(std::abs(x - b))) / M_PI : 0.0;
    };
    return piece(-1, std::min(1.0, x - eps)) + piece(std::max(-1.0, x + eps), 1);
}

/// Σ |⟨g, u⟩|.
inline double zonotope_support(const std::vector<Eigen::VectorXd>& gens, const Eigen::VectorXd& u) {
    double h = 0;
    for (const auto& g : gens) h += std::abs(g.dot(u));
    return h;
}

/// Facet normals of a full-dimensional zonotope in ℝ² or ℝ³: the normals of
/// single generators (n = 2) or of generator pairs (n = 3).
inline std::vector<Eigen::VectorXd> zonotope_normals(const std::vector<Eigen::VectorXd>& gens) {
    std::vector<Eigen::VectorXd> out;
    const auto n = gens.front().size();
    if (n == 2) {
        for (const auto& g : gens) out.push_back(Eigen::Vector2d(-g(1), g(0)));
    } else {
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t j = i + 1; j < gens.size(); ++j) {
                Eigen::Vector3d c = Eigen::Vector3d(gens[i]).cross(Eigen::Vector3d(gens[j]));
                if (c.norm() > 1e-12) out.push_back(c);
            }
    }
    return out;
}

/// inf{c : p ∈ c·Z} as the largest ⟨p, u⟩ / h(u) over facet normals.
inline double membership_by_normals(const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& gens) {
    double best = 0;
    for (const auto& u : zonotope_normals(gens)) best = std::max(best, std::abs(p.dot(u)) / zonotope_support(gens, u));
    return best;
}

/// sup_λ λ|{g > λ}|/‖f‖₁ for a cell-constant g: the supremum is approached as λ
/// rises to each value v, where the level set is {g >= v}.
inline double weak_norm(std::vector<double> g, double cell_volume, double f_l1) {
    std::sort(g.begin(), g.end(), std::greater<>());
    double best = 0;
    for (std::size_t i = 0; i < g.size() && g[i] > 0; ++i) {
        std::size_t j = i;
        while (j + 1 < g.size() && g[j + 1] == g[i]) ++j;
        best = std::max(best, g[i] * double(j + 1) * cell_volume / f_l1);
        i = j;
    }
    return best;
}

/// Cells of b clipped to the grid, axis 0 outermost.
inline std::vector<std::size_t> cells_of(const czvar::Grid& g, const czvar::CellBox& b) {
    std::vector<std::size_t> out;
    const std::int64_t n = g.resolution();
    const bool two = g.dim() == 2;
    for (std::int64_t x = std::max<std::int64_t>(b.lo[0], 0); x < std::min(b.hi[0], n); ++x) {
        if (!two) {
            out.push_back(std::size_t(x));
            continue;
        }
        for (std::int64_t y = std::max<std::int64_t>(b.lo[1], 0); y < std::min(b.hi[1], n); ++y)
            out.push_back(std::size_t(x * n + y));
    }
    return out;
}

/// Concentric 3-fold dilate of a box, unclipped.
inline czvar::CellBox triple(const czvar::CellBox& b, int dim) {
    czvar::CellBox out = b;
    for (int a = 0; a < dim; ++a) {
        const std::int64_t s = b.hi[a] - b.lo[a];
        out.lo[a] -= s;
        out.hi[a] += s;
    }
    return out;
}

/// Scalar A_p constant sup_Q ⟨v⟩_Q ⟨v^{-p'/p}⟩_Q^{p/p'} over the given boxes,
/// averages over the clipped cells.
inline double scalar_ap(const czvar::Grid& g, std::span<const double> v, double p,
                        const std::vector<czvar::CellBox>& boxes) {
    const double pp = p / (p - 1);
    double best = 0;
    for (const auto& b : boxes) {
        const auto cells = cells_of(g, b);
        if (cells.empty()) continue;
        double s1 = 0, s2 = 0;
        for (auto c : cells) {
            s1 += v[c];
            s2 += std::pow(v[c], -pp / p);
        }
        const double k = double(cells.size());
        best = std::max(best, (s1 / k) * std::pow(s2 / k, p / pp));
    }
    return best;
}

}  // namespace oracle
