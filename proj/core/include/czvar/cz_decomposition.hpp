#pragma once

// Dyadic Calderón–Zygmund decomposition at height λ.
//
// Stopping cubes are the maximal dyadic subcubes Q of a root with
// mean_Q |f| > λ (strict). Means are formed from cell-sum pyramids, so when
// the values of f are multiples of a common power of two (the corpus uses
// 2^-24) every sum, mean and difference below is exact and f = g + Σ b_j
// holds bit for bit.

#include <cstdint>
#include <span>
#include <vector>

#include "czvar/grid.hpp"

namespace czvar {

struct BadPart {
    DyadicIndex index;
    Cube cube;
    double mean = 0;   // f_{Q_j} (signed)
    ScalarSignal b;    // (f - f_{Q_j}) χ_{Q_j}
};

struct CZDecomposition {
    ScalarSignal good;
    std::vector<BadPart> bad;  // sorted by (level, position)
    double height = 0;
    DyadicIndex root{};
    /// mean_root |f| >= λ: the root is selected or sits on the threshold, and
    /// the decomposition carries no information.
    bool root_reached = false;
};

/// Decomposes f at height λ below `root` (the grid root by default). Cells
/// outside the root belong to the good part unchanged.
/// Throws InvalidArgument for λ <= 0.
CZDecomposition cz_decompose(const ScalarSignal& f, double lambda, const DyadicIndex& root = {});

/// Stopping cubes of χ_E below `root` at the rational height num/den, with
/// exact integer comparisons count(E ∩ Q)·den > num·cells(Q).
std::vector<DyadicIndex> cz_stopping_cubes(const Grid& g, std::span<const std::uint8_t> in_e, std::uint64_t num,
                                           std::uint64_t den, const DyadicIndex& root = {});

struct CZPropertyReport {
    bool reconstruction = false;  // f == g + Σ b_j cellwise, exactly
    bool c1 = false;              // |g| <= 2^d λ and ‖g‖₁ <= ‖f‖₁
    double c1_factor = 0;         // max|g| / (2^d λ)
    bool c2 = false;              // supp b_j ⊂ Q_j, cubes dyadic and pairwise disjoint
    bool c3 = false;              // Σ_cells b_j = 0 exactly
    double c3_max_sum = 0;
    bool c4 = false;              // ‖b_j‖₁ <= 2^{d+1} λ |Q_j|
    double c4_ratio = 0;          // max ‖b_j‖₁ / (2^{d+1} λ |Q_j|)
    bool c5 = false;              // Σ|Q_j| <= ‖f‖₁ / λ
    double c5_slack = 0;          // ‖f‖₁/λ - Σ|Q_j|

    bool all() const { return reconstruction && c1 && c2 && c3 && c4 && c5; }
};

CZPropertyReport verify_cz_properties(const CZDecomposition& dec, const ScalarSignal& f);

}  // namespace czvar
