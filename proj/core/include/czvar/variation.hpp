#pragma once

// ρ-variation of truncated singular integrals and the maximal operators built
// on it.
//
// The continuum supremum over sequences ε_i ↘ 0 is taken over subsequences of
// a fixed TruncationLadder: for a ladder ε₁ > ... > ε_m the values
// a_k = T_{ε_k} f(x) are formed and rho_variation(a, ρ) is their ρ-variation.
//
// Maximal operators take the supremum over a cube family. The default family
// at a point is every dyadic cube of the grid's tree containing it together
// with the 3-fold dilates of dyadic cubes that contain it, each clipped to the
// domain. Averages over a clipped cube divide by its clipped volume.

#include <cstdint>
#include <span>
#include <vector>

#include "czvar/grid.hpp"
#include "czvar/kernels.hpp"

namespace czvar {

/// max over index subsequences i₁ < ... < i_k of (Σ_j |a_{i_{j+1}} - a_{i_j}|^ρ)^{1/ρ}.
/// O(m²) dynamic programming. Throws InvalidArgument on an empty sequence or ρ <= 1.
double rho_variation(std::span<const double> a, double rho);

/// Same value, DP restricted to the local extrema of `a` (endpoints included,
/// plateaus collapsed). Valid for ρ >= 1.
double rho_variation_extrema(std::span<const double> a, double rho);

struct VariationParams {
    double rho = 3.0;
    TruncationLadder ladder;

    /// Throws InvalidArgument unless ρ > 2.
    void validate() const;
};

struct MaximalParams {
    double r = 2.0;
    double p = 2.0;

    double conjugate_p() const { return p / (p - 1); }
    void validate() const;
};

enum class CubeFamily {
    dyadic_dilated,  // dyadic cubes containing x plus 3-fold dilates containing x
    all_aligned,     // every cell-aligned cube containing x (exhaustive, for checks)
};

/// Every box of the default family (dyadic cubes of the tree and their 3-fold
/// dilates), unclipped.
std::vector<CellBox> dyadic_dilated_family(const Grid& g);
/// Boxes of the default family that contain `cell`, unclipped.
std::vector<CellBox> family_boxes_containing(const Grid& g, std::size_t cell);

/// Precomputed convolution stencil for one (grid, kernel, ladder, ρ). All
/// evaluation points are cell centers. Immutable after construction; every
/// method is safe to call concurrently.
class VariationEngine {
public:
    VariationEngine(const Grid& grid, const Kernel& kernel, VariationParams params);

    const Grid& grid() const { return grid_; }
    const Kernel& kernel() const { return kernel_; }
    const VariationParams& params() const { return params_; }
    std::size_t ladder_size() const { return params_.ladder.size(); }

    /// a_k = T_{ε_k}(f χ_source)(center(cell)), k = 1..m.
    std::vector<double> ladder_values(const ScalarSignal& f, std::size_t cell) const;
    std::vector<double> ladder_values(const ScalarSignal& f, std::size_t cell, const CellBox& source) const;

    /// V_ρ(T_*(f χ_source)) at one cell.
    double variation_at(const ScalarSignal& f, std::size_t cell) const;
    double variation_at(const ScalarSignal& f, std::size_t cell, const CellBox& source) const;

    /// V_ρ(T_* f) at every cell of the grid.
    std::vector<double> variation_field(const ScalarSignal& f) const;
    /// V_ρ(T_*(f χ_source)) at the cells of `targets` (clipped), indexed by
    /// cell; other entries are zero.
    std::vector<double> variation_field(const ScalarSignal& f, const CellBox& source, const CellBox& targets) const;

    /// Local grand maximal truncated operator M_{V,Q₀} f at every cell; zero
    /// outside q0. Q ranges over dyadic cubes with x ∈ Q ⊆ Q₀, ξ over the cell
    /// centers of Q, and the cutoff is χ_{3Q₀ \ 3Q}.
    std::vector<double> local_grand_maximal_field(const ScalarSignal& f, const DyadicIndex& q0) const;

    /// Global version: Q over the default family, cutoff χ_{ℝ^d \ 3Q}.
    std::vector<double> global_grand_maximal_field(const ScalarSignal& f) const;

    /// Converts binned annulus sums into V_ρ.
    double finish(std::span<const double> bins) const;
    /// bins[j] += sign · Σ_{y ∈ source} f(y) K(x - y)|cell| over the cells whose
    /// first ladder index with ε_k < |x - y| is j (j = m: never inside).
    void accumulate(const ScalarSignal& f, std::size_t cell, const CellBox& source, double sign,
                    std::span<double> bins) const;

private:
    std::size_t offset_slot(std::int64_t d0, std::int64_t d1) const;

    Grid grid_;
    Kernel kernel_;
    VariationParams params_;
    std::int64_t span_ = 0;               // offsets range over (-N, N)
    std::vector<double> weight_;          // K(offset) · |cell|
    std::vector<std::uint16_t> first_;    // first ladder index including the offset
};

/// V_ρ(T_* f)(x) by direct truncated_apply along the ladder.
double variation_operator(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Point& x);
/// Componentwise V_ρ.
std::vector<double> vector_variation(const Kernel& k, const VectorSignal& f, const VariationParams& vp, const Point& x);

/// Hardy–Littlewood maximal function over the chosen family at x's cell.
double hl_maximal(const ScalarSignal& f, const Point& x, CubeFamily family = CubeFamily::dyadic_dilated);
std::vector<double> hl_maximal_field(const ScalarSignal& f);

/// sup_Q ((1/|Q|) ∫_Q |f|^e)^{1/e}, Euclidean |·|, over the family at x.
double power_maximal(const VectorSignal& f, double exponent, const Point& x,
                     CubeFamily family = CubeFamily::dyadic_dilated);
std::vector<double> power_maximal_field(const VectorSignal& f, double exponent);

double local_grand_maximal(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Cube& q0,
                           const Point& x);
double global_grand_maximal(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Point& x);

/// sup_λ λ·|{g > λ}| / ‖f‖₁. The distribution function of a cell signal is a
/// step function, so the supremum is max over the distinct values v > 0 of g
/// of v·|{g >= v}|. Throws InvalidArgument when ‖f‖₁ = 0.
double weak_norm_estimate(const ScalarSignal& g, const ScalarSignal& f);
/// Same with ‖f‖₁ supplied directly.
double weak_norm_estimate(std::span<const double> g, double cell_volume, double f_l1);

}  // namespace czvar
