#pragma once

// Matrix weights on a grid: closed-form SPD fields sampled at cell centers,
// their fractional powers, A_p and A_∞ characteristics, reducing operators,
// and the weighted-bound experiments built on them.
//
// Cube suprema range over the default family (dyadic cubes and their 3-fold
// dilates) clipped to the domain, so every constant here is a lower bound of
// its continuum counterpart.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "czvar/grid.hpp"
#include "czvar/linalg.hpp"
#include "czvar/sparse.hpp"
#include "czvar/variation.hpp"

namespace czvar {

enum class WeightModel {
    scalar_power,  // |x - x₀|^α · Id_n
    rotated_diag,  // U(x) diag(|x - x₀|^{α_i}) U(x)ᵀ
    constant_pd,   // fixed SPD matrix
};

struct WeightSpec {
    WeightModel model = WeightModel::scalar_power;
    int n = 2;
    double alpha = 0;             // scalar_power
    std::vector<double> alphas;   // rotated_diag, one exponent per component
    double twist = 0;             // rotated_diag: U(x) turns by twist·(x₀ + x₁) radians
    Point center{};               // singular point x₀
    Mat matrix;                   // constant_pd

    std::string describe() const;
};

const char* to_string(WeightModel m);
WeightModel parse_weight_model(const std::string& s);

/// W(x) with one eigendecomposition per cell; every power W^s shares it.
/// A singular point lying on a cell center is moved half a cell along each
/// axis so every cell value is finite and positive definite.
class MatrixWeight {
public:
    MatrixWeight(const Grid& grid, WeightSpec spec);

    static MatrixWeight identity(const Grid& grid, int n);
    static MatrixWeight scalar_power(const Grid& grid, int n, double alpha, Point center = {});
    /// n = 2: rotation by the angle; n = 3: rotation about (1,1,1)/√3.
    static MatrixWeight rotated_diag(const Grid& grid, std::vector<double> alphas, double twist, Point center = {});
    static MatrixWeight constant_pd(const Grid& grid, const Mat& a);

    const Grid& grid() const { return grid_; }
    int components() const { return spec_.n; }
    const WeightSpec& spec() const { return spec_; }
    const Point& singular_point() const { return center_; }

    const SymEigen& eigen(std::size_t cell) const { return eig_[cell]; }
    /// W(cell), stored as sampled.
    const Mat& value(std::size_t cell) const { return value_[cell]; }
    /// W(cell)^s. s = 1 returns value(cell), s = 0 the identity.
    Mat power(std::size_t cell, double s) const;
    /// Scalar weight x ↦ |W^s(x) e|^exponent.
    ScalarSignal directional(const Vec& e, double s, double exponent) const;
    /// x ↦ W^s(x) f(x).
    VectorSignal apply_power(const VectorSignal& f, double s) const;

private:
    Grid grid_;
    WeightSpec spec_;
    Point center_{};
    std::vector<SymEigen> eig_;
    std::vector<Mat> value_;
};

Mat matrix_power(const MatrixWeight& w, std::size_t cell, double s);

/// Default family boxes clipped to the grid, duplicates removed.
std::vector<CellBox> clipped_family(const Grid& g);

/// sup_Q ⟨(⟨‖W^{1/p}(x) W^{-1/p}(·)‖^{p'}⟩_Q)^{p/p'}⟩_Q by double cell sums.
double ap_constant(const MatrixWeight& w, double p);
double ap_constant(const MatrixWeight& w, double p, std::span<const CellBox> boxes);

/// Scalar A_p constant sup_Q ⟨v⟩_Q ⟨v^{-p'/p}⟩_Q^{p/p'}.
double scalar_ap_constant(const ScalarSignal& v, double p);

struct RestrictionReport {
    double worst_ratio = 0;  // max_e [|W^{1/p}e|^p]_{A_p} / [W]_{A_p}
    Vec worst_direction;
    double ap = 0;
};
RestrictionReport scalar_restriction_check(const MatrixWeight& w, double p, std::span<const Vec> directions);
RestrictionReport scalar_restriction_check(const MatrixWeight& w, double p, std::span<const Vec> directions, double ap);

/// Fujii–Wilson constant sup_Q (1/w(Q)) ∫_Q M(w χ_Q), M the maximal function
/// over the default family. Throws InvalidWeight unless w > 0.
double fujii_wilson(const ScalarSignal& w);

/// Unit vectors drawn uniformly from the sphere.
std::vector<Vec> random_directions(int n, std::size_t count, std::uint64_t seed);

struct WeightConstants {
    double p = 2;
    double ap = 1;         // [W]_{A_p}
    double ainf_sc = 1;    // sup_e [|W^{1/p} e|^p]_{A_∞}
    double ainf_dual = 1;  // sup_e [|W^{-1/p} e|^{p'}]_{A_∞}
    double r = 1;
    double s = 1;
};

/// r = 1 + 1/(2^{d+11} ainf_dual), s = 1 + 1/(2^{d+11} ainf_sc).
std::pair<double, double> rs_exponents(const WeightConstants& c, int d);
/// Every constant of w, the A_∞ suprema taken over `directions`.
WeightConstants weight_constants(const MatrixWeight& w, double p, std::span<const Vec> directions);

enum class ReducingSide {
    primal,  // W^{1/p}
    dual,    // W^{-1/p}
};

/// ρ(e) = (⟨|W^{±1/p}(·) e|^exponent⟩_Q)^{1/exponent}.
double reducing_norm(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent,
                     const Vec& e);

struct ReducingReport {
    double upper = 0;  // max |W_Q e| / ρ(e) over verification directions, <= √n
    double lower = 0;  // min of the same ratio, >= 1
};

/// Inverse shape matrix of the John ellipsoid of {e : ρ(e) <= 1}, so that
/// ρ(e) <= |W_Q e| <= √n ρ(e). exponent = 0 selects p (primal) or p' (dual).
/// Throws RankDeficiency when the unit ball is unbounded in some direction.
Mat reducing_operator(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent = 0,
                      ReducingReport* report = nullptr);

struct ReducingOperatorPair {
    Mat w_q;
    Mat w_q_dual;
    ReducingReport quality;       // worst factors over both operators
    double product_norm = 0;      // ‖W_Q W'_Q‖
};
ReducingOperatorPair reducing_pair(const MatrixWeight& w, const Cube& q, double p);

/// (⟨‖W^{±1/p}(·) R^{-1}‖^exponent⟩_Q)^{1/exponent} for R the reducing operator
/// of the same side and exponent.
double reducing_normalization(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent);

/// (Σ_cells |W^{1/p} f|^p |cell|)^{1/p}.
double weighted_lp_norm(const VectorSignal& f, const MatrixWeight& w, double p);
/// Unweighted (Σ_cells |f|^p |cell|)^{1/p}, Euclidean |·|.
double lp_norm(const VectorSignal& f, double p);

/// 1 + 1/(p-1) - 1/p.
double weighted_bound_exponent(double p);

struct WeightedBoundReport {
    std::vector<double> ratios;  // ‖W^{1/p} V(T_*(W^{-1/p} f))‖_p / ‖f‖_p per signal
    double max_ratio = 0;
    double ap = 0;
    double normalized = 0;       // max_ratio / ap^{weighted_bound_exponent(p)}
};
WeightedBoundReport verify_weighted_bound(const VariationEngine& engine, const MatrixWeight& w, double p, double ap,
                                          std::span<const VectorSignal> corpus);
WeightedBoundReport verify_weighted_bound(const Kernel& k, const MatrixWeight& w, double p, const VariationParams& vp,
                                          std::span<const VectorSignal> corpus);

struct DualPairingReport {
    double pairing = 0;     // |⟨W^{1/p} T^S W^{-1/p} f, g⟩|
    double bound = 0;       // [W]_{A_p}^{exponent} ‖f‖_p ‖g‖_{p'}
    double ratio = 0;       // pairing / bound, 0 when the bound vanishes
    double mrp_norm = 0;    // ‖M_{r,p'} f‖_p
    double msp_norm = 0;    // ‖M_{s,p} g‖_{p'}
    double mrp_ratio = 0;   // mrp_norm / ((r')^{1/p} ‖f‖_p)
    double msp_ratio = 0;   // msp_norm / ((s')^{1/p'} ‖g‖_{p'})
};
/// T^S h(x) = Σ_{Q ∈ S} ⟨h⟩_Q χ_Q(x) over the given cubes (full |Q| in the
/// average, signals vanish outside the domain).
DualPairingReport dual_pairing_check(std::span<const Cube> cubes, const MatrixWeight& w, const WeightConstants& c,
                                     const VectorSignal& f, const VectorSignal& g);
DualPairingReport dual_pairing_check(const SparseFamily& fam, const MatrixWeight& w, const WeightConstants& c,
                                     const VectorSignal& f, const VectorSignal& g);

}  // namespace czvar
