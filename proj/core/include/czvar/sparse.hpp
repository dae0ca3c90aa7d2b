#pragma once

// Sparse domination of the ρ-variation: stopping-time steps, the recursive
// η-sparse family, and its certificates.
//
// All cubes of a family are dyadic cubes of one Grid, addressed by
// DyadicIndex. The dilates 3Q may leave the grid; the signal is zero there and
// averages over 3Q divide by the full |3Q|.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "czvar/convex_body.hpp"
#include "czvar/variation.hpp"

namespace czvar {

struct SparseConfig {
    double epsilon = 0.5;        // scalar step: Σ|P_j| <= ε|Q₀|
    double delta = 0.5;          // vector step: Σ|Q| <= δ|Q₀|
    double weak_norm_cal = 1.0;  // stand-in for ‖M_{V,Q₀}‖_{L¹→L^{1,∞}}
    int max_depth = 6;
    int annuli = 2;              // shells 3^ℓ Q₀, 2 <= ℓ <= annuli

    /// 2^{d+2} 3^d / ε.
    double alpha(int d) const;
    /// Stopping height 2^{-(d+1)} as the exact rational 1 / cz_height_den(d).
    static std::uint64_t cz_height_den(int d) { return std::uint64_t(1) << (d + 1); }
    void validate() const;
};

/// Result of one scalar stopping-time step on a dyadic cube Q.
struct ScalarStep {
    std::vector<DyadicIndex> cubes;       // the P_j, sorted
    std::vector<std::uint8_t> in_e;       // per grid cell: 1 iff cell ∈ E (only cells of Q)
    std::size_t e_cells = 0;
    double average_3q = 0;                // |f|_{3Q}
    double epsilon = 0;
    /// |E| <= ε|Q| / 2^{d+1}: the weak-norm calibration held on this instance.
    bool calibration_ok = true;
};

/// E = {x ∈ Q : |f(x)| > α|f|_{3Q}} ∪ {x ∈ Q : M_{V,Q} f(x) > α·cal·|f|_{3Q}} and
/// its stopping cubes at height 2^{-(d+1)} below Q. An empty family is returned
/// when |f|_{3Q} = 0.
ScalarStep sparse_step_scalar(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q,
                              double epsilon, const SparseConfig& cfg);
/// Convenience form: q0 given geometrically, engine built from (k, vp). Throws
/// InvalidArgument unless supp f ⊆ q0.
ScalarStep sparse_step_scalar(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Cube& q0,
                              const SparseConfig& cfg);

/// max over cells x ∈ Q₀ of |V(T_* f)(x) - Σ_P V(T_*(f χ_{3P}))(x) χ_P(x)| / |f|_{3Q₀}.
/// Any list of dyadic cubes may be supplied (the stopping family or a disjoint cover).
double pointwise_residual_scalar(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q0,
                                 const std::vector<DyadicIndex>& family);

struct VectorStep {
    std::vector<DyadicIndex> cubes;        // maximal cubes of the union, sorted
    std::vector<ScalarStep> components;    // one per principal axis with α_k > 0
    Mat axes;                              // principal axes of the John ellipsoid (columns)
    bool calibration_ok = true;
};

/// John-ellipsoid axes of ⟨⟨f⟩⟩_{3Q}, scalar steps on the axis components with
/// ε = δ/n, maximal cubes of the union.
VectorStep sparse_step_vector(const VariationEngine& engine, const VectorSignal& f, const DyadicIndex& q,
                              double delta, const SparseConfig& cfg);

/// The cubes of `cubes` not strictly contained in another one; sorted.
std::vector<DyadicIndex> maximal_cubes(std::vector<DyadicIndex> cubes);

class SparseFamily {
public:
    SparseFamily() = default;
    SparseFamily(Grid grid, DyadicIndex q0, int annuli);

    const Grid& grid() const { return grid_; }
    const DyadicIndex& q0() const { return q0_; }
    int annuli() const { return annuli_; }
    /// 𝒢₀ = {Q₀}, 𝒢₁, ...
    const std::vector<std::vector<DyadicIndex>>& generations() const { return gens_; }
    std::vector<std::vector<DyadicIndex>>& generations() { return gens_; }

    bool truncated = false;      // the depth cap stopped a nonempty generation
    double tail_measure = 0;     // Σ|Q| over that generation
    bool calibration_ok = true;  // every step met its calibration bound

    /// 1 / (2·3^d).
    double claimed_eta() const;
    /// Σ_{Q ∈ 𝒢_ℓ} |Q|.
    double generation_measure(std::size_t l) const;
    /// Every Q ∈ 𝒢 across generations.
    std::vector<DyadicIndex> dyadic_members() const;
    /// ℱ = {3Q : Q ∈ 𝒢} ∪ {3^ℓ Q₀ : 2 <= ℓ <= annuli}, in that order.
    std::vector<Cube> cubes() const;

    void write(std::ostream& out) const;
    static SparseFamily read(std::istream& in, const Grid& grid);
    bool operator==(const SparseFamily& o) const;

private:
    Grid grid_;
    DyadicIndex q0_{};
    int annuli_ = 0;
    std::vector<std::vector<DyadicIndex>> gens_;
};

/// Recursion 𝒢_{ℓ+1} = maximal cubes of the vector steps (δ from cfg) on each
/// Q ∈ 𝒢_ℓ with f χ_{3Q}, until a generation is empty or cfg.max_depth.
/// Throws InvalidArgument unless supp f ⊆ q0.
SparseFamily build_sparse_family(const VariationEngine& engine, const VectorSignal& f, const DyadicIndex& q0,
                                 const SparseConfig& cfg);
SparseFamily build_sparse_family(const Kernel& k, const VectorSignal& f, const VariationParams& vp, const Cube& q0,
                                 const SparseConfig& cfg);

/// max over Q ∈ 𝒢 of Σ_{P ∈ 𝒢, P ⊆ Q} |P| / |Q|.
double carleson_check(const SparseFamily& fam);

enum class SparseView {
    dyadic,   // the members of 𝒢 with E_Q = Q \ ∪(next-generation cubes in Q)
    dilated,  // ℱ: E_{3Q} = E_Q, and each shell 3^ℓQ₀ gets 3^ℓQ₀ \ 3^{ℓ-1}Q₀
};

struct EtaReport {
    bool ok = false;
    double worst_ratio = 0;   // min |E_R| / |R|
    bool disjoint = false;
    /// Per cell of the canvas box (cells of 3^annuli Q₀ in grid coordinates,
    /// row-major), index of the member owning it or -1.
    CellBox canvas;
    std::vector<std::int32_t> owner;
};

EtaReport eta_sparse_check(const SparseFamily& fam, double eta, SparseView view = SparseView::dilated);

struct DominationReport {
    double constant = 0;          // sup_x membership_scale(V(x), 𝕃(x))
    std::size_t argmax_cell = 0;
    std::size_t infinite_cells = 0;
    double merge_error = 0;       // largest generator-merge error bound among the 𝕃(x)
};

/// sup over grid cells x of inf{c : V_ρ(T_{n,*} f)(x) ∈ c·𝕃_ℱ(x)}.
DominationReport domination_constant(const VariationEngine& engine, const VectorSignal& f, const SparseFamily& fam);
/// Minkowski sum of ⟨⟨f⟩⟩_R over R ∈ ℱ containing x.
Zonotope sparse_operator_eval(const SparseFamily& fam, const VectorSignal& f, const Point& x);

/// max over the pilot corpus of weak_norm_estimate(M_{V,Q₀} f, f).
double calibrate_weak_norm(const VariationEngine& engine, const std::vector<ScalarSignal>& pilot,
                           const DyadicIndex& q0);

/// 3^ℓ-fold concentric dilate of a dyadic box, in cell coordinates.
CellBox dilate_pow3(const CellBox& b, int dim, int l);

}  // namespace czvar
