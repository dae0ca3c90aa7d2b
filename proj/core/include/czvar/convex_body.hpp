#pragma once

// Symmetric convex bodies in ℝ^n, n <= 3.
//
// A discrete convex body average ⟨⟨f⟩⟩_Q = {(1/|Q|)∫_Q φ f : ‖φ‖_∞ <= 1} of a
// cell-constant f is exactly the zonotope with generators (|cell ∩ Q|/|Q|) f(cell).

#include <span>
#include <vector>

#include "czvar/grid.hpp"
#include "czvar/linalg.hpp"

namespace czvar {

inline constexpr std::size_t kGeneratorBudget = 256;
inline constexpr double kMergeAngle = 1e-3;

/// {Σ t_i g_i : |t_i| <= 1}.
class Zonotope {
public:
    explicit Zonotope(int n = 1);
    Zonotope(int n, std::vector<Vec> generators);

    int dim() const { return n_; }
    const std::vector<Vec>& generators() const { return gens_; }
    bool is_zero() const { return gens_.empty(); }
    /// Upper bound on sup_{|u|=1} |h_merged(u) - h_original(u)| accumulated by merge().
    double merge_error() const { return merge_error_; }

    /// Appends g unless it is zero.
    void add(const Vec& g);
    /// Combines generators whose directions differ by less than `angle` (up to
    /// sign) into one generator of the same total length along their summed
    /// direction. If more than `budget` remain, the angle is doubled until
    /// they fit. Exactly parallel generators merge without changing h.
    Zonotope merged(double angle = kMergeAngle, std::size_t budget = kGeneratorBudget) const;

    /// Gram matrix Σ g gᵀ.
    Mat gram() const;

private:
    int n_;
    std::vector<Vec> gens_;
    double merge_error_ = 0;
};

/// h(u) = Σ |⟨g_i, u⟩|. Throws InvalidArgument for u = 0.
double support_function(const Zonotope& z, const Vec& u);
/// Generator concatenation. Throws InvalidArgument on dimension mismatch.
Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);

/// ⟨⟨f⟩⟩_q, zero generators dropped, merged to the generator budget.
Zonotope convex_body_average(const VectorSignal& f, const Cube& q);

/// {A u : |u| <= 1} with A symmetric positive semidefinite.
struct Ellipsoid {
    Mat shape;
    int rank = 0;

    double support(const Vec& u) const { return (shape * u).norm(); }
};

struct JohnReport {
    int newton_steps = 0;
    double duality_gap = 0;   // bound on log det suboptimality
    std::size_t constraints = 0;
};

/// Maximal-volume ellipsoid inside z, computed on the span of the generators.
/// Constraints h_E(u) <= h_K(u) are imposed on the dense direction set and on
/// every facet normal of z, so E ⊆ K holds exactly. Rank 0 gives the zero
/// ellipsoid; rank 1 gives the segment itself.
Ellipsoid john_ellipsoid(const Zonotope& z, JohnReport* report = nullptr);

/// Maximal-volume ellipsoid inside the symmetric hull conv{±p_i}, which must
/// span ℝ^n (RankDeficiency otherwise). Containment is imposed on the dense
/// direction set, plus the exact edge normals of the hull for n = 2.
Ellipsoid john_ellipsoid_of_points(const std::vector<Vec>& points, JohnReport* report = nullptr);

/// Dense constraint directions: 720 angles over [0, π) for n = 2, the 2562
/// vertices of a subdivided icosahedron for n = 3.
std::vector<Vec> dense_directions(int n);
/// Verification directions: 360 angles over the circle for n = 2, a 360-point
/// Fibonacci sphere for n = 3, ±1 for n = 1.
std::vector<Vec> verification_directions(int n);
/// Outer normals of the facets of z within its span (unnormalized), both signs.
std::vector<Vec> facet_normals(const Zonotope& z);

/// inf{c >= 0 : point ∈ c·z} by linear programming: maximize μ subject to
/// Σ t_i g_i = μ·point, |t_i| <= 1; the scale is 1/μ. Points outside the span
/// of z give +inf.
double membership_scale(const Vec& point, const Zonotope& z);
/// Same quantity as max over facet normals u of ⟨point, u⟩ / h(u).
double membership_scale_fan(const Vec& point, const Zonotope& z);

/// Minkowski sum of ⟨⟨f⟩⟩_Q over the cubes containing x.
Zonotope sparse_operator_eval(std::span<const Cube> cubes, const VectorSignal& f, const Point& x);

}  // namespace czvar
