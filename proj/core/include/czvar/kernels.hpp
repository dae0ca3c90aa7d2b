#pragma once

// Calderón–Zygmund kernels, their Dini moduli, and truncated singular
// integrals evaluated by cell-sum quadrature.

#include <cstdint>
#include <span>
#include <vector>

#include "czvar/grid.hpp"

namespace czvar {

/// Modulus of continuity ω(t) = c·t^δ (power form, 0 < δ <= 1) or c·t.
struct DiniModulus {
    enum class Form { power, linear };
    Form form = Form::linear;
    double c = 1.0;
    double delta = 1.0;

    static DiniModulus power(double c, double delta);
    static DiniModulus linear(double c);
    double operator()(double t) const;
};

/// ∫₀¹ ω(t)/t dt, in closed form.
double dini_integral(const DiniModulus& w);

/// Convolution-type kernel K(x, y) = k(x - y).
///   hilbert:    d = 1, K = 1/(π(x - y))
///   riesz_like: K = Ω((x-y)/|x-y|)/|x-y|^d with odd Ω; Ω(θ) = cos θ for d = 2,
///               Ω(±1) = ±1 for d = 1.
struct Kernel {
    enum class Kind { hilbert, riesz_like };
    Kind kind = Kind::hilbert;
    int dim = 1;
    double size_constant = 0;  // C_K in |K(x,y)| <= C_K / |x-y|^d
    DiniModulus modulus;

    static Kernel hilbert();
    static Kernel riesz_like(int dim);

    /// k(z) for z = x - y != 0; no singularity check.
    double at_offset(const Point& z) const;
};

/// K(x, y); throws SingularityError when x == y.
double kernel_eval(const Kernel& k, const Point& x, const Point& y);

/// Largest observed ratio
///   (|K(x,y) - K(x',y)| + |K(y,x) - K(y,x')|) / (ω(|x-x'|/|x-y|) |x-y|^{-d})
/// over random triples with |x - x'| <= |x - y|/2. A finite value certifies
/// the smoothness condition with that constant on the sample. `origin` shifts
/// every sampled triple (the ratio is translation invariant).
double smoothness_check(const Kernel& k, std::size_t trials, std::uint64_t seed = 1, Point origin = {});

/// Strictly decreasing truncation radii ε₁ > ... > ε_m > 0.
class TruncationLadder {
public:
    TruncationLadder() = default;
    explicit TruncationLadder(std::vector<double> eps);
    /// ε_k = eps_max · θ^{k-1}, k = 1..m.
    static TruncationLadder geometric(double eps_max, double theta, int m);

    std::span<const double> eps() const { return eps_; }
    std::size_t size() const { return eps_.size(); }
    double finest() const { return eps_.back(); }
    /// Throws TruncationTooFine if ε_m < 2 · cell diameter of the grid.
    void check_floor(const Grid& grid) const;

private:
    std::vector<double> eps_;
};

/// Smallest admissible truncation radius on a grid.
inline double truncation_floor(const Grid& g) { return 2.0 * g.cell_diameter(); }

/// T_ε f(x) = Σ_{cells y : |x - center(y)| > ε} K(x, center(y)) f(y) |cell|.
/// Straight cell loop; throws TruncationTooFine below the floor.
double truncated_apply(const Kernel& k, const ScalarSignal& f, double eps, const Point& x);

/// T_ε applied to each component.
std::vector<double> componentwise_apply(const Kernel& k, const VectorSignal& f, double eps, const Point& x);

}  // namespace czvar
