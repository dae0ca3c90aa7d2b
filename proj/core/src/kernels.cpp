#include "czvar/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "czvar/random.hpp"

namespace czvar {

namespace {

double norm(const Point& z, int dim) { return dim == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]); }

Point diff(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }

}  // namespace

DiniModulus DiniModulus::power(double c, double delta) {
    if (!(c > 0) || !(delta > 0) || delta > 1) throw InvalidArgument("power modulus needs c > 0 and 0 < delta <= 1");
    return {Form::power, c, delta};
}

DiniModulus DiniModulus::linear(double c) {
    if (!(c > 0)) throw InvalidArgument("linear modulus needs c > 0");
    return {Form::linear, c, 1.0};
}

double DiniModulus::operator()(double t) const {
    if (t <= 0) return 0;
    return form == Form::linear ? c * t : c * std::pow(t, delta);
}

double dini_integral(const DiniModulus& w) { return w.form == DiniModulus::Form::linear ? w.c : w.c / w.delta; }

Kernel Kernel::hilbert() { return {Kind::hilbert, 1, std::numbers::inv_pi, DiniModulus::linear(1.0)}; }

Kernel Kernel::riesz_like(int dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("riesz_like kernel needs d in {1,2}");
    return {Kind::riesz_like, dim, 1.0, DiniModulus::linear(1.0)};
}

double Kernel::at_offset(const Point& z) const {
    if (kind == Kind::hilbert) return std::numbers::inv_pi / z[0];
    if (dim == 1) return 1.0 / z[0];
    const double r2 = z[0] * z[0] + z[1] * z[1];
    return z[0] / (r2 * std::sqrt(r2));  // cos θ / r²
}

double kernel_eval(const Kernel& k, const Point& x, const Point& y) {
    const Point z = diff(x, y);
    if (norm(z, k.dim) == 0) throw SingularityError("kernel evaluated on the diagonal");
    return k.at_offset(z);
}

double smoothness_check(const Kernel& k, std::size_t trials, std::uint64_t seed, Point origin) {
    if (trials < 1) throw InvalidArgument("smoothness_check needs at least one trial");
    Rng rng(seed);
    const int d = k.dim;
    auto unit = [&] {
        Point u{};
        if (d == 1) {
            u[0] = rng.sign();
            return u;
        }
        const double a = rng.uniform(0, 2 * std::numbers::pi);
        return Point{std::cos(a), std::sin(a)};
    };
    double worst = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Point y{}, x{};
        for (int a = 0; a < d; ++a) y[a] = rng.uniform(-1, 1);
        const double r = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
        const Point dir = unit();
        for (int a = 0; a < d; ++a) x[a] = y[a] + r * dir[a];
        const double step = rng.uniform() * r / 2;
        const Point dir2 = unit();
        Point xp{};
        for (int a = 0; a < d; ++a) xp[a] = x[a] + step * dir2[a];
        for (int a = 0; a < d; ++a) {
            x[a] += origin[a];
            xp[a] += origin[a];
            y[a] += origin[a];
        }
        const double dxy = norm(diff(x, y), d);
        const double dxx = norm(diff(x, xp), d);
        if (dxx > dxy / 2) continue;  // rounding pushed it out of the admissible set
        const double num = std::abs(k.at_offset(diff(x, y)) - k.at_offset(diff(xp, y))) +
                           std::abs(k.at_offset(diff(y, x)) - k.at_offset(diff(y, xp)));
        if (num == 0) continue;
        const double den = k.modulus(dxx / dxy) / std::pow(dxy, d);
        worst = std::max(worst, num / den);
    }
    return worst;
}

TruncationLadder::TruncationLadder(std::vector<double> eps) : eps_(std::move(eps)) {
    if (eps_.empty()) throw InvalidArgument("empty truncation ladder");
    for (std::size_t i = 0; i < eps_.size(); ++i) {
        if (!(eps_[i] > 0)) throw InvalidArgument("truncation radii must be positive");
        if (i > 0 && !(eps_[i] < eps_[i - 1])) throw InvalidArgument("truncation radii must strictly decrease");
    }
}

TruncationLadder TruncationLadder::geometric(double eps_max, double theta, int m) {
    if (!(eps_max > 0) || !(theta > 0 && theta < 1) || m < 1)
        throw InvalidArgument("geometric ladder needs eps_max > 0, 0 < theta < 1, m >= 1");
    std::vector<double> e(m);
    for (int k = 0; k < m; ++k) e[k] = eps_max * std::pow(theta, k);
    return TruncationLadder(std::move(e));
}

void TruncationLadder::check_floor(const Grid& grid) const {
    if (finest() < truncation_floor(grid))
        throw TruncationTooFine("finest truncation " + std::to_string(finest()) + " is below 2 cell diameters (" +
                                std::to_string(truncation_floor(grid)) + ")");
}

double truncated_apply(const Kernel& k, const ScalarSignal& f, double eps, const Point& x) {
    const Grid& g = f.grid();
    if (k.dim != g.dim()) throw InvalidArgument("kernel and signal dimensions differ");
    if (eps < truncation_floor(g)) throw TruncationTooFine("truncation radius below 2 cell diameters");
    const double vol = g.cell_volume();
    double sum = 0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const double v = f[c];
        if (v == 0) continue;
        const Point z = diff(x, g.cell_center(c));
        if (norm(z, g.dim()) > eps) sum += k.at_offset(z) * v;
    }
    return sum * vol;
}

std::vector<double> componentwise_apply(const Kernel& k, const VectorSignal& f, double eps, const Point& x) {
    std::vector<double> out(f.components());
    for (int j = 0; j < f.components(); ++j) out[j] = truncated_apply(k, f.component(j), eps, x);
    return out;
}

}  // namespace czvar
