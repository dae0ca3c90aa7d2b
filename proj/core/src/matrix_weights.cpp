#include "czvar/matrix_weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>
#include <tuple>

#include "czvar/convex_body.hpp"
#include "czvar/random.hpp"

namespace czvar {

namespace {

using Small = std::array<double, 9>;  // row-major n×n, n <= 3

Small to_small(const Mat& m) {
    Small s{};
    const int n = int(m.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s[i * 3 + j] = m(i, j);
    return s;
}

// Largest singular value of a·b.
double product_norm(const Small& a, const Small& b, int n) {
    if (n == 1) return std::abs(a[0] * b[0]);
    if (n == 2) {
        const double p = a[0] * b[0] + a[1] * b[3], q = a[0] * b[1] + a[1] * b[4];
        const double r = a[3] * b[0] + a[4] * b[3], s = a[3] * b[1] + a[4] * b[4];
        // (|(p+s, r-q)| + |(p-s, q+r)|) / 2 avoids the cancellation of the
        // discriminant formula when the singular values are close.
        return (std::hypot(p + s, r - q) + std::hypot(p - s, q + r)) / 2;
    }
    Mat m(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
    return operator_norm(m);
}

std::vector<std::size_t> cells_of(const Grid& g, const CellBox& b) {
    std::vector<std::size_t> out;
    g.for_each_cell(b, [&](std::size_t c) { out.push_back(c); });
    return out;
}

CellBox intersect(const CellBox& a, const CellBox& b) {
    CellBox r;
    for (int i = 0; i < kMaxDim; ++i) {
        r.lo[i] = std::max(a.lo[i], b.lo[i]);
        r.hi[i] = std::min(a.hi[i], b.hi[i]);
    }
    return r;
}

double conjugate(double p) { return p / (p - 1); }

void check_p(double p) {
    if (!(p > 1) || !std::isfinite(p)) throw InvalidArgument("p must lie in (1, ∞)");
}

struct Overlap {
    std::vector<std::size_t> cells;
    std::vector<double> weight;  // normalized to sum 1
};

Overlap overlap_of(const Grid& g, const Cube& q) {
    Overlap o;
    double total = 0;
    for_each_overlap(g, q, [&](std::size_t c, double v) {
        o.cells.push_back(c);
        o.weight.push_back(v);
        total += v;
    });
    if (o.cells.empty()) throw DomainError("cube misses the weight's domain");
    for (auto& w : o.weight) w /= total;
    return o;
}

Mat rotation(int n, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat u(n, n);
    if (n == 2) {
        u << c, -s, s, c;
    } else {
        const double k = 1 / std::sqrt(3.0);
        Mat kx(3, 3), kk(3, 3);
        kx << 0, -k, k, k, 0, -k, -k, k, 0;
        kk = Mat::Constant(3, 3, k * k);
        u = c * Mat::Identity(3, 3) + s * kx + (1 - c) * kk;
    }
    return u;
}

}  // namespace

const char* to_string(WeightModel m) {
    switch (m) {
        case WeightModel::scalar_power: return "scalar_power";
        case WeightModel::rotated_diag: return "rotated_diag";
        case WeightModel::constant_pd: return "constant_pd";
    }
    return "?";
}

WeightModel parse_weight_model(const std::string& s) {
    for (auto m : {WeightModel::scalar_power, WeightModel::rotated_diag, WeightModel::constant_pd})
        if (s == to_string(m)) return m;
    throw InvalidArgument("unknown weight model: " + s);
}

std::string WeightSpec::describe() const {
    std::ostringstream out;
    out << to_string(model) << " n=" << n;
    switch (model) {
        case WeightModel::scalar_power: out << " alpha=" << alpha; break;
        case WeightModel::rotated_diag:
            out << " alphas=";
            for (std::size_t i = 0; i < alphas.size(); ++i) out << (i ? "," : "") << alphas[i];
            out << " twist=" << twist;
            break;
        case WeightModel::constant_pd: out << " matrix=[" << matrix.reshaped().transpose() << "]"; break;
    }
    if (model != WeightModel::constant_pd) out << " center=(" << center[0] << "," << center[1] << ")";
    return out.str();
}

MatrixWeight::MatrixWeight(const Grid& grid, WeightSpec spec) : grid_(grid), spec_(std::move(spec)) {
    const int n = spec_.n;
    if (n < 1 || n > kMaxComponents) throw InvalidArgument("weight dimension must be 1, 2 or 3");
    const int d = grid_.dim();

    center_ = spec_.center;
    bool on_center = true;
    for (int a = 0; a < d; ++a) {
        const double t = (center_[a] - grid_.domain().lower(a)) / grid_.cell_side() - 0.5;
        on_center = on_center && t == std::floor(t);
    }
    if (on_center)
        for (int a = 0; a < d; ++a) center_[a] += grid_.cell_side() / 2;

    SymEigen fixed;
    switch (spec_.model) {
        case WeightModel::scalar_power: break;
        case WeightModel::rotated_diag:
            if (int(spec_.alphas.size()) != n) throw InvalidArgument("rotated_diag needs one exponent per component");
            if (n == 1) throw InvalidArgument("rotated_diag needs n >= 2");
            break;
        case WeightModel::constant_pd:
            if (spec_.matrix.rows() != n || spec_.matrix.cols() != n) throw InvalidArgument("matrix must be n×n");
            if ((spec_.matrix - spec_.matrix.transpose()).cwiseAbs().maxCoeff() > 0)
                throw InvalidWeight("constant weight must be symmetric");
            fixed = jacobi_eigen(spec_.matrix);
            if (!(fixed.values.minCoeff() > 0)) throw InvalidWeight("constant weight must be positive definite");
            break;
    }

    const std::size_t cells = grid_.cell_count();
    eig_.resize(cells);
    value_.resize(cells);
    parallel_for(cells, [&](std::size_t c) {
        if (spec_.model == WeightModel::constant_pd) {
            eig_[c] = fixed;
            value_[c] = spec_.matrix;
            return;
        }
        const Point x = grid_.cell_center(c);
        double r2 = 0;
        for (int a = 0; a < d; ++a) r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
        const double r = std::sqrt(r2);
        SymEigen e{Vec(n), Mat::Identity(n, n)};
        if (spec_.model == WeightModel::scalar_power) {
            e.values.setConstant(std::pow(r, spec_.alpha));
        } else {
            const Mat u = rotation(n, spec_.twist * (x[0] + (d == 2 ? x[1] : 0.0)));
            std::vector<double> lam(n);
            for (int i = 0; i < n; ++i) lam[i] = std::pow(r, spec_.alphas[i]);
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return lam[i] < lam[j]; });
            for (int i = 0; i < n; ++i) {
                e.values(i) = lam[order[i]];
                e.vectors.col(i) = u.col(order[i]);
            }
        }
        value_[c] = spectral_power(e, 1);
        eig_[c] = std::move(e);
    });
}

MatrixWeight MatrixWeight::identity(const Grid& grid, int n) { return scalar_power(grid, n, 0.0); }

MatrixWeight MatrixWeight::scalar_power(const Grid& grid, int n, double alpha, Point center) {
    WeightSpec s;
    s.model = WeightModel::scalar_power;
    s.n = n;
    s.alpha = alpha;
    s.center = center;
    return MatrixWeight(grid, std::move(s));
}

MatrixWeight MatrixWeight::rotated_diag(const Grid& grid, std::vector<double> alphas, double twist, Point center) {
    WeightSpec s;
    s.model = WeightModel::rotated_diag;
    s.n = int(alphas.size());
    s.alphas = std::move(alphas);
    s.twist = twist;
    s.center = center;
    return MatrixWeight(grid, std::move(s));
}

MatrixWeight MatrixWeight::constant_pd(const Grid& grid, const Mat& a) {
    WeightSpec s;
    s.model = WeightModel::constant_pd;
    s.n = int(a.rows());
    s.matrix = a;
    return MatrixWeight(grid, std::move(s));
}

Mat MatrixWeight::power(std::size_t cell, double s) const {
    if (s == 1) return value_[cell];
    return spectral_power(eig_[cell], s);
}

ScalarSignal MatrixWeight::directional(const Vec& e, double s, double exponent) const {
    std::vector<double> v(grid_.cell_count());
    parallel_for(v.size(), [&](std::size_t c) { v[c] = std::pow((power(c, s) * e).norm(), exponent); });
    return ScalarSignal(grid_, std::move(v));
}

VectorSignal MatrixWeight::apply_power(const VectorSignal& f, double s) const {
    const int n = spec_.n;
    if (f.components() != n || !(f.grid() == grid_)) throw InvalidArgument("signal does not match the weight");
    std::vector<double> out(f.values().size());
    parallel_for(grid_.cell_count(), [&](std::size_t c) {
        const auto v = f.at(c);
        Vec x(n);
        for (int k = 0; k < n; ++k) x(k) = v[k];
        const Vec y = power(c, s) * x;
        for (int k = 0; k < n; ++k) out[c * n + k] = y(k);
    });
    return VectorSignal(grid_, n, std::move(out));
}

Mat matrix_power(const MatrixWeight& w, std::size_t cell, double s) { return w.power(cell, s); }

std::vector<CellBox> clipped_family(const Grid& g) {
    std::vector<CellBox> out;
    for (const auto& b : dyadic_dilated_family(g)) {
        const CellBox c = g.clip(b);
        if (!c.empty(g.dim())) out.push_back(c);
    }
    auto key = [](const CellBox& b) { return std::tuple(b.lo, b.hi); };
    std::sort(out.begin(), out.end(), [&](const CellBox& a, const CellBox& b) { return key(a) < key(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double ap_constant(const MatrixWeight& w, double p) {
    const auto boxes = clipped_family(w.grid());
    return ap_constant(w, p, boxes);
}

double ap_constant(const MatrixWeight& w, double p, std::span<const CellBox> boxes) {
    check_p(p);
    const Grid& g = w.grid();
    const int n = w.components();
    const double pp = conjugate(p);
    std::vector<Small> a(g.cell_count()), b(g.cell_count());
    parallel_for(g.cell_count(), [&](std::size_t c) {
        a[c] = to_small(w.power(c, 1 / p));
        b[c] = to_small(w.power(c, -1 / p));
    });
    std::vector<double> val(boxes.size());
    parallel_for(boxes.size(), [&](std::size_t i) {
        const auto cells = cells_of(g, boxes[i]);
        const double k = double(cells.size());
        double outer = 0;
        for (std::size_t x : cells) {
            double inner = 0;
            for (std::size_t t : cells) inner += std::pow(product_norm(a[x], b[t], n), pp);
            outer += std::pow(inner / k, p / pp);
        }
        val[i] = outer / k;
    });
    return val.empty() ? 0.0 : *std::max_element(val.begin(), val.end());
}

double scalar_ap_constant(const ScalarSignal& v, double p) {
    check_p(p);
    const Grid& g = v.grid();
    const double pp = conjugate(p);
    const auto boxes = clipped_family(g);
    std::vector<double> val(boxes.size());
    parallel_for(boxes.size(), [&](std::size_t i) {
        double s1 = 0, s2 = 0, k = 0;
        g.for_each_cell(boxes[i], [&](std::size_t c) {
            s1 += v[c];
            s2 += std::pow(v[c], -pp / p);
            k += 1;
        });
        val[i] = (s1 / k) * std::pow(s2 / k, p / pp);
    });
    return val.empty() ? 0.0 : *std::max_element(val.begin(), val.end());
}

RestrictionReport scalar_restriction_check(const MatrixWeight& w, double p, std::span<const Vec> directions) {
    return scalar_restriction_check(w, p, directions, ap_constant(w, p));
}

RestrictionReport scalar_restriction_check(const MatrixWeight& w, double p, std::span<const Vec> directions,
                                           double ap) {
    if (directions.empty()) throw InvalidArgument("no directions");
    RestrictionReport rep;
    rep.ap = ap;
    for (const auto& e : directions) {
        const double r = scalar_ap_constant(w.directional(e.normalized(), 1 / p, p), p) / ap;
        if (r > rep.worst_ratio || rep.worst_direction.size() == 0) {
            rep.worst_ratio = r;
            rep.worst_direction = e.normalized();
        }
    }
    return rep;
}

double fujii_wilson(const ScalarSignal& w) {
    const Grid& g = w.grid();
    const int d = g.dim();
    for (double v : w.values())
        if (!(v > 0)) throw InvalidWeight("Fujii–Wilson constant needs a positive weight");
    const BoxSums sums(g, w.values());
    std::vector<std::vector<CellBox>> at(g.cell_count());
    parallel_for(g.cell_count(), [&](std::size_t c) {
        for (const auto& b : family_boxes_containing(g, c)) at[c].push_back(g.clip(b));
    });
    const auto boxes = clipped_family(g);
    std::vector<double> val(boxes.size());
    parallel_for(boxes.size(), [&](std::size_t i) {
        const CellBox& q = boxes[i];
        double mass = 0, integral = 0;
        g.for_each_cell(q, [&](std::size_t x) {
            mass += w[x];
            // The single-cell cube belongs to the family, so M(w χ_Q) >= w on Q.
            double best = w[x];
            for (const auto& r : at[x]) {
                const CellBox cut = intersect(r, q);
                if (cut.empty(d)) continue;
                best = std::max(best, sums.sum(cut) / double(g.cells_in(r)));
            }
            integral += best;
        });
        val[i] = integral / mass;
    });
    return *std::max_element(val.begin(), val.end());
}

std::vector<Vec> random_directions(int n, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> out;
    while (out.size() < count) {
        Vec v(n);
        for (int k = 0; k < n; ++k) v(k) = rng.uniform(-1, 1);
        const double r = v.norm();
        if (r > 1e-3 && r <= 1) out.push_back(v / r);
    }
    return out;
}

std::pair<double, double> rs_exponents(const WeightConstants& c, int d) {
    if (!(c.ainf_dual > 0) || !(c.ainf_sc > 0)) throw InvalidArgument("A_∞ constants must be positive");
    const double scale = std::ldexp(1.0, d + 11);
    return {1 + 1 / (scale * c.ainf_dual), 1 + 1 / (scale * c.ainf_sc)};
}

WeightConstants weight_constants(const MatrixWeight& w, double p, std::span<const Vec> directions) {
    check_p(p);
    if (directions.empty()) throw InvalidArgument("no directions");
    WeightConstants c;
    c.p = p;
    c.ap = ap_constant(w, p);
    c.ainf_sc = 0;
    c.ainf_dual = 0;
    const double pp = conjugate(p);
    for (const auto& e : directions) {
        c.ainf_sc = std::max(c.ainf_sc, fujii_wilson(w.directional(e.normalized(), 1 / p, p)));
        c.ainf_dual = std::max(c.ainf_dual, fujii_wilson(w.directional(e.normalized(), -1 / p, pp)));
    }
    std::tie(c.r, c.s) = rs_exponents(c, w.grid().dim());
    return c;
}

namespace {

struct NormBall {
    std::vector<Mat> gram;  // W^{2s}(x) per overlapping cell
    std::vector<double> weight;
    double exponent;

    double rho(const Vec& e) const {
        double s = 0;
        for (std::size_t i = 0; i < gram.size(); ++i) {
            const double q = std::max(0.0, e.dot(gram[i] * e));
            s += weight[i] * std::pow(q, exponent / 2);
        }
        return std::pow(s, 1 / exponent);
    }
};

double side_power(double p, ReducingSide side) { return side == ReducingSide::primal ? 1 / p : -1 / p; }

NormBall norm_ball(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent) {
    check_p(p);
    if (exponent == 0) exponent = side == ReducingSide::primal ? p : conjugate(p);
    if (!(exponent >= 1)) throw InvalidArgument("reducing exponent must be at least 1");
    const Overlap o = overlap_of(w.grid(), q);
    NormBall b;
    b.exponent = exponent;
    b.weight = o.weight;
    for (std::size_t c : o.cells) b.gram.push_back(w.power(c, 2 * side_power(p, side)));
    return b;
}

}  // namespace

double reducing_norm(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent,
                     const Vec& e) {
    return norm_ball(w, q, p, side, exponent).rho(e);
}

Mat reducing_operator(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent,
                      ReducingReport* report) {
    const NormBall ball = norm_ball(w, q, p, side, exponent);
    const int n = w.components();
    Mat r(n, n);
    if (n == 1) {
        r(0, 0) = ball.rho(Vec::Ones(1));
    } else {
        std::vector<Vec> pts;
        const auto dirs = dense_directions(n);
        for (const auto& u : dirs) {
            const double v = ball.rho(u);
            if (!(v > 0)) throw RankDeficiency("norm ball is unbounded");
            pts.push_back(u / v);
        }
        r = spectral_power(jacobi_eigen(john_ellipsoid_of_points(pts).shape), -1);
        // The sampled hull lies strictly inside the ball, which inflates r by
        // the polygon gap; rescale so rho(e) <= |r e| is tight on the sample.
        double lower = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dirs.size(); ++i) lower = std::min(lower, (r * pts[i]).norm());
        r /= lower;
    }
    if (report) {
        report->upper = 0;
        report->lower = std::numeric_limits<double>::infinity();
        for (const auto& e : verification_directions(n)) {
            const double ratio = (r * e).norm() / ball.rho(e);
            report->upper = std::max(report->upper, ratio);
            report->lower = std::min(report->lower, ratio);
        }
    }
    return r;
}

ReducingOperatorPair reducing_pair(const MatrixWeight& w, const Cube& q, double p) {
    ReducingOperatorPair out;
    ReducingReport a, b;
    out.w_q = reducing_operator(w, q, p, ReducingSide::primal, 0, &a);
    out.w_q_dual = reducing_operator(w, q, p, ReducingSide::dual, 0, &b);
    out.quality.upper = std::max(a.upper, b.upper);
    out.quality.lower = std::min(a.lower, b.lower);
    out.product_norm = operator_norm(out.w_q * out.w_q_dual);
    return out;
}

double reducing_normalization(const MatrixWeight& w, const Cube& q, double p, ReducingSide side, double exponent) {
    const NormBall ball = norm_ball(w, q, p, side, exponent);
    const Mat rinv = spectral_power(jacobi_eigen(reducing_operator(w, q, p, side, exponent)), -1);
    double s = 0;
    for (std::size_t i = 0; i < ball.gram.size(); ++i) {
        // ‖W^{s} R^{-1}‖² is the top eigenvalue of R^{-1} W^{2s} R^{-1}.
        const Mat m = rinv * ball.gram[i] * rinv;
        const double norm = std::sqrt(std::max(0.0, jacobi_eigen(m).values.maxCoeff()));
        s += ball.weight[i] * std::pow(norm, ball.exponent);
    }
    return std::pow(s, 1 / ball.exponent);
}

double lp_norm(const VectorSignal& f, double p) {
    const Grid& g = f.grid();
    double s = 0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        double r2 = 0;
        for (double v : f.at(c)) r2 += v * v;
        if (r2 > 0) s += std::pow(r2, p / 2);
    }
    return std::pow(s * g.cell_volume(), 1 / p);
}

double weighted_lp_norm(const VectorSignal& f, const MatrixWeight& w, double p) {
    check_p(p);
    return lp_norm(w.apply_power(f, 1 / p), p);
}

double weighted_bound_exponent(double p) { return 1 + 1 / (p - 1) - 1 / p; }

WeightedBoundReport verify_weighted_bound(const VariationEngine& engine, const MatrixWeight& w, double p, double ap,
                                          std::span<const VectorSignal> corpus) {
    check_p(p);
    if (!(engine.grid() == w.grid())) throw InvalidArgument("engine and weight grids differ");
    WeightedBoundReport rep;
    rep.ap = ap;
    const int n = w.components();
    for (const auto& f : corpus) {
        const double norm = lp_norm(f, p);
        if (norm == 0) {
            rep.ratios.push_back(0);
            continue;
        }
        const VectorSignal h = w.apply_power(f, -1 / p);
        std::vector<ScalarSignal> parts;
        for (int k = 0; k < n; ++k) parts.emplace_back(w.grid(), engine.variation_field(h.component(k)));
        const VectorSignal v = w.apply_power(VectorSignal::from_components(parts), 1 / p);
        rep.ratios.push_back(lp_norm(v, p) / norm);
    }
    for (double r : rep.ratios) rep.max_ratio = std::max(rep.max_ratio, r);
    rep.normalized = rep.max_ratio / std::pow(ap, weighted_bound_exponent(p));
    return rep;
}

WeightedBoundReport verify_weighted_bound(const Kernel& k, const MatrixWeight& w, double p, const VariationParams& vp,
                                          std::span<const VectorSignal> corpus) {
    return verify_weighted_bound(VariationEngine(w.grid(), k, vp), w, p, ap_constant(w, p), corpus);
}

DualPairingReport dual_pairing_check(std::span<const Cube> cubes, const MatrixWeight& w, const WeightConstants& c,
                                     const VectorSignal& f, const VectorSignal& g) {
    const double p = c.p, pp = conjugate(p);
    check_p(p);
    const Grid& grid = w.grid();
    const int n = w.components();
    const VectorSignal h = w.apply_power(f, -1 / p);
    const VectorSignal wg = w.apply_power(g, 1 / p);
    std::vector<double> terms(cubes.size());
    parallel_for(cubes.size(), [&](std::size_t i) {
        Vec mean = Vec::Zero(n), mass = Vec::Zero(n);
        for_each_overlap(grid, cubes[i], [&](std::size_t cell, double v) {
            for (int k = 0; k < n; ++k) {
                mean(k) += v * h.at(cell)[k];
                mass(k) += v * wg.at(cell)[k];
            }
        });
        terms[i] = mean.dot(mass) / cubes[i].volume();
    });
    DualPairingReport rep;
    rep.pairing = std::abs(std::accumulate(terms.begin(), terms.end(), 0.0));
    const double fp = lp_norm(f, p), gq = lp_norm(g, pp);
    rep.bound = std::pow(c.ap, weighted_bound_exponent(p)) * fp * gq;
    rep.ratio = rep.bound > 0 ? rep.pairing / rep.bound : 0;

    auto field_norm = [&](const std::vector<double>& m, double e) {
        double s = 0;
        for (double v : m) s += std::pow(v, e);
        return std::pow(s * grid.cell_volume(), 1 / e);
    };
    if (fp > 0) {
        rep.mrp_norm = field_norm(power_maximal_field(f, pp * c.r), p);
        rep.mrp_ratio = rep.mrp_norm / (std::pow(conjugate(c.r), 1 / p) * fp);
    }
    if (gq > 0) {
        rep.msp_norm = field_norm(power_maximal_field(g, p * c.s), pp);
        rep.msp_ratio = rep.msp_norm / (std::pow(conjugate(c.s), 1 / pp) * gq);
    }
    return rep;
}

DualPairingReport dual_pairing_check(const SparseFamily& fam, const MatrixWeight& w, const WeightConstants& c,
                                     const VectorSignal& f, const VectorSignal& g) {
    const auto cubes = fam.cubes();
    return dual_pairing_check(std::span<const Cube>(cubes), w, c, f, g);
}

}  // namespace czvar
