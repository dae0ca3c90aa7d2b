#include "czvar/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "czvar/lp.hpp"

namespace czvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double angle_between(const Vec& a, const Vec& b) {
    const double dot = a.dot(b);
    double cross;
    if (a.size() == 1) {
        cross = 0;
    } else if (a.size() == 2) {
        cross = std::abs(a(0) * b(1) - a(1) * b(0));
    } else {
        cross = Eigen::Vector3d(a(0), a(1), a(2)).cross(Eigen::Vector3d(b(0), b(1), b(2))).norm();
    }
    return std::atan2(cross, dot);
}

// Sign-canonical copy: the first coordinate of largest magnitude is positive.
Vec canonical(const Vec& g) {
    Eigen::Index k = 0;
    g.cwiseAbs().maxCoeff(&k);
    return g(k) < 0 ? Vec(-g) : g;
}

std::vector<Vec> span_coords(const std::vector<Vec>& gens, const Mat& basis) {
    std::vector<Vec> out;
    out.reserve(gens.size());
    for (const auto& g : gens) out.push_back(basis.transpose() * g);
    return out;
}

double support(const std::vector<Vec>& gens, const Vec& u) {
    double h = 0;
    for (const auto& g : gens) h += std::abs(g.dot(u));
    return h;
}

// One normal per ± pair of facets, in the coordinates of `gens` (dimension r).
std::vector<Vec> normals_of(const std::vector<Vec>& gens, int r) {
    std::vector<Vec> out;
    if (r == 1) {
        out.push_back(Vec::Ones(1));
    } else if (r == 2) {
        for (const auto& g : gens) {
            Vec u(2);
            u << -g(1), g(0);
            out.push_back(u / u.norm());
        }
    } else if (r == 3) {
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t j = i + 1; j < gens.size(); ++j) {
                const Eigen::Vector3d a(gens[i](0), gens[i](1), gens[i](2));
                const Eigen::Vector3d b(gens[j](0), gens[j](1), gens[j](2));
                const Eigen::Vector3d c = a.cross(b);
                if (c.norm() <= 1e-12 * a.norm() * b.norm()) continue;
                out.push_back(Vec(c.normalized()));
            }
    }
    return out;
}

std::vector<Vec> icosphere(int subdivisions) {
    const double t = (1 + std::sqrt(5.0)) / 2;
    std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            return mid[key] = int(v.size()) - 1;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }
    std::vector<Vec> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back(Vec(p));
    return out;
}

// Maximizes log det X subject to vᵀXv <= 1 for every row v of `cons`, with X
// symmetric r×r, by a log-barrier Newton method.
Mat max_logdet(const std::vector<Vec>& cons, const Mat& start, JohnReport& rep) {
    const int r = int(start.rows());
    std::vector<std::pair<int, int>> idx;
    for (int a = 0; a < r; ++a)
        for (int b = a; b < r; ++b) idx.emplace_back(a, b);
    const int np = int(idx.size());
    const int m = int(cons.size());
    Eigen::MatrixXd arow(m, np);
    for (int j = 0; j < m; ++j)
        for (int p = 0; p < np; ++p) {
            const auto [a, b] = idx[p];
            arow(j, p) = a == b ? cons[j](a) * cons[j](a) : 2 * cons[j](a) * cons[j](b);
        }
    auto to_mat = [&](const Eigen::VectorXd& x) {
        Mat x_m(r, r);
        for (int p = 0; p < np; ++p) {
            const auto [a, b] = idx[p];
            x_m(a, b) = x_m(b, a) = x(p);
        }
        return x_m;
    };
    auto basis = [&](int p) {
        Mat e = Mat::Zero(r, r);
        const auto [a, b] = idx[p];
        e(a, b) = 1;
        e(b, a) = 1;
        return e;
    };

    Eigen::VectorXd x(np);
    for (int p = 0; p < np; ++p) x(p) = start(idx[p].first, idx[p].second);
    const double worst = (arow * x).maxCoeff();
    x *= 0.5 / worst;

    auto objective = [&](const Eigen::VectorXd& y, double t, double& out) {
        const Eigen::VectorXd s = Eigen::VectorXd::Ones(m) - arow * y;
        if (s.minCoeff() <= 0) return false;
        Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(to_mat(y)));
        if (llt.info() != Eigen::Success) return false;
        const Eigen::MatrixXd l = llt.matrixL();
        double logdet = 0;
        for (int a = 0; a < r; ++a) {
            if (!(l(a, a) > 0)) return false;
            logdet += 2 * std::log(l(a, a));
        }
        out = t * logdet + s.array().log().sum();
        return true;
    };

    double t = 1;
    const double gap_target = 1e-8;
    while (true) {
        for (int it = 0; it < 200; ++it) {
            const Eigen::VectorXd s = Eigen::VectorXd::Ones(m) - arow * x;
            const Mat xi = to_mat(x).inverse();
            Eigen::VectorXd g(np);
            Eigen::MatrixXd h(np, np);
            for (int p = 0; p < np; ++p) {
                const Mat ep = basis(p);
                g(p) = t * (xi * ep).trace();
                for (int q = p; q < np; ++q) h(p, q) = h(q, p) = -t * (xi * ep * xi * basis(q)).trace();
            }
            const Eigen::VectorXd inv_s = s.cwiseInverse();
            g -= arow.transpose() * inv_s;
            h -= arow.transpose() * inv_s.cwiseAbs2().asDiagonal() * arow;
            const Eigen::VectorXd step = (-h).ldlt().solve(g);
            const double dec = g.dot(step);
            ++rep.newton_steps;
            if (!(dec > 1e-12)) break;
            double f1 = 0;
            // Newton decrement below 1/4: a full step stays feasible and converges
            // quadratically; the objective itself is too large to compare here.
            if (dec < 0.0625 && objective(x + step, t, f1)) {
                x += step;
                continue;
            }
            double f0 = 0;
            objective(x, t, f0);
            double alpha = 1;
            while (alpha > 1e-16 && (!objective(x + alpha * step, t, f1) || f1 < f0 + 0.25 * alpha * dec)) alpha /= 2;
            if (alpha <= 1e-16) break;
            const Eigen::VectorXd before = x;
            x += alpha * step;
            if (x == before) break;
        }
        if (m / t < gap_target) break;
        t *= 10;
    }
    rep.duality_gap = m / t;
    rep.constraints = std::size_t(m);
    return to_mat(x);
}

}  // namespace

Zonotope::Zonotope(int n) : n_(n) {
    if (n < 1 || n > kMaxComponents) throw InvalidArgument("zonotope dimension must be 1, 2 or 3");
}

Zonotope::Zonotope(int n, std::vector<Vec> generators) : Zonotope(n) {
    for (auto& g : generators) add(g);
}

void Zonotope::add(const Vec& g) {
    if (g.size() != n_) throw InvalidArgument("generator dimension mismatch");
    if (g.isZero(0)) return;
    gens_.push_back(g);
}

Mat Zonotope::gram() const {
    Mat s = Mat::Zero(n_, n_);
    for (const auto& g : gens_) s += g * g.transpose();
    return s;
}

Zonotope Zonotope::merged(double angle, std::size_t budget) const {
    std::vector<Vec> canon;
    canon.reserve(gens_.size());
    for (const auto& g : gens_) canon.push_back(canonical(g));
    std::vector<std::size_t> order(canon.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](const Vec& g) {
        if (n_ == 2) return std::array<double, 3>{std::atan2(g(1), g(0)), 0, 0};
        const Vec u = g / g.norm();
        return std::array<double, 3>{u(0), n_ > 1 ? u(1) : 0, n_ > 2 ? u(2) : 0};
    };
    std::vector<std::array<double, 3>> keys;
    for (const auto& g : canon) keys.push_back(key(g));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

    for (double tol = angle;; tol *= 2) {
        Zonotope out(n_);
        out.merge_error_ = merge_error_;
        std::size_t i = 0;
        while (i < order.size()) {
            const Vec& head = canon[order[i]];
            Vec sum = head;
            double length = head.norm();
            std::size_t j = i + 1;
            while (j < order.size() && angle_between(head, canon[order[j]]) < tol) {
                sum += canon[order[j]];
                length += canon[order[j]].norm();
                ++j;
            }
            if (j == i + 1) {
                out.gens_.push_back(head);
            } else {
                const Vec merged = sum * (length / sum.norm());
                for (std::size_t k = i; k < j; ++k)
                    out.merge_error_ += canon[order[k]].norm() * std::abs(angle_between(canon[order[k]], merged));
                out.gens_.push_back(merged);
            }
            i = j;
        }
        if (out.gens_.size() <= budget) return out;
    }
}

double support_function(const Zonotope& z, const Vec& u) {
    if (u.size() != z.dim()) throw InvalidArgument("direction dimension mismatch");
    if (u.isZero(0)) throw InvalidArgument("support function needs a nonzero direction");
    return support(z.generators(), u);
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
    if (a.dim() != b.dim()) throw InvalidArgument("Minkowski sum of bodies of different dimension");
    std::vector<Vec> g = a.generators();
    g.insert(g.end(), b.generators().begin(), b.generators().end());
    return Zonotope(a.dim(), std::move(g));
}

Zonotope convex_body_average(const VectorSignal& f, const Cube& q) {
    const int n = f.components();
    if (n > kMaxComponents) throw InvalidArgument("convex bodies support at most 3 components");
    Zonotope z(n);
    const double vol = q.volume();
    for_each_overlap(f.grid(), q, [&](std::size_t c, double w) {
        const auto v = f.at(c);
        Vec g(n);
        for (int k = 0; k < n; ++k) g(k) = v[k] * (w / vol);
        z.add(g);
    });
    return z.merged();
}

std::vector<Vec> dense_directions(int n) {
    std::vector<Vec> out;
    if (n == 1) {
        out.push_back(Vec::Ones(1));
    } else if (n == 2) {
        for (int k = 0; k < 720; ++k) {
            const double a = std::numbers::pi * k / 720;
            Vec u(2);
            u << std::cos(a), std::sin(a);
            out.push_back(u);
        }
    } else if (n == 3) {
        out = icosphere(4);
    } else {
        throw InvalidArgument("direction sets exist for n <= 3");
    }
    return out;
}

std::vector<Vec> verification_directions(int n) {
    std::vector<Vec> out;
    if (n == 1) {
        out.push_back(Vec::Ones(1));
        out.push_back(-Vec::Ones(1));
    } else if (n == 2) {
        for (int k = 0; k < 360; ++k) {
            const double a = 2 * std::numbers::pi * k / 360;
            Vec u(2);
            u << std::cos(a), std::sin(a);
            out.push_back(u);
        }
    } else if (n == 3) {
        const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
        for (int k = 0; k < 360; ++k) {
            const double z = 1 - (2.0 * k + 1) / 360;
            const double rad = std::sqrt(1 - z * z);
            Vec u(3);
            u << rad * std::cos(golden * k), rad * std::sin(golden * k), z;
            out.push_back(u);
        }
    } else {
        throw InvalidArgument("direction sets exist for n <= 3");
    }
    return out;
}

std::vector<Vec> facet_normals(const Zonotope& z) {
    if (z.is_zero()) return {};
    const Mat basis = range_basis(z.gram());
    std::vector<Vec> out;
    for (const auto& u : normals_of(span_coords(z.generators(), basis), int(basis.cols()))) out.push_back(basis * u);
    return out;
}

Ellipsoid john_ellipsoid(const Zonotope& z, JohnReport* report) {
    JohnReport local;
    JohnReport& rep = report ? *report : local;
    const int n = z.dim();
    Ellipsoid e{Mat::Zero(n, n), 0};
    if (z.is_zero()) return e;
    const Mat basis = range_basis(z.gram());
    const int r = int(basis.cols());
    std::vector<Vec> g = span_coords(z.generators(), basis);
    e.rank = r;
    if (r == 1) {
        e.shape = support(g, Vec::Ones(1)) * basis * basis.transpose();
        return e;
    }
    double scale = 0;
    for (const auto& v : g) scale += v.norm();
    for (auto& v : g) v /= scale;

    std::vector<Vec> dirs = dense_directions(r);
    const auto normals = normals_of(g, r);
    dirs.insert(dirs.end(), normals.begin(), normals.end());
    for (auto& u : dirs) u /= support(g, u);

    Mat start = Mat::Zero(r, r);
    for (const auto& v : g) start += v * v.transpose();
    const Mat x = max_logdet(dirs, start, rep);
    const Mat root = spectral_power(jacobi_eigen(x), 0.5);
    e.shape = scale * basis * root * basis.transpose();
    return e;
}

Ellipsoid john_ellipsoid_of_points(const std::vector<Vec>& points, JohnReport* report) {
    JohnReport local;
    JohnReport& rep = report ? *report : local;
    if (points.empty()) throw RankDeficiency("no points");
    const int n = int(points.front().size());
    double scale = 0;
    Mat gram = Mat::Zero(n, n);
    for (const auto& p : points) {
        scale = std::max(scale, p.norm());
        gram += p * p.transpose();
    }
    if (!(scale > 0) || range_basis(gram).cols() < n) throw RankDeficiency("point hull is not full-dimensional");
    std::vector<Vec> pts;
    for (const auto& p : points) pts.push_back(p / scale);
    auto h = [&](const Vec& u) {
        double best = 0;
        for (const auto& p : pts) best = std::max(best, std::abs(p.dot(u)));
        return best;
    };
    Ellipsoid e{Mat::Zero(n, n), n};
    if (n == 1) {
        e.shape = Mat::Constant(1, 1, scale * h(Vec::Ones(1)));
        return e;
    }
    std::vector<Vec> dirs = dense_directions(n);
    if (n == 2) {
        std::vector<Vec> ring;
        for (const auto& p : pts) {
            ring.push_back(p);
            ring.push_back(-p);
        }
        std::sort(ring.begin(), ring.end(),
                  [](const Vec& a, const Vec& b) { return std::atan2(a(1), a(0)) < std::atan2(b(1), b(0)); });
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const Vec d = ring[(i + 1) % ring.size()] - ring[i];
            Vec u(2);
            u << d(1), -d(0);
            if (u.norm() > 1e-14) dirs.push_back(u / u.norm());
        }
    }
    for (auto& u : dirs) u /= h(u);
    Mat start = Mat::Zero(n, n);
    for (const auto& p : pts) start += p * p.transpose();
    const Mat x = max_logdet(dirs, start, rep);
    e.shape = scale * spectral_power(jacobi_eigen(x), 0.5);
    return e;
}

double membership_scale(const Vec& point, const Zonotope& z) {
    if (point.size() != z.dim()) throw InvalidArgument("point dimension mismatch");
    if (point.isZero(0)) return 0;
    if (z.is_zero()) return kInf;
    const Mat basis = range_basis(z.gram());
    const Vec p = basis.transpose() * point;
    if ((basis * p - point).norm() > 1e-9 * point.norm()) return kInf;
    const std::vector<Vec> g = span_coords(z.generators(), basis);
    const int r = int(basis.cols()), k = int(g.size());
    double gmax = 0;
    for (const auto& v : g) gmax = std::max(gmax, v.norm());
    const double pn = p.norm();

    BoundedLP lp;
    lp.a.resize(r, k + 1);
    lp.b = Eigen::VectorXd::Zero(r);
    for (int i = 0; i < k; ++i) {
        lp.a.col(i) = g[i] / gmax;
        lp.b += g[i] / gmax;
    }
    lp.a.col(k) = -p / pn;
    lp.c = Eigen::VectorXd::Zero(k + 1);
    lp.c(k) = 1;
    lp.upper = Eigen::VectorXd::Constant(k + 1, 2.0);
    lp.upper(k) = kInf;
    const LPResult res = solve_bounded_lp(lp);
    if (res.status != LPResult::Status::optimal || !(res.value > 0)) return kInf;
    return pn / (gmax * res.value);
}

double membership_scale_fan(const Vec& point, const Zonotope& z) {
    if (point.size() != z.dim()) throw InvalidArgument("point dimension mismatch");
    if (point.isZero(0)) return 0;
    if (z.is_zero()) return kInf;
    const Mat basis = range_basis(z.gram());
    const Vec p = basis.transpose() * point;
    if ((basis * p - point).norm() > 1e-9 * point.norm()) return kInf;
    const std::vector<Vec> g = span_coords(z.generators(), basis);
    double best = 0;
    for (const auto& u : normals_of(g, int(basis.cols()))) best = std::max(best, std::abs(p.dot(u)) / support(g, u));
    return best;
}

Zonotope sparse_operator_eval(std::span<const Cube> cubes, const VectorSignal& f, const Point& x) {
    Zonotope sum(f.components());
    for (const auto& q : cubes)
        if (q.contains(x)) sum = minkowski_sum(sum, convex_body_average(f, q));
    return sum.merged();
}

}  // namespace czvar
