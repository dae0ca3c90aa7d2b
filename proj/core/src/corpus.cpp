#include <cmath>
#include <functional>

#include "czvar/experiments.hpp"
#include "czvar/random.hpp"

namespace czvar {

namespace {

// Dyadic depths below Q₀ are capped so the corpus is the same function at
// every resolution with at least this many spare levels.
constexpr int kMaxDepth = 6;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Smooth bump with peak 1 at t = 0 and support |t| < 1.
double bump(double t) { return t < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0; }

using Field = std::function<void(const Point&, std::span<double>)>;

VectorSignal sample(const Grid& g, int n, const CellBox& support, const Field& fn) {
    std::vector<double> v(g.cell_count() * std::size_t(n), 0.0);
    g.for_each_cell(support, [&](std::size_t c) {
        std::span<double> out(v.data() + c * n, std::size_t(n));
        fn(g.cell_center(c), out);
        for (auto& x : out) x = quantize(x);
    });
    return VectorSignal(g, n, std::move(v));
}

DyadicIndex random_descendant(const DyadicIndex& q, int depth, int dim, Rng& rng) {
    DyadicIndex p = q;
    for (int i = 0; i < depth; ++i) {
        const auto kids = p.children(dim);
        p = kids[rng.below(kids.size())];
    }
    return p;
}

Mat random_rotation(int n, Rng& rng) {
    if (n == 1) return Mat::Constant(1, 1, rng.sign());
    const double a = rng.uniform(0, 2 * M_PI);
    if (n == 2) {
        Mat r(2, 2);
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        return r;
    }
    Vec k(3);
    do {
        for (int i = 0; i < 3; ++i) k(i) = rng.uniform(-1, 1);
    } while (k.norm() < 1e-3 || k.norm() > 1);
    k.normalize();
    Mat kx(3, 3);
    kx << 0, -k(2), k(1), k(2), 0, -k(0), -k(1), k(0), 0;
    return Mat::Identity(3, 3) + std::sin(a) * kx + (1 - std::cos(a)) * kx * kx;
}

}  // namespace

const char* to_string(SignalFamily f) {
    switch (f) {
        case SignalFamily::indicator: return "indicator";
        case SignalFamily::bump: return "bump";
        case SignalFamily::signs: return "signs";
        case SignalFamily::rotated: return "rotated";
        case SignalFamily::spike: return "spike";
    }
    return "?";
}

SignalFamily parse_signal_family(const std::string& s) {
    for (auto f : {SignalFamily::indicator, SignalFamily::bump, SignalFamily::signs, SignalFamily::rotated,
                   SignalFamily::spike})
        if (s == to_string(f)) return f;
    throw InvalidArgument("unknown signal family: " + s);
}

double quantize(double v) { return std::ldexp(std::nearbyint(std::ldexp(v, 24)), -24); }

std::vector<CorpusItem> generate_corpus(const Grid& g, const DyadicIndex& q0, const CorpusSpec& spec,
                                        std::uint64_t seed) {
    const int d = g.dim();
    const int n = spec.components;
    if (n < 1 || n > kMaxComponents) throw InvalidArgument("corpus components must be 1..3");
    if (spec.families.empty() && spec.count > 0) throw InvalidArgument("corpus has no families");
    if (q0.level > g.max_level()) throw InvalidArgument("Q0 is finer than the grid");
    const Cube cq = g.cube(q0);
    const CellBox support = g.box(q0);
    const int spare = g.max_level() - q0.level;

    std::vector<CorpusItem> out(spec.count);
    parallel_for(spec.count, [&](std::size_t i) {
        Rng rng(splitmix(seed ^ splitmix(i)));
        const SignalFamily fam = spec.families[i % spec.families.size()];
        CorpusItem& item = out[i];
        item.id = std::string(to_string(fam)) + "-" + std::to_string(i);
        item.family = fam;
        switch (fam) {
            case SignalFamily::indicator: {
                const DyadicIndex p = random_descendant(q0, int(rng.below(std::min(kMaxDepth, spare) + 1)), d, rng);
                const int k = int(rng.below(n));
                const CellBox pb = g.box(p);
                item.signal = sample(g, n, pb, [&](const Point&, std::span<double> v) { v[k] = 1; });
                break;
            }
            case SignalFamily::bump: {
                Point c{};
                for (int a = 0; a < d; ++a) c[a] = cq.center[a] + cq.side * rng.uniform(-0.25, 0.25);
                const double radius = cq.side * rng.uniform(0.1, 0.25);
                std::vector<double> amp(n);
                for (auto& a : amp) a = rng.uniform(-1, 1);
                item.signal = sample(g, n, support, [&](const Point& x, std::span<double> v) {
                    double r2 = 0;
                    for (int a = 0; a < d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                    const double b = bump(std::sqrt(r2) / radius);
                    for (int k = 0; k < n; ++k) v[k] = amp[k] * b;
                });
                break;
            }
            case SignalFamily::signs: {
                // Signs live on pieces fixed in physical space, drawn in a
                // resolution-independent order.
                const int level = spec.sign_level;
                const std::int64_t per_axis = std::int64_t(1) << level;
                const std::int64_t pieces = d == 2 ? per_axis * per_axis : per_axis;
                std::vector<double> s(std::size_t(pieces) * n);
                for (auto& x : s) x = rng.sign();
                const double piece = cq.side / double(per_axis);
                item.signal = sample(g, n, support, [&](const Point& x, std::span<double> v) {
                    std::int64_t idx = 0;
                    for (int a = 0; a < d; ++a) {
                        auto j = std::int64_t(std::floor((x[a] - cq.lower(a)) / piece));
                        idx = idx * per_axis + std::clamp<std::int64_t>(j, 0, per_axis - 1);
                    }
                    for (int k = 0; k < n; ++k) v[k] = s[std::size_t(idx) * n + k];
                });
                break;
            }
            case SignalFamily::rotated: {
                const Mat r = random_rotation(n, rng);
                item.signal = sample(g, n, support, [&](const Point& x, std::span<double> v) {
                    double r2 = 0;
                    for (int a = 0; a < d; ++a) r2 += (x[a] - cq.center[a]) * (x[a] - cq.center[a]);
                    const double p1 = bump(2 * std::sqrt(r2) / cq.side);
                    const double p2 = 2 * (x[0] - cq.center[0]) / cq.side;
                    const double prof[3] = {p1, p2, p1 * p2};
                    for (int k = 0; k < n; ++k) {
                        double s = 0;
                        for (int j = 0; j < n; ++j) s += r(k, j) * prof[j];
                        v[k] = s;
                    }
                });
                break;
            }
            case SignalFamily::spike: {
                const int depth = std::min(spare, 2 + int(rng.below(kMaxDepth - 1)));
                const DyadicIndex p = random_descendant(q0, depth, d, rng);
                const int k = int(rng.below(n));
                const double height = rng.sign() * std::ldexp(1.0, depth * d);
                item.signal = sample(g, n, g.box(p), [&](const Point&, std::span<double> v) { v[k] = height; });
                break;
            }
        }
    });
    return out;
}

std::vector<VectorSignal> spike_sequence(const Grid& g, const DyadicIndex& q0, int components, std::size_t steps) {
    const int d = g.dim();
    // One dyadic level shrinks the measure by 2^d; 4× takes 2 levels when d = 1.
    const int stride = d == 1 ? 2 : 1;
    std::vector<VectorSignal> out;
    DyadicIndex p = q0;
    for (std::size_t s = 0; s < steps; ++s) {
        if (s > 0) {
            if (p.level + stride > g.max_level()) break;
            for (int i = 0; i < stride; ++i) {
                // First step: the child whose lower corner is the center of Q₀;
                // afterwards keep that corner.
                const auto kids = p.children(d);
                p = p == q0 ? kids.back() : kids.front();
            }
        }
        const double height = 1.0 / g.cube(p).volume();
        std::vector<double> v(g.cell_count() * std::size_t(components), 0.0);
        g.for_each_cell(g.box(p), [&](std::size_t c) { v[c * components] = height; });
        out.emplace_back(g, components, std::move(v));
    }
    return out;
}

}  // namespace czvar
