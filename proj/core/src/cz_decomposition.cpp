#include "czvar/cz_decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace czvar {

namespace {

std::size_t slot(const DyadicIndex& q, int dim) {
    return dim == 1 ? std::size_t(q.pos[0]) : std::size_t(q.pos[0]) * (std::size_t(1) << q.level) + std::size_t(q.pos[1]);
}

// Sums of a per-cell quantity over every dyadic cube, level by level.
template <class T>
std::vector<std::vector<T>> pyramid(const Grid& g, const std::vector<T>& cells) {
    const int top = g.max_level(), d = g.dim();
    std::vector<std::vector<T>> lv(top + 1);
    lv[top] = cells;
    for (int l = top - 1; l >= 0; --l) {
        lv[l].assign(std::size_t(1) << (l * d), T{});
        const std::int64_t count = std::int64_t(1) << l;
        for (std::int64_t i = 0; i < count; ++i)
            for (std::int64_t j = 0; j < (d == 2 ? count : 1); ++j) {
                const DyadicIndex q{l, {i, j}};
                T s{};
                for (const auto& c : q.children(d)) s += lv[l + 1][slot(c, d)];
                lv[l][slot(q, d)] = s;
            }
    }
    return lv;
}

template <class Select>
void walk(const DyadicIndex& q, int top, int dim, const Select& selected, std::vector<DyadicIndex>& out) {
    if (selected(q)) {
        out.push_back(q);
        return;
    }
    if (q.level == top) return;
    for (const auto& c : q.children(dim)) walk(c, top, dim, selected, out);
}

void check_root(const Grid& g, const DyadicIndex& root) {
    const std::int64_t count = std::int64_t(1) << root.level;
    if (root.level < 0 || root.level > g.max_level() || root.pos[0] < 0 || root.pos[0] >= count ||
        (g.dim() == 2 && (root.pos[1] < 0 || root.pos[1] >= count)))
        throw InvalidArgument("decomposition root is not a dyadic cube of the grid");
}

}  // namespace

CZDecomposition cz_decompose(const ScalarSignal& f, double lambda, const DyadicIndex& root) {
    if (!(lambda > 0)) throw InvalidArgument("CZ height must be positive");
    const Grid& g = f.grid();
    check_root(g, root);
    const int d = g.dim();
    std::vector<double> mag(f.values().begin(), f.values().end()), sgn = mag;
    for (double& v : mag) v = std::abs(v);
    const auto abs_sum = pyramid(g, mag);
    const auto sum = pyramid(g, sgn);
    auto cells = [&](const DyadicIndex& q) { return std::ldexp(1.0, (g.max_level() - q.level) * d); };
    auto mean_abs = [&](const DyadicIndex& q) { return abs_sum[q.level][slot(q, d)] / cells(q); };

    CZDecomposition dec;
    dec.height = lambda;
    dec.root = root;
    dec.root_reached = mean_abs(root) >= lambda;
    std::vector<DyadicIndex> picked;
    walk(root, g.max_level(), d, [&](const DyadicIndex& q) { return mean_abs(q) > lambda; }, picked);
    std::sort(picked.begin(), picked.end());

    std::vector<double> good(f.values().begin(), f.values().end());
    for (const auto& q : picked) {
        const double m = sum[q.level][slot(q, d)] / cells(q);
        std::vector<double> b(g.cell_count(), 0.0);
        g.for_each_cell(g.box(q), [&](std::size_t c) {
            good[c] = m;
            b[c] = f[c] - m;
        });
        dec.bad.push_back({q, g.cube(q), m, ScalarSignal(g, std::move(b))});
    }
    dec.good = ScalarSignal(g, std::move(good));
    return dec;
}

std::vector<DyadicIndex> cz_stopping_cubes(const Grid& g, std::span<const std::uint8_t> in_e, std::uint64_t num,
                                           std::uint64_t den, const DyadicIndex& root) {
    if (in_e.size() != g.cell_count()) throw InvalidArgument("indicator size does not match grid");
    if (num == 0 || den == 0) throw InvalidArgument("CZ height must be a positive rational");
    check_root(g, root);
    const int d = g.dim();
    std::vector<std::uint64_t> counts(in_e.begin(), in_e.end());
    for (auto& c : counts) c = c ? 1 : 0;
    const auto lv = pyramid(g, counts);
    std::vector<DyadicIndex> out;
    walk(root, g.max_level(), d,
         [&](const DyadicIndex& q) {
             const std::uint64_t cells = std::uint64_t(1) << ((g.max_level() - q.level) * d);
             return lv[q.level][slot(q, d)] * den > num * cells;
         },
         out);
    std::sort(out.begin(), out.end());
    return out;
}

CZPropertyReport verify_cz_properties(const CZDecomposition& dec, const ScalarSignal& f) {
    const Grid& g = f.grid();
    const int d = g.dim();
    const double lambda = dec.height;
    const double vol = g.cell_volume();
    CZPropertyReport r;

    std::vector<double> total(dec.good.values().begin(), dec.good.values().end());
    for (const auto& part : dec.bad)
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += part.b[c];
    r.reconstruction = std::equal(total.begin(), total.end(), f.values().begin());

    double gmax = 0, gl1 = 0;
    for (double v : dec.good.values()) {
        gmax = std::max(gmax, std::abs(v));
        gl1 += std::abs(v) * vol;
    }
    const double fl1 = f.l1_norm();
    r.c1_factor = gmax / (std::ldexp(1.0, d) * lambda);
    // Norms are summed in different orders; allow only rounding.
    r.c1 = r.c1_factor <= 1 && gl1 <= fl1 * (1 + 1e-12);

    std::vector<std::uint8_t> painted(g.cell_count(), 0);
    r.c2 = true;
    r.c3 = true;
    r.c4 = true;
    double measure = 0;
    for (const auto& part : dec.bad) {
        const CellBox box = g.box(part.index);
        r.c2 = r.c2 && g.dyadic_index(part.cube) == part.index;
        double s = 0, l1 = 0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const double v = part.b[c];
            s += v;
            l1 += std::abs(v) * vol;
            const bool inside = box.contains(g.coords(c), d);
            if (!inside && v != 0) r.c2 = false;
            if (inside && painted[c]++) r.c2 = false;
        }
        r.c3_max_sum = std::max(r.c3_max_sum, std::abs(s));
        r.c3 = r.c3 && s == 0;
        const double qvol = part.cube.volume();
        const double ratio = l1 / (std::ldexp(1.0, d + 1) * lambda * qvol);
        r.c4_ratio = std::max(r.c4_ratio, ratio);
        r.c4 = r.c4 && ratio <= 1 + 1e-12;
        measure += qvol;
    }
    r.c5_slack = fl1 / lambda - measure;
    r.c5 = r.c5_slack >= 0;
    return r;
}

}  // namespace czvar
