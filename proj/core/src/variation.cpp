#include "czvar/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace czvar {

namespace {

CellBox full_box(const Grid& g) {
    return g.clip({{0, 0}, {g.resolution(), g.resolution()}});
}

double dp(std::span<const double> a, double rho) {
    std::vector<double> best(a.size(), 0.0);
    double top = 0;
    for (std::size_t j = 1; j < a.size(); ++j) {
        double b = 0;
        for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + std::pow(std::abs(a[j] - a[i]), rho));
        best[j] = b;
        top = std::max(top, b);
    }
    return std::pow(top, 1.0 / rho);
}

// Boxes of all cell-aligned cubes inside the grid that contain `c`.
template <class Fn>
void for_each_aligned_box(const Grid& g, const CellCoord& c, Fn&& fn) {
    const std::int64_t n = g.resolution();
    for (std::int64_t s = 1; s <= n; ++s) {
        const std::int64_t lo0 = std::max<std::int64_t>(0, c[0] - s + 1), hi0 = std::min(c[0], n - s);
        if (g.dim() == 1) {
            for (std::int64_t a = lo0; a <= hi0; ++a) fn(CellBox{{a, 0}, {a + s, 1}});
            continue;
        }
        const std::int64_t lo1 = std::max<std::int64_t>(0, c[1] - s + 1), hi1 = std::min(c[1], n - s);
        for (std::int64_t a = lo0; a <= hi0; ++a)
            for (std::int64_t b = lo1; b <= hi1; ++b) fn(CellBox{{a, b}, {a + s, b + s}});
    }
}

double box_mean(const BoxSums& sums, const Grid& g, const CellBox& b) {
    const std::size_t cells = g.cells_in(b);
    return cells == 0 ? 0.0 : sums.sum(b) / double(cells);
}

double sup_mean(const Grid& g, const BoxSums& sums, std::size_t cell, CubeFamily family) {
    double best = 0;
    if (family == CubeFamily::all_aligned) {
        for_each_aligned_box(g, g.coords(cell), [&](const CellBox& b) { best = std::max(best, box_mean(sums, g, b)); });
    } else {
        for (const auto& b : family_boxes_containing(g, cell)) best = std::max(best, box_mean(sums, g, b));
    }
    return best;
}

std::size_t level_slot(const DyadicIndex& q, int dim) {
    return dim == 1 ? std::size_t(q.pos[0]) : std::size_t(q.pos[0]) * (std::size_t(1) << q.level) + std::size_t(q.pos[1]);
}

}  // namespace

double rho_variation(std::span<const double> a, double rho) {
    if (a.empty()) throw InvalidArgument("rho_variation of an empty sequence");
    if (!(rho > 1)) throw InvalidArgument("rho_variation needs rho > 1");
    return dp(a, rho);
}

double rho_variation_extrema(std::span<const double> a, double rho) {
    if (a.empty()) throw InvalidArgument("rho_variation of an empty sequence");
    if (!(rho >= 1)) throw InvalidArgument("extrema fast path needs rho >= 1");
    std::vector<double> runs;
    runs.reserve(a.size());
    for (double v : a)
        if (runs.empty() || runs.back() != v) runs.push_back(v);
    std::vector<double> ext;
    ext.reserve(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (i == 0 || i + 1 == runs.size() || (runs[i] - runs[i - 1]) * (runs[i + 1] - runs[i]) < 0)
            ext.push_back(runs[i]);
    }
    return dp(ext, rho);
}

void VariationParams::validate() const {
    if (!(rho > 2)) throw InvalidArgument("variation exponent rho must exceed 2");
    if (ladder.size() == 0) throw InvalidArgument("empty truncation ladder");
}

void MaximalParams::validate() const {
    if (!(r > 1)) throw InvalidArgument("maximal exponent r must exceed 1");
    if (!(p > 1) || !std::isfinite(p)) throw InvalidArgument("p must lie in (1, inf)");
}

std::vector<CellBox> dyadic_dilated_family(const Grid& g) {
    std::vector<CellBox> out;
    for (int l = 0; l <= g.max_level(); ++l) {
        const std::int64_t count = std::int64_t(1) << l;
        const std::int64_t count1 = g.dim() == 2 ? count : 1;
        for (std::int64_t i = 0; i < count; ++i)
            for (std::int64_t j = 0; j < count1; ++j) {
                const CellBox b = g.box({l, {i, j}});
                out.push_back(b);
                out.push_back(Grid::dilate3(b, g.dim()));
            }
    }
    return out;
}

std::vector<CellBox> family_boxes_containing(const Grid& g, std::size_t cell) {
    std::vector<CellBox> out;
    const int d = g.dim();
    for (int l = 0; l <= g.max_level(); ++l) {
        const DyadicIndex p = g.dyadic_of_cell(cell, l);
        const std::int64_t count = std::int64_t(1) << l;
        out.push_back(g.box(p));
        const std::int64_t r1 = d == 2 ? 1 : 0;
        for (std::int64_t a = -1; a <= 1; ++a)
            for (std::int64_t b = -r1; b <= r1; ++b) {
                const DyadicIndex q{l, {p.pos[0] + a, p.pos[1] + b}};
                if (q.pos[0] < 0 || q.pos[0] >= count) continue;
                if (d == 2 && (q.pos[1] < 0 || q.pos[1] >= count)) continue;
                out.push_back(Grid::dilate3(g.box(q), d));
            }
    }
    return out;
}

VariationEngine::VariationEngine(const Grid& grid, const Kernel& kernel, VariationParams params)
    : grid_(grid), kernel_(kernel), params_(std::move(params)) {
    params_.validate();
    if (kernel_.dim != grid_.dim()) throw InvalidArgument("kernel and grid dimensions differ");
    params_.ladder.check_floor(grid_);
    span_ = grid_.resolution();
    const std::int64_t w = 2 * span_ - 1;
    const std::size_t slots = grid_.dim() == 1 ? std::size_t(w) : std::size_t(w * w);
    weight_.assign(slots, 0.0);
    first_.assign(slots, std::uint16_t(ladder_size()));
    const auto eps = params_.ladder.eps();
    const double h = grid_.cell_side();
    const double vol = grid_.cell_volume();
    const std::int64_t r1 = grid_.dim() == 2 ? span_ - 1 : 0;
    for (std::int64_t d0 = -(span_ - 1); d0 <= span_ - 1; ++d0)
        for (std::int64_t d1 = -r1; d1 <= r1; ++d1) {
            if (d0 == 0 && d1 == 0) continue;
            const Point z{double(d0) * h, double(d1) * h};
            const double r = grid_.dim() == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]);
            const std::size_t s = offset_slot(d0, d1);
            weight_[s] = kernel_.at_offset(z) * vol;
            const auto it = std::find_if(eps.begin(), eps.end(), [&](double e) { return r > e; });
            first_[s] = std::uint16_t(it - eps.begin());
        }
}

std::size_t VariationEngine::offset_slot(std::int64_t d0, std::int64_t d1) const {
    const std::int64_t w = 2 * span_ - 1;
    if (grid_.dim() == 1) return std::size_t(d0 + span_ - 1);
    return std::size_t((d0 + span_ - 1) * w + (d1 + span_ - 1));
}

void VariationEngine::accumulate(const ScalarSignal& f, std::size_t cell, const CellBox& source, double sign,
                                 std::span<double> bins) const {
    const CellBox b = grid_.clip(source);
    const CellCoord x = grid_.coords(cell);
    const auto v = f.values();
    const std::int64_t n = grid_.resolution();
    if (grid_.dim() == 1) {
        for (std::int64_t y = b.lo[0]; y < b.hi[0]; ++y) {
            const double fy = v[std::size_t(y)];
            if (fy == 0) continue;
            const std::size_t s = offset_slot(x[0] - y, 0);
            bins[first_[s]] += sign * fy * weight_[s];
        }
        return;
    }
    for (std::int64_t y0 = b.lo[0]; y0 < b.hi[0]; ++y0)
        for (std::int64_t y1 = b.lo[1]; y1 < b.hi[1]; ++y1) {
            const double fy = v[std::size_t(y0 * n + y1)];
            if (fy == 0) continue;
            const std::size_t s = offset_slot(x[0] - y0, x[1] - y1);
            bins[first_[s]] += sign * fy * weight_[s];
        }
}

double VariationEngine::finish(std::span<const double> bins) const {
    const std::size_t m = ladder_size();
    std::vector<double> a(m);
    double run = 0;
    for (std::size_t k = 0; k < m; ++k) a[k] = run += bins[k];
    return rho_variation_extrema(a, params_.rho);
}

std::vector<double> VariationEngine::ladder_values(const ScalarSignal& f, std::size_t cell) const {
    return ladder_values(f, cell, full_box(grid_));
}

std::vector<double> VariationEngine::ladder_values(const ScalarSignal& f, std::size_t cell,
                                                   const CellBox& source) const {
    std::vector<double> bins(ladder_size() + 1, 0.0);
    accumulate(f, cell, source, 1.0, bins);
    std::vector<double> a(ladder_size());
    double run = 0;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = run += bins[k];
    return a;
}

double VariationEngine::variation_at(const ScalarSignal& f, std::size_t cell) const {
    return variation_at(f, cell, full_box(grid_));
}

double VariationEngine::variation_at(const ScalarSignal& f, std::size_t cell, const CellBox& source) const {
    std::vector<double> bins(ladder_size() + 1, 0.0);
    accumulate(f, cell, source, 1.0, bins);
    return finish(bins);
}

std::vector<double> VariationEngine::variation_field(const ScalarSignal& f) const {
    const CellBox all = full_box(grid_);
    return variation_field(f, all, all);
}

std::vector<double> VariationEngine::variation_field(const ScalarSignal& f, const CellBox& source,
                                                     const CellBox& targets) const {
    std::vector<double> out(grid_.cell_count(), 0.0);
    std::vector<std::size_t> cells;
    grid_.for_each_cell(targets, [&](std::size_t c) { cells.push_back(c); });
    parallel_for(cells.size(), [&](std::size_t i) { out[cells[i]] = variation_at(f, cells[i], source); });
    return out;
}

std::vector<double> VariationEngine::local_grand_maximal_field(const ScalarSignal& f, const DyadicIndex& q0) const {
    const int d = grid_.dim();
    const int top = grid_.max_level();
    const CellBox q0box = grid_.box(q0);
    const CellBox outer = Grid::dilate3(q0box, d);
    std::vector<std::size_t> cells;
    grid_.for_each_cell(q0box, [&](std::size_t c) { cells.push_back(c); });
    const std::size_t m1 = ladder_size() + 1;
    const int levels = top - q0.level;  // strict sub-levels q0.level+1 .. top

    // val[i * levels + t] = V(T_*(f χ_{3Q₀ \ 3Q}))(ξ_i), Q = ancestor of ξ_i at level q0.level + 1 + t.
    std::vector<double> val(cells.size() * std::size_t(std::max(levels, 0)), 0.0);
    parallel_for(cells.size(), [&](std::size_t i) {
        std::vector<double> full(m1, 0.0), bins(m1);
        accumulate(f, cells[i], outer, 1.0, full);
        for (int t = 0; t < levels; ++t) {
            bins = full;
            const DyadicIndex q = grid_.dyadic_of_cell(cells[i], q0.level + 1 + t);
            accumulate(f, cells[i], Grid::dilate3(grid_.box(q), d), -1.0, bins);
            val[i * levels + t] = finish(bins);
        }
    });

    // G(Q) = max over ξ ∈ Q, per level.
    std::vector<std::vector<double>> best(top + 1);
    for (int l = q0.level + 1; l <= top; ++l) best[l].assign(std::size_t(1) << (l * d), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (int t = 0; t < levels; ++t) {
            const DyadicIndex q = grid_.dyadic_of_cell(cells[i], q0.level + 1 + t);
            double& g = best[q.level][level_slot(q, d)];
            g = std::max(g, val[i * levels + t]);
        }

    std::vector<double> out(grid_.cell_count(), 0.0);
    for (std::size_t c : cells) {
        double m = 0;
        for (int l = q0.level + 1; l <= top; ++l) m = std::max(m, best[l][level_slot(grid_.dyadic_of_cell(c, l), d)]);
        out[c] = m;
    }
    return out;
}

std::vector<double> VariationEngine::global_grand_maximal_field(const ScalarSignal& f) const {
    const int d = grid_.dim();
    const std::size_t m1 = ladder_size() + 1;
    const std::size_t n = grid_.cell_count();
    const CellBox all = full_box(grid_);

    std::vector<double> full(n * m1, 0.0);
    parallel_for(n, [&](std::size_t c) { accumulate(f, c, all, 1.0, {full.data() + c * m1, m1}); });

    const std::vector<CellBox> family = dyadic_dilated_family(grid_);
    std::vector<double> g_of(family.size(), 0.0);
    parallel_for(family.size(), [&](std::size_t r) {
        const CellBox cut = Grid::dilate3(family[r], d);
        std::vector<double> bins(m1);
        double best = 0;
        grid_.for_each_cell(family[r], [&](std::size_t c) {
            std::copy_n(full.data() + c * m1, m1, bins.begin());
            accumulate(f, c, cut, -1.0, bins);
            best = std::max(best, finish(bins));
        });
        g_of[r] = best;
    });

    std::vector<double> out(n, 0.0);
    for (std::size_t r = 0; r < family.size(); ++r)
        grid_.for_each_cell(family[r], [&](std::size_t c) { out[c] = std::max(out[c], g_of[r]); });
    return out;
}

double variation_operator(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Point& x) {
    vp.validate();
    std::vector<double> a;
    a.reserve(vp.ladder.size());
    for (double e : vp.ladder.eps()) a.push_back(truncated_apply(k, f, e, x));
    return rho_variation(a, vp.rho);
}

std::vector<double> vector_variation(const Kernel& k, const VectorSignal& f, const VariationParams& vp,
                                     const Point& x) {
    std::vector<double> out(f.components());
    for (int j = 0; j < f.components(); ++j) out[j] = variation_operator(k, f.component(j), vp, x);
    return out;
}

double hl_maximal(const ScalarSignal& f, const Point& x, CubeFamily family) {
    const Grid& g = f.grid();
    const auto cell = g.locate(x);
    if (!cell) throw DomainError("hl_maximal evaluated outside the domain");
    std::vector<double> mag(f.values().begin(), f.values().end());
    for (double& v : mag) v = std::abs(v);
    return sup_mean(g, BoxSums(g, mag), *cell, family);
}

std::vector<double> hl_maximal_field(const ScalarSignal& f) {
    const Grid& g = f.grid();
    std::vector<double> mag(f.values().begin(), f.values().end());
    for (double& v : mag) v = std::abs(v);
    const BoxSums sums(g, mag);
    std::vector<double> out(g.cell_count());
    parallel_for(out.size(), [&](std::size_t c) { out[c] = sup_mean(g, sums, c, CubeFamily::dyadic_dilated); });
    return out;
}

namespace {

std::vector<double> powered_magnitude(const VectorSignal& f, double e) {
    std::vector<double> out(f.grid().cell_count());
    for (std::size_t c = 0; c < out.size(); ++c) {
        double s = 0;
        for (double v : f.at(c)) s += v * v;
        out[c] = std::pow(std::sqrt(s), e);
    }
    return out;
}

}  // namespace

double power_maximal(const VectorSignal& f, double exponent, const Point& x, CubeFamily family) {
    if (!(exponent >= 1)) throw InvalidArgument("power_maximal needs exponent >= 1");
    const Grid& g = f.grid();
    const auto cell = g.locate(x);
    if (!cell) throw DomainError("power_maximal evaluated outside the domain");
    return std::pow(sup_mean(g, BoxSums(g, powered_magnitude(f, exponent)), *cell, family), 1.0 / exponent);
}

std::vector<double> power_maximal_field(const VectorSignal& f, double exponent) {
    if (!(exponent >= 1)) throw InvalidArgument("power_maximal needs exponent >= 1");
    const Grid& g = f.grid();
    const BoxSums sums(g, powered_magnitude(f, exponent));
    std::vector<double> out(g.cell_count());
    parallel_for(out.size(), [&](std::size_t c) {
        out[c] = std::pow(sup_mean(g, sums, c, CubeFamily::dyadic_dilated), 1.0 / exponent);
    });
    return out;
}

double local_grand_maximal(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Cube& q0,
                           const Point& x) {
    const Grid& g = f.grid();
    const auto idx = g.dyadic_index(q0);
    if (!idx) throw InvalidArgument("Q0 must be a dyadic cube of the signal's grid");
    if (!q0.contains(x)) return 0;
    const auto cell = g.locate(x);
    if (!cell) return 0;
    return VariationEngine(g, k, vp).local_grand_maximal_field(f, *idx)[*cell];
}

double global_grand_maximal(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Point& x) {
    const Grid& g = f.grid();
    const auto cell = g.locate(x);
    if (!cell) throw DomainError("global_grand_maximal evaluated outside the domain");
    return VariationEngine(g, k, vp).global_grand_maximal_field(f)[*cell];
}

double weak_norm_estimate(std::span<const double> g, double cell_volume, double f_l1) {
    if (!(f_l1 > 0)) throw InvalidArgument("weak norm needs a nonzero input");
    std::vector<double> v(g.begin(), g.end());
    std::sort(v.begin(), v.end(), std::greater<>());
    double best = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0)) break;
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;  // last index of a run of equal values
        best = std::max(best, v[i] * double(i + 1) * cell_volume);
    }
    return best / f_l1;
}

double weak_norm_estimate(const ScalarSignal& g, const ScalarSignal& f) {
    return weak_norm_estimate(g.values(), g.grid().cell_volume(), f.l1_norm());
}

}  // namespace czvar
