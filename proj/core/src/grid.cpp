#include "czvar/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace czvar {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("dimension must be 1 or 2, got " + std::to_string(dim));
}

}  // namespace

double Cube::volume() const { return dim == 1 ? side : side * side; }

bool Cube::contains(const Point& x) const {
    for (int a = 0; a < dim; ++a)
        if (!(x[a] >= lower(a) && x[a] < upper(a))) return false;
    return true;
}

bool Cube::contains(const Cube& other) const {
    for (int a = 0; a < dim; ++a)
        if (other.lower(a) < lower(a) || other.upper(a) > upper(a)) return false;
    return true;
}

Cube make_cube(int dim, Point center, double side, int level) {
    check_dim(dim);
    if (!(side > 0)) throw InvalidArgument("cube side must be positive");
    Cube q;
    q.dim = dim;
    q.center = center;
    if (dim == 1) q.center[1] = 0;
    q.side = side;
    q.level = level;
    return q;
}

Cube cube_from_corner(int dim, Point lo, double side, int level) {
    Point c{};
    for (int a = 0; a < dim; ++a) c[a] = lo[a] + side / 2;
    return make_cube(dim, c, side, level);
}

std::vector<Cube> dyadic_children(const Cube& q) {
    std::vector<Cube> out;
    const double quarter = q.side / 4;
    const int count = 1 << q.dim;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        Cube c = q;
        c.side = q.side / 2;
        c.level = q.level + 1;
        // Row-major: bit (dim-1-a) of k selects the upper half on axis a.
        for (int a = 0; a < q.dim; ++a) {
            const bool upper = (k >> (q.dim - 1 - a)) & 1;
            c.center[a] = q.center[a] + (upper ? quarter : -quarter);
        }
        out.push_back(c);
    }
    return out;
}

Cube dilate(const Cube& q, double t) {
    if (!(t > 0)) throw InvalidArgument("dilation factor must be positive");
    Cube out = q;
    out.side = q.side * t;
    return out;
}

bool covers(std::span<const Cube> coarse, std::span<const Cube> fine) {
    return std::all_of(fine.begin(), fine.end(), [&](const Cube& f) {
        return std::any_of(coarse.begin(), coarse.end(), [&](const Cube& c) { return c.contains(f); });
    });
}

DyadicIndex DyadicIndex::parent() const {
    if (level == 0) throw InvalidArgument("root cube has no parent");
    DyadicIndex p;
    p.level = level - 1;
    p.pos = {pos[0] >> 1, pos[1] >> 1};
    return p;
}

bool DyadicIndex::contains(const DyadicIndex& other) const {
    if (other.level < level) return false;
    const int shift = other.level - level;
    return (other.pos[0] >> shift) == pos[0] && (other.pos[1] >> shift) == pos[1];
}

std::vector<DyadicIndex> DyadicIndex::children(int dim) const {
    std::vector<DyadicIndex> out;
    if (dim == 1) {
        for (int b = 0; b < 2; ++b) out.push_back({level + 1, {2 * pos[0] + b, 0}});
    } else {
        for (int b0 = 0; b0 < 2; ++b0)
            for (int b1 = 0; b1 < 2; ++b1) out.push_back({level + 1, {2 * pos[0] + b0, 2 * pos[1] + b1}});
    }
    return out;
}

bool covers(std::span<const DyadicIndex> coarse, std::span<const DyadicIndex> fine) {
    return std::all_of(fine.begin(), fine.end(), [&](const DyadicIndex& f) {
        return std::any_of(coarse.begin(), coarse.end(), [&](const DyadicIndex& c) { return c.contains(f); });
    });
}

bool CellBox::contains(const CellCoord& c, int dim) const {
    for (int a = 0; a < dim; ++a)
        if (c[a] < lo[a] || c[a] >= hi[a]) return false;
    return true;
}

bool CellBox::empty(int dim) const {
    for (int a = 0; a < dim; ++a)
        if (hi[a] <= lo[a]) return true;
    return false;
}

std::vector<Cube> DyadicTree::level(int k) const {
    if (k < 0 || k > max_level) throw InvalidArgument("level outside the tree");
    std::vector<Cube> cur{root};
    for (int l = 0; l < k; ++l) {
        std::vector<Cube> next;
        next.reserve(cur.size() << root.dim);
        for (const auto& q : cur)
            for (auto& c : dyadic_children(q)) next.push_back(c);
        cur.swap(next);
    }
    return cur;
}

std::size_t DyadicTree::count_at_level(int k) const { return std::size_t{1} << (root.dim * k); }

Grid::Grid(int dim, int resolution, Cube domain) : dim_(dim), resolution_(resolution), domain_(domain) {
    check_dim(dim);
    if (resolution < 1 || !std::has_single_bit(static_cast<unsigned>(resolution)))
        throw InvalidArgument("resolution must be a power of two");
    if (domain.dim != dim) throw InvalidArgument("domain dimension mismatch");
    max_level_ = std::countr_zero(static_cast<unsigned>(resolution));
    cell_count_ = dim == 1 ? resolution : std::size_t(resolution) * resolution;
    domain_.level = 0;
}

double Grid::cell_volume() const {
    const double h = cell_side();
    return dim_ == 1 ? h : h * h;
}

double Grid::cell_diameter() const { return cell_side() * std::sqrt(double(dim_)); }

CellCoord Grid::coords(std::size_t cell) const {
    if (dim_ == 1) return {std::int64_t(cell), 0};
    return {std::int64_t(cell / resolution_), std::int64_t(cell % resolution_)};
}

std::size_t Grid::index(const CellCoord& c) const {
    if (dim_ == 1) return std::size_t(c[0]);
    return std::size_t(c[0]) * resolution_ + std::size_t(c[1]);
}

bool Grid::in_grid(const CellCoord& c) const {
    for (int a = 0; a < dim_; ++a)
        if (c[a] < 0 || c[a] >= resolution_) return false;
    return true;
}

Point Grid::cell_center(const CellCoord& c) const {
    Point p{};
    const double h = cell_side();
    for (int a = 0; a < dim_; ++a) p[a] = domain_.lower(a) + (double(c[a]) + 0.5) * h;
    return p;
}

Point Grid::cell_center(std::size_t cell) const { return cell_center(coords(cell)); }

Cube Grid::cell_cube(std::size_t cell) const { return make_cube(dim_, cell_center(cell), cell_side(), max_level_); }

std::optional<std::size_t> Grid::locate(const Point& x) const {
    if (!domain_.contains(x)) return std::nullopt;
    CellCoord c{};
    const double h = cell_side();
    for (int a = 0; a < dim_; ++a) {
        auto i = std::int64_t(std::floor((x[a] - domain_.lower(a)) / h));
        c[a] = std::clamp<std::int64_t>(i, 0, resolution_ - 1);
    }
    return index(c);
}

CellBox Grid::box(const DyadicIndex& q) const {
    if (q.level < 0 || q.level > max_level_) throw InvalidArgument("dyadic level outside the grid");
    const std::int64_t s = std::int64_t(resolution_) >> q.level;
    CellBox b;
    for (int a = 0; a < dim_; ++a) {
        b.lo[a] = q.pos[a] * s;
        b.hi[a] = b.lo[a] + s;
    }
    return b;
}

Cube Grid::cube(const DyadicIndex& q) const {
    Cube c = cube_of_box(box(q));
    c.level = q.level;
    return c;
}

DyadicIndex Grid::dyadic_of_cell(std::size_t cell, int level) const {
    const auto c = coords(cell);
    const int shift = max_level_ - level;
    return {level, {c[0] >> shift, dim_ == 2 ? c[1] >> shift : 0}};
}

std::optional<DyadicIndex> Grid::dyadic_index(const Cube& q) const {
    if (q.dim != dim_) return std::nullopt;
    const double ratio = domain_.side / q.side;
    const double lr = std::log2(ratio);
    const int level = int(std::lround(lr));
    if (level < 0 || level > max_level_ || std::ldexp(q.side, level) != domain_.side) return std::nullopt;
    DyadicIndex idx{level, {0, 0}};
    for (int a = 0; a < dim_; ++a) {
        const double pos = (q.lower(a) - domain_.lower(a)) / q.side;
        const double r = std::round(pos);
        if (r != pos || r < 0 || r >= std::ldexp(1.0, level)) return std::nullopt;
        idx.pos[a] = std::int64_t(r);
    }
    return idx;
}

CellBox Grid::dilate3(const CellBox& b, int dim) {
    CellBox out = b;
    for (int a = 0; a < dim; ++a) {
        const std::int64_t len = b.hi[a] - b.lo[a];
        out.lo[a] -= len;
        out.hi[a] += len;
    }
    return out;
}

CellBox Grid::clip(const CellBox& b) const {
    CellBox out = b;
    for (int a = 0; a < dim_; ++a) {
        out.lo[a] = std::clamp<std::int64_t>(b.lo[a], 0, resolution_);
        out.hi[a] = std::clamp<std::int64_t>(b.hi[a], 0, resolution_);
    }
    if (dim_ == 1) out.lo[1] = 0, out.hi[1] = 1;
    return out;
}

std::size_t Grid::cells_in(const CellBox& b) const {
    const CellBox c = clip(b);
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= std::size_t(std::max<std::int64_t>(0, c.hi[a] - c.lo[a]));
    return n;
}

Cube Grid::cube_of_box(const CellBox& b) const {
    const double h = cell_side();
    Point lo{};
    for (int a = 0; a < dim_; ++a) lo[a] = domain_.lower(a) + double(b.lo[a]) * h;
    return cube_from_corner(dim_, lo, double(b.hi[0] - b.lo[0]) * h);
}

void Grid::for_each_cell(const CellBox& b, const std::function<void(std::size_t)>& fn) const {
    const CellBox c = clip(b);
    if (dim_ == 1) {
        for (std::int64_t i = c.lo[0]; i < c.hi[0]; ++i) fn(std::size_t(i));
        return;
    }
    for (std::int64_t i = c.lo[0]; i < c.hi[0]; ++i)
        for (std::int64_t j = c.lo[1]; j < c.hi[1]; ++j) fn(std::size_t(i) * resolution_ + std::size_t(j));
}

ScalarSignal::ScalarSignal(Grid grid) : grid_(grid), values_(grid.cell_count(), 0.0) {}

ScalarSignal::ScalarSignal(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count()) throw InvalidArgument("signal value count does not match grid");
}

ScalarSignal ScalarSignal::sample(const Grid& grid, const std::function<double(const Point&)>& fn) {
    std::vector<double> v(grid.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.cell_center(i));
    return {grid, std::move(v)};
}

double ScalarSignal::l1_norm() const {
    double s = 0;
    for (double v : values_) s += std::abs(v);
    return s * grid_.cell_volume();
}

ScalarSignal ScalarSignal::restricted(const CellBox& keep) const {
    ScalarSignal out(grid_);
    grid_.for_each_cell(keep, [&](std::size_t c) { out.values_[c] = values_[c]; });
    return out;
}

VectorSignal::VectorSignal(Grid grid, int components)
    : grid_(grid), n_(components), values_(grid.cell_count() * std::size_t(std::max(components, 0)), 0.0) {
    if (components < 1) throw InvalidArgument("vector signal needs at least one component");
}

VectorSignal::VectorSignal(Grid grid, int components, std::vector<double> values)
    : grid_(grid), n_(components), values_(std::move(values)) {
    if (components < 1) throw InvalidArgument("vector signal needs at least one component");
    if (values_.size() != grid_.cell_count() * std::size_t(n_))
        throw InvalidArgument("vector signal value count does not match grid");
}

VectorSignal VectorSignal::from_components(std::span<const ScalarSignal> parts) {
    if (parts.empty()) throw InvalidArgument("no components");
    const Grid& g = parts[0].grid();
    const int n = int(parts.size());
    std::vector<double> v(g.cell_count() * n);
    for (int k = 0; k < n; ++k) {
        if (!(parts[k].grid() == g)) throw InvalidArgument("component grids differ");
        for (std::size_t c = 0; c < g.cell_count(); ++c) v[c * n + k] = parts[k][c];
    }
    return {g, n, std::move(v)};
}

ScalarSignal VectorSignal::component(int k) const {
    if (k < 0 || k >= n_) throw InvalidArgument("component index out of range");
    std::vector<double> v(grid_.cell_count());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = values_[c * n_ + k];
    return {grid_, std::move(v)};
}

double VectorSignal::l1_norm() const {
    double s = 0;
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
        double m = 0;
        for (double x : at(c)) m += x * x;
        s += std::sqrt(m);
    }
    return s * grid_.cell_volume();
}

VectorSignal VectorSignal::restricted(const CellBox& keep) const {
    VectorSignal out(grid_, n_);
    grid_.for_each_cell(keep, [&](std::size_t c) {
        for (int k = 0; k < n_; ++k) out.values_[c * n_ + k] = values_[c * n_ + k];
    });
    return out;
}

void for_each_overlap(const Grid& g, const Cube& q, const std::function<void(std::size_t, double)>& fn) {
    if (q.dim != g.dim()) throw InvalidArgument("cube dimension does not match grid");
    const double h = g.cell_side();
    const Cube& dom = g.domain();
    std::array<std::int64_t, kMaxDim> first{0, 0}, last{0, 1};
    for (int a = 0; a < g.dim(); ++a) {
        const double lo = std::max(q.lower(a), dom.lower(a));
        const double hi = std::min(q.upper(a), dom.upper(a));
        if (!(hi > lo)) return;
        first[a] = std::clamp<std::int64_t>(std::int64_t(std::floor((lo - dom.lower(a)) / h)), 0, g.resolution() - 1);
        last[a] = std::clamp<std::int64_t>(std::int64_t(std::ceil((hi - dom.lower(a)) / h)), 1, g.resolution());
    }
    // Overlap of q with cell i along one axis.
    auto overlap = [&](int a, std::int64_t i) {
        const double clo = dom.lower(a) + double(i) * h;
        return std::max(0.0, std::min(clo + h, q.upper(a)) - std::max(clo, q.lower(a)));
    };
    for (std::int64_t i = first[0]; i < last[0]; ++i) {
        const double w0 = overlap(0, i);
        if (g.dim() == 1) {
            if (w0 > 0) fn(std::size_t(i), w0);
            continue;
        }
        for (std::int64_t j = first[1]; j < last[1]; ++j) {
            const double w = w0 * overlap(1, j);
            if (w > 0) fn(g.index({i, j}), w);
        }
    }
}

double mean_value(const ScalarSignal& f, const Cube& q) {
    double mass = 0, measure = 0;
    for_each_overlap(f.grid(), q, [&](std::size_t c, double w) {
        mass += w * f[c];
        measure += w;
    });
    if (!(measure > 0)) throw DomainError("cube does not intersect the signal domain");
    return mass / measure;
}

BoxSums::BoxSums(const Grid& grid, std::span<const double> per_cell) : dim_(grid.dim()), n_(grid.resolution()) {
    if (per_cell.size() != grid.cell_count()) throw InvalidArgument("box-sum input size mismatch");
    if (dim_ == 1) {
        table_.assign(n_ + 1, 0.0);
        for (std::int64_t i = 0; i < n_; ++i) table_[i + 1] = table_[i] + per_cell[i];
        return;
    }
    table_.assign((n_ + 1) * (n_ + 1), 0.0);
    for (std::int64_t i = 0; i < n_; ++i) {
        double row = 0;
        for (std::int64_t j = 0; j < n_; ++j) {
            row += per_cell[i * n_ + j];
            table_[(i + 1) * (n_ + 1) + j + 1] = table_[i * (n_ + 1) + j + 1] + row;
        }
    }
}

double BoxSums::sum(const CellBox& b) const {
    auto cl = [&](std::int64_t v) { return std::clamp<std::int64_t>(v, 0, n_); };
    const std::int64_t i0 = cl(b.lo[0]), i1 = cl(b.hi[0]);
    if (i1 <= i0) return 0;
    if (dim_ == 1) return table_[i1] - table_[i0];
    const std::int64_t j0 = cl(b.lo[1]), j1 = cl(b.hi[1]);
    if (j1 <= j0) return 0;
    const std::int64_t w = n_ + 1;
    return table_[i1 * w + j1] - table_[i0 * w + j1] - table_[i1 * w + j0] + table_[i0 * w + j0];
}

}  // namespace czvar
