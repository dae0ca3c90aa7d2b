#pragma once

// Cube geometry, dyadic trees, and piecewise-constant signals on uniform grids.
//
// A Grid is a root cube split into resolution^d congruent cells, resolution a
// power of two, so every dyadic descendant of the root down to the cell level
// is a union of whole cells. Cells are addressed by integer coordinates
// (i0, i1) and stored row-major: linear index i0 * resolution + i1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "czvar/common.hpp"

namespace czvar {

inline constexpr int kMaxDim = 2;
using Point = std::array<double, kMaxDim>;
using CellCoord = std::array<std::int64_t, kMaxDim>;

/// Axis-parallel cube. `level` is the dyadic depth relative to whatever root it
/// was derived from (0 for a root).
struct Cube {
    int dim = 1;
    Point center{};
    double side = 1.0;
    int level = 0;

    double volume() const;
    double lower(int axis) const { return center[axis] - side / 2; }
    double upper(int axis) const { return center[axis] + side / 2; }
    /// Half-open membership: lower <= x < upper on every axis.
    bool contains(const Point& x) const;
    bool contains(const Cube& other) const;

    bool operator==(const Cube&) const = default;
};

Cube make_cube(int dim, Point center, double side, int level = 0);
/// Cube [lo, lo + side)^dim.
Cube cube_from_corner(int dim, Point lo, double side, int level = 0);

/// The 2^d congruent halves-per-axis of q, ordered row-major by position.
std::vector<Cube> dyadic_children(const Cube& q);

/// Concentric cube with side t * q.side. Throws InvalidArgument for t <= 0.
Cube dilate(const Cube& q, double t);

/// True iff every cube of `fine` lies inside some cube of `coarse`.
bool covers(std::span<const Cube> coarse, std::span<const Cube> fine);

/// Dyadic cube addressed by level and integer position inside a root.
struct DyadicIndex {
    int level = 0;
    CellCoord pos{};

    DyadicIndex parent() const;
    /// True iff this cube contains (or equals) `other`.
    bool contains(const DyadicIndex& other) const;
    std::vector<DyadicIndex> children(int dim) const;

    auto operator<=>(const DyadicIndex&) const = default;
};

bool covers(std::span<const DyadicIndex> coarse, std::span<const DyadicIndex> fine);

/// Half-open box of cell coordinates, [lo, hi) per axis. May extend past the
/// grid; callers clip when they need in-grid cells.
struct CellBox {
    CellCoord lo{};
    CellCoord hi{};

    bool contains(const CellCoord& c, int dim) const;
    bool empty(int dim) const;
    bool operator==(const CellBox&) const = default;
};

/// Root cube with max_level dyadic generations below it.
struct DyadicTree {
    Cube root;
    int max_level = 0;

    std::vector<Cube> level(int k) const;
    std::size_t count_at_level(int k) const;
};

class Grid {
public:
    Grid() = default;
    /// resolution = cells per axis; must be a power of two >= 1.
    Grid(int dim, int resolution, Cube domain);

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    int max_level() const { return max_level_; }
    const Cube& domain() const { return domain_; }
    std::size_t cell_count() const { return cell_count_; }
    double cell_side() const { return domain_.side / resolution_; }
    double cell_volume() const;
    double cell_diameter() const;

    CellCoord coords(std::size_t cell) const;
    std::size_t index(const CellCoord& c) const;
    bool in_grid(const CellCoord& c) const;
    Point cell_center(std::size_t cell) const;
    Point cell_center(const CellCoord& c) const;
    Cube cell_cube(std::size_t cell) const;
    /// Cell containing x, if x lies in the domain.
    std::optional<std::size_t> locate(const Point& x) const;

    DyadicTree tree() const { return {domain_, max_level_}; }
    CellBox box(const DyadicIndex& q) const;
    Cube cube(const DyadicIndex& q) const;
    /// Dyadic ancestor of `cell` at `level`.
    DyadicIndex dyadic_of_cell(std::size_t cell, int level) const;
    /// Index of a dyadic cube given geometrically; nullopt if q is not one.
    std::optional<DyadicIndex> dyadic_index(const Cube& q) const;

    /// Box of the concentric 3-fold dilate.
    static CellBox dilate3(const CellBox& b, int dim);
    CellBox clip(const CellBox& b) const;
    std::size_t cells_in(const CellBox& b) const;  // after clipping
    /// Physical cube of a box with equal side lengths.
    Cube cube_of_box(const CellBox& b) const;
    /// Visits every in-grid cell of b (clipped) in row-major order.
    void for_each_cell(const CellBox& b, const std::function<void(std::size_t)>& fn) const;

    /// Grid with twice the resolution over the same domain.
    Grid refined() const { return Grid(dim_, resolution_ * 2, domain_); }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && resolution_ == o.resolution_ && domain_ == o.domain_;
    }

private:
    int dim_ = 1;
    int resolution_ = 1;
    int max_level_ = 0;
    std::size_t cell_count_ = 1;
    Cube domain_{};
};

/// Real value per cell; zero outside the domain.
class ScalarSignal {
public:
    ScalarSignal() = default;
    explicit ScalarSignal(Grid grid);  // all zeros
    ScalarSignal(Grid grid, std::vector<double> values);
    static ScalarSignal sample(const Grid& grid, const std::function<double(const Point&)>& fn);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t cell) const { return values_[cell]; }
    double l1_norm() const;
    /// Copy with every cell outside `keep` zeroed.
    ScalarSignal restricted(const CellBox& keep) const;
    bool operator==(const ScalarSignal&) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// n-vector per cell, stored cell-major (the n components of a cell adjacent).
class VectorSignal {
public:
    VectorSignal() = default;
    VectorSignal(Grid grid, int components);  // all zeros
    VectorSignal(Grid grid, int components, std::vector<double> values);
    static VectorSignal from_components(std::span<const ScalarSignal> parts);

    const Grid& grid() const { return grid_; }
    int components() const { return n_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> at(std::size_t cell) const {
        return {values_.data() + cell * n_, static_cast<std::size_t>(n_)};
    }
    ScalarSignal component(int k) const;
    double l1_norm() const;  // of the Euclidean magnitude
    VectorSignal restricted(const CellBox& keep) const;
    bool operator==(const VectorSignal&) const = default;

private:
    Grid grid_;
    int n_ = 1;
    std::vector<double> values_;
};

/// Calls fn(cell, |cell ∩ q|) for every cell meeting q with positive volume.
void for_each_overlap(const Grid& g, const Cube& q, const std::function<void(std::size_t, double)>& fn);

/// Mean of f over q ∩ domain, with each cell weighted by its overlap volume.
/// Throws DomainError when q misses the domain.
double mean_value(const ScalarSignal& f, const Cube& q);

/// Summed-area table for O(1) box sums of a per-cell quantity.
class BoxSums {
public:
    BoxSums(const Grid& grid, std::span<const double> per_cell);
    /// Sum over the clipped box.
    double sum(const CellBox& b) const;

private:
    int dim_;
    std::int64_t n_;
    std::vector<double> table_;
};

}  // namespace czvar
