#include "czvar/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "czvar/cz_decomposition.hpp"
#include "czvar/signal_io.hpp"

namespace czvar {

namespace {

int pow3(int l) {
    int v = 1;
    for (int i = 0; i < l; ++i) v *= 3;
    return v;
}

bool supported_in(const Grid& g, std::span<const double> values, int n, const CellBox& box) {
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        if (box.contains(g.coords(c), g.dim())) continue;
        for (int k = 0; k < n; ++k)
            if (values[c * n + k] != 0) return false;
    }
    return true;
}

double average_over(const Grid& g, const ScalarSignal& f, const CellBox& box) {
    double s = 0;
    g.for_each_cell(box, [&](std::size_t c) { s += std::abs(f[c]); });
    const std::int64_t side = box.hi[0] - box.lo[0];
    double cells = double(side);
    if (g.dim() == 2) cells *= double(side);
    return s / cells;  // cell volumes cancel
}

std::optional<DyadicIndex> index_of(const Grid& g, const Cube& q) {
    return g.dyadic_index(q);
}

}  // namespace

double SparseConfig::alpha(int d) const { return std::ldexp(1.0, d + 2) * pow3(d) / epsilon; }

void SparseConfig::validate() const {
    if (!(epsilon > 0 && epsilon < 1)) throw InvalidArgument("sparse epsilon must lie in (0, 1)");
    if (!(delta > 0 && delta < 1)) throw InvalidArgument("sparse delta must lie in (0, 1)");
    if (!(weak_norm_cal > 0)) throw InvalidArgument("weak-norm calibration must be positive");
    if (max_depth < 0 || annuli < 0) throw InvalidArgument("depth and annuli must be non-negative");
}

CellBox dilate_pow3(const CellBox& b, int dim, int l) {
    CellBox out = b;
    for (int i = 0; i < l; ++i) out = Grid::dilate3(out, dim);
    return out;
}

ScalarStep sparse_step_scalar(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q,
                              double epsilon, const SparseConfig& cfg) {
    const Grid& g = engine.grid();
    const int d = g.dim();
    ScalarStep out;
    out.epsilon = epsilon;
    out.in_e.assign(g.cell_count(), 0);
    const CellBox box = g.box(q);
    out.average_3q = average_over(g, f, Grid::dilate3(box, d));
    if (out.average_3q == 0) return out;

    const double alpha = std::ldexp(1.0, d + 2) * pow3(d) / epsilon;
    const double t1 = alpha * out.average_3q;
    const double t2 = alpha * cfg.weak_norm_cal * out.average_3q;
    const std::vector<double> m = engine.local_grand_maximal_field(f, q);
    g.for_each_cell(box, [&](std::size_t c) {
        if (std::abs(f[c]) > t1 || m[c] > t2) {
            out.in_e[c] = 1;
            ++out.e_cells;
        }
    });
    out.cubes = cz_stopping_cubes(g, out.in_e, 1, SparseConfig::cz_height_den(d), q);
    // |E| <= ε|Q| / 2^{d+1}, compared in cell counts.
    out.calibration_ok = double(out.e_cells) * double(SparseConfig::cz_height_den(d)) <= epsilon * double(g.cells_in(box));
    return out;
}

ScalarStep sparse_step_scalar(const Kernel& k, const ScalarSignal& f, const VariationParams& vp, const Cube& q0,
                              const SparseConfig& cfg) {
    cfg.validate();
    const Grid& g = f.grid();
    const auto idx = index_of(g, q0);
    if (!idx) throw InvalidArgument("Q0 must be a dyadic cube of the signal's grid");
    if (!supported_in(g, f.values(), 1, g.box(*idx))) throw InvalidArgument("signal is not supported in Q0");
    return sparse_step_scalar(VariationEngine(g, k, vp), f, *idx, cfg.epsilon, cfg);
}

double pointwise_residual_scalar(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q0,
                                 const std::vector<DyadicIndex>& family) {
    const Grid& g = engine.grid();
    const int d = g.dim();
    const CellBox box = g.box(q0);
    const double avg = average_over(g, f, Grid::dilate3(box, d));
    if (avg == 0) return 0;
    const CellBox all = g.clip({{0, 0}, {g.resolution(), g.resolution()}});
    std::vector<double> resid = engine.variation_field(f, all, box);
    for (const auto& p : family) {
        const CellBox pb = g.box(p);
        const std::vector<double> part = engine.variation_field(f, Grid::dilate3(pb, d), pb);
        g.for_each_cell(pb, [&](std::size_t c) { resid[c] -= part[c]; });
    }
    double worst = 0;
    g.for_each_cell(box, [&](std::size_t c) { worst = std::max(worst, std::abs(resid[c])); });
    return worst / avg;
}

std::vector<DyadicIndex> maximal_cubes(std::vector<DyadicIndex> cubes) {
    std::sort(cubes.begin(), cubes.end());
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    std::set<DyadicIndex> kept;
    std::vector<DyadicIndex> out;
    for (const auto& q : cubes) {
        bool covered = false;
        for (DyadicIndex a = q; a.level > 0 && !covered;) {
            a = a.parent();
            covered = kept.count(a) > 0;
        }
        if (!covered) {
            kept.insert(q);
            out.push_back(q);
        }
    }
    return out;
}

VectorStep sparse_step_vector(const VariationEngine& engine, const VectorSignal& f, const DyadicIndex& q,
                              double delta, const SparseConfig& cfg) {
    const Grid& g = engine.grid();
    const int n = f.components();
    VectorStep out;
    const Zonotope body = convex_body_average(f, g.cube_of_box(Grid::dilate3(g.box(q), g.dim())));
    if (body.is_zero()) {
        out.axes = Mat(n, 0);
        return out;
    }
    const Ellipsoid e = john_ellipsoid(body);
    const SymEigen eig = jacobi_eigen(e.shape);
    const double top = eig.values.maxCoeff();
    std::vector<int> keep;
    for (int i = n - 1; i >= 0; --i)
        if (eig.values(i) > 1e-12 * top) keep.push_back(i);
    out.axes = Mat(n, int(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a) out.axes.col(int(a)) = eig.vectors.col(keep[a]);

    std::vector<DyadicIndex> all;
    for (int a = 0; a < out.axes.cols(); ++a) {
        std::vector<double> comp(g.cell_count());
        for (std::size_t c = 0; c < comp.size(); ++c) {
            const auto v = f.at(c);
            double s = 0;
            for (int k = 0; k < n; ++k) s += out.axes(k, a) * v[k];
            comp[c] = s;
        }
        ScalarStep step = sparse_step_scalar(engine, ScalarSignal(g, std::move(comp)), q, delta / n, cfg);
        out.calibration_ok = out.calibration_ok && step.calibration_ok;
        all.insert(all.end(), step.cubes.begin(), step.cubes.end());
        out.components.push_back(std::move(step));
    }
    out.cubes = maximal_cubes(std::move(all));
    return out;
}

SparseFamily::SparseFamily(Grid grid, DyadicIndex q0, int annuli)
    : grid_(std::move(grid)), q0_(q0), annuli_(annuli), gens_{{q0}} {}

double SparseFamily::claimed_eta() const { return 1.0 / (2.0 * pow3(grid_.dim())); }

double SparseFamily::generation_measure(std::size_t l) const {
    double s = 0;
    if (l < gens_.size())
        for (const auto& q : gens_[l]) s += grid_.cube(q).volume();
    return s;
}

std::vector<DyadicIndex> SparseFamily::dyadic_members() const {
    std::vector<DyadicIndex> out;
    for (const auto& gen : gens_) out.insert(out.end(), gen.begin(), gen.end());
    return out;
}

std::vector<Cube> SparseFamily::cubes() const {
    std::vector<Cube> out;
    const int d = grid_.dim();
    for (const auto& q : dyadic_members()) out.push_back(grid_.cube_of_box(Grid::dilate3(grid_.box(q), d)));
    for (int l = 2; l <= annuli_; ++l) out.push_back(grid_.cube_of_box(dilate_pow3(grid_.box(q0_), d, l)));
    return out;
}

void SparseFamily::write(std::ostream& out) const {
    const int d = grid_.dim();
    auto pos = [&](const DyadicIndex& q) {
        std::string s = std::to_string(q.level) + ' ' + std::to_string(q.pos[0]);
        if (d == 2) s += ' ' + std::to_string(q.pos[1]);
        return s;
    };
    out << "# czvar-sparse-family v1\n";
    out << "dim " << d << '\n';
    out << "q0 " << pos(q0_) << '\n';
    out << "annuli " << annuli_ << '\n';
    out << "truncated " << (truncated ? 1 : 0) << ' ' << io::format_double(tail_measure) << '\n';
    out << "calibration " << (calibration_ok ? 1 : 0) << '\n';
    for (std::size_t l = 0; l < gens_.size(); ++l)
        for (const auto& q : gens_[l]) out << "dyadic " << l << ' ' << pos(q) << '\n';
    for (int l = 2; l <= annuli_; ++l) out << "annulus " << l << '\n';
}

SparseFamily SparseFamily::read(std::istream& in, const Grid& grid) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# czvar-sparse-family v1", 0) != 0)
        throw FormatError("not a czvar sparse family");
    const int d = grid.dim();
    SparseFamily fam;
    fam.grid_ = grid;
    fam.gens_.clear();
    auto read_pos = [&](std::istringstream& s) {
        DyadicIndex q;
        s >> q.level >> q.pos[0];
        if (d == 2) s >> q.pos[1];
        return q;
    };
    int annuli_lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        std::string key;
        s >> key;
        if (key == "dim") {
            int dd = 0;
            s >> dd;
            if (dd != d) throw FormatError("sparse family dimension does not match grid");
        } else if (key == "q0") {
            fam.q0_ = read_pos(s);
        } else if (key == "annuli") {
            s >> fam.annuli_;
        } else if (key == "truncated") {
            int flag = 0;
            std::string tail;
            s >> flag >> tail;
            fam.truncated = flag != 0;
            fam.tail_measure = io::parse_double(tail);
        } else if (key == "calibration") {
            int flag = 1;
            s >> flag;
            fam.calibration_ok = flag != 0;
        } else if (key == "dyadic") {
            std::size_t gen = 0;
            s >> gen;
            const DyadicIndex q = read_pos(s);
            if (s.fail()) throw FormatError("bad sparse family line: " + line);
            if (fam.gens_.size() <= gen) fam.gens_.resize(gen + 1);
            fam.gens_[gen].push_back(q);
        } else if (key == "annulus") {
            ++annuli_lines;
        } else {
            throw FormatError("unknown sparse family record: " + key);
        }
        if (s.fail()) throw FormatError("bad sparse family line: " + line);
    }
    if (annuli_lines != std::max(0, fam.annuli_ - 1)) throw FormatError("annulus records do not match header");
    return fam;
}

bool SparseFamily::operator==(const SparseFamily& o) const {
    return grid_ == o.grid_ && q0_ == o.q0_ && annuli_ == o.annuli_ && gens_ == o.gens_ && truncated == o.truncated &&
           tail_measure == o.tail_measure && calibration_ok == o.calibration_ok;
}

SparseFamily build_sparse_family(const VariationEngine& engine, const VectorSignal& f, const DyadicIndex& q0,
                                 const SparseConfig& cfg) {
    cfg.validate();
    const Grid& g = engine.grid();
    const int d = g.dim();
    if (!supported_in(g, f.values(), f.components(), g.box(q0))) throw InvalidArgument("signal is not supported in Q0");
    SparseFamily fam(g, q0, cfg.annuli);
    auto& gens = fam.generations();
    for (int depth = 0; depth <= cfg.max_depth; ++depth) {
        const std::vector<DyadicIndex>& cur = gens.back();
        std::vector<VectorStep> steps(cur.size());
        parallel_for(cur.size(), [&](std::size_t i) {
            const VectorSignal local = f.restricted(Grid::dilate3(g.box(cur[i]), d));
            steps[i] = sparse_step_vector(engine, local, cur[i], cfg.delta, cfg);
        });
        std::vector<DyadicIndex> next;
        for (const auto& s : steps) {
            fam.calibration_ok = fam.calibration_ok && s.calibration_ok;
            next.insert(next.end(), s.cubes.begin(), s.cubes.end());
        }
        std::sort(next.begin(), next.end());
        if (next.empty()) break;
        if (depth == cfg.max_depth) {
            fam.truncated = true;
            for (const auto& q : next) fam.tail_measure += g.cube(q).volume();
            break;
        }
        gens.push_back(std::move(next));
    }
    return fam;
}

SparseFamily build_sparse_family(const Kernel& k, const VectorSignal& f, const VariationParams& vp, const Cube& q0,
                                 const SparseConfig& cfg) {
    const auto idx = index_of(f.grid(), q0);
    if (!idx) throw InvalidArgument("Q0 must be a dyadic cube of the signal's grid");
    return build_sparse_family(VariationEngine(f.grid(), k, vp), f, *idx, cfg);
}

double carleson_check(const SparseFamily& fam) {
    const auto members = fam.dyadic_members();
    const Grid& g = fam.grid();
    double worst = 0;
    for (const auto& q : members) {
        double s = 0;
        for (const auto& p : members)
            if (q.contains(p)) s += g.cube(p).volume();
        worst = std::max(worst, s / g.cube(q).volume());
    }
    return worst;
}

EtaReport eta_sparse_check(const SparseFamily& fam, double eta, SparseView view) {
    const Grid& g = fam.grid();
    const int d = g.dim();
    const auto& gens = fam.generations();
    EtaReport rep;
    rep.disjoint = true;
    rep.worst_ratio = 1;
    const CellBox q0box = g.box(fam.q0());
    rep.canvas = view == SparseView::dyadic ? q0box : dilate_pow3(q0box, d, std::max(1, fam.annuli()));
    const std::int64_t w0 = rep.canvas.hi[0] - rep.canvas.lo[0];
    const std::int64_t w1 = d == 2 ? rep.canvas.hi[1] - rep.canvas.lo[1] : 1;
    rep.owner.assign(std::size_t(w0 * w1), -1);
    auto slot = [&](std::int64_t i, std::int64_t j) {
        return std::size_t((i - rep.canvas.lo[0]) * w1 + (d == 2 ? j - rep.canvas.lo[1] : 0));
    };
    auto paint = [&](std::int64_t i, std::int64_t j, std::int32_t id) {
        auto& o = rep.owner[slot(i, j)];
        if (o >= 0) rep.disjoint = false;
        o = id;
    };
    auto cells_of = [&](const CellBox& b) {
        double c = double(b.hi[0] - b.lo[0]);
        if (d == 2) c *= double(b.hi[1] - b.lo[1]);
        return c;
    };

    std::int32_t id = 0;
    for (std::size_t l = 0; l < gens.size(); ++l) {
        for (const auto& q : gens[l]) {
            const CellBox box = g.box(q);
            std::vector<CellBox> holes;
            if (l + 1 < gens.size())
                for (const auto& p : gens[l + 1])
                    if (q.contains(p)) holes.push_back(g.box(p));
            double count = 0;
            const std::int64_t hi1 = d == 2 ? box.hi[1] : 1, lo1 = d == 2 ? box.lo[1] : 0;
            for (std::int64_t i = box.lo[0]; i < box.hi[0]; ++i)
                for (std::int64_t j = lo1; j < hi1; ++j) {
                    const CellCoord c{i, j};
                    if (std::any_of(holes.begin(), holes.end(), [&](const CellBox& h) { return h.contains(c, d); }))
                        continue;
                    paint(i, j, id);
                    ++count;
                }
            const CellBox owner_box = view == SparseView::dyadic ? box : Grid::dilate3(box, d);
            rep.worst_ratio = std::min(rep.worst_ratio, count / cells_of(owner_box));
            ++id;
        }
    }
    if (view == SparseView::dilated) {
        for (int l = 2; l <= fam.annuli(); ++l) {
            const CellBox outer = dilate_pow3(q0box, d, l), inner = dilate_pow3(q0box, d, l - 1);
            double count = 0;
            const std::int64_t hi1 = d == 2 ? outer.hi[1] : 1, lo1 = d == 2 ? outer.lo[1] : 0;
            for (std::int64_t i = outer.lo[0]; i < outer.hi[0]; ++i)
                for (std::int64_t j = lo1; j < hi1; ++j) {
                    if (inner.contains({i, j}, d)) continue;
                    paint(i, j, id);
                    ++count;
                }
            rep.worst_ratio = std::min(rep.worst_ratio, count / cells_of(outer));
            ++id;
        }
    }
    rep.ok = rep.disjoint && rep.worst_ratio >= eta;
    return rep;
}

Zonotope sparse_operator_eval(const SparseFamily& fam, const VectorSignal& f, const Point& x) {
    const auto cubes = fam.cubes();
    return sparse_operator_eval(std::span<const Cube>(cubes), f, x);
}

DominationReport domination_constant(const VariationEngine& engine, const VectorSignal& f, const SparseFamily& fam) {
    const Grid& g = engine.grid();
    const int n = f.components();
    const std::vector<Cube> cubes = fam.cubes();
    std::vector<Zonotope> bodies(cubes.size(), Zonotope(n));
    parallel_for(cubes.size(), [&](std::size_t i) { bodies[i] = convex_body_average(f, cubes[i]); });

    std::vector<std::vector<double>> v(n);
    for (int k = 0; k < n; ++k) v[k] = engine.variation_field(f.component(k));

    // Cells with the same set of containing cubes share 𝕃(x).
    std::map<std::vector<bool>, std::size_t> key_of;
    std::vector<std::size_t> cell_key(g.cell_count());
    std::vector<std::vector<bool>> keys;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Point x = g.cell_center(c);
        std::vector<bool> k(cubes.size());
        for (std::size_t i = 0; i < cubes.size(); ++i) k[i] = cubes[i].contains(x);
        auto [it, inserted] = key_of.emplace(k, keys.size());
        if (inserted) keys.push_back(k);
        cell_key[c] = it->second;
    }
    std::vector<Zonotope> sums(keys.size(), Zonotope(n));
    parallel_for(keys.size(), [&](std::size_t s) {
        Zonotope z(n);
        for (std::size_t i = 0; i < cubes.size(); ++i)
            if (keys[s][i]) z = minkowski_sum(z, bodies[i]);
        sums[s] = z.merged();
    });

    std::vector<double> scale(g.cell_count(), 0.0);
    parallel_for(g.cell_count(), [&](std::size_t c) {
        Vec p(n);
        for (int k = 0; k < n; ++k) p(k) = v[k][c];
        scale[c] = membership_scale(p, sums[cell_key[c]]);
    });
    DominationReport rep;
    for (const auto& z : sums) rep.merge_error = std::max(rep.merge_error, z.merge_error());
    for (std::size_t c = 0; c < scale.size(); ++c) {
        if (std::isinf(scale[c])) ++rep.infinite_cells;
        if (scale[c] > rep.constant) {
            rep.constant = scale[c];
            rep.argmax_cell = c;
        }
    }
    return rep;
}

double calibrate_weak_norm(const VariationEngine& engine, const std::vector<ScalarSignal>& pilot,
                           const DyadicIndex& q0) {
    std::vector<double> w(pilot.size(), 0.0);
    parallel_for(pilot.size(), [&](std::size_t i) {
        const double l1 = pilot[i].l1_norm();
        if (l1 == 0) return;
        const std::vector<double> m = engine.local_grand_maximal_field(pilot[i], q0);
        w[i] = weak_norm_estimate(m, engine.grid().cell_volume(), l1);
    });
    return pilot.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
}

}  // namespace czvar
