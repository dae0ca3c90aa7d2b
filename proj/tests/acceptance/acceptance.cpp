// Acceptance suite: one PASS/FAIL line per criterion.
//
//   czvar_acceptance            run every criterion
//   czvar_acceptance AC4 AC7    run the listed ones
//
// Exit status is the number of failed criteria (capped at 1 for ctest).

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "czvar/convex_body.hpp"
#include "czvar/cz_decomposition.hpp"
#include "czvar/experiments.hpp"
#include "czvar/random.hpp"
#include "czvar/signal_io.hpp"
#include "oracles.hpp"

using namespace czvar;

namespace {

// Frozen baselines, measured once on the default configurations below. The
// regression bound for each is baseline × kTolerance.
constexpr double kTolerance = 1.1;
constexpr double kResidualBaseline = 20.3718;    // sup pointwise residual, d = 1, N = 256, m = 8
constexpr double kDominationBaseline = 15.2789;  // sup domination over the instances where it is finite
constexpr double kWeakBaseline = 0.649656;       // sup weak-type ratio, corpus and spikes
const std::map<double, double> kWeightedBaseline{{2.0, 0.893269}, {3.0, 0.807911}};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

ExperimentConfig base_config() {
    ExperimentConfig cfg;  // d = 1, N = 256, Hilbert, ρ = 3, ladder 1.5·0.6^k, k < 8
    cfg.corpus.components = 2;
    cfg.corpus.count = 20;
    return cfg;
}

ExperimentConfig d2_config() {
    ExperimentConfig cfg;
    cfg.dim = 2;
    cfg.resolution = 64;
    cfg.kernel = "riesz";
    cfg.ladder_size = 5;  // finest radius stays above two cell diameters
    cfg.corpus.count = 10;
    return cfg;
}

// ------------------------------------------------------------------------ AC1

void ac1(Outcome& out) {
    ExperimentConfig cfg = base_config();
    cfg.resolution = 1 << 10;
    cfg.corpus.components = 1;
    cfg.corpus.count = 200;
    const Grid g = cfg.grid();
    const int d = g.dim();
    const double vol = g.cell_volume();
    const auto corpus = generate_corpus(g, cfg.q0(), cfg.corpus, cfg.seed);
    const auto t0 = std::chrono::steady_clock::now();

    // Dyadic means of |f| by prefix sums, for the stopping-cube oracle.
    std::size_t decompositions = 0, cubes = 0;
    double worst_mean_zero = 0;
    for (const auto& item : corpus) {
        const ScalarSignal f = item.signal.component(0);
        std::vector<double> prefix(g.cell_count() + 1, 0.0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) prefix[c + 1] = prefix[c] + std::abs(f[c]);
        const double l1 = prefix.back() * vol;
        const double root_mean = l1 / g.domain().volume();
        for (double mult : {1.5, 3.0, 6.0, 12.0, 24.0}) {
            const double lambda = mult * root_mean;
            const CZDecomposition dec = cz_decompose(f, lambda);
            ++decompositions;
            cubes += dec.bad.size();

            // Expected cubes: maximal dyadic cubes below the root with mean |f| > λ.
            std::set<DyadicIndex> expect;
            std::function<void(const DyadicIndex&)> walk = [&](const DyadicIndex& q) {
                const CellBox b = g.box(q);
                const double mean = (prefix[b.hi[0]] - prefix[b.lo[0]]) / double(b.hi[0] - b.lo[0]);
                if (q.level > 0 && mean > lambda) {
                    expect.insert(q);
                    return;
                }
                if (q.level < g.max_level())
                    for (const auto& k : q.children(d)) walk(k);
            };
            walk(DyadicIndex{});
            std::set<DyadicIndex> got;
            for (const auto& b : dec.bad) got.insert(b.index);
            out.require(got == expect, item.id + ": stopping cubes differ from the maximal cubes above λ");

            std::vector<double> sum(dec.good.values().begin(), dec.good.values().end());
            double good_l1 = 0, measure = 0;
            for (double v : dec.good.values()) {
                good_l1 += std::abs(v) * vol;
                out.require(std::abs(v) <= std::ldexp(lambda, d), item.id + ": |g| > 2^d λ");
            }
            for (const auto& bad : dec.bad) {
                const CellBox qb = g.box(bad.index);
                double b_l1 = 0, integral = 0;
                for (std::size_t c = 0; c < g.cell_count(); ++c) {
                    const double v = bad.b[c];
                    if (v == 0) continue;
                    out.require(qb.contains(g.coords(c), d), item.id + ": b_j outside Q_j");
                    sum[c] += v;
                    b_l1 += std::abs(v) * vol;
                    integral += v * vol;
                }
                const double qvol = g.cube(bad.index).volume();
                measure += qvol;
                out.require(b_l1 <= std::ldexp(lambda, d + 1) * qvol, item.id + ": ‖b_j‖₁ > 2^{d+1} λ |Q_j|");
                worst_mean_zero = std::max(worst_mean_zero, std::abs(integral) / l1);
            }
            out.require(good_l1 <= l1, item.id + ": ‖g‖₁ > ‖f‖₁");
            out.require(measure <= l1 / lambda, item.id + ": Σ|Q_j| > ‖f‖₁/λ");
            for (std::size_t c = 0; c < g.cell_count(); ++c)
                if (sum[c] != f[c]) {
                    out.require(false, item.id + ": reconstruction not bit-exact");
                    break;
                }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(worst_mean_zero <= 1e-10, "∫b_j not zero to 1e-10 ‖f‖₁");
    out.require(secs < 10, "runtime above 10 s");
    out.detail << decompositions << " decompositions, " << cubes << " cubes, max |∫b_j|/‖f‖₁ = " << worst_mean_zero
               << ", " << secs << " s";
}

// ------------------------------------------------------------------------ AC2

void ac2(Outcome& out) {
    Rng rng(2);
    const auto t0 = std::chrono::steady_clock::now();
    double dp = 0, fast = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> a(1 + rng.below(14));
        for (auto& x : a) x = rng.uniform(-1, 1);
        const double rho = rng.uniform(2.01, 6);
        dp = std::max(dp, std::abs(rho_variation(a, rho) - oracle::enumerate_variation(a, rho)));
    }
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> a(1 + rng.below(40));
        for (auto& x : a) x = rng.below(4) == 0 ? std::round(rng.uniform(-3, 3)) : rng.uniform(-1, 1);
        for (double rho : {2.5, 3.0, 4.0}) fast = std::max(fast, std::abs(rho_variation_extrema(a, rho) - rho_variation(a, rho)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(dp <= 1e-12, "DP differs from enumeration");
    out.require(fast <= 1e-12, "extrema path differs from DP");
    out.require(secs < 30, "runtime above 30 s");
    out.detail << "DP vs enumeration " << dp << ", extrema vs DP " << fast << ", " << secs << " s";
}

// ------------------------------------------------------------------------ AC3

void ac3(Outcome& out) {
    const Grid g(1, 1 << 12, cube_from_corner(1, {-1.5, 0}, 4.0));
    const ScalarSignal chi = ScalarSignal::sample(g, [](const Point& x) { return x[0] >= -1 && x[0] < 1 ? 1.0 : 0.0; });
    const Kernel h = Kernel::hilbert();
    const double cell = g.cell_side();
    Rng rng(3);
    double worst = 0;
    int pairs = 0;
    while (pairs < 20) {
        const double x = g.cell_center(rng.below(g.cell_count()))[0];
        // Radii halfway between cell-center distances keep the cut off cell centers.
        const double eps = (std::floor(rng.uniform(0.01, 0.5) / cell) + 0.5) * cell;
        // Singular band: x within ε plus a few cells of a jump of χ.
        if (std::abs(std::abs(x) - 1) < eps + 4 * cell) continue;
        const double exact = oracle::hilbert_indicator(x, eps);
        if (std::abs(exact) < 1e-2) continue;
        worst = std::max(worst, std::abs(truncated_apply(h, chi, eps, {x, 0}) - exact) / std::abs(exact));
        ++pairs;
    }
    out.require(worst <= 1e-3, "relative error above 1e-3");
    out.detail << pairs << " pairs, max relative error " << worst;
}

// ------------------------------------------------------------------------ AC4

void check_step(Outcome& out, const Grid& g, const ScalarStep& step, const DyadicIndex& q, const std::string& id) {
    const int d = g.dim();
    const CellBox qb = g.box(q);
    std::vector<int> owner(g.cell_count(), 0);
    for (const auto& p : step.cubes) {
        out.require(q.contains(p), id + ": selected cube outside Q");
        std::uint64_t in = 0, cells = 0;
        for (auto c : oracle::cells_of(g, g.box(p))) {
            ++owner[c];
            ++cells;
            in += step.in_e[c];
        }
        out.require((in << (d + 1)) >= cells, id + ": |P∩E|/|P| < 2^{-(d+1)}");
        out.require(2 * in <= cells, id + ": |P∩E|/|P| > 1/2");
    }
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        out.require(owner[c] <= 1, id + ": selected cubes overlap");
        if (step.in_e[c]) {
            out.require(qb.contains(g.coords(c), d), id + ": E leaves Q");
            out.require(owner[c] == 1, id + ": E not covered");
        }
    }
}

void ac4_for(Outcome& out, const ExperimentConfig& cfg, std::size_t& steps, std::size_t& selected) {
    const Grid g = cfg.grid();
    const int d = g.dim();
    const VariationEngine engine(g, cfg.make_kernel(), cfg.variation());
    SparseConfig sc = cfg.sparse;
    sc.weak_norm_cal = calibrate_from_config(engine, cfg);
    const DyadicIndex q0 = cfg.q0();
    const CellBox q3 = oracle::triple(g.box(q0), d);
    const double alpha = std::ldexp(1.0, d + 2) * std::pow(3.0, d) / sc.epsilon;
    for (const auto& item : generate_corpus(g, q0, cfg.corpus, cfg.seed)) {
        for (int k = 0; k < item.signal.components(); ++k) {
            const ScalarSignal f = item.signal.component(k);
            if (f.l1_norm() == 0) continue;
            const ScalarStep step = sparse_step_scalar(engine, f, q0, sc.epsilon, sc);
            ++steps;
            selected += step.cubes.size();
            check_step(out, g, step, q0, item.id);

            // E recomputed from its definition.
            double s = 0;
            for (auto c : oracle::cells_of(g, q3)) s += std::abs(f[c]);
            double q3_cells = 1;
            for (int a = 0; a < d; ++a) q3_cells *= double(q3.hi[a] - q3.lo[a]);
            const double avg = s / q3_cells;
            const std::vector<double> mv = engine.local_grand_maximal_field(f, q0);
            for (auto c : oracle::cells_of(g, g.box(q0))) {
                const bool e = std::abs(f[c]) > alpha * avg || mv[c] > alpha * sc.weak_norm_cal * avg;
                out.require(bool(step.in_e[c]) == e, item.id + ": E differs from its definition");
            }
        }
        const VectorStep vs = sparse_step_vector(engine, item.signal, q0, sc.delta, sc);
        for (const auto& step : vs.components) {
            ++steps;
            selected += step.cubes.size();
            check_step(out, g, step, q0, item.id + " (axis step)");
        }
    }
}

// A larger corpus than the campaign default: most instances select nothing
// at α = 2^{d+2}3^d/ε, so the bounds need many draws to be exercised.
ExperimentConfig wide_config() {
    ExperimentConfig cfg = base_config();
    cfg.corpus.count = 100;
    return cfg;
}

void ac4(Outcome& out) {
    std::size_t steps = 0, selected = 0;
    ac4_for(out, wide_config(), steps, selected);
    ac4_for(out, d2_config(), steps, selected);
    out.detail << steps << " steps, " << selected << " selected cubes (d = 1 and d = 2)";
}

// ------------------------------------------------------------------------ AC5

void ac5_for(Outcome& out, const ExperimentConfig& cfg, std::size_t& families, std::size_t& members,
             std::size_t& deepest) {
    const Grid g = cfg.grid();
    const int d = g.dim();
    const VariationEngine engine(g, cfg.make_kernel(), cfg.variation());
    SparseConfig sc = cfg.sparse;
    sc.weak_norm_cal = calibrate_from_config(engine, cfg);
    const DyadicIndex q0 = cfg.q0();
    auto cells = [&](const DyadicIndex& q) { return std::uint64_t(oracle::cells_of(g, g.box(q)).size()); };
    for (const auto& item : generate_corpus(g, q0, cfg.corpus, cfg.seed)) {
        const SparseFamily fam = build_sparse_family(engine, item.signal, q0, sc);
        ++families;
        const auto& gens = fam.generations();
        deepest = std::max(deepest, gens.size());
        std::vector<DyadicIndex> all;
        for (const auto& gen : gens) all.insert(all.end(), gen.begin(), gen.end());
        members += all.size();
        out.require(gens.size() >= 1 && gens[0].size() == 1 && gens[0][0] == q0, item.id + ": 𝒢₀ is not {Q₀}");

        // Σ_{𝒢₁}|Q| <= δ|Q₀| and, below every Q, next generation <= |Q|/2.
        std::uint64_t g1 = 0;
        if (gens.size() > 1)
            for (const auto& q : gens[1]) g1 += cells(q);
        out.require(double(g1) <= sc.delta * double(cells(q0)), item.id + ": first generation above δ|Q₀|");
        for (std::size_t l = 0; l + 1 < gens.size(); ++l) {
            std::uint64_t cur = 0, next = 0;
            for (const auto& q : gens[l]) {
                cur += cells(q);
                std::uint64_t below = 0;
                for (const auto& p : gens[l + 1])
                    if (q.contains(p)) below += cells(p);
                out.require(2 * below <= cells(q), item.id + ": children above |Q|/2");
            }
            for (const auto& p : gens[l + 1]) {
                next += cells(p);
                bool parent = false;
                for (const auto& q : gens[l]) parent = parent || (q.contains(p) && !(q == p));
                out.require(parent, item.id + ": generation not nested");
            }
            out.require(2 * next <= cur, item.id + ": generation measure does not halve");
        }
        for (const auto& gen : gens)
            for (std::size_t i = 0; i < gen.size(); ++i)
                for (std::size_t j = i + 1; j < gen.size(); ++j)
                    out.require(!gen[i].contains(gen[j]) && !gen[j].contains(gen[i]), item.id + ": generation overlaps");

        // Carleson packing.
        for (const auto& q : all) {
            std::uint64_t packed = 0;
            for (const auto& p : all)
                if (q.contains(p)) packed += cells(p);
            out.require(packed <= 2 * cells(q), item.id + ": Carleson ratio above 2");
        }

        // η = 1/(2·3^d) on ℱ: E_{3Q} = Q minus its next-generation cubes, so
        // |E_{3Q}| >= η|3Q| reads 2|E_Q| >= |Q|; shells lose 3^{-d} of their measure.
        for (std::size_t l = 0; l < gens.size(); ++l)
            for (const auto& q : gens[l]) {
                std::uint64_t e = cells(q);
                if (l + 1 < gens.size())
                    for (const auto& p : gens[l + 1])
                        if (q.contains(p)) e -= cells(p);
                out.require(2 * e >= cells(q), item.id + ": |E_Q| below η|3Q|");
            }
        const double eta = 1.0 / (2 * std::pow(3.0, d));
        out.require(1 - std::pow(3.0, -d) >= eta, "shell ratio below η");
        out.require(eta_sparse_check(fam, eta).ok, item.id + ": library witness disagrees");
    }
}

void ac5(Outcome& out) {
    std::size_t families = 0, members = 0, deepest = 0;
    ac5_for(out, wide_config(), families, members, deepest);
    ac5_for(out, d2_config(), families, members, deepest);
    out.detail << families << " families, " << members << " members, up to " << deepest << " generations";
}

// ------------------------------------------------------------------------ AC6

Zonotope as_zonotope(const std::vector<Eigen::VectorXd>& gens) {
    std::vector<Vec> v(gens.begin(), gens.end());
    return Zonotope(int(gens.front().size()), v);
}

std::vector<Eigen::VectorXd> check_directions(int n) {
    std::vector<Eigen::VectorXd> u;
    for (int k = 0; k < 360; ++k) {
        if (n == 2) {
            const double t = 2 * M_PI * k / 360;
            u.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
        } else {
            const double z = 1 - (2 * k + 1) / 360.0, r = std::sqrt(1 - z * z), t = k * M_PI * (3 - std::sqrt(5.0));
            u.push_back(Eigen::Vector3d(r * std::cos(t), r * std::sin(t), z));
        }
    }
    return u;
}

void ac6(Outcome& out) {
    const Zonotope square(2, {Vec(Eigen::Vector2d(1, 0)), Vec(Eigen::Vector2d(0, 1))});
    const double sq = (john_ellipsoid(square).shape - Mat::Identity(2, 2)).cwiseAbs().maxCoeff();
    out.require(sq <= 1e-6, "square does not map to the unit disk");

    Rng rng(6);
    double inner = 0, outer = 0;
    for (int n : {2, 3}) {
        const auto dirs = check_directions(n);
        for (int t = 0; t < (n == 2 ? 100 : 50); ++t) {
            std::vector<Eigen::VectorXd> gens(n + rng.below(6));
            for (auto& gv : gens) {
                gv = Eigen::VectorXd(n);
                for (int a = 0; a < n; ++a) gv(a) = rng.uniform(-1, 1);
            }
            const Ellipsoid e = john_ellipsoid(as_zonotope(gens));
            for (const auto& u : dirs) {
                const double hk = oracle::zonotope_support(gens, u);
                const double he = (e.shape.transpose() * u).norm();
                inner = std::max(inner, he / hk - 1);
                outer = std::max(outer, hk / (std::sqrt(double(n)) * he) - 1);
            }
        }
    }
    out.require(inner <= 1e-6, "h_E > h_K");
    out.require(outer <= 1e-6, "h_K > √n h_E");

    double lp = 0;
    for (int t = 0; t < 500; ++t) {
        const int n = 2 + int(rng.below(2));
        std::vector<Eigen::VectorXd> gens(n + rng.below(5));
        for (auto& gv : gens) {
            gv = Eigen::VectorXd(n);
            for (int a = 0; a < n; ++a) gv(a) = rng.uniform(-1, 1);
        }
        Eigen::VectorXd p(n);
        for (int a = 0; a < n; ++a) p(a) = rng.uniform(-3, 3);
        const double want = oracle::membership_by_normals(p, gens);
        lp = std::max(lp, std::abs(membership_scale(p, as_zonotope(gens)) - want) / std::max(1.0, want));
    }
    out.require(lp <= 1e-6, "LP membership scale disagrees with the facet sweep");
    out.detail << "square " << sq << ", sandwich excess " << std::max(inner, outer) << ", LP vs facets " << lp;
}

// ------------------------------------------------------------------------ AC7

struct Sups {
    double residual = 0, domination = 0, domination_finite = 0;
    std::size_t infinite = 0, instances = 0;
};

Sups sparse_sups(const ExperimentConfig& cfg, double cal) {
    const Grid g = cfg.grid();
    const VariationEngine engine(g, cfg.make_kernel(), cfg.variation());
    SparseConfig sc = cfg.sparse;
    sc.weak_norm_cal = cal;
    Sups s;
    for (const auto& item : generate_corpus(g, cfg.q0(), cfg.corpus, cfg.seed)) {
        const SparseMeasurement m = measure_sparse(engine, item.signal, cfg.q0(), sc);
        ++s.instances;
        s.residual = std::max(s.residual, std::isfinite(m.residual) ? m.residual : oracle::kInf);
        const double c = m.domination.constant;
        if (std::isfinite(c)) s.domination_finite = std::max(s.domination_finite, c);
        else ++s.infinite;
        s.domination = std::max(s.domination, std::isfinite(c) ? c : oracle::kInf);
    }
    return s;
}

double change(double a, double b) { return std::isfinite(a) && std::isfinite(b) ? std::abs(b - a) / a : oracle::kInf; }

void ac7(Outcome& out) {
    const ExperimentConfig base = base_config();
    const Grid g = base.grid();
    const double cal = calibrate_from_config(VariationEngine(g, base.make_kernel(), base.variation()), base);
    ExperimentConfig fine = base;
    fine.resolution = 512;
    ExperimentConfig ladder = base;
    ladder.ladder_size = 16;
    ladder.theta = std::sqrt(base.theta);
    const Sups s0 = sparse_sups(base, cal), s1 = sparse_sups(fine, cal), s2 = sparse_sups(ladder, cal);

    const double dr = std::max(change(s0.residual, s1.residual), change(s0.residual, s2.residual));
    out.require(std::isfinite(s0.residual) && std::isfinite(s1.residual) && std::isfinite(s2.residual),
                "scalar residual infinite");
    out.require(dr < 0.1, "scalar residual moves by 10% or more");
    out.require(s0.residual <= kTolerance * kResidualBaseline, "scalar residual above baseline");

    const double dd = std::max(change(s0.domination, s1.domination), change(s0.domination, s2.domination));
    out.require(s0.infinite + s1.infinite + s2.infinite == 0, "vector domination constant infinite");
    out.require(dd < 0.1, "vector domination constant moves by 10% or more");
    out.require(s0.domination <= kTolerance * kDominationBaseline, "vector domination constant above baseline");
    const double df =
        std::max(change(s0.domination_finite, s1.domination_finite), change(s0.domination_finite, s2.domination_finite));
    out.detail << "residual sup " << s0.residual << " / " << s1.residual << " / " << s2.residual << " (change " << dr
               << "); domination sup " << s0.domination << " with " << s0.infinite << "/" << s0.instances
               << " infinite, finite-instance sup " << s0.domination_finite << " / " << s1.domination_finite << " / "
               << s2.domination_finite << " (change " << df << ")";
}

// ------------------------------------------------------------------------ AC8

void ac8(Outcome& out) {
    const ExperimentConfig cfg = base_config();
    const Grid g = cfg.grid();
    const VariationParams vp = cfg.variation();
    const VariationEngine engine(g, cfg.make_kernel(), vp);
    std::vector<VectorSignal> signals;
    for (const auto& item : generate_corpus(g, cfg.q0(), cfg.corpus, cfg.seed)) signals.push_back(item.signal);
    const auto spikes = spike_sequence(g, cfg.q0(), cfg.corpus.components, 8);
    signals.insert(signals.end(), spikes.begin(), spikes.end());

    Rng rng(8);
    double worst = 0, spike_worst = 0, field_err = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        for (int k = 0; k < signals[i].components(); ++k) {
            const ScalarSignal f = signals[i].component(k);
            const double l1 = f.l1_norm();
            if (l1 == 0) continue;
            const std::vector<double> v = engine.variation_field(f);
            // Spot-check the stencil field against direct truncated sums.
            for (int t = 0; t < 4; ++t) {
                const std::size_t c = rng.below(g.cell_count());
                const double direct = variation_operator(engine.kernel(), f, vp, g.cell_center(c));
                field_err = std::max(field_err, std::abs(direct - v[c]) / std::max(1.0, std::abs(direct)));
            }
            const double r = oracle::weak_norm(v, g.cell_volume(), l1);
            worst = std::max(worst, r);
            if (i >= signals.size() - spikes.size()) spike_worst = std::max(spike_worst, r);
        }
    }
    out.require(field_err <= 1e-9, "variation field differs from direct evaluation");
    out.require(std::isfinite(worst) && worst <= kTolerance * kWeakBaseline, "weak-type ratio above baseline");
    out.detail << "sup ratio " << worst << " (spikes " << spike_worst << ", " << spikes.size()
               << " shrinking steps), bound " << kTolerance * kWeakBaseline << ", field check " << field_err;
}

// ------------------------------------------------------------------------ AC9

void ac9(Outcome& out) {
    const Grid g1(1, 128, cube_from_corner(1, {-1.5, 0}, 4.0));
    const Grid g2(2, 16, cube_from_corner(2, {-1.5, -1.5}, 4.0));
    for (const Grid* g : {&g1, &g2})
        for (int n : {1, 2, 3})
            for (double p : {1.5, 2.0, 3.0})
                out.require(ap_constant(MatrixWeight::identity(*g, n), p) == 1.0, "A_p(Id) != 1");

    // Scalar restriction: [|W^{1/p} e|^p]_{A_p} <= [W]_{A_p} on 64 directions.
    const auto boxes = clipped_family(g1);
    const auto dirs = random_directions(2, 64, 9);
    double restriction = 0, product = oracle::kInf;
    for (double p : {2.0, 3.0})
        for (double a : {0.3, 0.6, 0.9}) {
            const MatrixWeight w = MatrixWeight::rotated_diag(g1, {a * (p - 1), -a}, 1.0);
            const double ap = ap_constant(w, p);
            for (const auto& e : dirs) {
                std::vector<double> v(g1.cell_count());
                for (std::size_t c = 0; c < v.size(); ++c) {
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.value(c));
                    const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().array().pow(1 / p).matrix().asDiagonal() *
                                                 es.eigenvectors().transpose();
                    v[c] = std::pow((root * e).norm(), p);
                }
                restriction = std::max(restriction, oracle::scalar_ap(g1, v, p, boxes) / ap);
            }
            // ‖W_Q W'_Q‖ >= 1 on the dyadic cubes of the first levels.
            for (int level = 0; level <= 3; ++level)
                for (std::int64_t i = 0; i < (1 << level); ++i) {
                    const ReducingOperatorPair pr = reducing_pair(w, g1.cube(DyadicIndex{level, {i, 0}}), p);
                    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pr.w_q * pr.w_q_dual);
                    product = std::min(product, svd.singularValues()(0));
                }
        }
    out.require(restriction <= 1 + 1e-9, "scalar restriction ratio above 1 + 1e-9");
    out.require(product >= 1 - 1e-6, "‖W_Q W'_Q‖ below 1 - 1e-6");

    WeightConstants unit;
    const auto [r1, s1] = rs_exponents(unit, 1);
    const auto [r2, s2] = rs_exponents(unit, 2);
    out.require(r1 == 1 + std::ldexp(1.0, -12) && s1 == r1, "(r, s) at d = 1");
    out.require(r2 == 1 + std::ldexp(1.0, -13) && s2 == r2, "(r, s) at d = 2");
    out.detail << "restriction ratio " << restriction << ", min ‖W_Q W'_Q‖ " << product << ", r = s = 1 + 2^-12";
}

// ----------------------------------------------------------------------- AC10

void ac10(Outcome& out) {
    ExperimentConfig cfg = base_config();
    cfg.resolution = 512;
    cfg.corpus.count = 10;
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport rep = run_campaign(cfg, Campaign::weighted);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Independent recomputation of the largest ratio at one sweep point.
    const Grid g = cfg.grid();
    const VariationParams vp = cfg.variation();
    const VariationEngine engine(g, cfg.make_kernel(), vp);
    const double p = 2, a = cfg.weights.alphas.back();
    const MatrixWeight w = MatrixWeight::rotated_diag(g, {a * (p - 1), -a}, cfg.weights.twist);
    const auto items = generate_corpus(g, cfg.q0(), cfg.corpus, cfg.seed);
    std::vector<VectorSignal> corpus;
    for (const auto& it : items) corpus.push_back(it.signal);
    const WeightedBoundReport lib = verify_weighted_bound(engine, w, p, ap_constant(w, p), corpus);
    double own = 0;
    for (const auto& f : corpus) {
        const VectorSignal h = w.apply_power(f, -1 / p);
        std::vector<ScalarSignal> parts;
        for (int k = 0; k < h.components(); ++k) parts.emplace_back(g, engine.variation_field(h.component(k)));
        const VectorSignal vh = w.apply_power(VectorSignal::from_components(parts), 1 / p);
        double num = 0, den = 0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            num += std::pow(Eigen::Map<const Eigen::VectorXd>(vh.at(c).data(), 2).norm(), p);
            den += std::pow(Eigen::Map<const Eigen::VectorXd>(f.at(c).data(), 2).norm(), p);
        }
        own = std::max(own, std::pow(num / den, 1 / p));
    }
    out.require(std::abs(own - lib.max_ratio) <= 1e-9 * own, "weighted ratio differs from direct evaluation");

    for (double q : cfg.weights.ps) {
        const std::string tag = czvar::io::format_double(q);
        const double span = rep.aggregates.at("ap_span_p" + tag);
        const double norm = rep.aggregates.at("sup_normalized_p" + tag);
        out.require(span >= 10, "A_p span below a decade at p = " + tag);
        out.require(std::isfinite(norm) && norm <= kTolerance * kWeightedBaseline.at(q),
                    "normalized ratio above baseline at p = " + tag);
        out.detail << "p=" << tag << ": A_p span " << span << ", sup normalized " << norm << "; ";
    }
    out.require(rep.aggregates.at("errors") == 0, "weighted campaign instance errors");
    out.require(secs < 600, "campaign runtime above 10 min");
    out.detail << "campaign " << secs << " s, direct ratio check " << std::abs(own - lib.max_ratio);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failed = 0, run = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        ++run;
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-5s %s  %s (%.2f s)\n", id.c_str(), out.pass ? "PASS" : "FAIL", out.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    if (run == 0) {
        std::fprintf(stderr, "no criterion matched\n");
        return 2;
    }
    return failed ? 1 : 0;
}
