#pragma once

// Experiment plumbing: configuration, deterministic corpora, per-instance
// measurements and the campaigns that aggregate them into reports.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "czvar/grid.hpp"
#include "czvar/kernels.hpp"
#include "czvar/matrix_weights.hpp"
#include "czvar/sparse.hpp"
#include "czvar/variation.hpp"

namespace czvar {

inline constexpr const char* kReportSchema = "czvar-report/1";
inline constexpr const char* kVersion = "0.1.0";

enum class SignalFamily { indicator, bump, signs, rotated, spike };
const char* to_string(SignalFamily f);
SignalFamily parse_signal_family(const std::string& s);

struct CorpusSpec {
    int components = 2;
    std::size_t count = 20;
    std::vector<SignalFamily> families{SignalFamily::indicator, SignalFamily::bump, SignalFamily::signs,
                                       SignalFamily::rotated, SignalFamily::spike};
    /// Random-sign pieces are dyadic cubes this many levels below Q₀.
    int sign_level = 4;
};

struct CorpusItem {
    std::string id;
    SignalFamily family;
    VectorSignal signal;
};

/// Rounds to the nearest multiple of 2^-24 so sums over up to 2^29 cells of
/// values below 1 are exact in double precision.
double quantize(double v);

/// Signals supported in q0. Instance i uses family families[i % F] and its own
/// generator seeded from (seed, i); every family is defined on the continuum
/// and sampled at cell centers, so refining the grid refines the same function.
std::vector<CorpusItem> generate_corpus(const Grid& g, const DyadicIndex& q0, const CorpusSpec& spec,
                                        std::uint64_t seed);
/// ‖f‖₁ = 1 indicators of dyadic cubes inside q0 whose measure shrinks 4×
/// per step, down to the cell size.
std::vector<VectorSignal> spike_sequence(const Grid& g, const DyadicIndex& q0, int components, std::size_t steps);

struct WeightSweep {
    WeightModel model = WeightModel::rotated_diag;
    /// Fractions of the admissible power range; see the weighted campaign.
    std::vector<double> alphas{0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.99};
    double twist = 1.0;
    std::vector<double> ps{2.0, 3.0};
    std::size_t directions = 16;
};

struct Baselines {
    std::optional<double> domination;   // sup of domination_constant over the corpus
    std::optional<double> residual;     // sup of pointwise_residual_scalar
    std::optional<double> weak_norm;    // sup of the weak-type ratio
    std::map<double, double> weighted;  // p -> sup of the normalized weighted ratio
    double tolerance = 1.1;
};

struct ExperimentConfig {
    int dim = 1;
    int resolution = 256;
    double domain_lower = -1.5;
    double domain_side = 4.0;

    std::string kernel = "hilbert";
    double rho = 3.0;
    double eps_max = 1.5;
    double theta = 0.6;
    int ladder_size = 8;

    SparseConfig sparse;
    bool calibrate = true;  // weak_norm_cal from the pilot corpus when set
    int q0_level = 2;
    std::int64_t q0_index = 1;

    CorpusSpec corpus;
    std::uint64_t seed = 1;
    WeightSweep weights;
    Baselines baselines;

    std::string out_dir = "czvar-out";
    unsigned jobs = 1;

    Grid grid() const;
    Kernel make_kernel() const;
    VariationParams variation() const;
    DyadicIndex q0() const;

    /// Throws InvalidArgument on any out-of-range field.
    void validate() const;
    /// Sorted key=value lines; the config hash is taken over this text.
    std::string canonical() const;
    std::string hash() const;  // FNV-1a 64, hex

    /// INI text with sections [grid] [kernel] [variation] [sparse] [corpus]
    /// [weights] [baselines] [output] [run]. Unknown keys are errors.
    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig load(const std::string& path);
};

/// Bookkeeping of one sparse-domination instance.
struct SparseMeasurement {
    SparseFamily family;
    double first_generation = 0;   // Σ_{𝒢₁}|Q| / |Q₀|
    bool decay_ok = true;          // Σ_{𝒢_{ℓ+1}} <= Σ_{𝒢_ℓ} / 2 at every level
    double carleson = 0;
    EtaReport eta;
    DominationReport domination;
    ScalarStep scalar_step;        // of the first nonzero component
    bool stopping_ok = true;       // two-sided density bound and E covered, exact
    double residual = 0;           // pointwise_residual_scalar for scalar_step.cubes
    double residual_cover = 0;     // same for the maximal cubes of the vector step
};

/// Checks 2^{-(d+1)} <= |P ∩ E| / |P| <= 1/2 for every selected P and that
/// every E cell lies in a selected cube, in integer arithmetic.
bool stopping_bounds_hold(const Grid& g, const ScalarStep& step);

SparseMeasurement measure_sparse(const VariationEngine& engine, const VectorSignal& f, const DyadicIndex& q0,
                                 const SparseConfig& cfg);

/// max over components with ‖f_k‖₁ > 0 of sup_λ λ|{V(T_* f_k) > λ}| / ‖f_k‖₁.
double weak_type_ratio(const VariationEngine& engine, const VectorSignal& f);

/// max over x ∈ q0 of M_{V,Q₀}f(x) / ([M(|f|^r)]^{1/r}(x) + V(T_* f)(x)).
double grand_maximal_pointwise_ratio(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q0,
                                     double r);
/// Smallest C with V(T_*(f χ_{3Q₀})) <= C·|f|^* + M_{V,Q₀}f on q0, where |f|^*
/// at a cell is the largest |f| over its 3-fold dilate.
double grand_maximal_excess(const VariationEngine& engine, const ScalarSignal& f, const DyadicIndex& q0);

/// Calibrates weak_norm_cal on a scalar pilot corpus built from the config.
double calibrate_from_config(const VariationEngine& engine, const ExperimentConfig& cfg);

enum class Campaign { sparse, weaktype, weighted, certify, corpus };
const char* to_string(Campaign c);
Campaign parse_campaign(const std::string& s);

struct InstanceRecord {
    std::string id;
    std::string family;
    std::map<std::string, double> values;
    std::string error;  // empty on success
};

struct CriterionResult {
    std::string id;         // acceptance criterion, e.g. "AC5"
    std::string invariant;  // what the check certifies
    bool passed = false;
    double measured = 0;
    double bound = 0;
};

struct ExperimentReport {
    std::string campaign;
    std::string config_hash;
    std::vector<InstanceRecord> instances;
    std::vector<CriterionResult> criteria;
    std::map<std::string, double> aggregates;
    double seconds = 0;

    bool passed() const;
    /// Versioned JSON document including a timestamp.
    std::string to_json() const;
    /// One row per instance, columns sorted by name; no timing or timestamps.
    std::string to_csv() const;
};

/// Runs one campaign. Instance failures are recorded and counted against
/// the criteria they feed; the campaign itself does not throw on them.
ExperimentReport run_campaign(const ExperimentConfig& cfg, Campaign which);
/// Writes <dir>/<campaign>.json and <dir>/<campaign>.csv, creating dir.
void write_report(const ExperimentReport& rep, const std::string& dir);

}  // namespace czvar
