#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "czvar/experiments.hpp"
#include "czvar/signal_io.hpp"

using namespace czvar;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return ExperimentConfig::parse(in);
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.resolution = 128;
    cfg.ladder_size = 6;
    cfg.corpus.count = 5;
    return cfg;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("czvar-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, ParsesSectionsAndLists) {
    const auto cfg = parse_text(R"(
[grid]
dim = 1
resolution = 512
[variation]
rho = 4
ladder_size = 7
[corpus]
families = indicator, spike
count = 3
seed = 99
[weights]
p = 2, 3.5
alphas = 0, 0.5
[baselines]
weighted_p2 = 0.9
tolerance = 1.2
[output]
dir = somewhere
)");
    EXPECT_EQ(cfg.resolution, 512);
    EXPECT_EQ(cfg.rho, 4.0);
    EXPECT_EQ(cfg.ladder_size, 7);
    EXPECT_EQ(cfg.corpus.families, (std::vector<SignalFamily>{SignalFamily::indicator, SignalFamily::spike}));
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.weights.ps, (std::vector<double>{2.0, 3.5}));
    EXPECT_EQ(cfg.baselines.weighted.at(2.0), 0.9);
    EXPECT_EQ(cfg.baselines.tolerance, 1.2);
    EXPECT_EQ(cfg.out_dir, "somewhere");
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_text("[grid]\ncolour = red\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[grid]\nresolution = 100\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[grid]\nresolution = 12x\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[variation]\nrho = 2\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[kernel]\nname = hilbert\n[grid]\ndim = 2\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[corpus]\nfamilies = noise\n"), InvalidArgument);
    EXPECT_THROW(parse_text("[sparse]\ncalibrate = maybe\n"), InvalidArgument);
    EXPECT_THROW(ExperimentConfig::load("/nonexistent/czvar.ini"), InvalidArgument);
}

TEST(Config, HashIsDeterministicAndIgnoresOutputLocation) {
    const ExperimentConfig a = small_config();
    ExperimentConfig b = small_config();
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.out_dir = "elsewhere";
    b.jobs = 4;
    EXPECT_EQ(a.hash(), b.hash());
    b.seed = 2;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(parse_text("").hash(), ExperimentConfig{}.hash());
    EXPECT_EQ(parse_text("[output]\ndir = x\n[run]\njobs = 8\n").hash(), ExperimentConfig{}.hash());
}

TEST(Corpus, DeterministicSizedAndExact) {
    ExperimentConfig cfg = small_config();
    cfg.corpus.count = 25;
    const Grid g = cfg.grid();
    const auto a = generate_corpus(g, cfg.q0(), cfg.corpus, 7);
    const auto b = generate_corpus(g, cfg.q0(), cfg.corpus, 7);
    const auto c = generate_corpus(g, cfg.q0(), cfg.corpus, 8);
    ASSERT_EQ(a.size(), 25u);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_EQ(a[i].signal, b[i].signal);
        differs = differs || !(a[i].signal == c[i].signal);
        for (double v : a[i].signal.values()) EXPECT_EQ(v, quantize(v));
        if (a[i].family == SignalFamily::indicator) {
            // Values 0/1 on a dyadic cube of cells: the support size is a power of two in 1D.
            std::size_t support = 0;
            for (double v : a[i].signal.values()) {
                EXPECT_TRUE(v == 0.0 || v == 1.0);
                support += v != 0.0;
            }
            EXPECT_GT(support, 0u);
            EXPECT_EQ(support & (support - 1), 0u);
        }
    }
    EXPECT_TRUE(differs);
}

TEST(Corpus, SpikeSequenceHasUnitMass) {
    const ExperimentConfig cfg = small_config();
    const Grid g = cfg.grid();
    // Q0 spans 32 cells; supports of 32, 8 and 2 cells fit, half a cell does not.
    const auto seq = spike_sequence(g, cfg.q0(), 2, 4);
    ASSERT_EQ(seq.size(), 3u);
    std::size_t expected = 32;
    for (const auto& f : seq) {
        EXPECT_DOUBLE_EQ(f.l1_norm(), 1.0);
        std::size_t support = 0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) support += f.at(c)[0] != 0.0 || f.at(c)[1] != 0.0;
        EXPECT_EQ(support, expected);
        expected /= 4;
    }
}

TEST(Corpus, SignalFamilyNames) {
    for (auto f : {SignalFamily::indicator, SignalFamily::bump, SignalFamily::signs, SignalFamily::rotated,
                   SignalFamily::spike})
        EXPECT_EQ(parse_signal_family(to_string(f)), f);
    EXPECT_THROW(parse_signal_family("noise"), InvalidArgument);
}

TEST(Measurements, ZeroSignalGivesZeroConstants) {
    const ExperimentConfig cfg = small_config();
    const VariationEngine engine(cfg.grid(), cfg.make_kernel(), cfg.variation());
    const auto m = measure_sparse(engine, VectorSignal(cfg.grid(), 2), cfg.q0(), cfg.sparse);
    EXPECT_EQ(m.first_generation, 0.0);
    EXPECT_EQ(m.domination.constant, 0.0);
    EXPECT_EQ(m.residual, 0.0);
    EXPECT_TRUE(m.stopping_ok);
    EXPECT_TRUE(m.decay_ok);
    EXPECT_TRUE(m.eta.ok);
}

TEST(Campaign, EmptyCorpusPassesVacuously) {
    const fs::path dir = scratch("empty");
    ExperimentConfig cfg = small_config();
    cfg.corpus.count = 0;
    cfg.out_dir = dir.string();
    for (auto which : {Campaign::sparse, Campaign::corpus}) {
        const auto rep = run_campaign(cfg, which);
        EXPECT_TRUE(rep.instances.empty());
        EXPECT_TRUE(rep.passed()) << to_string(which);
    }
    fs::remove_all(dir);
}

TEST(Campaign, RerunGivesIdenticalCsv) {
    const ExperimentConfig cfg = small_config();
    const auto a = run_campaign(cfg, Campaign::sparse);
    const auto b = run_campaign(cfg, Campaign::sparse);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    ExperimentConfig parallel = cfg;
    parallel.jobs = 3;
    EXPECT_EQ(run_campaign(parallel, Campaign::sparse).to_csv(), a.to_csv());
}

TEST(Report, JsonIsSelfDescribing) {
    const ExperimentConfig cfg = small_config();
    const auto rep = run_campaign(cfg, Campaign::sparse);
    const auto doc = nlohmann::json::parse(rep.to_json());
    EXPECT_EQ(doc.at("schema"), kReportSchema);
    EXPECT_EQ(doc.at("campaign"), "sparse");
    EXPECT_EQ(doc.at("config_hash"), cfg.hash());
    EXPECT_EQ(doc.at("instances").size(), cfg.corpus.count);
    ASSERT_FALSE(doc.at("criteria").empty());
    for (const auto& c : doc.at("criteria")) {
        EXPECT_TRUE(c.at("id").get<std::string>().rfind("AC", 0) == 0);
        EXPECT_FALSE(c.at("invariant").get<std::string>().empty());
        EXPECT_EQ(c.at("config_hash"), cfg.hash());
    }
    EXPECT_TRUE(doc.contains("timestamp"));
}

TEST(Report, CsvHasOneRowPerInstance) {
    const auto rep = run_campaign(small_config(), Campaign::sparse);
    std::istringstream in(rep.to_csv());
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("config_hash,campaign,instance,family", 0), 0u);
    std::size_t rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, rep.instances.size());
}

TEST(Report, WriteCreatesBothFiles) {
    const fs::path dir = scratch("report");
    ExperimentConfig cfg = small_config();
    cfg.out_dir = dir.string();
    const auto rep = run_campaign(cfg, Campaign::corpus);
    write_report(rep, cfg.out_dir);
    EXPECT_TRUE(fs::exists(dir / "corpus.json"));
    EXPECT_TRUE(fs::exists(dir / "corpus.csv"));
    EXPECT_GT(fs::file_size(dir / "corpus.json"), 0u);
    const auto corpus = generate_corpus(cfg.grid(), cfg.q0(), cfg.corpus, cfg.seed);
    EXPECT_EQ(io::load((dir / "corpus" / (corpus[0].id + ".czv")).string()), corpus[0].signal);
    fs::remove_all(dir);
}

#ifdef CZVAR_CLI_PATH
namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + std::string(CZVAR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const fs::path ini = dir / "small.ini";
    std::ofstream(ini) << "[grid]\nresolution = 128\n[variation]\nladder_size = 6\n[corpus]\ncount = 3\n";
    EXPECT_EQ(run_cli("corpus --config " + ini.string() + " --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "corpus.json"));
    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("nonsense"), 2);
    EXPECT_EQ(run_cli("sparse --config " + (dir / "missing.ini").string()), 2);
    EXPECT_EQ(run_cli("sparse --jobs 0"), 2);

    std::ofstream(dir / "bad.ini") << "[grid]\nresolution = 100\n";
    EXPECT_EQ(run_cli("sparse --config " + (dir / "bad.ini").string()), 2);

    // A baseline far below the measured value fails its criterion.
    std::ofstream(dir / "strict.ini") << "[grid]\nresolution = 128\n[variation]\nladder_size = 6\n"
                                         "[corpus]\ncount = 3\nfamilies = indicator\n[baselines]\nresidual = 1e-9\n";
    EXPECT_EQ(run_cli("sparse --config " + (dir / "strict.ini").string() + " --out " + (dir / "strict").string()), 1);

    // The environment override is itself overridden by --out.
    const std::string env = "CZVAR_OUT_DIR=" + (dir / "env").string() + " ";
    EXPECT_EQ(run_cli("corpus --config " + ini.string(), env), 0);
    EXPECT_TRUE(fs::exists(dir / "env" / "corpus.csv"));
    EXPECT_EQ(run_cli("corpus --config " + ini.string() + " --out " + (dir / "flag").string(), env), 0);
    EXPECT_TRUE(fs::exists(dir / "flag" / "corpus.csv"));
    fs::remove_all(dir);
}
#endif
