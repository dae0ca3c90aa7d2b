#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "czvar/experiments.hpp"
#include "czvar/signal_io.hpp"

namespace czvar {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split_list(s)) out.push_back(io::parse_double(t));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
    return s;
}

long long parse_int(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw InvalidArgument("config key " + key + " needs an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InvalidArgument("config key " + key + " needs a boolean, got '" + s + "'");
}

bool is_pow2(long long v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

Grid ExperimentConfig::grid() const {
    Point lo{domain_lower, dim == 2 ? domain_lower : 0.0};
    return Grid(dim, resolution, cube_from_corner(dim, lo, domain_side));
}

Kernel ExperimentConfig::make_kernel() const {
    if (kernel == "hilbert") {
        if (dim != 1) throw InvalidArgument("the Hilbert kernel needs dim = 1");
        return Kernel::hilbert();
    }
    if (kernel == "riesz") return Kernel::riesz_like(dim);
    throw InvalidArgument("unknown kernel: " + kernel);
}

VariationParams ExperimentConfig::variation() const {
    VariationParams vp;
    vp.rho = rho;
    vp.ladder = TruncationLadder::geometric(eps_max, theta, ladder_size);
    return vp;
}

DyadicIndex ExperimentConfig::q0() const {
    DyadicIndex q;
    q.level = q0_level;
    q.pos = {q0_index, dim == 2 ? q0_index : 0};
    return q;
}

void ExperimentConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidArgument("invalid config: " + what);
    };
    need(dim == 1 || dim == 2, "grid.dim must be 1 or 2");
    need(is_pow2(resolution), "grid.resolution must be a power of two");
    need(domain_side > 0 && std::isfinite(domain_lower), "grid domain");
    need(kernel == "hilbert" || kernel == "riesz", "kernel.name must be hilbert or riesz");
    need(kernel != "hilbert" || dim == 1, "the Hilbert kernel needs dim = 1");
    need(rho > 2, "variation.rho must exceed 2");
    need(eps_max > 0 && theta > 0 && theta < 1 && ladder_size >= 1, "variation ladder");
    sparse.validate();
    need(q0_level >= 0 && (1LL << q0_level) <= resolution, "sparse.q0_level");
    need(q0_index >= 0 && q0_index < (1LL << q0_level), "sparse.q0_index");
    need(corpus.components >= 1 && corpus.components <= kMaxComponents, "corpus.components must be 1..3");
    need(!corpus.families.empty(), "corpus.families");
    need(corpus.sign_level >= 0, "corpus.sign_level");
    for (double p : weights.ps) need(p > 1 && std::isfinite(p), "weights.p must exceed 1");
    need(weights.directions >= 1, "weights.directions");
    need(baselines.tolerance >= 1, "baselines.tolerance");
    need(jobs >= 1, "run.jobs");
}

std::string ExperimentConfig::canonical() const {
    std::map<std::string, std::string> kv;
    auto f = [](double v) { return io::format_double(v); };
    kv["grid.dim"] = std::to_string(dim);
    kv["grid.resolution"] = std::to_string(resolution);
    kv["grid.lower"] = f(domain_lower);
    kv["grid.side"] = f(domain_side);
    kv["kernel.name"] = kernel;
    kv["variation.rho"] = f(rho);
    kv["variation.eps_max"] = f(eps_max);
    kv["variation.theta"] = f(theta);
    kv["variation.ladder_size"] = std::to_string(ladder_size);
    kv["sparse.epsilon"] = f(sparse.epsilon);
    kv["sparse.delta"] = f(sparse.delta);
    kv["sparse.weak_norm_cal"] = f(sparse.weak_norm_cal);
    kv["sparse.calibrate"] = calibrate ? "true" : "false";
    kv["sparse.max_depth"] = std::to_string(sparse.max_depth);
    kv["sparse.annuli"] = std::to_string(sparse.annuli);
    kv["sparse.q0_level"] = std::to_string(q0_level);
    kv["sparse.q0_index"] = std::to_string(q0_index);
    kv["corpus.components"] = std::to_string(corpus.components);
    kv["corpus.count"] = std::to_string(corpus.count);
    std::string fams;
    for (std::size_t i = 0; i < corpus.families.size(); ++i) fams += (i ? "," : "") + std::string(to_string(corpus.families[i]));
    kv["corpus.families"] = fams;
    kv["corpus.sign_level"] = std::to_string(corpus.sign_level);
    kv["corpus.seed"] = std::to_string(seed);
    kv["weights.model"] = to_string(weights.model);
    kv["weights.alphas"] = join(weights.alphas);
    kv["weights.twist"] = f(weights.twist);
    kv["weights.p"] = join(weights.ps);
    kv["weights.directions"] = std::to_string(weights.directions);
    if (baselines.domination) kv["baselines.domination"] = f(*baselines.domination);
    if (baselines.residual) kv["baselines.residual"] = f(*baselines.residual);
    if (baselines.weak_norm) kv["baselines.weak_norm"] = f(*baselines.weak_norm);
    for (const auto& [p, v] : baselines.weighted) kv["baselines.weighted_p" + io::format_double(p)] = f(v);
    kv["baselines.tolerance"] = f(baselines.tolerance);
    // Output location and worker count do not change results.
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    ExperimentConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw InvalidArgument("config key outside a section: " + section);
        for (const auto& [key, node] : body) {
            const std::string k = section + "." + key;
            const std::string v = node.data();
            auto d = [&] { return io::parse_double(v); };
            auto i = [&] { return parse_int(k, v); };
            if (k == "grid.dim") c.dim = int(i());
            else if (k == "grid.resolution") c.resolution = int(i());
            else if (k == "grid.lower") c.domain_lower = d();
            else if (k == "grid.side") c.domain_side = d();
            else if (k == "kernel.name") c.kernel = v;
            else if (k == "variation.rho") c.rho = d();
            else if (k == "variation.eps_max") c.eps_max = d();
            else if (k == "variation.theta") c.theta = d();
            else if (k == "variation.ladder_size") c.ladder_size = int(i());
            else if (k == "sparse.epsilon") c.sparse.epsilon = d();
            else if (k == "sparse.delta") c.sparse.delta = d();
            else if (k == "sparse.weak_norm_cal") c.sparse.weak_norm_cal = d();
            else if (k == "sparse.calibrate") c.calibrate = parse_bool(k, v);
            else if (k == "sparse.max_depth") c.sparse.max_depth = int(i());
            else if (k == "sparse.annuli") c.sparse.annuli = int(i());
            else if (k == "sparse.q0_level") c.q0_level = int(i());
            else if (k == "sparse.q0_index") c.q0_index = i();
            else if (k == "corpus.components") c.corpus.components = int(i());
            else if (k == "corpus.count") c.corpus.count = std::size_t(i());
            else if (k == "corpus.sign_level") c.corpus.sign_level = int(i());
            else if (k == "corpus.seed") c.seed = std::uint64_t(i());
            else if (k == "corpus.families") {
                c.corpus.families.clear();
                for (const auto& name : split_list(v)) c.corpus.families.push_back(parse_signal_family(name));
            } else if (k == "weights.model") c.weights.model = parse_weight_model(v);
            else if (k == "weights.alphas") c.weights.alphas = parse_doubles(v);
            else if (k == "weights.twist") c.weights.twist = d();
            else if (k == "weights.p") c.weights.ps = parse_doubles(v);
            else if (k == "weights.directions") c.weights.directions = std::size_t(i());
            else if (k == "baselines.domination") c.baselines.domination = d();
            else if (k == "baselines.residual") c.baselines.residual = d();
            else if (k == "baselines.weak_norm") c.baselines.weak_norm = d();
            else if (k == "baselines.tolerance") c.baselines.tolerance = d();
            else if (k.rfind("baselines.weighted_p", 0) == 0) c.baselines.weighted[io::parse_double(k.substr(20))] = d();
            else if (k == "output.dir") c.out_dir = v;
            else if (k == "run.jobs") c.jobs = unsigned(i());
            else throw InvalidArgument("unknown config key: " + k);
        }
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file: " + path);
    return parse(in);
}

}  // namespace czvar
