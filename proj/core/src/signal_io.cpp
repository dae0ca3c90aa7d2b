#include "czvar/signal_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace czvar::io {

namespace {

constexpr char kMagic[8] = {'C', 'Z', 'V', 'S', 'I', 'G', '0', '1'};
constexpr const char* kCsvTag = "# czvar-signal v1";

static_assert(std::endian::native == std::endian::little, "binary signal format assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated binary signal");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        parts.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw FormatError("bad integer field '" + std::string(s) + "'");
    return v;
}

VectorSignal build(int d, int n, int resolution, Point center, double side, std::vector<double> values) {
    const Grid grid(d, resolution, make_cube(d, center, side));
    return {grid, n, std::move(values)};
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

double parse_double(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw FormatError("bad numeric field '" + std::string(text) + "'");
    return v;
}

void write_binary(std::ostream& out, const VectorSignal& f) {
    const Grid& g = f.grid();
    out.write(kMagic, sizeof kMagic);
    put<std::int32_t>(out, g.dim());
    put<std::int32_t>(out, f.components());
    put<std::int32_t>(out, g.resolution());
    put<std::int32_t>(out, 0);
    put<double>(out, g.domain().center[0]);
    put<double>(out, g.domain().center[1]);
    put<double>(out, g.domain().side);
    const auto v = f.values();
    out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

VectorSignal read_binary(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("not a czvar binary signal");
    const int d = get<std::int32_t>(in);
    const int n = get<std::int32_t>(in);
    const int res = get<std::int32_t>(in);
    get<std::int32_t>(in);
    Point c{get<double>(in), get<double>(in)};
    const double side = get<double>(in);
    if (d < 1 || d > kMaxDim || n < 1 || res < 1) throw FormatError("bad binary signal header");
    const std::size_t cells = d == 1 ? std::size_t(res) : std::size_t(res) * res;
    std::vector<double> values(cells * n);
    in.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * sizeof(double)));
    if (!in) throw FormatError("truncated binary signal");
    return build(d, n, res, c, side, std::move(values));
}

void write_csv(std::ostream& out, const VectorSignal& f) {
    const Grid& g = f.grid();
    out << kCsvTag << '\n';
    out << "d,n,resolution,center0,center1,side\n";
    out << g.dim() << ',' << f.components() << ',' << g.resolution() << ',' << format_double(g.domain().center[0])
        << ',' << format_double(g.domain().center[1]) << ',' << format_double(g.domain().side) << '\n';
    out << "cell";
    for (int k = 0; k < f.components(); ++k) out << ",v" << k;
    out << '\n';
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        out << c;
        for (double v : f.at(c)) out << ',' << format_double(v);
        out << '\n';
    }
}

VectorSignal read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kCsvTag, 0) != 0) throw FormatError("not a czvar CSV signal");
    std::getline(in, line);  // column names of the header row
    if (!std::getline(in, line)) throw FormatError("missing CSV header values");
    const auto h = split(line, ',');
    if (h.size() != 6) throw FormatError("bad CSV header");
    const int d = parse_int(h[0]), n = parse_int(h[1]), res = parse_int(h[2]);
    const Point c{parse_double(h[3]), parse_double(h[4])};
    const double side = parse_double(h[5]);
    if (d < 1 || d > kMaxDim || n < 1 || res < 1) throw FormatError("bad CSV header");
    std::getline(in, line);  // value column names
    const std::size_t cells = d == 1 ? std::size_t(res) : std::size_t(res) * res;
    std::vector<double> values;
    values.reserve(cells * n);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (!std::getline(in, line)) throw FormatError("truncated CSV signal");
        const auto parts = split(line, ',');
        if (parts.size() != std::size_t(n) + 1 || std::size_t(parse_int(parts[0])) != cell)
            throw FormatError("bad CSV row " + std::to_string(cell));
        for (int k = 0; k < n; ++k) values.push_back(parse_double(parts[k + 1]));
    }
    return build(d, n, res, c, side, std::move(values));
}

void save(const std::string& path, const VectorSignal& f) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    std::ofstream out(path, csv ? std::ios::out : std::ios::out | std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    csv ? write_csv(out, f) : write_binary(out, f);
}

VectorSignal load(const std::string& path) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    std::ifstream in(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return csv ? read_csv(in) : read_binary(in);
}

}  // namespace czvar::io
