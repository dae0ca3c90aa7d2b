#pragma once

// Signal serialization. Both formats carry a header (d, n, resolution,
// domain center, domain side) followed by cell values in row-major cell order,
// the n components of a cell adjacent. Round trips are bit-exact: the binary
// format stores IEEE-754 doubles verbatim (little-endian) and the CSV format
// uses shortest round-trip decimal text.

#include <iosfwd>
#include <string>

#include "czvar/grid.hpp"

namespace czvar::io {

void write_binary(std::ostream& out, const VectorSignal& f);
VectorSignal read_binary(std::istream& in);

void write_csv(std::ostream& out, const VectorSignal& f);
VectorSignal read_csv(std::istream& in);

/// Picks the format from the extension: ".csv" is text, anything else binary.
void save(const std::string& path, const VectorSignal& f);
VectorSignal load(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace czvar::io
