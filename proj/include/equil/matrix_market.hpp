#pragma once

#include <iosfwd>
#include <string>

#include "equil/explicit_matrix.hpp"

namespace equil {

/// Matrix Market I/O, restricted to the slice this project uses: real,
/// general matrices in coordinate (sparse) or array (dense) format.
/// Anything else (pattern/complex/integer fields, symmetry markers,
/// duplicate coordinates, malformed counts) is a parse error that names the
/// offending line. Writes use 17 significant digits so a read-after-write
/// reproduces every value bit for bit.
ExplicitMatrix read_matrix_market(std::istream& in);
ExplicitMatrix read_matrix_market_file(const std::string& path);

void write_matrix_market(std::ostream& out, const ExplicitMatrix& A);
void write_matrix_market_file(const std::string& path,
                              const ExplicitMatrix& A);

}  // namespace equil
