#ifndef QPL_FIELD_IO_HPP
#define QPL_FIELD_IO_HPP

#include <cstddef>
#include <iosfwd>
#include <string>

#include "qpl/sampler.hpp"

namespace qpl {

// Flat binary layout, little-endian:
//   char[8]  magic "QPLFIELD"
//   uint32   version (1)
//   uint32   geometry (0 = torus, 1 = window)
//   uint64   nx, ny
//   double   g[6]  torus: b1.x b1.y b2.x b2.y 0 0
//                  window: center.x center.y half_width spacing 0 0
//   double   values[nx * ny], row-major
void write_field_binary(std::ostream& os, const ScalarField& f);
ScalarField read_field_binary(std::istream& is);

void save_field_binary(const std::string& path, const ScalarField& f);
ScalarField load_field_binary(const std::string& path);

/// Columns i,j,x,y,value. Refuses fields larger than `max_cells`.
void write_field_csv(std::ostream& os, const ScalarField& f, std::size_t max_cells = 262144);

}  // namespace qpl

#endif  // QPL_FIELD_IO_HPP
