#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpplan/geometry.hpp"
#include "gpplan/gp.hpp"

namespace gpplan {

// Ground-truth scalar field over a grid, row-major values.
struct FieldGrid {
  int width = 0;
  int height = 0;
  double cell_size = 0.0;
  std::string units = "none";
  std::vector<double> values;

  double at(int index) const { return values.at(index); }
  Domain domain() const { return Domain::grid(width, height, cell_size); }
};

// Draws one realization of the prior at every grid cell: mean prior_mean,
// covariance K (no measurement noise) with a 1e-10 * signal_variance diagonal
// jitter for factorization stability. Deterministic for a given seed.
// Guarded to grids of at most 2500 cells.
FieldGrid sample_field(int width, int height, double cell_size, const GpHyperparams& hyper,
                       std::uint64_t seed, const std::string& units = "none");

// CSV layout: one header line "width,height,cell_size,units", then `height`
// rows of `width` comma-separated values. Values are written with shortest
// round-trip formatting, so save followed by load reproduces bits.
FieldGrid load_field_csv(const std::string& path);
void save_field_csv(const FieldGrid& field, const std::string& path);
FieldGrid read_field_csv(std::istream& in);
void write_field_csv(const FieldGrid& field, std::ostream& out);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace gpplan
