#pragma once

#include <utility>
#include <vector>

namespace gpplan {

// A sensing location: index into the domain enumeration plus physical
// coordinates (same distance units as the kernel length scales).
struct Location {
  int index = -1;
  double x = 0.0;
  double y = 0.0;
};

// Finite set of candidate sensing locations. Either a regular grid
// (row-major enumeration, index = row * width + col, spacing cell_size)
// or an explicit point list for small bespoke instances.
class Domain {
 public:
  static Domain grid(int width, int height, double cell_size);
  static Domain from_points(std::vector<std::pair<double, double>> points);

  int size() const { return static_cast<int>(xs_.size()); }
  Location location(int index) const;

  bool is_grid() const { return width_ > 0; }
  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

 private:
  std::vector<double> xs_, ys_;
  int width_ = 0, height_ = 0;
  double cell_size_ = 0.0;
};

// Movement constraints: for each location index, the indices reachable in one
// step. Every location must keep at least one successor.
struct ActionModel {
  std::vector<std::vector<int>> successors;

  const std::vector<int>& at(int index) const { return successors.at(index); }
  int max_branching() const;
};

// 4-neighborhood on a grid domain, truncated at the boundary.
ActionModel grid_neighbors(const Domain& domain);

// Every location reachable from every location (used by small test domains).
ActionModel complete_moves(const Domain& domain);

}  // namespace gpplan
