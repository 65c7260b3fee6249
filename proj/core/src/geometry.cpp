#include "gpplan/geometry.hpp"

#include <algorithm>

#include "gpplan/errors.hpp"

namespace gpplan {

Domain Domain::grid(int width, int height, double cell_size) {
  if (width < 1 || height < 1) throw ArgumentError("Domain::grid: dimensions must be positive");
  if (cell_size <= 0.0) throw ArgumentError("Domain::grid: cell size must be positive");
  Domain d;
  d.width_ = width;
  d.height_ = height;
  d.cell_size_ = cell_size;
  d.xs_.reserve(static_cast<std::size_t>(width) * height);
  d.ys_.reserve(static_cast<std::size_t>(width) * height);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      d.xs_.push_back(col * cell_size);
      d.ys_.push_back(row * cell_size);
    }
  }
  return d;
}

Domain Domain::from_points(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw ArgumentError("Domain::from_points: empty point set");
  Domain d;
  d.xs_.reserve(points.size());
  d.ys_.reserve(points.size());
  for (const auto& [x, y] : points) {
    d.xs_.push_back(x);
    d.ys_.push_back(y);
  }
  return d;
}

Location Domain::location(int index) const {
  if (index < 0 || index >= size()) throw ArgumentError("Domain::location: index out of range");
  return Location{index, xs_[index], ys_[index]};
}

int ActionModel::max_branching() const {
  std::size_t best = 0;
  for (const auto& s : successors) best = std::max(best, s.size());
  return static_cast<int>(best);
}

ActionModel grid_neighbors(const Domain& domain) {
  if (!domain.is_grid()) throw ArgumentError("grid_neighbors: domain is not a grid");
  const int w = domain.width();
  const int h = domain.height();
  ActionModel model;
  model.successors.resize(static_cast<std::size_t>(w) * h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      auto& out = model.successors[static_cast<std::size_t>(row) * w + col];
      // ascending index order: up, left, right, down
      if (row > 0) out.push_back((row - 1) * w + col);
      if (col > 0) out.push_back(row * w + col - 1);
      if (col + 1 < w) out.push_back(row * w + col + 1);
      if (row + 1 < h) out.push_back((row + 1) * w + col);
    }
  }
  return model;
}

ActionModel complete_moves(const Domain& domain) {
  ActionModel model;
  model.successors.resize(domain.size());
  for (int i = 0; i < domain.size(); ++i) {
    for (int j = 0; j < domain.size(); ++j) model.successors[i].push_back(j);
  }
  return model;
}

}  // namespace gpplan
