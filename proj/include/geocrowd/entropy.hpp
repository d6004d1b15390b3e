#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "geocrowd/domain.hpp"

namespace geocrowd {

// Per-cell visit counts over a regular grid on the unit square. A worker
// visits every cell whose centre lies inside its working area, plus the cell
// it stands in.
class VisitHistory {
 public:
  struct Cell {
    int col = 0;
    int row = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
  };

  explicit VisitHistory(double cell_side = 0.05) : side_(cell_side) {
    if (!(cell_side > 0.0) || cell_side > 1.0) {
      throw std::invalid_argument("cell side must lie in (0, 1]");
    }
    n_ = static_cast<int>(std::ceil(1.0 / cell_side - 1e-9));
    per_worker_.resize(static_cast<std::size_t>(n_) * n_);
    totals_.assign(per_worker_.size(), 0);
  }

  double cell_side() const { return side_; }
  int cells_per_axis() const { return n_; }

  Cell cell_of(Point p) const {
    auto axis = [&](double v) {
      return std::clamp(static_cast<int>(std::floor(v / side_)), 0, n_ - 1);
    };
    return {axis(p.x), axis(p.y)};
  }

  Point center_of(Cell c) const {
    return {(c.col + 0.5) * side_, (c.row + 0.5) * side_};
  }

  void record_visit(Cell c, int worker_id, int count = 1) {
    std::size_t k = index(c);
    per_worker_[k][worker_id] += count;
    totals_[k] += count;
  }

  void record_worker(const Worker& w, Geometry g = Geometry::square) {
    Cell own = cell_of(w.location);
    Cell lo = cell_of({w.location.x - w.radius, w.location.y - w.radius});
    Cell hi = cell_of({w.location.x + w.radius, w.location.y + w.radius});
    for (int col = lo.col; col <= hi.col; ++col) {
      for (int row = lo.row; row <= hi.row; ++row) {
        Cell c{col, row};
        if (c == own || in_working_area(w, center_of(c), g)) {
          record_visit(c, w.id);
        }
      }
    }
  }

  int total_visits(Cell c) const { return totals_[index(c)]; }

  int worker_visits(Cell c, int worker_id) const {
    const auto& m = per_worker_[index(c)];
    auto it = m.find(worker_id);
    return it == m.end() ? 0 : it->second;
  }

  const std::map<int, int>& visits(Cell c) const { return per_worker_[index(c)]; }

 private:
  std::size_t index(Cell c) const {
    if (c.col < 0 || c.row < 0 || c.col >= n_ || c.row >= n_) {
      throw std::out_of_range("cell outside the grid");
    }
    return static_cast<std::size_t>(c.row) * n_ + c.col;
  }

  double side_;
  int n_ = 0;
  std::vector<std::map<int, int>> per_worker_;
  std::vector<int> totals_;
};

// Shannon entropy (natural log) of the per-worker visit shares of a cell.
// Cells nobody has visited score 0.
inline double location_entropy(const VisitHistory& h, VisitHistory::Cell c) {
  int total = h.total_visits(c);
  if (total <= 0) return 0.0;
  double e = 0.0;
  for (const auto& [worker, count] : h.visits(c)) {
    if (count <= 0) continue;
    double p = static_cast<double>(count) / total;
    e -= p * std::log(p);
  }
  return e;
}

}  // namespace geocrowd
