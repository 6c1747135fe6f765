#ifndef MRT_GRID_HPP
#define MRT_GRID_HPP

#include <cmath>
#include <cstdint>

namespace mrt {

// Uniform lattice with spacing `step`.  Cell n covers (n*step, (n+1)*step];
// lattice points run from lo*step to hi*step inclusive, cells from lo to hi-1.
struct Grid {
  double step = 1e-2;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  static Grid from_window(double a, double b, double step) {
    Grid g;
    g.step = step;
    g.lo = static_cast<std::int64_t>(std::floor(a / step + 1e-9));
    g.hi = static_cast<std::int64_t>(std::ceil(b / step - 1e-9));
    if (g.hi <= g.lo) g.hi = g.lo + 1;
    return g;
  }

  double left() const { return static_cast<double>(lo) * step; }
  double right() const { return static_cast<double>(hi) * step; }
  std::int64_t ncells() const { return hi - lo; }
  std::int64_t npoints() const { return hi - lo + 1; }
  double point(std::int64_t k) const { return static_cast<double>(lo + k) * step; }
  double cell_left(std::int64_t k) const { return static_cast<double>(lo + k) * step; }
  double cell_center(std::int64_t k) const { return (static_cast<double>(lo + k) + 0.5) * step; }

  Grid expanded(std::int64_t cells_left, std::int64_t cells_right) const {
    Grid g = *this;
    g.lo -= cells_left;
    g.hi += cells_right;
    return g;
  }
};

}  // namespace mrt

#endif  // MRT_GRID_HPP
