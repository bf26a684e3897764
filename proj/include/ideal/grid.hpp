#pragma once

// Scalar fields on uniform rectangular (u, v) grids and the finite-difference
// stencils shared by every module. Values are row-major: row index iy (the v
// direction), column index ix (the u direction).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ideal {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input does not satisfy an operation's precondition (e.g. unsolved field).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridSpec {
  int nx = 3;
  int ny = 3;
  double hx = 1.0;
  double hy = 1.0;
  double u0 = 0.0;
  double v0 = 0.0;

  void validate() const {
    if (nx < 3 || ny < 3) throw GridError("grid needs at least 3x3 nodes");
    if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy))
      throw GridError("grid spacings must be positive");
    if (!std::isfinite(u0) || !std::isfinite(v0)) throw GridError("grid origin must be finite");
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }
  double u(int ix) const { return u0 + hx * ix; }
  double v(int iy) const { return v0 + hy * iy; }
  bool interior(int ix, int iy) const { return ix > 0 && iy > 0 && ix < nx - 1 && iy < ny - 1; }
  bool operator==(const GridSpec&) const = default;
  /// Characteristic spacing reported alongside residuals.
  double h() const { return std::max(hx, hy); }
};

struct ScalarField2D {
  GridSpec grid;
  std::string name;
  std::vector<double> values;

  ScalarField2D() = default;
  ScalarField2D(const GridSpec& g, std::string n, double fill = 0.0)
      : grid(g), name(std::move(n)), values(g.size(), fill) {
    grid.validate();
  }

  double& operator()(int ix, int iy) { return values[grid.index(ix, iy)]; }
  double operator()(int ix, int iy) const { return values[grid.index(ix, iy)]; }

  void validate() const {
    grid.validate();
    if (values.size() != grid.size()) throw GridError("field '" + name + "': value count does not match grid");
    for (double x : values)
      if (!std::isfinite(x)) throw GridError("field '" + name + "': non-finite value");
  }

  static ScalarField2D from_function(const GridSpec& g, std::string n,
                                     const std::function<double(double, double)>& fn) {
    ScalarField2D f(g, std::move(n));
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) f(ix, iy) = fn(g.u(ix), g.v(iy));
    return f;
  }

  template <class Fn>
  ScalarField2D map(std::string n, Fn&& fn) const {
    ScalarField2D out(grid, std::move(n));
    for (std::size_t k = 0; k < values.size(); ++k) out.values[k] = fn(values[k]);
    return out;
  }
};

inline void require_same_grid(const ScalarField2D& a, const ScalarField2D& b) {
  if (!(a.grid == b.grid)) throw GridError("grid mismatch between '" + a.name + "' and '" + b.name + "'");
}

/// 5-point Laplacian at an interior node.
inline double laplacian5(const ScalarField2D& f, int ix, int iy) {
  const auto& g = f.grid;
  const double c = f(ix, iy);
  return (f(ix + 1, iy) - 2.0 * c + f(ix - 1, iy)) / (g.hx * g.hx) +
         (f(ix, iy + 1) - 2.0 * c + f(ix, iy - 1)) / (g.hy * g.hy);
}

/// Second-order first derivative along u: central inside, one-sided at edges.
inline double d_u(const ScalarField2D& f, int ix, int iy) {
  const auto& g = f.grid;
  if (ix == 0) return (-3.0 * f(0, iy) + 4.0 * f(1, iy) - f(2, iy)) / (2.0 * g.hx);
  if (ix == g.nx - 1) return (3.0 * f(ix, iy) - 4.0 * f(ix - 1, iy) + f(ix - 2, iy)) / (2.0 * g.hx);
  return (f(ix + 1, iy) - f(ix - 1, iy)) / (2.0 * g.hx);
}

inline double d_v(const ScalarField2D& f, int ix, int iy) {
  const auto& g = f.grid;
  if (iy == 0) return (-3.0 * f(ix, 0) + 4.0 * f(ix, 1) - f(ix, 2)) / (2.0 * g.hy);
  if (iy == g.ny - 1) return (3.0 * f(ix, iy) - 4.0 * f(ix, iy - 1) + f(ix, iy - 2)) / (2.0 * g.hy);
  return (f(ix, iy + 1) - f(ix, iy - 1)) / (2.0 * g.hy);
}

inline ScalarField2D derivative_u(const ScalarField2D& f, std::string name) {
  ScalarField2D out(f.grid, std::move(name));
  for (int iy = 0; iy < f.grid.ny; ++iy)
    for (int ix = 0; ix < f.grid.nx; ++ix) out(ix, iy) = d_u(f, ix, iy);
  return out;
}

inline ScalarField2D derivative_v(const ScalarField2D& f, std::string name) {
  ScalarField2D out(f.grid, std::move(name));
  for (int iy = 0; iy < f.grid.ny; ++iy)
    for (int ix = 0; ix < f.grid.nx; ++ix) out(ix, iy) = d_v(f, ix, iy);
  return out;
}

namespace detail {

// Start node and local coordinate of a 4-point stencil covering x (in nodes).
inline std::pair<int, double> stencil(double x, int n) {
  int base = static_cast<int>(std::floor(x));
  base = std::clamp(base, 1, n - 3);
  return {base - 1, x - (base - 1)};
}

// Lagrange weights for a 4-node stencil when the local coordinate is t in [0,3].
inline std::array<double, 4> lagrange4(double t) {
  std::array<double, 4> w{};
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) p *= (t - b) / static_cast<double>(a - b);
    w[a] = p;
  }
  return w;
}

}  // namespace detail

/// Tensor-product cubic interpolation at fractional node coordinates
/// (fx, fy); exact at nodes. Needs at least 4 nodes per direction.
inline double interpolate_cubic(const ScalarField2D& f, double fx, double fy) {
  const auto& g = f.grid;
  const bool on_x = fx == std::floor(fx);
  const bool on_y = fy == std::floor(fy);
  if (on_x && on_y) return f(static_cast<int>(fx), static_cast<int>(fy));
  if (g.nx < 4 || g.ny < 4) throw GridError("cubic interpolation needs 4 nodes per direction");
  if (on_y) {
    const auto [sx, tx] = detail::stencil(fx, g.nx);
    const auto wx = detail::lagrange4(tx);
    const int iy = static_cast<int>(fy);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += wx[a] * f(sx + a, iy);
    return s;
  }
  if (on_x) {
    const auto [sy, ty] = detail::stencil(fy, g.ny);
    const auto wy = detail::lagrange4(ty);
    const int ix = static_cast<int>(fx);
    double s = 0.0;
    for (int b = 0; b < 4; ++b) s += wy[b] * f(ix, sy + b);
    return s;
  }
  const auto [sx, tx] = detail::stencil(fx, g.nx);
  const auto [sy, ty] = detail::stencil(fy, g.ny);
  const auto wx = detail::lagrange4(tx);
  const auto wy = detail::lagrange4(ty);
  double s = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) s += wx[a] * wy[b] * f(sx + a, sy + b);
  return s;
}

inline double max_norm_interior(const ScalarField2D& f) {
  double m = 0.0;
  for (int iy = 1; iy < f.grid.ny - 1; ++iy)
    for (int ix = 1; ix < f.grid.nx - 1; ++ix) m = std::max(m, std::abs(f(ix, iy)));
  return m;
}

inline double rms_interior(const ScalarField2D& f) {
  double s = 0.0;
  std::size_t n = 0;
  for (int iy = 1; iy < f.grid.ny - 1; ++iy)
    for (int ix = 1; ix < f.grid.nx - 1; ++ix) {
      s += f(ix, iy) * f(ix, iy);
      ++n;
    }
  return n ? std::sqrt(s / static_cast<double>(n)) : 0.0;
}

}  // namespace ideal
