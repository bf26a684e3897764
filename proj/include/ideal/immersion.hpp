#pragma once

// Reconstruction of the immersion M^3 -> C^3 by integrating the
// Gauss-Weingarten system along lattice lines with classical RK4:
//
//   D_X x   = sum_i X^i E_i
//   D_X E_j = sum_i X^i ( sum_k gamma_ij^k E_k + sum_k H_ijk jE_k )
//
// The coefficient matrix lies in u(3), so the frame stays unitary up to the
// RK4 truncation error.

#include <Eigen/Dense>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ideal/m3.hpp"

namespace ideal {

struct FrameState {
  C3 x{};
  std::array<C3, 3> e{};
};

inline FrameState operator+(const FrameState& a, const FrameState& b) {
  FrameState r;
  r.x = a.x + b.x;
  for (int i = 0; i < 3; ++i) r.e[i] = a.e[i] + b.e[i];
  return r;
}
inline FrameState operator*(double s, const FrameState& a) {
  FrameState r;
  r.x = s * a.x;
  for (int i = 0; i < 3; ++i) r.e[i] = s * a.e[i];
  return r;
}

inline double max_abs_diff(const FrameState& a, const FrameState& b) {
  double m = 0.0;
  for (int n = 0; n < 6; ++n) {
    m = std::max(m, std::abs(a.x[n] - b.x[n]));
    for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a.e[i][n] - b.e[i][n]));
  }
  return m;
}

/// max |G - I| for the Gram matrix of {E1, E2, E3, jE1, jE2, jE3}.
inline double orthonormality_residual(const std::array<C3, 3>& e) {
  std::array<C3, 6> b{e[0], e[1], e[2], apply_j3(e[0]), apply_j3(e[1]), apply_j3(e[2])};
  double m = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m = std::max(m, std::abs(dot(b[i], b[j]) - (i == j ? 1.0 : 0.0)));
  return m;
}

/// Node data at fractional lattice coordinates (fx, fy) and height t, by
/// cubic interpolation of F, F_u, F_v. Integrable regime only.
inline NodeGeometry geometry_at(const M3Data& d, double fx, double fy, double t) {
  if (d.regime != Regime::Integrable)
    throw PreconditionError("immersion integration is only supported in the integrable regime");
  return integrable_geometry(interpolate_cubic(d.F, fx, fy), interpolate_cubic(d.F_u, fx, fy),
                             interpolate_cubic(d.F_v, fx, fy), t);
}

/// Components of the coordinate field d_axis in the frame E.
inline Vec3 coordinate_in_frame(const NodeGeometry& g, int axis) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) m(a, i) = g.frame[i][a];
  const Eigen::Matrix3d inv = m.inverse();
  return {inv(0, axis), inv(1, axis), inv(2, axis)};
}

/// Right-hand side of the Gauss-Weingarten system along d_axis.
inline FrameState gauss_weingarten(const NodeGeometry& g, int axis, const FrameState& s) {
  const Vec3 x = coordinate_in_frame(g, axis);
  const Tensor3 gam = connection_table(g);
  const Tensor3 h = second_fundamental_tensor(g.lambda);
  const std::array<C3, 3> je{apply_j3(s.e[0]), apply_j3(s.e[1]), apply_j3(s.e[2])};
  FrameState out;
  for (int i = 0; i < 3; ++i) out.x = out.x + x[i] * s.e[i];
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      if (x[i] == 0.0) continue;
      for (int k = 0; k < 3; ++k) {
        const double c = x[i] * gam[i][j][k];
        const double n = x[i] * h[i][j][k];
        if (c != 0.0) out.e[j] = out.e[j] + c * s.e[k];
        if (n != 0.0) out.e[j] = out.e[j] + n * je[k];
      }
    }
  return out;
}

struct LatticePoint {
  int ix = 0, iy = 0, k = 0;
  bool operator==(const LatticePoint&) const = default;
};

/// RK4 from node p to its neighbour in direction `axis` (0 = u, 1 = v,
/// 2 = t) and sign `dir` (+1 / -1), in `substeps` equal steps.
inline FrameState rk4_step(const M3Data& d, LatticePoint p, int axis, int dir, FrameState s, int substeps = 1) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const double h = dir * d.spacing()[axis] / substeps;
  auto geom = [&](double frac) {
    double fx = p.ix, fy = p.iy;
    double t = d.taxis.t(p.k);
    if (axis == 0) fx += dir * frac;
    if (axis == 1) fy += dir * frac;
    if (axis == 2) t += dir * frac * d.taxis.h();
    return geometry_at(d, fx, fy, t);
  };
  NodeGeometry g0 = geom(0.0);
  for (int m = 0; m < substeps; ++m) {
    const NodeGeometry gm = geom((m + 0.5) / substeps), g1 = geom(double(m + 1) / substeps);
    const FrameState k1 = gauss_weingarten(g0, axis, s);
    const FrameState k2 = gauss_weingarten(gm, axis, s + (0.5 * h) * k1);
    const FrameState k3 = gauss_weingarten(gm, axis, s + (0.5 * h) * k2);
    const FrameState k4 = gauss_weingarten(g1, axis, s + h * k3);
    s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g0 = g1;
  }
  return s;
}

struct ImmersionOptions {
  LatticePoint base;
  C3 x0{};
  std::array<C3, 3> frame0{C3{1, 0, 0, 0, 0, 0}, C3{0, 0, 1, 0, 0, 0}, C3{0, 0, 0, 0, 1, 0}};
  double drift_tolerance = 1e-6;
  int substeps = 1;  // RK4 steps per lattice edge
};

struct ImmersionGrid {
  GridSpec grid;
  TAxis taxis;
  LatticePoint base;
  std::string path_order = "t-line, u-lines, v-lines";
  int substeps = 1;
  std::vector<FrameState> states;  // index = (k * ny + iy) * nx + ix
  std::vector<double> orthonormality;

  std::size_t index(int ix, int iy, int k) const {
    return static_cast<std::size_t>(k) * grid.size() + grid.index(ix, iy);
  }
  const FrameState& at(int ix, int iy, int k) const { return states[index(ix, iy, k)]; }
};

inline ImmersionGrid integrate_immersion(const M3Data& d, const ImmersionOptions& opts = {}) {
  if (d.regime != Regime::Integrable)
    throw PreconditionError("immersion integration is only supported in the integrable regime");
  for (const auto& r : d.diagnostics)
    if (!r.pass && !r.informational)
      throw PreconditionError("M3 data is not consistent: diagnostic '" + r.name + "' fails");
  const auto& b = opts.base;
  if (b.ix < 0 || b.iy < 0 || b.k < 0 || b.ix >= d.grid.nx || b.iy >= d.grid.ny || b.k >= d.taxis.nt)
    throw std::invalid_argument("base node outside the lattice");
  if (orthonormality_residual(opts.frame0) > 1e-12)
    throw std::invalid_argument("initial frame is not unitary (E_i, jE_i must be orthonormal)");

  ImmersionGrid out;
  out.grid = d.grid;
  out.taxis = d.taxis;
  out.base = b;
  out.substeps = opts.substeps;
  out.states.resize(d.node_count());
  out.orthonormality.assign(d.node_count(), 0.0);
  std::vector<char> done(d.node_count(), 0);

  auto store = [&](LatticePoint p, const FrameState& s) {
    const std::size_t id = out.index(p.ix, p.iy, p.k);
    const double r = orthonormality_residual(s.e);
    if (!(r <= opts.drift_tolerance)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "frame drift %.3e exceeds %.1e at node (%d, %d, %d)", r, opts.drift_tolerance,
                    p.ix, p.iy, p.k);
      throw GeometryError(buf);
    }
    out.states[id] = s;
    out.orthonormality[id] = r;
    done[id] = 1;
  };
  // March from p along axis in both directions until the lattice edge.
  auto sweep = [&](LatticePoint p, int axis) {
    const int n[3] = {d.grid.nx, d.grid.ny, d.taxis.nt};
    for (int dir : {+1, -1}) {
      LatticePoint q = p;
      FrameState s = out.at(p.ix, p.iy, p.k);
      while (true) {
        int* c = axis == 0 ? &q.ix : axis == 1 ? &q.iy : &q.k;
        if (*c + dir < 0 || *c + dir >= n[axis]) break;
        s = rk4_step(d, q, axis, dir, s, opts.substeps);
        *c += dir;
        store(q, s);
      }
    }
  };

  FrameState s0;
  s0.x = opts.x0;
  s0.e = opts.frame0;
  store(b, s0);
  sweep(b, 2);
  for (int k = 0; k < d.taxis.nt; ++k) sweep({b.ix, b.iy, k}, 0);
  for (int k = 0; k < d.taxis.nt; ++k)
    for (int ix = 0; ix < d.grid.nx; ++ix) sweep({ix, b.iy, k}, 1);
  return out;
}

/// Per-node holonomy defects: integrating one step along a then b versus b
/// then a from node p, for the coordinate planes (u,v), (u,t), (v,t).
inline std::array<LatticeField, 3> holonomy_fields(const M3Data& d, const ImmersionGrid& im) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<LatticeField, 3> out{LatticeField{"holonomy_uv", std::vector<double>(d.node_count(), nan)},
                                  LatticeField{"holonomy_ut", std::vector<double>(d.node_count(), nan)},
                                  LatticeField{"holonomy_vt", std::vector<double>(d.node_count(), nan)}};
  const int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  parallel_for(d.node_count(), [&](std::size_t id) {
    const int k = static_cast<int>(id / d.grid.size());
    const int iy = static_cast<int>((id % d.grid.size()) / static_cast<std::size_t>(d.grid.nx));
    const int ix = static_cast<int>(id % static_cast<std::size_t>(d.grid.nx));
    const LatticePoint p{ix, iy, k};
    for (int pl = 0; pl < 3; ++pl) {
      const int a = planes[pl][0], b = planes[pl][1];
      auto shifted = [&](int axis) {
        LatticePoint q = p;
        (axis == 0 ? q.ix : axis == 1 ? q.iy : q.k) += 1;
        return q;
      };
      const LatticePoint pa = shifted(a), pb = shifted(b);
      const int n[3] = {d.grid.nx, d.grid.ny, d.taxis.nt};
      const int ca[3] = {pa.ix, pa.iy, pa.k};
      const int cb[3] = {pb.ix, pb.iy, pb.k};
      if (ca[a] >= n[a] || cb[b] >= n[b]) continue;
      const FrameState& s = im.at(ix, iy, k);
      const int m = im.substeps;
      const FrameState via_a = rk4_step(d, pb, a, +1, rk4_step(d, p, b, +1, s, m), m);
      const FrameState via_b = rk4_step(d, pa, b, +1, rk4_step(d, p, a, +1, s, m), m);
      out[pl].values[id] = max_abs_diff(via_a, via_b);
    }
  });
  return out;
}

/// <j x_a, x_b> with central differences of the integrated positions, for
/// (a,b) = (u,v), (u,t), (v,t). Interior nodes.
inline LatticeField lagrangian_field(const M3Data& d, const ImmersionGrid& im) {
  LatticeField f{"lagrangian", std::vector<double>(d.node_count(), std::numeric_limits<double>::quiet_NaN())};
  const auto h = d.spacing();
  for (int k = 1; k < d.taxis.nt - 1; ++k)
    for (int iy = 1; iy < d.grid.ny - 1; ++iy)
      for (int ix = 1; ix < d.grid.nx - 1; ++ix) {
        const C3 xu = (0.5 / h[0]) * (im.at(ix + 1, iy, k).x - im.at(ix - 1, iy, k).x);
        const C3 xv = (0.5 / h[1]) * (im.at(ix, iy + 1, k).x - im.at(ix, iy - 1, k).x);
        const C3 xt = (0.5 / h[2]) * (im.at(ix, iy, k + 1).x - im.at(ix, iy, k - 1).x);
        f.values[d.index(ix, iy, k)] =
            std::max({std::abs(dot(apply_j3(xu), xv)), std::abs(dot(apply_j3(xu), xt)), std::abs(dot(apply_j3(xv), xt))});
      }
  return f;
}

inline LatticeField orthonormality_field(const ImmersionGrid& im) { return {"orthonormality", im.orthonormality}; }

/// Largest change in pairwise distances |x_p - x_q| between two
/// reconstructions, over all node pairs sharing a lattice line through the
/// node q0 and a sample of other nodes. Rigid unitary motions leave it zero.
inline double pairwise_distance_defect(const ImmersionGrid& a, const ImmersionGrid& b, int stride = 3) {
  if (!(a.grid == b.grid) || !(a.taxis == b.taxis)) throw std::invalid_argument("immersion grids differ");
  std::vector<std::size_t> ids;
  for (std::size_t n = 0; n < a.states.size(); n += static_cast<std::size_t>(stride)) ids.push_back(n);
  double m = 0.0;
  for (std::size_t p = 0; p < ids.size(); ++p)
    for (std::size_t q = p + 1; q < ids.size(); ++q) {
      const double da = norm(a.states[ids[p]].x - a.states[ids[q]].x);
      const double db = norm(b.states[ids[p]].x - b.states[ids[q]].x);
      m = std::max(m, std::abs(da - db));
    }
  return m;
}

// ---- serialization --------------------------------------------------------

inline Json immersion_to_json(const ImmersionGrid& im) {
  Json j;
  j["grid"] = Json{{"nx", im.grid.nx}, {"ny", im.grid.ny}, {"hx", im.grid.hx}, {"hy", im.grid.hy},
                   {"origin", Json::array({im.grid.u0, im.grid.v0})}};
  j["t_axis"] = taxis_to_json(im.taxis);
  j["integration"] = Json{{"method", "rk4"},
                          {"path_order", im.path_order},
                          {"substeps", im.substeps},
                          {"steps", Json::array({im.grid.hx, im.grid.hy, im.taxis.h()})},
                          {"base_node", Json::array({im.base.ix, im.base.iy, im.base.k})}};
  std::vector<double> pos, frames;
  pos.reserve(6 * im.states.size());
  frames.reserve(18 * im.states.size());
  for (const auto& s : im.states) {
    pos.insert(pos.end(), s.x.begin(), s.x.end());
    for (const auto& e : s.e) frames.insert(frames.end(), e.begin(), e.end());
  }
  j["layout"] = "index = (k * ny + iy) * nx + ix; C^3 vectors as (Re z1, Im z1, Re z2, Im z2, Re z3, Im z3)";
  j["positions"] = pos;
  j["frames"] = frames;
  j["orthonormality"] = im.orthonormality;
  return j;
}

inline ImmersionGrid immersion_from_json(const Json& j) {
  try {
    ImmersionGrid im;
    const auto& g = j.at("grid");
    im.grid.nx = g.at("nx").get<int>();
    im.grid.ny = g.at("ny").get<int>();
    im.grid.hx = g.at("hx").get<double>();
    im.grid.hy = g.at("hy").get<double>();
    im.grid.u0 = g.at("origin").at(0).get<double>();
    im.grid.v0 = g.at("origin").at(1).get<double>();
    im.grid.validate();
    im.taxis = taxis_from_json(j.at("t_axis"));
    const auto& in = j.at("integration");
    im.path_order = in.at("path_order").get<std::string>();
    im.substeps = in.at("substeps").get<int>();
    const auto& b = in.at("base_node");
    im.base = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>()};
    const auto pos = j.at("positions").get<std::vector<double>>();
    const auto frames = j.at("frames").get<std::vector<double>>();
    const std::size_t n = im.grid.size() * static_cast<std::size_t>(im.taxis.nt);
    if (pos.size() != 6 * n || frames.size() != 18 * n) throw IoError("immersion document: array sizes do not match the lattice");
    im.states.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      std::copy_n(pos.begin() + static_cast<std::ptrdiff_t>(6 * m), 6, im.states[m].x.begin());
      for (std::size_t i = 0; i < 3; ++i)
        std::copy_n(frames.begin() + static_cast<std::ptrdiff_t>(18 * m + 6 * i), 6, im.states[m].e[i].begin());
    }
    im.orthonormality = j.at("orthonormality").get<std::vector<double>>();
    if (im.orthonormality.size() != n) throw IoError("immersion document: orthonormality size mismatch");
    return im;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed immersion document: ") + e.what());
  } catch (const GridError& e) {
    throw IoError(std::string("invalid immersion document: ") + e.what());
  }
}

/// Linear map R^6 -> R^3 picking three real coordinates of C^3.
struct Projection {
  std::array<int, 3> axes{0, 2, 4};

  /// "real" (default), "imag", or three comma-separated indices in [0, 6).
  static Projection parse(const std::string& spec) {
    if (spec.empty() || spec == "real") return {};
    if (spec == "imag") return {{1, 3, 5}};
    Projection p;
    std::stringstream ss(spec);
    std::string item;
    int n = 0;
    while (std::getline(ss, item, ',')) {
      if (n >= 3) throw std::invalid_argument("projection needs exactly 3 indices");
      std::size_t used = 0;
      int v = -1;
      try {
        v = std::stoi(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || v < 0 || v > 5) throw std::invalid_argument("bad projection index '" + item + "'");
      p.axes[static_cast<std::size_t>(n++)] = v;
    }
    if (n != 3) throw std::invalid_argument("projection needs exactly 3 indices");
    return p;
  }
};

struct PlyVertexData {
  std::vector<double> lambda;
  std::vector<double> delta2;
  std::vector<double> residual;
};

/// ASCII PLY with one vertex per lattice node and the (u,v) quads of every
/// t-slice as faces.
inline std::string immersion_to_ply(const ImmersionGrid& im, const Projection& proj, const PlyVertexData& data) {
  const std::size_t nv = im.states.size();
  auto check = [&](const std::vector<double>& v, const char* name) {
    if (!v.empty() && v.size() != nv) throw std::invalid_argument(std::string("PLY property '") + name + "' has wrong size");
  };
  check(data.lambda, "lambda");
  check(data.delta2, "delta2");
  check(data.residual, "residual");
  const std::size_t nf = static_cast<std::size_t>(im.grid.nx - 1) * static_cast<std::size_t>(im.grid.ny - 1) *
                         static_cast<std::size_t>(im.taxis.nt);
  std::string out = "ply\nformat ascii 1.0\ncomment minimal Lagrangian M3 lattice, projection axes " +
                    std::to_string(proj.axes[0]) + "," + std::to_string(proj.axes[1]) + "," +
                    std::to_string(proj.axes[2]) + "\n";
  out += "element vertex " + std::to_string(nv) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (!data.lambda.empty()) out += "property double lambda\n";
  if (!data.delta2.empty()) out += "property double delta2\n";
  if (!data.residual.empty()) out += "property double residual\n";
  out += "element face " + std::to_string(nf) + "\nproperty list uchar int vertex_indices\nend_header\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
  };
  for (std::size_t n = 0; n < nv; ++n) {
    const auto& x = im.states[n].x;
    num(x[static_cast<std::size_t>(proj.axes[0])]);
    out += ' ';
    num(x[static_cast<std::size_t>(proj.axes[1])]);
    out += ' ';
    num(x[static_cast<std::size_t>(proj.axes[2])]);
    for (const auto* v : {&data.lambda, &data.delta2, &data.residual})
      if (!v->empty()) {
        out += ' ';
        num((*v)[n]);
      }
    out += '\n';
  }
  for (int k = 0; k < im.taxis.nt; ++k)
    for (int iy = 0; iy + 1 < im.grid.ny; ++iy)
      for (int ix = 0; ix + 1 < im.grid.nx; ++ix) {
        out += "4 " + std::to_string(im.index(ix, iy, k)) + " " + std::to_string(im.index(ix + 1, iy, k)) + " " +
               std::to_string(im.index(ix + 1, iy + 1, k)) + " " + std::to_string(im.index(ix, iy + 1, k)) + "\n";
      }
  return out;
}

inline void write_ply(const std::string& path, const std::string& ply) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << ply;
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace ideal
