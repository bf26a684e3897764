#pragma once

// psi = pi o x : M^3 -> HP^2 with x = (E1 + i E2) / sqrt2 in S^11.
//
// First derivatives of x come from the frame equations at a node; second
// derivatives of psi are central differences of the horizontal lifts,
// corrected for the fibre motion of x (x_a is not horizontal).

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ideal/immersion.hpp"
#include "ideal/m3.hpp"
#include "ideal/parallel.hpp"
#include "ideal/quaternionic.hpp"
#include "ideal/report.hpp"

namespace ideal {

/// Hermitian Gram-Schmidt (inner product dot + j dot) of a drifted frame.
inline std::array<C3, 3> unitarize(std::array<C3, 3> e) {
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t l = 0; l < i; ++l) {
      const C3 q = e[l];
      e[i] = e[i] - dot(q, e[i]) * q - dot(apply_j3(q), e[i]) * apply_j3(q);
    }
    const double n = norm(e[i]);
    if (!(n > 0.0)) throw GeometryError("unitarize: degenerate frame");
    e[i] = (1.0 / n) * e[i];
  }
  return e;
}

/// x = (E1 + i E2) / sqrt2. E1, E2 must be orthonormal with E1 _|_ jE2.
inline SpherePoint x_map(const C3& e1, const C3& e2, double tol = 1e-6) {
  const double r = std::max({std::abs(dot(e1, e1) - 1.0), std::abs(dot(e2, e2) - 1.0), std::abs(dot(e1, e2)),
                             std::abs(dot(e1, apply_j3(e2)))});
  if (!(r <= tol)) throw GeometryError("x_map: E1, E2 are not a unitary pair");
  return SpherePoint(AmbientVector::embed((1.0 / std::numbers::sqrt2) * e1, (1.0 / std::numbers::sqrt2) * e2));
}

/// x and its coordinate derivatives at one node, from the frame equations.
struct LiftJet {
  AmbientVector x;
  std::array<AmbientVector, 3> dx;   // x_u, x_v, x_t
  std::array<AmbientVector, 3> chi;  // horizontal parts
};

inline LiftJet lift_jet(const NodeGeometry& g, const std::array<C3, 3>& e,
                        const std::array<double, 4>& fibre = {1, 0, 0, 0}) {
  LiftJet out;
  const SpherePoint p0 = x_map(e[0], e[1]);
  out.x = apply_quaternion(fibre, p0.vector());
  const SpherePoint p(out.x);
  FrameState s;
  s.e = e;
  for (int a = 0; a < 3; ++a) {
    const FrameState ds = gauss_weingarten(g, a, s);
    const AmbientVector v =
        AmbientVector::embed((1.0 / std::numbers::sqrt2) * ds.e[0], (1.0 / std::numbers::sqrt2) * ds.e[1]);
    out.dx[static_cast<std::size_t>(a)] = apply_quaternion(fibre, v);
    out.chi[static_cast<std::size_t>(a)] = horizontal_part(p, out.dx[static_cast<std::size_t>(a)]);
  }
  return out;
}

/// Horizontal lifts (chi_u, chi_v) of psi_u, psi_v at node (ix, iy, k). Uses
/// the supplied frame, or the standard unitary frame when none is given.
inline std::array<AmbientVector, 2> chi_tangents(const M3Data& d, int ix, int iy, int k,
                                                 const std::optional<std::array<C3, 3>>& frame = {}) {
  const std::array<C3, 3> e =
      frame ? unitarize(*frame) : std::array<C3, 3>{C3{1, 0, 0, 0, 0, 0}, C3{0, 0, 1, 0, 0, 0}, C3{0, 0, 0, 0, 1, 0}};
  const LiftJet j = lift_jet(d.at(ix, iy, k), e);
  return {j.chi[0], j.chi[1]};
}

// ---- adapted basis ---------------------------------------------------------

/// {J1, J2, J3} with psi_v = J1 psi_u. J1 is fitted from the lifts (so a
/// fibre rotation of x rotates it along), J2 is any unit structure
/// orthogonal to J1 and J3 = J1 J2.
struct AdaptedBasis {
  QuaternionicStructure j1, j2, j3;
};

inline AdaptedBasis adapted_basis(const SpherePoint& x, const AmbientVector& chi_u, const AmbientVector& chi_v) {
  const double n2 = dot(chi_u, chi_u);
  if (!(n2 > 0.0)) throw GeometryError("adapted_basis: psi_u vanishes (constant map)");
  std::array<double, 3> c{};
  for (std::size_t s = 0; s < 3; ++s) c[s] = dot(chi_v, horizontal_part(x, apply_structure(kStructures[s], chi_u))) / n2;
  const double cn = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  if (!(cn > 0.0)) throw GeometryError("adapted_basis: psi_v has no quaternionic component along psi_u");
  AdaptedBasis b;
  b.j1.coeffs = {c[0] / cn, c[1] / cn, c[2] / cn};
  std::size_t m = 0;
  for (std::size_t s = 1; s < 3; ++s)
    if (std::abs(b.j1.coeffs[s]) < std::abs(b.j1.coeffs[m])) m = s;
  std::array<double, 3> e{};
  e[m] = 1.0;
  const double p = b.j1.coeffs[m];
  for (std::size_t s = 0; s < 3; ++s) e[s] -= p * b.j1.coeffs[s];
  const double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  b.j2.coeffs = {e[0] / en, e[1] / en, e[2] / en};
  b.j3 = b.j1.times(b.j2);
  return b;
}

// ---- surface samples -------------------------------------------------------

struct HP2Sample {
  explicit HP2Sample(HP2Frame f) : frame(std::move(f)) {}

  int ix = 0, iy = 0, k = 0;
  HP2Frame frame;  // base = x(p)
  AdaptedBasis basis;
  AmbientVector psi_u, psi_v, psi_t;  // horizontal lifts from the frame equations
  AmbientVector psi_u_fd, psi_v_fd;   // horizontal parts of central differences of x
  double g_uu = 0.0, g_uv = 0.0, g_vv = 0.0;
  double F = 0.0;
  // [a][b] = h(d_a, d_b) with d_0 = d_u, d_1 = d_v; derivative taken along a
  std::array<std::array<AmbientVector, 2>, 2> h{}, sigma{}, kappa{};
};

struct PsiOptions {
  std::array<double, 4> fibre{1, 0, 0, 0};  // constant unit quaternion applied to x
  int fd_step = 1;                          // lattice cells per central difference
};

namespace detail {

inline AmbientVector project_out(AmbientVector w, const AmbientVector& a, const AmbientVector& b) {
  // a _|_ b assumed only approximately; solve the 2x2 Gram system
  const double aa = dot(a, a), ab = dot(a, b), bb = dot(b, b);
  const double wa = dot(w, a), wb = dot(w, b);
  const double det = aa * bb - ab * ab;
  const double ca = (wa * bb - wb * ab) / det, cb = (wb * aa - wa * ab) / det;
  w -= ca * a;
  w -= cb * b;
  return w;
}

}  // namespace detail

/// Sample of psi(M^3) at node (ix, iy, k); the node must be at least fd_step
/// cells from every (u, v) edge.
inline HP2Sample surface_sample(const M3Data& d, const ImmersionGrid& im, int ix, int iy, int k,
                                const PsiOptions& opts = {}) {
  const int s = opts.fd_step;
  if (s < 1) throw std::invalid_argument("fd_step must be >= 1");
  if (ix - s < 0 || iy - s < 0 || ix + s >= d.grid.nx || iy + s >= d.grid.ny || k < 0 || k >= d.taxis.nt)
    throw std::invalid_argument("surface_sample: node too close to the boundary for fd_step");
  if (!(im.grid == d.grid) || !(im.taxis == d.taxis)) throw std::invalid_argument("immersion does not match M3 data");

  auto jet = [&](int jx, int jy) { return lift_jet(d.at(jx, jy, k), unitarize(im.at(jx, jy, k).e), opts.fibre); };
  const LiftJet c = jet(ix, iy);
  const std::array<LiftJet, 2> plus{jet(ix + s, iy), jet(ix, iy + s)};
  const std::array<LiftJet, 2> minus{jet(ix - s, iy), jet(ix, iy - s)};
  const std::array<double, 2> h2{2.0 * s * d.grid.hx, 2.0 * s * d.grid.hy};

  HP2Sample out{HP2Frame(SpherePoint(c.x))};
  out.ix = ix;
  out.iy = iy;
  out.k = k;
  out.F = d.F(ix, iy);
  const SpherePoint& x = out.frame.base();
  out.psi_u = c.chi[0];
  out.psi_v = c.chi[1];
  out.psi_t = c.chi[2];
  out.psi_u_fd = horizontal_part(x, (1.0 / h2[0]) * (plus[0].x - minus[0].x));
  out.psi_v_fd = horizontal_part(x, (1.0 / h2[1]) * (plus[1].x - minus[1].x));
  out.g_uu = dot(out.psi_u, out.psi_u);
  out.g_uv = dot(out.psi_u, out.psi_v);
  out.g_vv = dot(out.psi_v, out.psi_v);
  out.basis = adapted_basis(x, out.psi_u, out.psi_v);

  // kappa lives on span{J2 psi_u, J3 psi_u}
  const AmbientVector k2 = horizontal_part(x, out.basis.j2(out.psi_u));
  const AmbientVector k3 = horizontal_part(x, out.basis.j3(out.psi_u));
  for (std::size_t a = 0; a < 2; ++a) {
    // fibre velocity of x along d_a: x_a = chi_a + sum_s c_s s(x)
    std::array<double, 3> cv{};
    for (std::size_t q = 0; q < 3; ++q) cv[q] = dot(c.dx[a], apply_structure(kStructures[q], c.x));
    for (std::size_t b = 0; b < 2; ++b) {
      AmbientVector w = (1.0 / h2[a]) * (plus[a].chi[b] - minus[a].chi[b]);
      for (std::size_t q = 0; q < 3; ++q) w -= cv[q] * apply_structure(kStructures[q], c.chi[b]);
      const AmbientVector n = detail::project_out(horizontal_part(x, w), out.psi_u, out.psi_v);
      out.h[a][b] = n;
      out.kappa[a][b] = (dot(n, k2) / dot(k2, k2)) * k2 + (dot(n, k3) / dot(k3, k3)) * k3;
      out.sigma[a][b] = n - out.kappa[a][b];
    }
  }
  return out;
}

/// Closed forms in the integrable regime (these coordinates):
/// sigma_uu = -(e^{-2F/3} / (2 sqrt2)) i(E1 - iE2), kappa_uu = -(e^{F/3} / sqrt2) kE3.
/// kappa comes only from the fibre correction: with x_u = chi_u + (alpha lambda / sqrt2)(jx - kx)
/// it is (alpha^2 lambda gamma_11^3 / sqrt2) kE3.
struct SigmaKappaClosedForm {
  AmbientVector sigma_uu, kappa_uu;
};

inline SigmaKappaClosedForm sigma_kappa_closed_form(double f, const std::array<C3, 3>& e,
                                                    const std::array<double, 4>& fibre = {1, 0, 0, 0}) {
  const AmbientVector w = AmbientVector::embed(e[0], (-1.0) * e[1]);  // E1 - i E2
  const AmbientVector e3 = AmbientVector::embed(e[2]);
  SigmaKappaClosedForm out;
  out.sigma_uu = apply_quaternion(fibre, (-std::exp(-2.0 * f / 3.0) / (2.0 * std::numbers::sqrt2)) * kStructureI(w));
  out.kappa_uu = apply_quaternion(fibre, (-std::exp(f / 3.0) / std::numbers::sqrt2) * kStructureK(e3));
  return out;
}

// ---- per-sample residuals ------------------------------------------------

namespace detail {

// C(X, Y, Z) = g(h(X,Y), J2 Z) + i g(h(X,Y), J3 Z) for X, Y, Z in {d_u, d_v}
inline std::complex<double> cubic_form(const HP2Sample& s, int a, int b, int z) {
  const SpherePoint& x = s.frame.base();
  const AmbientVector& tz = z == 0 ? s.psi_u : s.psi_v;
  const auto& hab = s.h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  return {dot(hab, horizontal_part(x, s.basis.j2(tz))), dot(hab, horizontal_part(x, s.basis.j3(tz)))};
}

// J1 d_u = d_v, J1 d_v = -d_u as a map on the coordinate index with sign
inline std::pair<int, double> rotate(int z) { return z == 0 ? std::pair{1, 1.0} : std::pair{0, -1.0}; }

}  // namespace detail

/// Named per-sample residuals. Keys are stable; see psi_residual_names().
struct PsiResiduals {
  double almost_complex = 0.0;     // |psi_v - J1 psi_u| / |psi_u|, frame-equation lifts
  double almost_complex_fd = 0.0;  // same with central-difference lifts
  double totally_complex = 0.0;    // |g(J2 psi_a, psi_b)| and J3, over g_uu
  double minimality = 0.0;         // |h_uu + h_vv| / (2 g_uu) = |H|
  double anti_symmetry = 0.0;      // C(X,Y,J1 Z) - i C(X,Y,Z), C(X,J1 Y,Z) + i C(X,Y,Z)
  double anti_symmetry_literal = 0.0;
  double isothermal = 0.0;         // (|g_uu - g_vv| + |g_uv|) / g_uu
  double metric_constant = 0.0;    // g_uu e^{2F/3}
  double horizontality = 0.0;
  double dpsi_e3 = 0.0;
  double sigma_trace = 0.0, kappa_trace = 0.0;
  double sigma_symmetry = 0.0, kappa_symmetry = 0.0;
  double sigma_rotation = 0.0, kappa_rotation = 0.0;  // sigma_uv - J1 sigma_uu, kappa_uv + J1 kappa_uu
  double sigma_plane = 0.0;  // part of sigma outside span{sigma_uu, J1 sigma_uu}
};

inline PsiResiduals psi_residuals(const HP2Sample& s) {
  PsiResiduals r;
  const SpherePoint& x = s.frame.base();
  const double nu = std::sqrt(s.g_uu);
  auto j1 = [&](const AmbientVector& w) { return horizontal_part(x, s.basis.j1(w)); };
  r.almost_complex = norm(s.psi_v - j1(s.psi_u)) / nu;
  r.almost_complex_fd = norm(s.psi_v_fd - j1(s.psi_u_fd)) / std::sqrt(dot(s.psi_u_fd, s.psi_u_fd));
  const std::array<const AmbientVector*, 2> t{&s.psi_u, &s.psi_v};
  for (const auto* a : t)
    for (const auto* b : t) {
      const double c2 = dot(horizontal_part(x, s.basis.j2(*a)), *b);
      const double c3 = dot(horizontal_part(x, s.basis.j3(*a)), *b);
      r.totally_complex = std::max(r.totally_complex, std::hypot(c2, c3) / s.g_uu);
    }
  r.minimality = norm(s.h[0][0] + s.h[1][1]) / (2.0 * s.g_uu);
  const std::complex<double> I(0.0, 1.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int z = 0; z < 2; ++z) {
        const auto c = detail::cubic_form(s, a, b, z);
        const auto [rz, sz] = detail::rotate(z);
        const auto [rb, sb] = detail::rotate(b);
        r.anti_symmetry = std::max({r.anti_symmetry, std::abs(sz * detail::cubic_form(s, a, b, rz) - I * c),
                                    std::abs(sb * detail::cubic_form(s, a, rb, z) + I * c)});
        const auto ct = detail::cubic_form(s, a, z, b);
        r.anti_symmetry_literal = std::max(r.anti_symmetry_literal, std::abs(c + ct));
      }
  r.isothermal = (std::abs(s.g_uu - s.g_vv) + std::abs(s.g_uv)) / s.g_uu;
  r.metric_constant = s.g_uu * std::exp(2.0 * s.F / 3.0);
  r.horizontality = std::max(s.frame.horizontality_residual(s.psi_u), s.frame.horizontality_residual(s.psi_v));
  r.dpsi_e3 = norm(s.psi_t);
  const auto& sg = s.sigma;
  const auto& kp = s.kappa;
  r.sigma_trace = norm(sg[0][0] + sg[1][1]);
  r.kappa_trace = norm(kp[0][0] + kp[1][1]);
  r.sigma_symmetry = norm(sg[0][1] - sg[1][0]);
  r.kappa_symmetry = norm(kp[0][1] - kp[1][0]);
  r.sigma_rotation = norm(sg[0][1] - j1(sg[0][0]));
  r.kappa_rotation = norm(kp[0][1] + j1(kp[0][0]));
  const AmbientVector p1 = sg[0][0], p2 = j1(sg[0][0]);
  if (dot(p1, p1) > 0.0)
    for (const auto& row : sg)
      for (const auto& v : row) r.sigma_plane = std::max(r.sigma_plane, norm(detail::project_out(v, p1, p2)));
  return r;
}

// ---- lattice runs ----------------------------------------------------------

/// Samples at every node at least fd_step cells from the (u, v) edges, in
/// index order (k, iy, ix).
struct PsiSurface {
  std::vector<HP2Sample> samples;
  std::vector<PsiResiduals> residuals;
};

inline PsiSurface sample_surface(const M3Data& d, const ImmersionGrid& im, const PsiOptions& opts = {}) {
  if (d.regime != Regime::Integrable)
    throw PreconditionError("psi surface sampling needs an integrated immersion (integrable regime)");
  const int s = opts.fd_step;
  if (s < 1) throw std::invalid_argument("fd_step must be >= 1");
  const int nx = d.grid.nx - 2 * s, ny = d.grid.ny - 2 * s;
  if (nx < 3 || ny < 3) throw std::invalid_argument("psi verification needs at least a 3x3 interior patch");
  std::vector<std::array<int, 3>> nodes;
  for (int k = 0; k < d.taxis.nt; ++k)
    for (int iy = s; iy < d.grid.ny - s; ++iy)
      for (int ix = s; ix < d.grid.nx - s; ++ix) nodes.push_back({ix, iy, k});
  std::vector<std::optional<HP2Sample>> tmp(nodes.size());
  std::vector<PsiResiduals> res(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t n) {
    tmp[n].emplace(surface_sample(d, im, nodes[n][0], nodes[n][1], nodes[n][2], opts));
    res[n] = psi_residuals(*tmp[n]);
  });
  PsiSurface out;
  out.samples.reserve(nodes.size());
  for (auto& t : tmp) out.samples.push_back(std::move(*t));
  out.residuals = std::move(res);
  return out;
}

/// One residual as a lattice field (NaN where not sampled).
inline LatticeField psi_field(const M3Data& d, const PsiSurface& s, double PsiResiduals::*member,
                              const std::string& name) {
  LatticeField f{name, std::vector<double>(d.node_count(), std::numeric_limits<double>::quiet_NaN())};
  for (std::size_t n = 0; n < s.samples.size(); ++n)
    f.values[d.index(s.samples[n].ix, s.samples[n].iy, s.samples[n].k)] = s.residuals[n].*member;
  return f;
}

/// Largest deviation of sigma_uu, kappa_uu from their closed forms.
inline LatticeField closed_form_field(const M3Data& d, const ImmersionGrid& im, const PsiSurface& s,
                                      const PsiOptions& opts = {}) {
  LatticeField f{"sigma_kappa_closed_form",
                 std::vector<double>(d.node_count(), std::numeric_limits<double>::quiet_NaN())};
  for (const auto& smp : s.samples) {
    const auto cf = sigma_kappa_closed_form(smp.F, unitarize(im.at(smp.ix, smp.iy, smp.k).e), opts.fibre);
    f.values[d.index(smp.ix, smp.iy, smp.k)] =
        std::max(norm(smp.sigma[0][0] - cf.sigma_uu), norm(smp.kappa[0][0] - cf.kappa_uu));
  }
  return f;
}

struct PsiCheckOptions {
  double exact_tolerance = 1e-8;    // frame-equation-level identities
  double fd_tol_factor = 10.0;      // O(h^2) checks pass below fd_tol_factor * h^2
  double metric_rel_std = 1e-6;
};

/// The verification suite: almost complex, totally complex, minimal,
/// anti-symmetric, isothermal with metric proportional to e^{-2F/3}.
inline std::vector<ResidualReport> verify_surface(const M3Data& d, const ImmersionGrid& im, const PsiSurface& s,
                                                  const PsiCheckOptions& c = {}, const PsiOptions& opts = {}) {
  const double h = d.h(), fd_tol = c.fd_tol_factor * h * h;
  std::vector<ResidualReport> out;
  auto collect = [&](double PsiResiduals::*m) {
    std::vector<double> v;
    v.reserve(s.residuals.size());
    for (const auto& r : s.residuals) v.push_back(r.*m);
    return v;
  };
  auto exact = [&](const char* name, double PsiResiduals::*m) {
    out.push_back(ResidualReport::from_samples(name, collect(m), h, c.exact_tolerance));
  };
  auto fd = [&](const char* name, double PsiResiduals::*m) {
    out.push_back(ResidualReport::from_samples(name, collect(m), h, fd_tol));
  };
  exact("almost_complex", &PsiResiduals::almost_complex);
  fd("almost_complex_fd", &PsiResiduals::almost_complex_fd);
  exact("totally_complex", &PsiResiduals::totally_complex);
  fd("minimality", &PsiResiduals::minimality);
  fd("anti_symmetry", &PsiResiduals::anti_symmetry);
  out.push_back(ResidualReport::info("anti_symmetry_literal", collect(&PsiResiduals::anti_symmetry_literal), h,
                                     "g(h(X,Y),J2 Z) + g(h(X,Z),J2 Y) taken literally; cannot vanish for a "
                                     "symmetric h unless the J2, J3 parts of h vanish"));
  exact("isothermal", &PsiResiduals::isothermal);
  exact("horizontality", &PsiResiduals::horizontality);
  exact("dpsi_E3", &PsiResiduals::dpsi_e3);
  fd("sigma_trace", &PsiResiduals::sigma_trace);
  fd("kappa_trace", &PsiResiduals::kappa_trace);
  fd("sigma_symmetry", &PsiResiduals::sigma_symmetry);
  fd("kappa_symmetry", &PsiResiduals::kappa_symmetry);
  fd("sigma_rotation", &PsiResiduals::sigma_rotation);
  fd("kappa_rotation", &PsiResiduals::kappa_rotation);
  fd("sigma_plane", &PsiResiduals::sigma_plane);
  {
    const auto f = closed_form_field(d, im, s, opts);
    out.push_back(lattice_report(d, f, fd_tol));
  }
  {
    const auto g = collect(&PsiResiduals::metric_constant);
    const MeanStd ms = mean_std(g);
    std::vector<double> dev;
    dev.reserve(g.size());
    for (double x : g) dev.push_back(x / ms.mean - 1.0);
    ResidualReport r = ResidualReport::from_samples("metric_proportionality", dev, h, c.metric_rel_std);
    r.pass = r.pass && ms.std / ms.mean <= c.metric_rel_std;
    r.detail = "g_uu e^{2F/3} relative to its mean";
    r.extra = Json{{"measured_constant", ms.mean}, {"relative_std", ms.std / ms.mean}, {"reference_value", 0.5}};
    out.push_back(std::move(r));
  }
  return out;
}

// ---- degenerate input ------------------------------------------------------

/// |d psi| for a node whose D1 is totally geodesic (gamma^3 = 0): psi is then
/// constant, so every horizontal lift vanishes.
inline double degenerate_dpsi(NodeGeometry g, const std::array<C3, 3>& e) {
  g.g11_3 = 0.0;
  g.g21_3 = 0.0;
  const LiftJet j = lift_jet(g, unitarize(e));
  return std::max({norm(j.chi[0]), norm(j.chi[1]), norm(j.chi[2])});
}

// ---- serialization ---------------------------------------------------------

inline Json hp2_sample_to_json(const HP2Sample& s) {
  auto vec = [](const AmbientVector& v) { return Json(std::vector<double>(v.coords.begin(), v.coords.end())); };
  Json j;
  j["node"] = Json::array({s.ix, s.iy, s.k});
  j["base"] = vec(s.frame.base().vector());
  j["psi_u"] = vec(s.psi_u);
  j["psi_v"] = vec(s.psi_v);
  j["metric"] = Json{{"g_uu", s.g_uu}, {"g_uv", s.g_uv}, {"g_vv", s.g_vv}};
  j["sigma_uu"] = vec(s.sigma[0][0]);
  j["kappa_uu"] = vec(s.kappa[0][0]);
  j["sigma_uv"] = vec(s.sigma[0][1]);
  j["kappa_uv"] = vec(s.kappa[0][1]);
  j["adapted_basis"] = Json{{"J1", s.basis.j1.coeffs}, {"J2", s.basis.j2.coeffs}, {"J3", s.basis.j3.coeffs}};
  return j;
}

inline Json psi_surface_to_json(const PsiSurface& s, std::size_t max_samples = std::numeric_limits<std::size_t>::max()) {
  Json arr = Json::array();
  for (std::size_t n = 0; n < s.samples.size() && n < max_samples; ++n) arr.push_back(hp2_sample_to_json(s.samples[n]));
  return Json{{"sample_count", s.samples.size()}, {"samples", arr}};
}

}  // namespace ideal
