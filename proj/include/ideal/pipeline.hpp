#pragma once

// solve -> build-m3 -> immerse -> psi -> verify -> cp2, with JSON artifacts
// and one ResidualReport per check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ideal/cp2.hpp"
#include "ideal/elliptic.hpp"
#include "ideal/hp2_surface.hpp"
#include "ideal/immersion.hpp"
#include "ideal/json_io.hpp"
#include "ideal/m3.hpp"
#include "ideal/psi.hpp"
#include "ideal/report.hpp"

namespace ideal {

/// Usage, configuration or file problems (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure that stops a stage (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- boundary specs ----------------------------------------------------------

/// Dirichlet data for a solve:
///   const:x              constant
///   affine:a,b,c         a + b u + c v
///   wave[:theta,f0,df0]  IdealF plane wave
///   file:path            field JSON (its grid must match)
struct BoundarySpec {
  enum class Kind { Constant, Affine, Wave, File } kind = Kind::Wave;
  double a = 0.0, b = 0.0, c = 0.0;
  PlaneWave wave;
  std::string path;
  std::string text = "wave";

  static BoundarySpec parse(const std::string& s) {
    BoundarySpec out;
    out.text = s;
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto numbers = [&](std::size_t want_min, std::size_t want_max) {
      std::vector<double> v;
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
          x = std::stod(item, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (item.empty() || used != item.size() || !std::isfinite(x))
          throw ConfigError("boundary spec '" + s + "': bad number '" + item + "'");
        v.push_back(x);
      }
      if (v.size() < want_min || v.size() > want_max)
        throw ConfigError("boundary spec '" + s + "': wrong number of values");
      return v;
    };
    if (head == "const") {
      out.kind = Kind::Constant;
      out.a = numbers(1, 1)[0];
    } else if (head == "affine") {
      out.kind = Kind::Affine;
      const auto v = numbers(3, 3);
      out.a = v[0];
      out.b = v[1];
      out.c = v[2];
    } else if (head == "wave") {
      out.kind = Kind::Wave;
      if (colon != std::string::npos) {
        const auto v = numbers(3, 3);
        out.wave.theta = v[0];
        out.wave.f0 = v[1];
        out.wave.df0 = v[2];
      }
    } else if (head == "file") {
      out.kind = Kind::File;
      out.path = rest;
      if (out.path.empty()) throw ConfigError("boundary spec 'file:' needs a path");
    } else {
      throw ConfigError("unknown boundary spec '" + s + "' (const:, affine:, wave, file:)");
    }
    return out;
  }

  ScalarField2D field(const GridSpec& g, const std::string& name) const {
    switch (kind) {
      case Kind::Constant: return ScalarField2D(g, name, a);
      case Kind::Affine: {
        const double a0 = a, b0 = b, c0 = c;
        return ScalarField2D::from_function(g, name, [=](double u, double v) { return a0 + b0 * u + c0 * v; });
      }
      case Kind::Wave: return ScalarField2D::from_function(g, name, wave);
      default: {
        ScalarField2D f = load_field(path);
        if (!(f.grid == g)) throw GridError("boundary file '" + path + "' has a different grid");
        f.name = name;
        return f;
      }
    }
  }
};

// ---- configuration -----------------------------------------------------------

struct PipelineConfig {
  GridSpec grid{33, 33, 1.0 / 32, 1.0 / 32, 0.0, 0.0};
  TAxis taxis{0.5, 2.0, 9};
  Regime regime = Regime::Integrable;
  std::string f_bc = "wave";
  std::string c_bc = "affine:0.4,0.2,-0.1";  // non-integrable regime only
  double solve_tol = 1e-10;
  int max_iter = 50;
  double fd_tol_factor = 10.0;
  double exact_tol = 1e-8;
  double drift_tol = 1e-6;
  int substeps = 1;
  int psi_fd_step = 1;
  int plane_samples = 10000;
  std::uint64_t seed = 1;
  std::string out_dir = "ideal_out";
  std::string export_ply;  // empty: no mesh
  std::string projection = "real";

  void validate() const {
    grid.validate();
    taxis.validate();
    for (double t : {solve_tol, fd_tol_factor, exact_tol, drift_tol})
      if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("tolerances must be positive and finite");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
    if (psi_fd_step < 1) throw ConfigError("psi_fd_step must be >= 1");
    if (plane_samples < 1000) throw ConfigError("plane_samples must be >= 1000");
    if (out_dir.empty()) throw ConfigError("output directory must be set");
    BoundarySpec::parse(f_bc);
    if (regime == Regime::NonIntegrable) BoundarySpec::parse(c_bc);
    Projection::parse(projection);
  }
};

inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["grid"] = Json{{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"hx", c.grid.hx}, {"hy", c.grid.hy},
                   {"origin", Json::array({c.grid.u0, c.grid.v0})}};
  j["t_axis"] = taxis_to_json(c.taxis);
  j["regime"] = regime_name(c.regime);
  j["f_bc"] = c.f_bc;
  j["c_bc"] = c.c_bc;
  j["solve_tol"] = c.solve_tol;
  j["max_iter"] = c.max_iter;
  j["fd_tol_factor"] = c.fd_tol_factor;
  j["exact_tol"] = c.exact_tol;
  j["drift_tol"] = c.drift_tol;
  j["substeps"] = c.substeps;
  j["psi_fd_step"] = c.psi_fd_step;
  j["plane_samples"] = c.plane_samples;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["export_ply"] = c.export_ply;
  j["projection"] = c.projection;
  return j;
}

/// Keys missing from `j` keep their defaults; unknown keys are rejected.
inline PipelineConfig config_from_json(const Json& j) {
  static const std::vector<std::string> known = {
      "grid",       "t_axis",    "regime",      "f_bc",          "c_bc", "solve_tol",  "max_iter",
      "fd_tol_factor", "exact_tol", "drift_tol", "substeps",     "psi_fd_step", "plane_samples", "seed",
      "out_dir",    "export_ply", "projection"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  PipelineConfig c;
  try {
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid.nx = g.value("nx", c.grid.nx);
      c.grid.ny = g.value("ny", c.grid.ny);
      c.grid.hx = g.value("hx", c.grid.hx);
      c.grid.hy = g.value("hy", c.grid.hy);
      if (g.contains("origin")) {
        const auto& o = g.at("origin");
        if (!o.is_array() || o.size() != 2) throw ConfigError("grid.origin must be [u0, v0]");
        c.grid.u0 = o[0].get<double>();
        c.grid.v0 = o[1].get<double>();
      }
    }
    if (j.contains("t_axis")) {
      const auto& t = j.at("t_axis");
      c.taxis.t0 = t.value("t0", c.taxis.t0);
      c.taxis.t1 = t.value("t1", c.taxis.t1);
      c.taxis.nt = t.value("nt", c.taxis.nt);
    }
    if (j.contains("regime")) {
      const std::string r = j.at("regime").get<std::string>();
      if (r == "integrable")
        c.regime = Regime::Integrable;
      else if (r == "nonintegrable")
        c.regime = Regime::NonIntegrable;
      else
        throw ConfigError("regime must be 'integrable' or 'nonintegrable'");
    }
    c.f_bc = j.value("f_bc", c.f_bc);
    c.c_bc = j.value("c_bc", c.c_bc);
    c.solve_tol = j.value("solve_tol", c.solve_tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.fd_tol_factor = j.value("fd_tol_factor", c.fd_tol_factor);
    c.exact_tol = j.value("exact_tol", c.exact_tol);
    c.drift_tol = j.value("drift_tol", c.drift_tol);
    c.substeps = j.value("substeps", c.substeps);
    c.psi_fd_step = j.value("psi_fd_step", c.psi_fd_step);
    c.plane_samples = j.value("plane_samples", c.plane_samples);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.export_ply = j.value("export_ply", c.export_ply);
    c.projection = j.value("projection", c.projection);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

// ---- stages ------------------------------------------------------------------

inline SolveResult solve_or_throw(const Pde& pde, const ScalarField2D& bc, const ScalarField2D& init,
                                  const SolveOptions& o, const std::string& what) {
  SolveResult r = solve(pde, bc, init, o);
  if (!r.converged()) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s solve: %s after %zu iterations, residual %.3e", what.c_str(),
                  status_name(r.status), r.trace.size(), r.final_residual());
    throw NumericalError(buf);
  }
  return r;
}

inline Json trace_to_json(const SolveResult& r) {
  Json arr = Json::array();
  for (const auto& t : r.trace)
    arr.push_back(Json{{"iteration", t.iteration},
                       {"residual_max", t.residual_max},
                       {"residual_l2", t.residual_l2},
                       {"step_scale", t.step_scale}});
  return Json{{"status", status_name(r.status)}, {"iterations", arr}};
}

/// Immersion diagnostics: holonomy in the three coordinate planes, the
/// Lagrangian condition and frame orthonormality, all O(h^2).
inline std::vector<ResidualReport> verify_immersion(const M3Data& d, const ImmersionGrid& im, double fd_tol_factor) {
  const double tol = fd_tol_factor * d.h() * d.h();
  std::vector<ResidualReport> out;
  for (const auto& f : holonomy_fields(d, im)) out.push_back(lattice_report(d, f, tol));
  out.push_back(lattice_report(d, lagrangian_field(d, im), tol));
  out.push_back(lattice_report(d, orthonormality_field(im), tol));
  return out;
}

/// delta(2) equality and alignment of the minimizing plane with span{E1, E2}.
inline std::vector<ResidualReport> verify_delta2(const M3Data& d, const Delta2Result& r, double tol = 1e-6,
                                                 double angle_tol = 1e-3) {
  std::vector<ResidualReport> out;
  auto a = ResidualReport::from_samples("delta2_equality", r.delta2, d.h(), tol);
  a.extra = Json{{"plane_samples", r.samples}, {"seed", r.seed}};
  out.push_back(std::move(a));
  out.push_back(ResidualReport::from_samples("delta2_plane_alignment", r.angle, d.h(), angle_tol));
  return out;
}

/// psi verification plus the degenerate (totally geodesic) input check.
inline std::vector<ResidualReport> verify_psi(const M3Data& d, const ImmersionGrid& im, const PsiSurface& s,
                                              const PipelineConfig& c, const PsiOptions& po) {
  PsiCheckOptions pc;
  pc.exact_tolerance = c.exact_tol;
  pc.fd_tol_factor = c.fd_tol_factor;
  auto out = verify_surface(d, im, s, pc, po);
  std::vector<double> deg;
  deg.reserve(d.node_count());
  for (std::size_t n = 0; n < d.node_count(); ++n) deg.push_back(degenerate_dpsi(d.nodes[n], unitarize(im.states[n].e)));
  out.push_back(ResidualReport::from_samples("degenerate_constant_map", deg, d.h(), 1e-12));
  return out;
}

/// Rebuild M3 data from its JSON artifact (F, C, t-axis, regime).
inline M3Data m3_from_json(const Json& j, const BuildOptions& bo = {}) {
  try {
    const ScalarField2D F = field_from_json(j.at("F"));
    const TAxis t = taxis_from_json(j.at("t_axis"));
    const std::string regime = j.at("regime").get<std::string>();
    if (regime == "integrable") return build_integrable(F, t, bo);
    if (regime != "nonintegrable") throw IoError("m3 document: unknown regime '" + regime + "'");
    return build_nonintegrable(F, field_from_json(j.at("C")), t, {}, {}, bo);
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed m3 document: ") + e.what());
  }
}

/// Stage report file: {stage, pass, reports}.
inline Json stage_to_json(const std::string& stage, const std::vector<ResidualReport>& reps) {
  Json j;
  j["stage"] = stage;
  j["pass"] = all_pass(reps);
  j["reports"] = reports_to_json(reps);
  return j;
}

struct StageReports {
  std::string stage;
  std::vector<ResidualReport> reports;
};

struct PipelineResult {
  std::vector<StageReports> stages;
  Json summary;  // {stage.check: "pass" | "fail" | "info"}
  bool pass = true;
};

namespace detail {

inline void add_stage(PipelineResult& r, std::string stage, std::vector<ResidualReport> reps) {
  r.stages.push_back({std::move(stage), std::move(reps)});
}

inline void write_stage(const std::filesystem::path& dir, const StageReports& s) {
  save_json((dir / "reports" / (s.stage + ".json")).string(), stage_to_json(s.stage, s.reports));
}

}  // namespace detail

/// Full run. Structural problems (bad config, grid mismatch, regime
/// violation, solver failure, frame drift) throw; failed checks are recorded.
inline PipelineResult run_pipeline(const PipelineConfig& c) {
  c.validate();
  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir / "reports", ec);
  if (ec) throw IoError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  // drop our own artifacts from earlier runs so the directory reflects this one
  for (const char* name : {"F.json", "F.trace.json", "C.json", "C.trace.json", "m3.json", "immersion.json", "psi.json",
                           "hp2.json", "cp2.json", "summary.json"})
    fs::remove(dir / name, ec);
  for (const char* stage : {"solve", "m3", "delta2", "immersion", "psi", "hp2", "cp2"})
    fs::remove(dir / "reports" / (std::string(stage) + ".json"), ec);
  save_json((dir / "config.json").string(), config_to_json(c));

  PipelineResult res;
  SolveOptions so;
  so.tol = c.solve_tol;
  so.max_iter = c.max_iter;

  // solve
  const ScalarField2D fbc = BoundarySpec::parse(c.f_bc).field(c.grid, "F");
  const SolveResult fs_ = solve_or_throw(Pde::ideal_f(), fbc, fbc, so, "IdealF");
  const ScalarField2D& F = fs_.field;
  save_field((dir / "F.json").string(), F);
  save_json((dir / "F.trace.json").string(), trace_to_json(fs_));
  {
    auto r = ResidualReport::from_samples("idealf_residual", std::vector<double>{fs_.final_residual()}, F.grid.h(),
                                          c.solve_tol);
    r.extra = Json{{"iterations", fs_.trace.size()}, {"boundary", c.f_bc}};
    detail::add_stage(res, "solve", {r});
  }
  std::optional<ScalarField2D> C;
  if (c.regime == Regime::NonIntegrable) {
    const ScalarField2D cbc = BoundarySpec::parse(c.c_bc).field(c.grid, "C");
    const SolveResult cs = solve_or_throw(Pde::linear_c(F), cbc, cbc, so, "LinearC");
    C = cs.field;
    save_field((dir / "C.json").string(), *C);
    save_json((dir / "C.trace.json").string(), trace_to_json(cs));
    res.stages[0].reports.push_back(ResidualReport::from_samples(
        "linearc_residual", std::vector<double>{cs.final_residual()}, F.grid.h(), c.solve_tol));
  }

  // build-m3
  BuildOptions bo;
  bo.fd_tol_factor = c.fd_tol_factor;
  const M3Data d = c.regime == Regime::Integrable ? build_integrable(F, c.taxis, bo)
                                                   : build_nonintegrable(F, *C, c.taxis, {}, {}, bo);
  save_json((dir / "m3.json").string(), m3_to_json(d));
  detail::add_stage(res, "m3", d.diagnostics);
  detail::add_stage(res, "delta2", verify_delta2(d, delta2(d, c.plane_samples, c.seed)));

  if (c.regime == Regime::Integrable && !all_pass(d.diagnostics)) {
    // the frame equations are inconsistent at this tolerance: record, skip
    ResidualReport r;
    r.name = "prerequisite_m3";
    r.h = d.h();
    r.pass = false;
    r.max = std::numeric_limits<double>::infinity();
    r.detail = "m3 checks failed; immersion and psi were not run";
    detail::add_stage(res, "immersion", {r});
  } else if (c.regime == Regime::Integrable) {
    // immerse
    ImmersionOptions io;
    io.drift_tolerance = c.drift_tol;
    io.substeps = c.substeps;
    io.base = {d.grid.nx / 2, d.grid.ny / 2, d.taxis.nt / 2};
    ImmersionGrid im;
    try {
      im = integrate_immersion(d, io);
    } catch (const GeometryError& e) {
      throw NumericalError(std::string("immerse: ") + e.what());
    }
    save_json((dir / "immersion.json").string(), immersion_to_json(im));
    detail::add_stage(res, "immersion", verify_immersion(d, im, c.fd_tol_factor));
    if (!c.export_ply.empty()) {
      PlyVertexData pd;
      for (const auto& n : d.nodes) pd.lambda.push_back(n.lambda);
      pd.residual = im.orthonormality;
      write_ply(c.export_ply, immersion_to_ply(im, Projection::parse(c.projection), pd));
    }
    // psi
    PsiOptions po;
    po.fd_step = c.psi_fd_step;
    const PsiSurface s = sample_surface(d, im, po);
    save_json((dir / "psi.json").string(), psi_surface_to_json(s, 64));
    detail::add_stage(res, "psi", verify_psi(d, im, s, c, po));
  }

  // verify: the surface in HP^2 built from the same F
  {
    const N2Data n2 = build_n2(F);
    N2CheckOptions nc;
    nc.fd_tol_factor = c.fd_tol_factor;
    auto reps = verify_n2(n2, nc);
    const auto g = perturbation_growth(F, {1e-3, 2e-3, 4e-3});
    auto pr = ResidualReport::from_samples(
        "perturbation_linear_growth", std::vector<double>{std::abs(g[1] / g[0] - 2.0), std::abs(g[2] / g[1] - 2.0)},
        F.grid.h(), 0.1);
    pr.detail = "|ratio - 2| of the diffa2b1 defect for f + eps sin u, eps doubling";
    pr.extra = Json{{"eps", Json::array({1e-3, 2e-3, 4e-3})}, {"defect", g}};
    reps.push_back(std::move(pr));
    save_json((dir / "hp2.json").string(), n2_to_json(n2));
    detail::add_stage(res, "hp2", std::move(reps));
  }

  // cp2
  {
    const TzitzeicaField t = to_tzitzeica(F);
    Cp2CheckOptions cc;
    cc.fd_tol_factor = c.fd_tol_factor;
    save_json((dir / "cp2.json").string(), tzitzeica_to_json(t));
    detail::add_stage(res, "cp2", verify_cp2(F, t, cc));
  }

  Json summary = Json::object();
  for (const auto& st : res.stages) {
    detail::write_stage(dir, st);
    for (const auto& r : st.reports) {
      summary[st.stage + "." + r.name] = r.informational ? "info" : r.pass ? "pass" : "fail";
      if (!r.pass) res.pass = false;
    }
  }
  res.summary = Json{{"pass", res.pass}, {"regime", regime_name(c.regime)}, {"checks", summary}};
  save_json((dir / "summary.json").string(), res.summary);
  return res;
}

}  // namespace ideal
