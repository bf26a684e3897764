// ideal_lab: command-line front end.
// Exit codes: 0 pass, 1 usage or I/O, 2 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ideal/pipeline.hpp"

using namespace ideal;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitNumerical = 2;

struct GridArgs {
  std::vector<int> nodes;     // nx ny
  std::vector<double> h;      // hx hy
  std::vector<double> origin; // u0 v0

  void add(CLI::App* c) {
    c->add_option("--grid", nodes, "nodes per side: nx ny")->expected(2);
    c->add_option("--h", h, "spacings: hx hy (default 1/(n-1))")->expected(2);
    c->add_option("--origin", origin, "lower-left corner: u0 v0")->expected(2);
  }
  bool given() const { return !nodes.empty(); }
  GridSpec spec() const {
    GridSpec g;
    g.nx = nodes.empty() ? 33 : nodes[0];
    g.ny = nodes.empty() ? 33 : nodes[1];
    if (g.nx < 3 || g.ny < 3) throw ConfigError("--grid needs at least 3 nodes per side");
    g.hx = h.empty() ? 1.0 / (g.nx - 1) : h[0];
    g.hy = h.empty() ? 1.0 / (g.ny - 1) : h[1];
    if (!origin.empty()) {
      g.u0 = origin[0];
      g.v0 = origin[1];
    }
    g.validate();
    return g;
  }
};

TAxis taxis_from(const std::vector<double>& v) {
  TAxis t;
  if (!v.empty()) {
    t.t0 = v[0];
    t.t1 = v[1];
    if (v[2] != std::floor(v[2])) throw ConfigError("--t-axis: nt must be an integer");
    t.nt = static_cast<int>(v[2]);
  }
  t.validate();
  return t;
}

std::string default_sibling(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void print_reports(const std::string& stage, const std::vector<ResidualReport>& reps) {
  for (const auto& r : reps)
    std::printf("%-10s %-32s %-4s max %.3e  tol %s  h %.4g\n", stage.c_str(), r.name.c_str(),
                r.informational ? "info" : (r.pass ? "pass" : "FAIL"), r.max,
                r.informational ? "-" : [&] {
                  static char b[32];
                  std::snprintf(b, sizeof b, "%.3e", r.tolerance);
                  return b;
                }(),
                r.h);
}

int finish_stage(const std::string& stage, const std::vector<ResidualReport>& reps, const std::string& report_path) {
  if (!report_path.empty()) save_json(report_path, stage_to_json(stage, reps));
  print_reports(stage, reps);
  const bool ok = all_pass(reps);
  if (!ok) {
    for (const auto& r : reps)
      if (!r.pass) std::fprintf(stderr, "ideal_lab: %s check '%s' failed\n", stage.c_str(), r.name.c_str());
  }
  return ok ? kExitOk : kExitNumerical;
}

// ---- subcommands -------------------------------------------------------------

struct SolveArgs {
  std::string pde = "ideal-f", bc, init, coupled, out, trace;
  double q2 = 0.0, tol = 1e-10;
  int max_iter = 50;
  GridArgs grid;
};

int cmd_solve(const SolveArgs& a) {
  SolveOptions so;
  so.tol = a.tol;
  so.max_iter = a.max_iter;
  if (!(a.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (a.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
  Pde pde;
  std::optional<ScalarField2D> coupled;
  if (a.pde == "ideal-f") {
    pde = Pde::ideal_f();
  } else if (a.pde == "linear-c") {
    if (a.coupled.empty()) throw ConfigError("--pde linear-c needs --coupled F.json");
    coupled = load_field(a.coupled);
    pde = Pde::linear_c(*coupled);
  } else if (a.pde == "tzitzeica") {
    if (!(a.q2 > 0.0)) throw ConfigError("--pde tzitzeica needs --q2 > 0");
    pde = Pde::tzitzeica(a.q2);
  } else {
    throw ConfigError("unknown --pde '" + a.pde + "' (ideal-f, linear-c, tzitzeica)");
  }
  const BoundarySpec bs = BoundarySpec::parse(a.bc);
  GridSpec g;
  if (a.grid.given())
    g = a.grid.spec();
  else if (coupled)
    g = coupled->grid;
  else if (bs.kind == BoundarySpec::Kind::File)
    g = load_field(bs.path).grid;
  else
    g = a.grid.spec();
  if (coupled && !(coupled->grid == g)) throw GridError("--coupled field grid differs from the solve grid");
  const std::string name = a.pde == "ideal-f" ? "F" : a.pde == "linear-c" ? "C" : "u";
  const ScalarField2D bc = bs.field(g, name);
  const ScalarField2D init = a.init.empty() ? bc : BoundarySpec::parse(a.init).field(g, name);
  const SolveResult r = solve(pde, bc, init, so);
  save_field(a.out, r.field);
  const std::string trace = a.trace.empty() ? default_sibling(a.out, ".trace.json") : a.trace;
  Json tj = trace_to_json(r);
  tj["pde"] = a.pde;
  tj["boundary"] = a.bc;
  save_json(trace, tj);
  std::printf("solve %s: %s after %zu iterations, residual %.3e\n", a.pde.c_str(), status_name(r.status),
              r.trace.size(), r.final_residual());
  if (!r.converged()) {
    std::fprintf(stderr, "ideal_lab: solve check 'convergence' failed (%s)\n", status_name(r.status));
    return kExitNumerical;
  }
  return kExitOk;
}

struct BuildArgs {
  std::string f, c, out, report;
  std::vector<double> taxis;
  double fd_tol_factor = 10.0;
  int planes = 10000;
  std::uint64_t seed = 1;
};

int cmd_build(const BuildArgs& a) {
  BuildOptions bo;
  bo.fd_tol_factor = a.fd_tol_factor;
  const ScalarField2D F = load_field(a.f);
  const TAxis t = taxis_from(a.taxis);
  const M3Data d = a.c.empty() ? build_integrable(F, t, bo) : build_nonintegrable(F, load_field(a.c), t, {}, {}, bo);
  save_json(a.out, m3_to_json(d));
  auto reps = d.diagnostics;
  for (auto& r : verify_delta2(d, delta2(d, a.planes, a.seed))) reps.push_back(std::move(r));
  return finish_stage("m3", reps, a.report);
}

struct ImmerseArgs {
  std::string m3, out, report, ply, projection = "real";
  std::vector<int> base;
  int substeps = 1;
  double drift_tol = 1e-6, fd_tol_factor = 10.0;
};

int cmd_immerse(const ImmerseArgs& a) {
  const Projection proj = Projection::parse(a.projection);
  const M3Data d = m3_from_json(load_json(a.m3));
  ImmersionOptions io;
  io.substeps = a.substeps;
  io.drift_tolerance = a.drift_tol;
  io.base = a.base.empty() ? LatticePoint{d.grid.nx / 2, d.grid.ny / 2, d.taxis.nt / 2}
                           : LatticePoint{a.base[0], a.base[1], a.base[2]};
  const ImmersionGrid im = integrate_immersion(d, io);
  save_json(a.out, immersion_to_json(im));
  if (!a.ply.empty()) {
    PlyVertexData pd;
    for (const auto& n : d.nodes) pd.lambda.push_back(n.lambda);
    pd.residual = im.orthonormality;
    write_ply(a.ply, immersion_to_ply(im, proj, pd));
  }
  return finish_stage("immersion", verify_immersion(d, im, a.fd_tol_factor), a.report);
}

struct PsiArgs {
  std::string m3, immersion, out, report;
  std::vector<double> fibre;
  int fd_step = 1, max_samples = 64;
  double fd_tol_factor = 10.0, exact_tol = 1e-8;
};

int cmd_psi(const PsiArgs& a) {
  const M3Data d = m3_from_json(load_json(a.m3));
  const ImmersionGrid im = immersion_from_json(load_json(a.immersion));
  if (!(im.grid == d.grid) || !(im.taxis == d.taxis)) throw GridError("immersion and m3 lattices differ");
  PsiOptions po;
  po.fd_step = a.fd_step;
  if (!a.fibre.empty()) {
    const double n = std::sqrt(a.fibre[0] * a.fibre[0] + a.fibre[1] * a.fibre[1] + a.fibre[2] * a.fibre[2] +
                               a.fibre[3] * a.fibre[3]);
    if (!(n > 0.0)) throw ConfigError("--fibre must be a nonzero quaternion");
    po.fibre = {a.fibre[0] / n, a.fibre[1] / n, a.fibre[2] / n, a.fibre[3] / n};
  }
  if (a.max_samples < 0) throw ConfigError("--max-samples must be >= 0");
  const PsiSurface s = sample_surface(d, im, po);
  save_json(a.out, psi_surface_to_json(s, static_cast<std::size_t>(a.max_samples)));
  PipelineConfig c;
  c.fd_tol_factor = a.fd_tol_factor;
  c.exact_tol = a.exact_tol;
  return finish_stage("psi", verify_psi(d, im, s, c, po), a.report);
}

struct FieldArgs {
  std::string f, out, report;
  double fd_tol_factor = 10.0;
};

int cmd_surface(const FieldArgs& a) {
  const ScalarField2D F = load_field(a.f);
  const double r = max_norm_interior(residual(Pde::ideal_f(), F));
  if (!(r <= 1e-8)) throw PreconditionError("surface: F does not solve IdealF (residual " + std::to_string(r) + ")");
  const N2Data n2 = build_n2(F);
  N2CheckOptions nc;
  nc.fd_tol_factor = a.fd_tol_factor;
  auto reps = verify_n2(n2, nc);
  const auto g = perturbation_growth(F, {1e-3, 2e-3, 4e-3});
  auto pr = ResidualReport::from_samples(
      "perturbation_linear_growth", std::vector<double>{std::abs(g[1] / g[0] - 2.0), std::abs(g[2] / g[1] - 2.0)},
      F.grid.h(), 0.1);
  pr.extra = Json{{"eps", Json::array({1e-3, 2e-3, 4e-3})}, {"defect", g}};
  reps.push_back(std::move(pr));
  save_json(a.out, n2_to_json(n2));
  return finish_stage("hp2", reps, a.report);
}

int cmd_cp2(const FieldArgs& a) {
  const ScalarField2D F = load_field(a.f);
  const TzitzeicaField t = to_tzitzeica(F);
  Cp2CheckOptions cc;
  cc.fd_tol_factor = a.fd_tol_factor;
  save_json(a.out, tzitzeica_to_json(t));
  std::printf("cp2: q2 measured %.17g (relative std %.3e); stated |Q|^2 = %g\n", t.q2, t.relative_std(), kStatedQ2);
  return finish_stage("cp2", verify_cp2(F, t, cc), a.report);
}

struct PipelineArgs {
  std::string config, out_dir, bc, c_bc, regime, ply, projection;
  GridArgs grid;
  std::vector<double> taxis;
  std::optional<int> substeps, planes;
  std::optional<std::uint64_t> seed;
};

int cmd_pipeline(const PipelineArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : config_from_json(load_json(a.config));
  if (a.grid.given()) c.grid = a.grid.spec();
  if (!a.taxis.empty()) c.taxis = taxis_from(a.taxis);
  if (!a.out_dir.empty()) c.out_dir = a.out_dir;
  if (!a.bc.empty()) c.f_bc = a.bc;
  if (!a.c_bc.empty()) c.c_bc = a.c_bc;
  if (!a.regime.empty()) {
    if (a.regime == "integrable")
      c.regime = Regime::Integrable;
    else if (a.regime == "nonintegrable")
      c.regime = Regime::NonIntegrable;
    else
      throw ConfigError("--regime must be 'integrable' or 'nonintegrable'");
  }
  if (!a.ply.empty()) c.export_ply = a.ply;
  if (!a.projection.empty()) c.projection = a.projection;
  if (a.substeps) c.substeps = *a.substeps;
  if (a.planes) c.plane_samples = *a.planes;
  if (a.seed) c.seed = *a.seed;
  const PipelineResult r = run_pipeline(c);
  for (const auto& s : r.stages) print_reports(s.stage, s.reports);
  std::size_t n = 0, failed = 0;
  for (const auto& s : r.stages)
    for (const auto& rep : s.reports) {
      ++n;
      if (!rep.pass) {
        ++failed;
        std::fprintf(stderr, "ideal_lab: %s check '%s' failed\n", s.stage.c_str(), rep.name.c_str());
      }
    }
  std::printf("pipeline: %zu checks, %zu failed; reports in %s\n", n, failed, c.out_dir.c_str());
  return r.pass ? kExitOk : kExitNumerical;
}

/// Prints a stage report file, a summary.json, or every report in a
/// directory's reports/ folder.
int cmd_report(const std::string& in) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(in)) {
    const fs::path rd = fs::exists(fs::path(in) / "reports") ? fs::path(in) / "reports" : fs::path(in);
    for (const auto& e : fs::directory_iterator(rd))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no report files in '" + in + "'");
  } else {
    files.push_back(in);
  }
  bool ok = true;
  for (const auto& f : files) {
    const Json j = load_json(f.string());
    if (j.contains("checks")) {  // summary
      for (const auto& [k, v] : j.at("checks").items()) {
        std::printf("%-44s %s\n", k.c_str(), v.get<std::string>().c_str());
        if (v == "fail") ok = false;
      }
      continue;
    }
    if (!j.contains("reports")) throw IoError("'" + f.string() + "' is not a report file");
    const std::string stage = j.value("stage", f.stem().string());
    for (const auto& r : j.at("reports")) {
      const bool info = r.value("informational", false), pass = r.at("pass").get<bool>();
      std::printf("%-10s %-32s %-4s max %.3e  h %.4g\n", stage.c_str(), r.at("name").get<std::string>().c_str(),
                  info ? "info" : (pass ? "pass" : "FAIL"), r.at("max").is_null() ? NAN : r.at("max").get<double>(),
                  r.at("h").get<double>());
      if (!pass) ok = false;
    }
  }
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ideal_lab: minimal Lagrangian M3 in S6, HP2 surfaces and the CP2 bridge"};
  app.set_help_flag("--help", "print help (-h is taken by the grid spacing option)");
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "solve IdealF, LinearC or Tzitzeica on a grid");
  solve_cmd->add_option("--pde", sa.pde, "ideal-f | linear-c | tzitzeica")->capture_default_str();
  solve_cmd->add_option("--bc", sa.bc, "boundary: const:x | affine:a,b,c | wave[:theta,f0,df0] | file:path")->required();
  solve_cmd->add_option("--init", sa.init, "initial guess spec (default: the boundary data)");
  solve_cmd->add_option("--coupled", sa.coupled, "F field for linear-c");
  solve_cmd->add_option("--q2", sa.q2, "Tzitzeica constant");
  solve_cmd->add_option("--tol", sa.tol, "Newton residual tolerance")->capture_default_str();
  solve_cmd->add_option("--max-iter", sa.max_iter, "Newton iterations")->capture_default_str();
  solve_cmd->add_option("--out", sa.out, "field JSON")->required();
  solve_cmd->add_option("--trace", sa.trace, "iteration trace JSON (default <out>.trace.json)");
  sa.grid.add(solve_cmd);

  BuildArgs ba;
  auto* build_cmd = app.add_subcommand("build-m3", "build the M3 frame data from F (and C)");
  build_cmd->add_option("--f", ba.f, "F field JSON")->required();
  build_cmd->add_option("--c", ba.c, "C field JSON (selects the non-integrable regime)");
  build_cmd->add_option("--t-axis", ba.taxis, "t0 t1 nt")->expected(3);
  build_cmd->add_option("--fd-tol-factor", ba.fd_tol_factor)->capture_default_str();
  build_cmd->add_option("--planes", ba.planes, "sampled planes per node for delta(2)")->capture_default_str();
  build_cmd->add_option("--seed", ba.seed)->capture_default_str();
  build_cmd->add_option("--out", ba.out, "M3 JSON")->required();
  build_cmd->add_option("--report", ba.report, "report JSON");

  ImmerseArgs ia;
  auto* imm_cmd = app.add_subcommand("immerse", "integrate the frame equations into S6");
  imm_cmd->add_option("--m3", ia.m3, "M3 JSON")->required();
  imm_cmd->add_option("--substeps", ia.substeps, "RK4 steps per lattice edge")->capture_default_str();
  imm_cmd->add_option("--base", ia.base, "base node ix iy k (default: centre)")->expected(3);
  imm_cmd->add_option("--drift-tol", ia.drift_tol)->capture_default_str();
  imm_cmd->add_option("--fd-tol-factor", ia.fd_tol_factor)->capture_default_str();
  imm_cmd->add_option("--projection", ia.projection, "real | imag | i,j,k")->capture_default_str();
  imm_cmd->add_option("--export-ply", ia.ply, "ASCII PLY mesh");
  imm_cmd->add_option("--out", ia.out, "immersion JSON")->required();
  imm_cmd->add_option("--report", ia.report, "report JSON");

  PsiArgs pa;
  auto* psi_cmd = app.add_subcommand("psi", "map to HP2 and verify the surface");
  psi_cmd->add_option("--m3", pa.m3, "M3 JSON")->required();
  psi_cmd->add_option("--immersion", pa.immersion, "immersion JSON")->required();
  psi_cmd->add_option("--fd-step", pa.fd_step)->capture_default_str();
  psi_cmd->add_option("--fibre", pa.fibre, "fibre quaternion a b c d")->expected(4);
  psi_cmd->add_option("--max-samples", pa.max_samples, "samples written to the JSON")->capture_default_str();
  psi_cmd->add_option("--fd-tol-factor", pa.fd_tol_factor)->capture_default_str();
  psi_cmd->add_option("--exact-tol", pa.exact_tol)->capture_default_str();
  psi_cmd->add_option("--out", pa.out, "psi JSON")->required();
  psi_cmd->add_option("--report", pa.report, "report JSON");

  FieldArgs sfa;
  auto* surf_cmd = app.add_subcommand("surface", "HP2 surface from f: structure equations");
  surf_cmd->add_option("--f", sfa.f, "F field JSON")->required();
  surf_cmd->add_option("--fd-tol-factor", sfa.fd_tol_factor)->capture_default_str();
  surf_cmd->add_option("--out", sfa.out, "surface JSON")->required();
  surf_cmd->add_option("--report", sfa.report, "report JSON");

  FieldArgs ca;
  auto* cp2_cmd = app.add_subcommand("cp2", "transform F to a Tzitzeica field and measure q2");
  cp2_cmd->add_option("--f", ca.f, "F field JSON")->required();
  cp2_cmd->add_option("--fd-tol-factor", ca.fd_tol_factor)->capture_default_str();
  cp2_cmd->add_option("--out", ca.out, "Tzitzeica JSON")->required();
  cp2_cmd->add_option("--report", ca.report, "report JSON");

  PipelineArgs pl;
  int pl_substeps = 0, pl_planes = 0;
  std::uint64_t pl_seed = 0;
  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage and write reports + summary");
  pipe_cmd->add_option("--config", pl.config, "config JSON (flags override it)");
  pipe_cmd->add_option("--out-dir", pl.out_dir, "output directory");
  pipe_cmd->add_option("--bc", pl.bc, "F boundary spec");
  pipe_cmd->add_option("--c-bc", pl.c_bc, "C boundary spec (non-integrable)");
  pipe_cmd->add_option("--regime", pl.regime, "integrable | nonintegrable");
  pipe_cmd->add_option("--t-axis", pl.taxis, "t0 t1 nt")->expected(3);
  auto* o_sub = pipe_cmd->add_option("--substeps", pl_substeps);
  auto* o_planes = pipe_cmd->add_option("--planes", pl_planes);
  auto* o_seed = pipe_cmd->add_option("--seed", pl_seed);
  pipe_cmd->add_option("--export-ply", pl.ply, "ASCII PLY mesh");
  pipe_cmd->add_option("--projection", pl.projection, "real | imag | i,j,k");
  pl.grid.add(pipe_cmd);

  std::string report_in;
  auto* rep_cmd = app.add_subcommand("report", "print reports; exit 0 iff all pass");
  rep_cmd->add_option("--in", report_in, "report file, summary.json, or output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    thread_count();  // validate IDEAL_LAB_THREADS early
    if (*solve_cmd) return cmd_solve(sa);
    if (*build_cmd) return cmd_build(ba);
    if (*imm_cmd) return cmd_immerse(ia);
    if (*psi_cmd) return cmd_psi(pa);
    if (*surf_cmd) return cmd_surface(sfa);
    if (*cp2_cmd) return cmd_cp2(ca);
    if (*pipe_cmd) {
      if (o_sub->count()) pl.substeps = pl_substeps;
      if (o_planes->count()) pl.planes = pl_planes;
      if (o_seed->count()) pl.seed = pl_seed;
      return cmd_pipeline(pl);
    }
    if (*rep_cmd) return cmd_report(report_in);
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "ideal_lab: precondition failed: %s\n", e.what());
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "ideal_lab: %s\n", e.what());
    return kExitNumerical;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "ideal_lab: %s\n", e.what());
    return kExitNumerical;
  } catch (const IoError& e) {
    std::fprintf(stderr, "ideal_lab: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {  // ConfigError, GridError, bad options
    std::fprintf(stderr, "ideal_lab: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ideal_lab: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
