// hvns: command-line front end for simulations and studies.
//
//   hvns simulate  --config run.ini [--out DIR] [--seed N] [--resume CKPT]
//   hvns converge  --config run.ini ...
//   hvns dimension --config run.ini ...
//   hvns audit     --config run.ini ...
//   hvns bounds    --config run.ini ...
//
// Each command writes its CSV files, a summary.txt and manifest.json into the
// output directory (--out, else $HVNS_OUT_DIR, else the working directory).
// Exit status: 0 all invariants held, 1 an invariant failed, 2 bad usage or
// config, 3 runtime failure (blow-up, I/O).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hvns/hvns.hpp"
#include "hvns/io/checkpoint.hpp"
#include "hvns/io/config.hpp"
#include "hvns/io/csv.hpp"
#include "hvns/io/manifest.hpp"

namespace fs = std::filesystem;
using namespace hvns;
using io::format_double;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string resume;
};

class Run {
 public:
  Run(const std::string& command, const Options& opt) : opt_(opt) {
    out_dir_ = opt.out;
    if (out_dir_.empty()) {
      const char* env = std::getenv("HVNS_OUT_DIR");
      out_dir_ = env ? env : ".";
    }
    fs::create_directories(out_dir_);
    cfg_ = io::load_config(opt.config, opt.seed);
    manifest_.command = command;
    manifest_.config_path = opt.config;
    manifest_.config_digest = cfg_.digest;
    manifest_.seed = cfg_.initial.seed;
    manifest_.flags = cfg_.flags;
  }

  const io::RunConfig& cfg() const { return cfg_; }
  const BoxSpec& box() const { return cfg_.sim.u0.box(); }
  io::RunManifest& manifest() { return manifest_; }

  std::string path(const std::string& name) {
    manifest_.outputs.push_back(name);
    return (fs::path(out_dir_) / name).string();
  }

  void line(const std::string& s) { summary_ << s << '\n'; }

  void check(const std::string& name, bool held) {
    manifest_.check(name, held);
    line(std::string(held ? "  [ok]   " : "  [FAIL] ") + name);
  }

  int finish() {
    {
      const std::string p = path("summary.txt");
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << summary_.str();
      if (!out) throw IoError("write failed on " + p);
    }
    manifest_.end_time = io::utc_now();
    manifest_.outputs.push_back("manifest.json");
    manifest_.write((fs::path(out_dir_) / "manifest.json").string());
    std::cout << summary_.str();
    std::cout << (manifest_.ok ? "all invariants held" : "invariant FAILED") << " -> " << out_dir_ << '\n';
    return manifest_.ok ? 0 : 1;
  }

  const Options& options() const { return opt_; }

 private:
  Options opt_;
  std::string out_dir_;
  io::RunConfig cfg_;
  io::RunManifest manifest_;
  std::ostringstream summary_;
};

std::string header_line(const io::RunConfig& c) {
  const auto& p = c.sim.params;
  return c.sim.u0.box().describe() + " nu=" + format_double(p.nu) + " eps=" + format_double(p.eps) +
         " l=" + format_double(p.l) + " scheme=" + scheme_name(c.sim.scheme);
}

// Shared by simulate and bounds: integrate and stream the records to CSV.
std::vector<DiagnosticsRecord> integrate(Run& run, std::optional<SimState> resume, SimulationSummary& summary) {
  const auto& cfg = run.cfg();
  std::vector<DiagnosticsRecord> records;
  io::RecordCsvWriter csv(run.path("diagnostics.csv"), {header_line(cfg)});
  summary = simulate(cfg.sim,
                     [&](const DiagnosticsRecord& r) {
                       records.push_back(r);
                       csv(r);
                     },
                     resume);
  csv.close();
  io::save_checkpoint(run.path("checkpoint.bin"), summary.final_state, cfg.sim.params);
  return records;
}

void report_run(Run& run, const std::vector<DiagnosticsRecord>& records, const SimulationSummary& s) {
  const auto& p = run.cfg().sim.params;
  double worst_budget = 0.0, max_energy = 0.0;
  for (const auto& r : records) {
    worst_budget = std::max(worst_budget, std::abs(r.budget_residual));
    max_energy = std::max(max_energy, r.energy);
  }
  run.line("t_end " + format_double(s.final_state.t) + ", steps " + std::to_string(s.final_state.step_index) +
           ", records " + std::to_string(records.size()));
  run.line("max |budget residual| " + format_double(worst_budget) + " (max energy " + format_double(max_energy) + ")");
  run.line("max CFL " + format_double(s.max_cfl) + ", CFL > 1 steps " + std::to_string(s.cfl_violations));
  auto& sm = run.manifest().summary;
  sm["t_end"] = s.final_state.t;
  sm["steps"] = s.final_state.step_index;
  sm["max_budget_residual"] = worst_budget;
  sm["max_cfl"] = s.max_cfl;
  sm["grashof"] = grashof(p, run.box());
  run.check("solenoidal final state", divergence_defect(s.final_state.u) <= 1e-10);
  run.check("real final state", hermitian_defect(s.final_state.u) <= 1e-10);

  const auto abs = absorbing_check(records, p);
  run.line("absorbing radius " + format_double(abs.rho0) + ", worst envelope ratio " +
           format_double(abs.worst_envelope_ratio));
  sm["rho0"] = abs.rho0;
  sm["worst_envelope_ratio"] = abs.worst_envelope_ratio;
  run.check("energy under the absorbing envelope at every sample", abs.violations == 0);
  if (abs.tail_samples > 0) {
    run.line("tail max ||u|| " + format_double(abs.tail_max) + " after t = " + format_double(abs.burn_in));
    run.check("tail max ||u|| <= 1.01 rho0", abs.tail_ok);
  }
}

int cmd_simulate(Run& run) {
  std::optional<SimState> resume;
  if (!run.options().resume.empty()) {
    const auto ck = io::read_checkpoint(run.options().resume);
    const auto& p = run.cfg().sim.params;
    if (!(ck.state.u.box() == run.box())) {
      throw StructuralError(run.options().resume + ": checkpoint box mismatch (" + ck.state.u.box().describe() +
                            " vs " + run.box().describe() + ")");
    }
    if (ck.nu != p.nu || ck.eps != p.eps || ck.l != p.l) {
      throw ContractError(run.options().resume + ": checkpoint parameters differ from the config");
    }
    if (!(ck.state.t < run.cfg().sim.t_end)) {
      throw ContractError(run.options().resume + ": checkpoint is already at t = " + format_double(ck.state.t) +
                          "; raise time.t_end to continue");
    }
    resume = ck.state;
    run.manifest().summary["resumed_from"] = run.options().resume;
    run.manifest().summary["resume_step"] = ck.state.step_index;
  }
  run.line("simulate: " + header_line(run.cfg()));
  SimulationSummary s;
  const auto records = integrate(run, resume, s);
  report_run(run, records, s);
  return run.finish();
}

int cmd_bounds(Run& run) {
  const auto& cfg = run.cfg();
  const auto& p = cfg.sim.params;
  run.line("bounds: " + header_line(cfg));
  SimulationSummary s;
  const auto records = integrate(run, std::nullopt, s);
  report_run(run, records, s);

  const double burn = cfg.study.burn_in >= 0.0 ? cfg.study.burn_in : burn_in_time(p, run.box());
  const auto diss = dissipation_rate(records, run.box(), p, burn);
  const auto b = dof_bounds(diss.value, p, run.box());
  const std::vector<std::pair<std::string, double>> rows{
      {"grashof", b.G},
      {"rho0", b.rho0},
      {"mean_enstrophy", diss.enstrophy.mean},
      {"mean_enstrophy_se", diss.enstrophy.standard_error},
      {"enstrophy_bound", diss.enstrophy_bound},
      {"eps_diss", diss.value},
      {"eps_diss_se", diss.standard_error},
      {"eps_bound_flux", diss.bound_flux},
      {"eps_bound_grashof", diss.bound_grashof},
      {"l_eps", b.l_eps},
      {"l0", b.l0},
      {"dof_landau", b.dof_landau},
      {"dof_paper", b.dof_paper},
      {"dof_grashof", b.dof_grashof},
      {"c11", b.c11},
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& [k, v] : rows) {
    cells.push_back({k, format_double(v)});
    run.manifest().summary[k] = v;
    run.line(k + " " + format_double(v));
  }
  io::write_table_csv(run.path("bounds.csv"), {"quantity", "value"}, cells,
                      {header_line(cfg), "constants: " + b.constant_flag, b.note,
                       "tail window from t = " + format_double(diss.enstrophy.t_start)});
  run.line("constants: " + b.constant_flag + (b.laminar ? " (laminar: eps_diss = 0)" : ""));
  run.check("tail-average enstrophy <= 1.05 ||f||^2/(nu^2 lambda_1)", diss.enstrophy_ok);
  run.check("dissipation rate <= 1.05 lambda_1^(1/2)||f||^2/nu", diss.flux_ok);
  run.check("dissipation rate <= 1.05 lambda_1^2 nu^3 G^2", diss.grashof_ok);
  return run.finish();
}

int cmd_converge(Run& run) {
  const auto& cfg = run.cfg();
  run.line("converge: " + header_line(cfg));
  const auto t = convergence_study(cfg.sim, cfg.study.eps_list, cfg.study.reference_eps, cfg.study.workers);
  std::vector<std::string> comments{header_line(cfg), "reference eps = " + format_double(t.reference_eps),
                                    "error = sqrt(int_0^T ||u_eps - u_ref||^2 dt), dt = " + format_double(t.dt) +
                                        ", sample interval " + format_double(t.sample_interval)};
  for (const auto& n : t.notes) comments.push_back(n);
  std::vector<std::vector<std::string>> cells;
  bool finite = true, decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    cells.push_back({format_double(r.eps), format_double(r.error), r.flagged ? "1" : "0", r.reason});
    run.line("eps " + format_double(r.eps) + "  error " + format_double(r.error) + (r.flagged ? "  FLAGGED " + r.reason : ""));
    if (r.flagged) continue;
    finite = finite && std::isfinite(r.error);
    if (r.eps != t.reference_eps) {
      decreasing = decreasing && r.error < prev;
      prev = r.error;
    }
  }
  io::write_table_csv(run.path("convergence.csv"), {"eps", "error", "flagged", "reason"}, cells, comments);
  for (const auto& n : t.notes) run.line("note: " + n);
  run.line("fitted order in eps " + format_double(t.order) + " over " + std::to_string(t.fitted_rows) + " rows");
  run.manifest().summary["reference_eps"] = t.reference_eps;
  run.manifest().summary["order"] = std::isfinite(t.order) ? nlohmann::ordered_json(t.order) : nullptr;
  run.check("errors finite", finite);
  run.check("errors strictly decreasing in eps", decreasing);
  return run.finish();
}

int cmd_dimension(Run& run) {
  const auto& cfg = run.cfg();
  const auto& st = cfg.study;
  run.line("dimension: " + header_line(cfg));
  const EnsembleOptions opt{st.m, st.window, st.ortho_every, st.burn_in};
  const auto rep = evolve_ensemble(cfg.sim, opt);
  std::vector<std::vector<std::string>> cells;
  bool finite = true, monotone = true;
  for (std::size_t j = 0; j < rep.q.size(); ++j) {
    cells.push_back({std::to_string(j + 1), format_double(rep.q[j]), format_double(rep.q_standard_error[j]),
                     format_double(rep.lyapunov_sum[j])});
    finite = finite && std::isfinite(rep.q[j]);
    if (j > 0) {
      const double tol = rep.q_standard_error[j] + rep.q_standard_error[j - 1] + 1e-12 * std::abs(rep.q[j]);
      monotone = monotone && rep.q[j] <= rep.q[j - 1] + tol;
    }
  }
  std::vector<std::string> comments{header_line(cfg),
                                    "burn-in " + format_double(rep.burn_in) + ", window " + format_double(rep.window) +
                                        ", ortho_every " + std::to_string(rep.ortho_every)};
  if (!rep.note.empty()) comments.push_back(rep.note);
  if (rep.aborted) comments.push_back("aborted: " + rep.abort_reason);
  io::write_table_csv(run.path("dimension.csv"), {"m", "q_m", "q_m_standard_error", "lyapunov_sum"}, cells, comments);

  run.line("G " + format_double(rep.grashof) + ", mean enstrophy " + format_double(rep.mean_enstrophy));
  if (rep.m_star) {
    run.line("m_star " + std::to_string(*rep.m_star) + ", dim_H <= " + format_double(rep.dim_h_bound) +
             ", dim_F <= " + format_double(rep.dim_f_bound));
    run.manifest().summary["m_star"] = *rep.m_star;
    run.manifest().summary["dim_f_bound"] = rep.dim_f_bound;
  } else {
    run.line("no q_m < 0 for m <= " + std::to_string(st.m) + ": raise study.m");
    run.manifest().summary["m_star"] = nullptr;
  }
  run.check("tangent integration completed", !rep.aborted);
  run.check("trace sums finite", finite);
  run.check("q_m non-increasing in m within standard error", monotone);

  if (!st.grashof_list.empty()) {
    const auto sweep = dimension_vs_bound_sweep(cfg.sim, st.grashof_list, opt, st.workers);
    std::vector<std::vector<std::string>> rows;
    bool grashof_column = true;
    for (const auto& r : sweep.rows) {
      rows.push_back({format_double(r.target_G), format_double(r.G),
                      r.dimension.m_star ? std::to_string(*r.dimension.m_star) : "",
                      format_double(r.dimension.dim_f_bound), format_double(r.eps_diss),
                      format_double(r.bounds.dof_paper), format_double(r.bounds.dof_grashof),
                      format_double(r.g_cube_half), r.flagged ? "1" : "0", r.reason});
      grashof_column = grashof_column &&
                       std::abs(r.bounds.dof_grashof - std::pow(r.G, kGrashofExponent)) <=
                           1e-12 * std::max(1.0, r.bounds.dof_grashof);
      run.line("  G " + format_double(r.G) + "  m_star " + (r.dimension.m_star ? std::to_string(*r.dimension.m_star) : "-") +
               "  G^1.05 " + format_double(r.bounds.dof_grashof) + (r.flagged ? "  flagged: " + r.reason : ""));
    }
    io::write_table_csv(run.path("sweep.csv"),
                        {"target_G", "G", "m_star", "dim_f_bound", "eps_diss", "dof_paper", "dof_grashof", "G^1.5",
                         "flagged", "reason"},
                        rows,
                        {header_line(cfg), "constants: normalized-constant",
                         "log-log slope of m_star vs G: " + format_double(sweep.slope)});
    run.line("log-log slope of m_star vs G " + format_double(sweep.slope));
    run.check("dof_grashof column equals G^1.05", grashof_column);
  }
  return run.finish();
}

int cmd_audit(Run& run) {
  const auto& cfg = run.cfg();
  const auto& st = cfg.study;
  const auto seed = cfg.initial.seed;
  run.line("audit: " + run.box().describe() + " seed " + std::to_string(seed));
  const auto rep = inequality_audit(run.box(), st.samples, seed, st.workers);
  std::vector<std::vector<std::string>> cells;
  bool finite = true;
  for (const auto* s : {&rep.poincare, &rep.agmon, &rep.b_form, &rep.continuity}) {
    cells.push_back({s->name, format_double(s->max_ratio), std::to_string(s->samples), std::to_string(s->worst_seed),
                     std::to_string(s->violations)});
    finite = finite && std::isfinite(s->max_ratio);
    run.line("  " + s->name + " max ratio " + format_double(s->max_ratio) + " (worst seed " +
             std::to_string(s->worst_seed) + ")");
  }
  io::write_table_csv(run.path("audit.csv"), {"inequality", "max_ratio", "samples", "worst_seed", "violations"}, cells,
                      {run.box().describe() + " seed " + std::to_string(seed),
                       "spectrum gamma " + format_double(rep.spectrum.gamma) + " kc " + format_double(rep.spectrum.kc),
                       "first eigenmode poincare ratio " + format_double(rep.first_eigenmode_poincare)});
  run.check("zero Poincare violations", rep.poincare.violations == 0);
  run.check("Poincare equality at the first eigenmode (1e-12)", std::abs(rep.first_eigenmode_poincare - 1.0) <= 1e-12);
  run.check("audit ratios finite", finite);

  const auto lt = lieb_thirring_probe(run.box(), st.family_sizes, cfg.sim.params.l, st.lt_q, seed, st.trials, st.workers);
  std::vector<std::vector<std::string>> rows;
  bool lt_finite = true;
  for (const auto& r : lt.rows) {
    rows.push_back({std::to_string(r.family_size), std::to_string(r.trials), format_double(r.min_ratio),
                    format_double(r.mean_ratio), format_double(r.max_ratio)});
    lt_finite = lt_finite && std::isfinite(r.max_ratio) && r.min_ratio > 0.0;
    run.line("  family " + std::to_string(r.family_size) + " mean ratio " + format_double(r.mean_ratio) +
             " max " + format_double(r.max_ratio));
  }
  io::write_table_csv(run.path("lieb_thirring.csv"), {"family_size", "trials", "min_ratio", "mean_ratio", "max_ratio"},
                      rows,
                      {run.box().describe() + " l " + format_double(lt.l) + " q " + format_double(lt.q),
                       "kappa lower bound " + format_double(lt.kappa_lower_bound())});
  run.line("Lieb-Thirring variation (mean ratios) " + format_double(lt.variation()) + ", max ratios " +
           format_double(lt.max_variation()));
  run.manifest().summary["lt_variation"] = lt.variation();
  run.manifest().summary["kappa_lower_bound"] = lt.kappa_lower_bound();
  run.check("Lieb-Thirring ratios finite and positive", lt_finite);
  run.check("Lieb-Thirring ratio varies < 2x across family sizes", lt.variation() < 2.0);
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral hyperviscous Navier-Stokes simulator and diagnostics"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: $HVNS_OUT_DIR or .)");
    sub->add_option("--seed", seed, "seed replacing initial.seed");
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "integrate and write diagnostics + checkpoint");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--resume", opt.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  auto* converge_cmd = app.add_subcommand("converge", "eps -> 0 strong convergence table");
  add_common(converge_cmd);
  auto* dimension_cmd = app.add_subcommand("dimension", "trace sums, dimension bounds and Grashof sweep");
  add_common(dimension_cmd);
  auto* audit_cmd = app.add_subcommand("audit", "functional inequality audit and Lieb-Thirring probe");
  add_common(audit_cmd);
  auto* bounds_cmd = app.add_subcommand("bounds", "dissipation rate and degrees-of-freedom estimates");
  add_common(bounds_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      if (sub->count("--seed")) opt.seed = seed;
      Run run(sub->get_name(), opt);
      if (sub == simulate_cmd) return cmd_simulate(run);
      if (sub == converge_cmd) return cmd_converge(run);
      if (sub == dimension_cmd) return cmd_dimension(run);
      if (sub == audit_cmd) return cmd_audit(run);
      if (sub == bounds_cmd) return cmd_bounds(run);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error(s):\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
