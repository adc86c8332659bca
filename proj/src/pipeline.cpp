#include "homog/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "homog/field_io.hpp"
#include "homog/kernels.hpp"
#include "homog/operators.hpp"

namespace homog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void log(const PipelineOptions& opt, int level, const std::string& msg) {
  if (opt.log_level >= level) std::cout << "[homog] " << msg << "\n";
}

struct StageTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void write_manifest(const fs::path& dir, const std::string& stage, const SimConfig& cfg,
                    double ms, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["stage"] = stage;
  m["version"] = kVersion;
  m["config_hash"] = hash_hex(config_hash(cfg));
  m["timing_ms"] = ms;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  std::ofstream os(dir / ("manifest_" + stage + ".json"));
  os << m.dump(2) << "\n";
}

void require_artifact(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p))
    throw std::runtime_error("missing artifact '" + p.string() + "' — run the '" + producer +
                             "' stage first");
}

PhaseField load_theta0(const fs::path& dir, const SimConfig& cfg) {
  require_artifact(dir / "theta0.fld", "gen-structure");
  PhaseField ph;
  ph.theta0 = read_scalar_field((dir / "theta0.fld").string());
  ph.grid = ph.theta0.grid;
  ph.epsilon = cfg.structure.epsilon;
  ph.descriptor = cfg.structure;
  return ph;
}

void write_energy_csv(const fs::path& path, const MicroTrace& trace) {
  std::ofstream os(path);
  os.precision(17);
  os << "t,kinetic,elastic,dissipated,work\n";
  for (const auto& r : trace.rows)
    os << r.t << "," << r.kinetic << "," << r.elastic << "," << r.dissipated << "," << r.work
       << "\n";
}

std::vector<EnergyRow> read_energy_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<EnergyRow> rows;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    EnergyRow r{};
    std::istringstream ls(line);
    char comma;
    ls >> r.t >> comma >> r.kinetic >> comma >> r.elastic >> comma >> r.dissipated >> comma >>
        r.work;
    rows.push_back(r);
  }
  return rows;
}

void write_flux_csv(const fs::path& path, const std::vector<TensorAvg>& flux, double ds) {
  std::ofstream os(path);
  os.precision(17);
  os << "s,F11,F22,F12\n";
  for (std::size_t k = 0; k < flux.size(); ++k)
    os << k * ds << "," << flux[k][0] << "," << flux[k][1] << "," << flux[k][2] << "\n";
}

std::vector<TensorAvg> read_flux_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<TensorAvg> out;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    TensorAvg a{};
    std::getline(ls, tok, ',');  // s
    for (int c = 0; c < 3; ++c) {
      std::getline(ls, tok, ',');
      a[c] = std::stod(tok);
    }
    out.push_back(a);
  }
  return out;
}

int stage_gen_structure(const SimConfig& cfg, const fs::path& dir, const PipelineOptions& opt) {
  StageTimer timer;
  Grid g = cfg.make_grid();
  StructureSpec spec = cfg.structure;
  PhaseField ph = generate_phase_field(spec, g);
  write_field((dir / "theta0.fld").string(), ph.theta0, "theta0");
  log(opt, 1, "gen-structure: vf = " + std::to_string(measure_volume_fraction(ph)));
  write_manifest(dir, "gen-structure", cfg, timer.ms(), {}, {"theta0.fld"});
  return exit_ok;
}

int stage_run_micro(const SimConfig& cfg, const fs::path& dir, const PipelineOptions& opt) {
  StageTimer timer;
  PhaseField ph = load_theta0(dir, cfg);
  const Grid& g = ph.grid;
  kernels::set_backend(kernels::backend_from_string(cfg.kernel_backend));

  MicroRunConfig rc;
  rc.dt = cfg.effective_dt(g);
  rc.steps = cfg.micro_steps(g);
  rc.step.convection = cfg.convection;
  rc.step.theta_scheme = cfg.theta_scheme;
  rc.step.saddle = cfg.saddle_options();
  rc.forcing = cfg.make_forcing();
  rc.snapshot_every = cfg.snapshot_every;

  MicroState st = make_initial_state(ph, cfg.material, cfg.make_initial_velocity(g));
  MicroTrace trace = run_microscale(std::move(st), ph, cfg.material, rc);

  const fs::path mdir = dir / "micro";
  fs::create_directories(mdir);
  write_energy_csv(mdir / "energy.csv", trace);
  std::vector<std::string> outputs{"micro/energy.csv"};
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04zu", i);
    const std::string base = std::string(buf);
    const MicroState& s = trace.snapshots[i];
    write_field((mdir / (base + "_rho.fld")).string(), s.rho, "rho");
    write_field((mdir / (base + "_v.fld")).string(), s.v, "v");
    write_field((mdir / (base + "_u.fld")).string(), s.u, "u");
    write_field((mdir / (base + "_theta.fld")).string(), s.theta, "theta");
    write_field((mdir / (base + "_P.fld")).string(), s.P, "P");
    outputs.push_back("micro/" + base + "_*.fld");
  }
  {
    std::ofstream os(mdir / "snapshots.csv");
    os.precision(17);
    os << "index,t\n";
    for (std::size_t i = 0; i < trace.snapshot_times.size(); ++i)
      os << i << "," << trace.snapshot_times[i] << "\n";
  }
  log(opt, 1, "run-micro: " + std::to_string(rc.steps) + " steps, dt = " + std::to_string(rc.dt));
  write_manifest(dir, "run-micro", cfg, timer.ms(), {"theta0.fld"}, outputs);
  return exit_ok;
}

int stage_run_correctors(const SimConfig& cfg, const fs::path& dir, const PipelineOptions& opt) {
  StageTimer timer;
  PhaseField ph = load_theta0(dir, cfg);
  kernels::set_backend(kernels::backend_from_string(cfg.kernel_backend));
  CorrectorOptions co = cfg.corrector_options();
  CorrectorSet cs = solve_all_correctors(ph, cfg.material, co);
  save_corrector_set((dir / "correctors").string(), cs);
  log(opt, 1, "run-correctors: K = " + std::to_string(cs.K) + ", ds = " + std::to_string(cs.ds));
  write_manifest(dir, "run-correctors", cfg, timer.ms(), {"theta0.fld"}, {"correctors/"});
  return exit_ok;
}

int stage_assemble_effective(const SimConfig& cfg, const fs::path& dir,
                             const PipelineOptions& opt) {
  StageTimer timer;
  require_artifact(dir / "correctors" / "correctors.json", "run-correctors");
  CorrectorSet cs = load_corrector_set((dir / "correctors").string());
  EffectiveLaw law = assemble_effective_law(cs);
  write_effective_law((dir / "effective_law.txt").string(), law);
  // kernel-horizon truncation warning per the law contract
  if (!law.C.empty()) {
    const double c0 = pair_matrix_inf_norm(law.C.front());
    const double ck = pair_matrix_inf_norm(law.C.back());
    if (c0 > 0.0 && ck > 1e-3 * c0)
      log(opt, 1, "warning: kernel tail |C(s_K)| = " + std::to_string(ck) + " exceeds 1e-3 |C(0)|" +
                      " — consider a longer horizon");
  }
  log(opt, 1, "assemble-effective: wrote effective_law.txt");
  write_manifest(dir, "assemble-effective", cfg, timer.ms(), {"correctors/"},
                 {"effective_law.txt"});
  return exit_ok;
}

int stage_run_macro(const SimConfig& cfg, const fs::path& dir, const PipelineOptions& opt) {
  StageTimer timer;
  require_artifact(dir / "effective_law.txt", "assemble-effective");
  EffectiveLaw law = read_effective_law((dir / "effective_law.txt").string());
  Grid g = cfg.make_grid();
  kernels::set_backend(kernels::backend_from_string(cfg.kernel_backend));

  double vf = cfg.structure.vf;
  if (fs::exists(dir / "theta0.fld")) {
    PhaseField ph = load_theta0(dir, cfg);
    vf = measure_volume_fraction(ph);
  }
  const double rho0 = vf * cfg.material.rho1 + (1.0 - vf) * cfg.material.rho2;

  double dt = cfg.effective_dt(g);
  // align dt with the kernel grid: largest divisor of ds not above dt
  if (law.ds > 0.0) {
    const int stride = std::max(1, static_cast<int>(std::ceil(law.ds / dt - 1e-12)));
    dt = law.ds / stride;
  }
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.T / dt)));

  MacroStepOptions mo;
  mo.theta_scheme = cfg.theta_scheme;
  mo.saddle = cfg.saddle_options();
  MacroState st = make_initial_macro_state(g, rho0, cfg.make_initial_velocity(g), law);
  const fs::path mdir = dir / "macro";
  fs::create_directories(mdir);
  std::ofstream kcsv(mdir / "kinetic.csv");
  kcsv.precision(17);
  kcsv << "t,kinetic\n";
  kcsv << st.t << "," << kinetic_energy(st.rho, st.v) << "\n";
  int snap = 0;
  auto dump = [&](const MacroState& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04d", snap++);
    const std::string base = std::string(buf);
    write_field((mdir / (base + "_rho.fld")).string(), s.rho, "rho_bar");
    write_field((mdir / (base + "_v.fld")).string(), s.v, "v_bar");
    write_field((mdir / (base + "_u.fld")).string(), s.u, "u_bar");
    write_field((mdir / (base + "_P.fld")).string(), s.P, "P_bar");
  };
  dump(st);
  for (int s = 0; s < steps; ++s) {
    StepDiagnostics d;
    st = step_effective(st, law, dt, mo, cfg.make_forcing(), &d);
    if (mo.saddle.residual_scale == 0.0 && d.schur_r0 > 0.0)
      mo.saddle.residual_scale = d.schur_r0;
    kcsv << st.t << "," << kinetic_energy(st.rho, st.v) << "\n";
    if ((cfg.snapshot_every > 0 && (s + 1) % cfg.snapshot_every == 0) || s + 1 == steps) dump(st);
  }
  log(opt, 1, "run-macro: " + std::to_string(steps) + " steps, dt = " + std::to_string(dt));
  write_manifest(dir, "run-macro", cfg, timer.ms(), {"effective_law.txt"}, {"macro/"});
  return exit_ok;
}

int stage_validate(const SimConfig& cfg, const fs::path& dir, const PipelineOptions& opt) {
  StageTimer timer;
  kernels::set_backend(kernels::backend_from_string(cfg.kernel_backend));
  AuditReport rep;

  // law-level audits and oracle comparisons
  if (fs::exists(dir / "effective_law.txt")) {
    EffectiveLaw law = read_effective_law((dir / "effective_law.txt").string());
    merge(rep, audit_effective_law(law, cfg.material));

    const bool identical = cfg.material.mu1 == cfg.material.mu2 &&
                           cfg.material.nu1 == cfg.material.nu2;
    if (identical && cfg.material.mat_case == MaterialCase::kelvin_voigt) {
      PairMatrix idA{}, idB{};
      for (int a = 0; a < 3; ++a) {
        idA[a][a] = cfg.material.mu1;
        idB[a][a] = cfg.material.nu1;
      }
      const double da = pair_matrix_inf_norm(pair_matrix_diff(law.A, idA));
      const double db = pair_matrix_inf_norm(pair_matrix_diff(law.B, idB));
      double ck = 0.0;
      for (const auto& m : law.C) ck = std::max(ck, pair_matrix_inf_norm(m));
      rep.entries.push_back({"identical phases: |A - mu Id|", da <= 1e-8, da, 1e-8});
      rep.entries.push_back({"identical phases: |B - nu Id|", db <= 1e-8, db, 1e-8});
      rep.entries.push_back({"identical phases: |C|", ck <= 1e-8, ck, 1e-8});
    }
    if (!identical && cfg.structure.kind == StructureKind::laminate && cfg.structure.vf > 0.0 &&
        cfg.structure.vf < 1.0 && cfg.material.mat_case == MaterialCase::kelvin_voigt) {
      for (double w : {0.1, 1.0, 10.0}) {
        const auto oracle = laminate_oracle(cfg.material, cfg.structure.vf, w);
        const auto m = complex_modulus(law, w);
        const double rel = std::abs(m[2][2] - oracle) / std::abs(oracle);
        rep.entries.push_back({"laminate modulus vs oracle at omega=" + std::to_string(w),
                               rel <= 0.02, rel, 0.02});
      }
      PronyFit fit = fit_prony(kernel_entry(law.C, 2, 2), law.ds);
      rep.entries.push_back(
          {"kernel Prony fit residual", fit.valid && fit.rel_l2_residual <= 0.05,
           fit.rel_l2_residual, 0.05});
      const double rate = series_relaxation_rate(cfg.material, cfg.structure.vf);
      const double rate_rel = rate > 0.0 ? std::fabs(fit.rate - rate) / rate : 0.0;
      rep.entries.push_back({"kernel rate vs series oracle", rate_rel <= 0.03, rate_rel, 0.03});
    }
  }

  // corrector audits
  if (fs::exists(dir / "correctors" / "correctors.json")) {
    CorrectorSet cs = load_corrector_set((dir / "correctors").string());
    merge(rep, audit_corrector_set(cs));
  }

  // microscale trace audits
  if (fs::exists(dir / "micro" / "energy.csv")) {
    MicroTrace trace;
    trace.rows = read_energy_csv(dir / "micro" / "energy.csv");
    int idx = 0;
    while (true) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "snapshot_%04d", idx);
      const fs::path p = dir / "micro" / (std::string(buf) + "_rho.fld");
      if (!fs::exists(p)) break;
      MicroState s;
      s.rho = read_scalar_field(p.string());
      s.v = read_vector_field((dir / "micro" / (std::string(buf) + "_v.fld")).string());
      trace.snapshots.push_back(std::move(s));
      ++idx;
    }
    PhaseField ph = load_theta0(dir, cfg);
    merge(rep, audit_energy(trace, ph, cfg.material));
    merge(rep, audit_mass_conservation(trace, ph.grid));
    merge(rep, audit_density_bounds(trace, cfg.material));
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i)
      merge(rep, audit_divergence(trace.snapshots[i].v, 1e-8,
                                  "micro snapshot " + std::to_string(i)));
  }

  // convergence study scenario
  if (!cfg.eps_list.empty()) {
    ConvergenceScenario sc;
    sc.grid = cfg.make_grid();
    sc.mat = cfg.material;
    sc.structure = cfg.structure;
    sc.forcing = cfg.make_forcing();
    sc.T = cfg.T;
    sc.dt = cfg.effective_dt(sc.grid);
    sc.theta_scheme = cfg.theta_scheme;
    sc.saddle = cfg.saddle_options();
    ConvergenceReport cr = convergence_study(sc, cfg.eps_list);
    rep.entries.push_back({"convergence: v errors strictly decreasing in eps",
                           cr.strictly_decreasing,
                           cr.v_errors.empty() ? 0.0 : cr.v_errors.back(), 0.0});
    const fs::path vdir = dir / "validation";
    fs::create_directories(vdir);
    std::ofstream os(vdir / "convergence.csv");
    os.precision(17);
    os << "eps,v_error,u_error\n";
    for (std::size_t i = 0; i < cr.eps_list.size(); ++i)
      os << cr.eps_list[i] << "," << cr.v_errors[i] << "," << cr.u_errors[i] << "\n";
  }

  const fs::path vdir = dir / "validation";
  fs::create_directories(vdir);
  {
    std::ofstream os(vdir / "report.csv");
    os.precision(17);
    os << "check,pass,measured,threshold\n";
    for (const auto& e : rep.entries)
      os << '"' << e.name << "\"," << (e.pass ? 1 : 0) << "," << e.measured << "," << e.threshold
         << "\n";
  }
  {
    std::ofstream os(vdir / "summary.txt");
    int passed = 0;
    for (const auto& e : rep.entries) passed += e.pass ? 1 : 0;
    os << "validation: " << passed << "/" << rep.entries.size() << " checks passed\n";
    for (const auto& e : rep.entries)
      os << (e.pass ? "[PASS] " : "[FAIL] ") << e.name << " (measured " << e.measured
         << ", threshold " << e.threshold << ")\n";
  }
  for (const auto& e : rep.entries)
    log(opt, e.pass ? 2 : 1,
        std::string(e.pass ? "[PASS] " : "[FAIL] ") + e.name + " (measured " +
            std::to_string(e.measured) + ")");
  log(opt, 1, "validate: " + std::to_string(rep.entries.size()) + " checks, " +
                  (rep.all_pass() ? "all passed" : "FAILURES PRESENT"));
  write_manifest(dir, "validate", cfg, timer.ms(), {}, {"validation/report.csv"});
  return rep.all_pass() ? exit_ok : exit_validation;
}

}  // namespace

const std::vector<std::string>& all_stages() {
  static const std::vector<std::string> stages = {"gen-structure",      "run-micro",
                                                  "run-correctors",     "assemble-effective",
                                                  "run-macro",          "validate"};
  return stages;
}

void save_corrector_set(const std::string& dir_s, const CorrectorSet& cs) {
  const fs::path dir(dir_s);
  fs::create_directories(dir);
  json m;
  m["case"] = to_string(cs.mat_case);
  m["K"] = cs.K;
  m["ds"] = cs.ds;
  m["pairs"] = json::array();
  for (std::size_t i = 0; i < cs.pairs.size(); ++i) {
    const auto& pc = cs.pairs[i];
    json jp;
    jp["p"] = pc.pq.p;
    jp["q"] = pc.pq.q;
    jp["max_div"] = pc.max_div;
    jp["has_F4"] = !pc.F4_avg.empty();
    m["pairs"].push_back(jp);
    const std::string tag = "pair" + std::to_string(i);
    write_field((dir / (tag + "_n.fld")).string(), pc.n, tag + "_n");
    write_field((dir / (tag + "_mT.fld")).string(), pc.m_T, tag + "_mT");
    write_field((dir / (tag + "_P1.fld")).string(), pc.P1, tag + "_P1");
    write_field((dir / (tag + "_P2.fld")).string(), pc.P2, tag + "_P2");
    write_field((dir / (tag + "_F1.fld")).string(), pc.F1, tag + "_F1");
    write_field((dir / (tag + "_F2.fld")).string(), pc.F2, tag + "_F2");
    write_flux_csv(dir / (tag + "_F3.csv"), pc.F3_avg, cs.ds);
    if (!pc.F4_avg.empty()) write_flux_csv(dir / (tag + "_F4.csv"), pc.F4_avg, cs.ds);
  }
  std::ofstream os(dir / "correctors.json");
  os << m.dump(2) << "\n";
}

CorrectorSet load_corrector_set(const std::string& dir_s) {
  const fs::path dir(dir_s);
  std::ifstream is(dir / "correctors.json");
  if (!is) throw std::runtime_error("cannot open '" + (dir / "correctors.json").string() + "'");
  json m = json::parse(is);
  CorrectorSet cs;
  cs.mat_case = material_case_from_string(m.at("case").get<std::string>());
  cs.K = m.at("K").get<int>();
  cs.ds = m.at("ds").get<double>();
  const auto& pairs = m.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    PairCorrectors pc;
    pc.pq = {pairs[i].at("p").get<int>(), pairs[i].at("q").get<int>()};
    pc.max_div = pairs[i].at("max_div").get<double>();
    const std::string tag = "pair" + std::to_string(i);
    pc.n = read_vector_field((dir / (tag + "_n.fld")).string());
    pc.m_T = read_vector_field((dir / (tag + "_mT.fld")).string());
    pc.P1 = read_scalar_field((dir / (tag + "_P1.fld")).string());
    pc.P2 = read_scalar_field((dir / (tag + "_P2.fld")).string());
    pc.F1 = read_symtensor_field((dir / (tag + "_F1.fld")).string());
    pc.F2 = read_symtensor_field((dir / (tag + "_F2.fld")).string());
    pc.F1_avg = tensor_average(pc.F1);
    pc.F2_avg = tensor_average(pc.F2);
    pc.F3_avg = read_flux_csv(dir / (tag + "_F3.csv"));
    if (pairs[i].at("has_F4").get<bool>()) pc.F4_avg = read_flux_csv(dir / (tag + "_F4.csv"));
    cs.grid = pc.n.grid;
    cs.pairs.push_back(std::move(pc));
  }
  return cs;
}

int run_stage(const SimConfig& cfg, const std::string& stage, const PipelineOptions& opt) {
  const fs::path dir = opt.out_dir.empty() ? fs::path(cfg.out) : fs::path(opt.out_dir);
  fs::create_directories(dir);
  try {
    if (stage == "gen-structure") return stage_gen_structure(cfg, dir, opt);
    if (stage == "run-micro") return stage_run_micro(cfg, dir, opt);
    if (stage == "run-correctors") return stage_run_correctors(cfg, dir, opt);
    if (stage == "assemble-effective") return stage_assemble_effective(cfg, dir, opt);
    if (stage == "run-macro") return stage_run_macro(cfg, dir, opt);
    if (stage == "validate") return stage_validate(cfg, dir, opt);
  } catch (const SolverError& e) {
    std::cerr << "solver failure in stage " << stage << ": " << e.what() << "\n";
    return exit_solver;
  } catch (const CflError& e) {
    std::cerr << "time step rejected in stage " << stage << ": " << e.what() << "\n";
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error in stage " << stage << ": " << e.what() << "\n";
    return exit_config;
  }
  std::cerr << "unknown stage '" << stage << "'\n";
  return exit_config;
}

int run_pipeline(const SimConfig& cfg, std::vector<std::string> stages,
                 const PipelineOptions& opt) {
  std::vector<std::string> plan;
  for (const auto& s : stages) {
    if (s == "all") {
      plan = all_stages();
      break;
    }
    plan.push_back(s);
  }
  for (const auto& s : plan) {
    const int rc = run_stage(cfg, s, opt);
    if (rc != exit_ok) return rc;
  }
  return exit_ok;
}

}  // namespace homog
