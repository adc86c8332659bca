#include "homog/effective.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "homog/kernels.hpp"
#include "homog/operators.hpp"

namespace homog {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Mandel scaling per pair index ((0,0),(1,1),(0,1)).
constexpr std::array<double, 3> kPairScale = {1.0, 1.0, kSqrt2};

PairMatrix matrix_from_avgs(const std::array<TensorAvg, 3>& col_avgs, double sign = 1.0) {
  PairMatrix m{};
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a)
      m[a][b] = sign * kPairScale[a] * kPairScale[b] * col_avgs[b][a];
  return m;
}

}  // namespace

EffectiveLaw assemble_effective_law(const CorrectorSet& cs) {
  if (cs.pairs.size() != 3)
    throw std::invalid_argument("assemble_effective_law: incomplete corrector set");
  const auto expected = sym_pairs(2);
  for (int b = 0; b < 3; ++b)
    if (cs.pairs[b].pq.p != expected[b].p || cs.pairs[b].pq.q != expected[b].q)
      throw std::invalid_argument("assemble_effective_law: pair ordering mismatch");
  EffectiveLaw law;
  law.mat_case = cs.mat_case;
  law.dim = cs.grid.dim;
  law.K = cs.K;
  law.ds = cs.ds;

  std::array<TensorAvg, 3> f1, f2;
  for (int b = 0; b < 3; ++b) {
    f1[b] = cs.pairs[b].F1_avg;
    f2[b] = cs.pairs[b].F2_avg;
  }
  law.A = matrix_from_avgs(f1);
  law.B = matrix_from_avgs(f2, cs.mat_case == MaterialCase::fsi ? -1.0 : 1.0);

  law.C.resize(cs.K + 1);
  for (int k = 0; k <= cs.K; ++k) {
    std::array<TensorAvg, 3> f3;
    for (int b = 0; b < 3; ++b) f3[b] = cs.pairs[b].F3_avg[k];
    law.C[k] = matrix_from_avgs(f3);
  }
  if (cs.mat_case == MaterialCase::fsi) {
    law.D.resize(cs.K + 1);
    for (int k = 0; k <= cs.K; ++k) {
      std::array<TensorAvg, 3> f4;
      for (int b = 0; b < 3; ++b) f4[b] = cs.pairs[b].F4_avg[k];
      law.D[k] = matrix_from_avgs(f4);
    }
  }
  return law;
}

namespace {

ComplexPairMatrix kernel_transform(const std::vector<PairMatrix>& kern, double ds, double omega) {
  ComplexPairMatrix out{};
  if (kern.empty()) return out;
  const int K = static_cast<int>(kern.size()) - 1;
  for (int k = 0; k <= K; ++k) {
    const double w = (k == 0 || k == K) ? 0.5 * ds : ds;
    const std::complex<double> ph = std::polar(w, -omega * k * ds);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out[a][b] += ph * kern[k][a][b];
  }
  return out;
}

}  // namespace

ComplexPairMatrix complex_modulus(const EffectiveLaw& law, double omega) {
  if (omega < 0.0) throw std::invalid_argument("complex_modulus: omega must be >= 0");
  const std::complex<double> iw(0.0, omega);
  ComplexPairMatrix m{};
  ComplexPairMatrix ch = kernel_transform(law.C, law.ds, omega);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      m[a][b] = law.A[a][b] + iw * law.B[a][b];
      if (law.mat_case == MaterialCase::kelvin_voigt)
        m[a][b] += iw * ch[a][b];
      else
        m[a][b] += ch[a][b];
    }
  if (law.mat_case == MaterialCase::fsi && !law.D.empty()) {
    ComplexPairMatrix dh = kernel_transform(law.D, law.ds, omega);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m[a][b] += iw * dh[a][b];
  }
  return m;
}

double major_asymmetry(const PairMatrix& m) {
  double r = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r = std::max(r, std::fabs(m[a][b] - m[b][a]));
  return r;
}

double min_eigen_tracefree(const PairMatrix& m) {
  // orthonormal trace-free basis: q1 = (1,-1,0)/sqrt2, q2 = (0,0,1)
  auto sym = [&](int a, int b) { return 0.5 * (m[a][b] + m[b][a]); };
  const double m11 = 0.5 * (sym(0, 0) - sym(0, 1) - sym(1, 0) + sym(1, 1));
  const double m12 = (sym(0, 2) - sym(1, 2)) / kSqrt2;
  const double m22 = sym(2, 2);
  const double tr = m11 + m22;
  const double det = m11 * m22 - m12 * m12;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return 0.5 * tr - disc;
}

double pair_matrix_inf_norm(const PairMatrix& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (double v : row) r = std::max(r, std::fabs(v));
  return r;
}

PairMatrix pair_matrix_diff(const PairMatrix& a, const PairMatrix& b) {
  PairMatrix d{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d[i][j] = a[i][j] - b[i][j];
  return d;
}

namespace {

MandelVec mat_apply(const PairMatrix& m, const MandelVec& x) {
  MandelVec y{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) y[a] += m[a][b] * x[b];
  return y;
}

void vec_acc(MandelVec& y, const MandelVec& x, double w = 1.0) {
  for (int a = 0; a < 3; ++a) y[a] += w * x[a];
}

}  // namespace

std::vector<MandelVec> stress_response(const EffectiveLaw& law,
                                       const std::vector<MandelVec>& strain, double dt) {
  const int n = static_cast<int>(strain.size());
  std::vector<MandelVec> rate(n);
  for (int i = 0; i < n; ++i) {
    const MandelVec prev = i > 0 ? strain[i - 1] : MandelVec{};
    for (int a = 0; a < 3; ++a) rate[i][a] = (strain[i][a] - prev[a]) / dt;
  }
  const double rstep = law.ds / dt;
  const int stride = std::max(1, static_cast<int>(std::lround(rstep)));
  if (std::fabs(rstep - stride) > 1e-9)
    throw std::invalid_argument("stress_response: dt must divide the kernel step ds");

  std::vector<MandelVec> out(n);
  for (int i = 0; i < n; ++i) {
    MandelVec t = mat_apply(law.A, strain[i]);
    vec_acc(t, mat_apply(law.B, rate[i]));
    for (int k = 0; k <= law.K; ++k) {
      const int j = i - k * stride;
      if (j < 0) break;
      const double w = (k == 0 || k == law.K) ? 0.5 * law.ds : law.ds;
      vec_acc(t, mat_apply(law.C[k], law.mat_case == MaterialCase::kelvin_voigt ? rate[j] : strain[j]), w);
      if (law.mat_case == MaterialCase::fsi && !law.D.empty())
        vec_acc(t, mat_apply(law.D[k], rate[j]), w);
    }
    out[i] = t;
  }
  return out;
}

PronyFit fit_prony(const std::vector<double>& samples, double ds, double floor_rel) {
  PronyFit fit;
  if (samples.size() < 3) return fit;
  double amax = 0.0;
  for (double v : samples) amax = std::max(amax, std::fabs(v));
  if (amax == 0.0) return fit;
  const double sign = samples[0] >= 0.0 ? 1.0 : -1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double v = sign * samples[k];
    if (v < floor_rel * amax) continue;
    const double x = static_cast<double>(k) * ds;
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 3) return fit;
  const double denom = cnt * sxx - sx * sx;
  if (denom == 0.0) return fit;
  const double slope = (cnt * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / cnt;
  fit.rate = -slope;
  fit.coefficient = sign * std::exp(icept);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double s = static_cast<double>(k) * ds;
    const double model = fit.coefficient * std::exp(-fit.rate * s);
    num += (model - samples[k]) * (model - samples[k]);
    den += samples[k] * samples[k];
  }
  fit.rel_l2_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  fit.valid = true;
  return fit;
}

std::vector<double> kernel_entry(const std::vector<PairMatrix>& k, int a, int b) {
  std::vector<double> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = k[i][a][b];
  return out;
}

// ---- macroscale solver ----------------------------------------------------

MacroState make_initial_macro_state(const Grid& g, double rho0, const VectorField& v0,
                                    const EffectiveLaw& law) {
  MacroState s;
  s.t = 0.0;
  s.rho = ScalarField(g, Staggering::cell);
  kernels::fill(s.rho.data(), rho0);
  s.v = v0;
  enforce_velocity_bc(g, s.v);
  s.u = VectorField(g);
  s.P = ScalarField(g, Staggering::cell);
  s.ev_hist.push_back(sym_gradient(s.v));
  if (law.mat_case == MaterialCase::fsi) s.eu_hist.push_back(sym_gradient(s.u));
  return s;
}

namespace {

void tensor_scale_add(SymTensorField& acc, const PairMatrix& m, const SymTensorField& e,
                      double w) {
  if (w == 0.0) return;
  SymTensorField t = apply_pair_matrix(m, e);
  for (int c = 0; c < 3; ++c) kernels::axpy(w, t.comp[c].data(), acc.comp[c].data());
}

}  // namespace

MacroState step_effective(const MacroState& state, const EffectiveLaw& law, double dt,
                          const MacroStepOptions& opt, const Forcing& forcing,
                          StepDiagnostics* diag) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_effective: dt must be positive");
  const double th = opt.theta_scheme;
  if (th < 0.5 || th > 1.0)
    throw std::invalid_argument("step_effective: theta scheme parameter in [1/2, 1]");
  const double rstep = law.ds / dt;
  const int stride = static_cast<int>(std::lround(rstep));
  if (stride < 1 || std::fabs(rstep - stride) > 1e-9)
    throw std::invalid_argument("step_effective: dt must be ds or an integer divisor of it");
  const Grid& g = state.rho.grid;
  const bool fsi = law.mat_case == MaterialCase::fsi;

  MacroState next;
  next.t = state.t + dt;
  next.rho = advect_indicator(state.rho, state.v, dt);

  // implicit tensor coefficient th*B + th^2*dt*A
  PairMatrix m_impl{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m_impl[a][b] = th * law.B[a][b] + th * th * dt * law.A[a][b];

  VectorField mass = face_coefficient_arithmetic(next.rho);
  for (int c = 0; c < 2; ++c) kernels::scale(mass[c].data(), 1.0 / dt);

  VectorField rhs(g);
  for (int c = 0; c < 2; ++c) {
    const double* pm = mass[c].values.data();
    const double* pv = state.v[c].values.data();
    double* pr = rhs[c].values.data();
    kernels::parallel_for(rhs[c].values.size(), [=](std::size_t i) { pr[i] = pm[i] * pv[i]; });
  }

  // explicit stress: A e(u^n) + (1-th) B e(v^n) + th(1-th) dt A e(v^n) + history
  {
    SymTensorField t_exp(g);
    tensor_scale_add(t_exp, law.A, sym_gradient(state.u), 1.0);
    if (th < 1.0) {
      SymTensorField ev = state.ev_hist.front();
      tensor_scale_add(t_exp, law.B, ev, 1.0 - th);
      tensor_scale_add(t_exp, law.A, ev, th * (1.0 - th) * dt);
    }
    // memory convolution, all terms at known past times
    const int avail = static_cast<int>(state.ev_hist.size());
    for (int k = 0; k <= law.K; ++k) {
      const int lag = k * stride;
      if (lag >= avail) break;
      const double w = (k == 0 || k == law.K) ? 0.5 * law.ds : law.ds;
      tensor_scale_add(t_exp, law.C[k], fsi ? state.eu_hist[lag] : state.ev_hist[lag], w);
      if (fsi && !law.D.empty()) tensor_scale_add(t_exp, law.D[k], state.ev_hist[lag], w);
    }
    VectorField dt_exp = stress_divergence(t_exp);
    for (int c = 0; c < 2; ++c) kernels::axpy(1.0, dt_exp[c].data(), rhs[c].data());
  }
  if (forcing.active()) {
    VectorField f = forcing.evaluate(g, state.t + th * dt);
    for (int c = 0; c < 2; ++c) kernels::axpy(1.0, f[c].data(), rhs[c].data());
  }

  SaddleSystem sys = build_saddle_system(g, m_impl, std::move(rhs), std::move(mass));
  SaddleResult sol = solve_saddle(sys, opt.saddle, &state.P);
  if (diag) {
    diag->div_inf = sol.div_inf;
    diag->schur_r0 = sol.schur_r0;
    diag->outer_iterations = sol.outer_iterations;
  }
  next.v = std::move(sol.v);
  next.P = std::move(sol.p);

  VectorField v_mid(g);
  for (int c = 0; c < 2; ++c) {
    const double* pn = next.v[c].values.data();
    const double* po = state.v[c].values.data();
    double* pm = v_mid[c].values.data();
    kernels::parallel_for(v_mid[c].values.size(),
                          [=](std::size_t i) { pm[i] = th * pn[i] + (1.0 - th) * po[i]; });
  }
  next.u = state.u;
  for (int c = 0; c < 2; ++c) kernels::axpy(dt, v_mid[c].data(), next.u[c].data());

  // histories, newest first, truncated at the kernel horizon
  const std::size_t cap = static_cast<std::size_t>(law.K) * stride + 1;
  next.ev_hist.reserve(std::min(cap, state.ev_hist.size() + 1));
  next.ev_hist.push_back(sym_gradient(next.v));
  for (const auto& e : state.ev_hist) {
    if (next.ev_hist.size() >= cap) break;
    next.ev_hist.push_back(e);
  }
  if (fsi) {
    next.eu_hist.push_back(sym_gradient(next.u));
    for (const auto& e : state.eu_hist) {
      if (next.eu_hist.size() >= cap) break;
      next.eu_hist.push_back(e);
    }
  }
  return next;
}

MacroRunResult run_macro(MacroState state, const EffectiveLaw& law, int steps, double dt,
                         const MacroStepOptions& opt, const Forcing& forcing,
                         bool store_velocities) {
  MacroRunResult res;
  res.times.push_back(state.t);
  if (store_velocities) res.velocities.push_back(state.v);
  MacroStepOptions o = opt;
  for (int s = 0; s < steps; ++s) {
    StepDiagnostics d;
    state = step_effective(state, law, dt, o, forcing, &d);
    if (o.saddle.residual_scale == 0.0 && d.schur_r0 > 0.0)
      o.saddle.residual_scale = d.schur_r0;
    res.times.push_back(state.t);
    if (store_velocities) res.velocities.push_back(state.v);
  }
  res.final_state = std::move(state);
  return res;
}

// ---- serialization ---------------------------------------------------------

namespace {

void write_matrix(std::ostream& os, const PairMatrix& m) {
  os.precision(17);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) os << (b ? " " : "") << m[a][b];
    os << "\n";
  }
}

PairMatrix read_matrix(std::istream& is) {
  PairMatrix m{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (!(is >> m[a][b])) throw std::runtime_error("effective law file: truncated matrix");
  return m;
}

}  // namespace

void write_effective_law(const std::string& path, const EffectiveLaw& law) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os.precision(17);
  os << "homog-effective-law 1\n";
  os << "case " << to_string(law.mat_case) << "\n";
  os << "dim " << law.dim << "\n";
  os << "K " << law.K << "\n";
  os << "ds " << law.ds << "\n";
  os << "A_bar\n";
  write_matrix(os, law.A);
  os << "B_bar\n";
  write_matrix(os, law.B);
  os << "kernel_C\n";
  for (int k = 0; k <= law.K; ++k) {
    os << k * law.ds;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) os << "," << law.C[k][a][b];
    os << "\n";
  }
  if (law.mat_case == MaterialCase::fsi) {
    os << "kernel_D\n";
    for (int k = 0; k <= law.K; ++k) {
      os << k * law.ds;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) os << "," << law.D[k][a][b];
      os << "\n";
    }
  }
}

EffectiveLaw read_effective_law(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open effective law file '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != "homog-effective-law 1")
    throw std::runtime_error("'" + path + "' is not an effective law file");
  EffectiveLaw law;
  auto read_kernel_block = [&](std::vector<PairMatrix>& kern) {
    kern.assign(law.K + 1, PairMatrix{});
    for (int k = 0; k <= law.K; ++k) {
      if (!std::getline(is, line)) throw std::runtime_error("effective law: truncated kernel");
      std::istringstream ls(line);
      std::string tok;
      std::getline(ls, tok, ',');  // s_k, implied by index
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (!std::getline(ls, tok, ','))
            throw std::runtime_error("effective law: short kernel row");
          kern[k][a][b] = std::stod(tok);
        }
    }
  };
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "case") {
      std::string c;
      ls >> c;
      law.mat_case = material_case_from_string(c);
    } else if (key == "dim") {
      ls >> law.dim;
    } else if (key == "K") {
      ls >> law.K;
    } else if (key == "ds") {
      ls >> law.ds;
    } else if (key == "A_bar") {
      law.A = read_matrix(is);
      std::getline(is, line);  // eat end of row line
    } else if (key == "B_bar") {
      law.B = read_matrix(is);
      std::getline(is, line);
    } else if (key == "kernel_C") {
      read_kernel_block(law.C);
    } else if (key == "kernel_D") {
      read_kernel_block(law.D);
    }
  }
  if (law.C.empty()) throw std::runtime_error("effective law file '" + path + "': missing kernel");
  return law;
}

}  // namespace homog
