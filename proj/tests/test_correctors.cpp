#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/correctors.hpp"
#include "homog/kernels.hpp"
#include "homog/operators.hpp"
#include "homog/validation.hpp"

using namespace homog;

namespace {

Grid grid32() { return Grid(2, {32, 32, 1}, {1.0, 1.0, 1.0}, BcMode::periodic); }

PhaseField laminate(const Grid& g, double vf = 0.5, double eps = 0.25) {
  StructureSpec s;
  s.kind = StructureKind::laminate;
  s.vf = vf;
  s.epsilon = eps;
  return generate_phase_field(s, g);
}

MaterialParams kv_acceptance() {
  MaterialParams m;
  m.mu1 = 1.0;
  m.mu2 = 2.0;
  m.nu1 = 1.0;
  m.nu2 = 1.0;
  return m;
}

constexpr IndexPair kShear{0, 1};

}  // namespace

TEST_CASE("identical phases: correctors vanish, fluxes are the constant values") {
  Grid g = grid32();
  PhaseField ph = laminate(g, 1.0);
  MaterialParams m;
  m.mu1 = m.mu2 = 3.0;
  m.nu1 = m.nu2 = 2.0;
  for (IndexPair pq : sym_pairs(2)) {
    StationarySolution n = solve_corrector_n(pq, ph, m);
    CHECK(l2_norm(n.field) <= 1e-10);
    StationarySolution mt = solve_corrector_mT(pq, &n.field, ph, m);
    CHECK(l2_norm(mt.field) <= 1e-10);
    // F1 = mu I^pq, F2 = nu I^pq exactly (constant coefficient, zero rhs)
    TensorAvg f1 = tensor_average(n.flux);
    TensorAvg f2 = tensor_average(mt.flux);
    const double i11 = pq.p == 0 && pq.q == 0 ? 1.0 : 0.0;
    const double i22 = pq.p == 1 && pq.q == 1 ? 1.0 : 0.0;
    const double i12 = pq.diagonal() ? 0.0 : 0.5;
    CHECK(f1[0] == 3.0 * i11);
    CHECK(f1[1] == 3.0 * i22);
    CHECK(f1[2] == 3.0 * i12);
    CHECK(f2[0] == 2.0 * i11);
    CHECK(f2[1] == 2.0 * i22);
    CHECK(f2[2] == 2.0 * i12);

    MemoryMarch mm = solve_memory_corrector(pq, mt.field, ph, m, 20, 0.05, -1.0);
    for (const auto& s : mm.flux_avg)
      for (double v : s) CHECK(std::fabs(v) <= 1e-10);
  }
}

TEST_CASE("laminate shear chain matches the series closed forms") {
  // vf = 1/2, mu = (1,2), nu = (1,1): avg F1_12 = harm(mu)/2 = 1/3,
  // avg F2_12 = harm(nu)/2 = 1/2, kernel C(s) = (1/12) e^{-1.5 s} pairwise
  // (Mandel (1/6) e^{-1.5 s}), rate lambda = <mu>'/<nu>' = 1.5.
  Grid g = grid32();
  PhaseField lam = laminate(g);
  MaterialParams m = kv_acceptance();

  StationarySolution n = solve_corrector_n(kShear, lam, m);
  CHECK(tensor_average(n.flux)[2] == doctest::Approx((4.0 / 3.0) / 2.0).epsilon(1e-8));
  CHECK(n.div_inf <= 1e-8);

  StationarySolution mt = solve_corrector_mT(kShear, &n.field, lam, m);
  CHECK(tensor_average(mt.flux)[2] == doctest::Approx(0.5 * 1.0).epsilon(1e-8));

  // 1D structure: corrector varies only along the lamination direction
  for (const auto& f : {n.field, mt.field}) {
    double transverse = 0.0;
    for (int j = 1; j < 32; ++j)
      for (int i = 0; i < 32; ++i)
        transverse = std::max(transverse, std::fabs(f[1].at(i, j) - f[1].at(i, 0)));
    CHECK(transverse <= 1e-8);
  }

  const int K = 100;
  const double ds = 0.05;
  MemoryMarch mm = solve_memory_corrector(kShear, mt.field, lam, m, K, ds, -1.0);
  // s = 0 sample pinned by the exact initial-rate solve
  CHECK(mm.flux_avg[0][2] == doctest::Approx(1.0 / 12.0).epsilon(1e-7));
  // memory-corrector norms non-increasing (forward dissipative march)
  for (std::size_t k = 1; k < mm.sample_norms.size(); ++k)
    CHECK(mm.sample_norms[k] <= mm.sample_norms[k - 1] * (1.0 + 1e-12));
  // implicit Euler turns the single mode into an exact geometric decay
  const double lam_rate = series_relaxation_rate(m, 0.5);
  CHECK(lam_rate == doctest::Approx(1.5));
  const double discrete_rate = std::log(1.0 + lam_rate * ds) / ds;
  const double measured = std::log(mm.flux_avg[20][2] / mm.flux_avg[60][2]) / (40.0 * ds);
  CHECK(measured == doctest::Approx(discrete_rate).epsilon(1e-6));
  CHECK(std::fabs(mm.flux_avg[K][2]) < std::fabs(mm.flux_avg[0][2]));
  CHECK(mm.max_div <= 1e-8);
}

TEST_CASE("memory flux at s = 0 bounded by the stationary strain norms") {
  Grid g = grid32();
  PhaseField lam = laminate(g);
  MaterialParams m = kv_acceptance();
  StationarySolution n = solve_corrector_n(kShear, lam, m);
  StationarySolution mt = solve_corrector_mT(kShear, &n.field, lam, m);
  MemoryMarch mm = solve_memory_corrector(kShear, mt.field, lam, m, 4, 0.05, -1.0);
  SymTensorField f0 = mm.flux0;
  const double fnorm = std::sqrt(tensor_energy_pairing(f0, f0));
  CHECK(std::isfinite(fnorm));
  CHECK(fnorm <= m.alpha2() * mm.initial_enorm + m.beta2() * mm.initial_rate_enorm + 1e-12);
}

TEST_CASE("fsi: pure two-fluid and single-fluid degeneracies") {
  Grid g = grid32();
  PhaseField lam = laminate(g);
  MaterialParams m;
  m.mat_case = MaterialCase::fsi;
  m.mu1 = 0.0;
  m.mu2 = 0.0;
  m.nu1 = 1.0;
  m.nu2 = 1.0;
  CorrectorOptions opt;
  opt.K = 10;
  opt.ds = 0.1;
  PairCorrectors pc = solve_fsi_correctors(kShear, lam, m, opt);
  // no elasticity anywhere: F1 = 0, n_T = 0, F3 = 0, F4 = 0, F2 = -nu I
  CHECK(l2_norm(pc.n) <= 1e-10);
  for (double v : pc.F1_avg) CHECK(std::fabs(v) <= 1e-10);
  CHECK(pc.F2_avg[2] == doctest::Approx(-0.5).epsilon(1e-8));  // -nu I^12 component
  for (const auto& s : pc.F3_avg)
    for (double v : s) CHECK(std::fabs(v) <= 1e-10);
  for (const auto& s : pc.F4_avg)
    for (double v : s) CHECK(std::fabs(v) <= 1e-10);
}

TEST_CASE("fsi laminate: stationary averages and kernels match the closed forms") {
  // mu = (1, 0), nu = (1, 1/2), vf = 1/2: <nu>' = 3/4, lambda = 2/3,
  // pair averages: F1_12 = vf mu1 nu2 / (2 <nu>') = 1/6,
  //               -F2_12 = harm(nu)/2 = 1/3,
  //                F3_12(0) = gamma/2 = -1/9, F4_12(0) = delta/2 = -1/18.
  Grid g = grid32();
  PhaseField lam = laminate(g);
  MaterialParams m;
  m.mat_case = MaterialCase::fsi;
  m.mu1 = 1.0;
  m.mu2 = 0.0;
  m.nu1 = 1.0;
  m.nu2 = 0.5;
  CorrectorOptions opt;
  opt.K = 150;
  opt.ds = 0.05;
  PairCorrectors pc = solve_fsi_correctors(kShear, lam, m, opt);

  CHECK(pc.F1_avg[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-7));
  CHECK(-pc.F2_avg[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
  CHECK(pc.F3_avg[0][2] == doctest::Approx(-1.0 / 9.0).epsilon(1e-6));
  CHECK(pc.F4_avg[0][2] == doctest::Approx(-1.0 / 18.0).epsilon(1e-6));
  CHECK(pc.max_div <= 1e-8);

  // both kernels decay at lambda = (1-vf) mu1 / <nu>' = 2/3 (discrete rate)
  const double lam_rate = 2.0 / 3.0;
  const double discrete_rate = std::log(1.0 + lam_rate * opt.ds) / opt.ds;
  const double r3 = std::log(pc.F3_avg[20][2] / pc.F3_avg[80][2]) / (60.0 * opt.ds);
  const double r4 = std::log(pc.F4_avg[20][2] / pc.F4_avg[80][2]) / (60.0 * opt.ds);
  CHECK(r3 == doctest::Approx(discrete_rate).epsilon(1e-5));
  CHECK(r4 == doctest::Approx(discrete_rate).epsilon(1e-5));
}

TEST_CASE("corrector operator: trivial passthrough and exact final condition") {
  Grid g = grid32();
  MaterialParams m;
  m.mu1 = m.mu2 = 1.0;
  m.nu1 = m.nu2 = 1.0;
  PhaseField ph = laminate(g, 1.0);
  CorrectorOptions opt;
  opt.K = 20;
  opt.ds = 0.05;
  opt.keep_fields = true;
  CorrectorSet cs = solve_all_correctors(ph, m, opt);

  // w(t) = (T - t)(sin 2 pi y, 0), sampled on the corrector grid
  const int n = 11;
  TimeSampledField w;
  w.dt = opt.ds;
  const double T = (n - 1) * w.dt;
  for (int i = 0; i < n; ++i) {
    VectorField s(g);
    for (int j = 0; j < s[0].ny(); ++j) {
      const double y = (j + 0.5) * g.h(1);
      for (int ii = 0; ii < s[0].nx(); ++ii)
        s[0].at(ii, j) = (T - i * w.dt) * std::sin(2.0 * std::numbers::pi * y);
    }
    w.samples.push_back(std::move(s));
  }

  TimeSampledField we = apply_corrector_operator(w, cs);
  // identical phases: all correctors vanish so w_eps == w bitwise
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < w.samples[i][c].values.size(); ++k)
        CHECK(we.samples[i][c].values[k] == w.samples[i][c].values[k]);
  // final sample exactly zero
  CHECK(l2_norm(we.samples.back()) == 0.0);
}

TEST_CASE("corrector operator keeps the reconstruction divergence-free") {
  Grid g = grid32();
  MaterialParams m = kv_acceptance();
  PhaseField lam = laminate(g);
  CorrectorOptions opt;
  opt.K = 40;
  opt.ds = 0.05;
  opt.keep_fields = true;
  CorrectorSet cs = solve_all_correctors(lam, m, opt);

  auto make_w = [&](int mode) {
    const int n = 21;
    TimeSampledField w;
    w.dt = opt.ds;
    const double T = (n - 1) * w.dt;
    for (int i = 0; i < n; ++i) {
      VectorField s(g);
      const double envelope = (T - i * w.dt) / T;
      for (int j = 0; j < s[0].ny(); ++j) {
        const double y = (j + 0.5) * g.h(1);
        for (int ii = 0; ii < s[0].nx(); ++ii)
          s[0].at(ii, j) = envelope * std::sin(2.0 * std::numbers::pi * mode * y);
      }
      for (int j = 0; j < s[1].ny(); ++j)
        for (int ii = 0; ii < s[1].nx(); ++ii) {
          const double x = (ii + 0.5) * g.h(0);
          s[1].at(ii, j) = envelope * 0.3 * std::sin(2.0 * std::numbers::pi * mode * x);
        }
      w.samples.push_back(std::move(s));
    }
    return w;
  };

  for (int mode : {1, 2, 3}) {
    TimeSampledField w = make_w(mode);
    // the analytic fields are discretely divergence-free by construction
    for (const auto& s : w.samples) CHECK(max_abs(discrete_div(s)) <= 1e-12);
    TimeSampledField we = apply_corrector_operator(w, cs);
    double maxdiv = 0.0;
    bool differs = false;
    for (std::size_t i = 0; i < we.samples.size(); ++i) {
      maxdiv = std::max(maxdiv, max_abs(discrete_div(we.samples[i])));
      if (l2_norm(we.samples[i]) != l2_norm(w.samples[i])) differs = true;
    }
    CHECK(maxdiv <= 1e-7);
    CHECK(differs);  // correctors actually contributed
    CHECK(l2_norm(we.samples.back()) == 0.0);
  }
}

TEST_CASE("fsi corrector operator reconstruction stays divergence-free") {
  Grid g = grid32();
  MaterialParams m;
  m.mat_case = MaterialCase::fsi;
  m.mu1 = 1.0;
  m.mu2 = 0.0;
  m.nu1 = 1.0;
  m.nu2 = 0.5;
  PhaseField lam = laminate(g);
  CorrectorOptions opt;
  opt.K = 30;
  opt.ds = 0.05;
  opt.keep_fields = true;
  CorrectorSet cs = solve_all_correctors(lam, m, opt);

  const int n = 15;
  TimeSampledField w;
  w.dt = opt.ds;
  const double T = (n - 1) * w.dt;
  for (int i = 0; i < n; ++i) {
    VectorField s(g);
    const double env = (T - i * w.dt) / T;
    for (int j = 0; j < s[0].ny(); ++j) {
      const double y = (j + 0.5) * g.h(1);
      for (int ii = 0; ii < s[0].nx(); ++ii)
        s[0].at(ii, j) = env * std::sin(2.0 * std::numbers::pi * y);
    }
    w.samples.push_back(std::move(s));
  }
  TimeSampledField we = apply_corrector_operator(w, cs);
  double maxdiv = 0.0;
  bool differs = false;
  for (std::size_t i = 0; i < we.samples.size(); ++i) {
    maxdiv = std::max(maxdiv, max_abs(discrete_div(we.samples[i])));
    if (l2_norm(we.samples[i]) != l2_norm(w.samples[i])) differs = true;
  }
  CHECK(maxdiv <= 1e-7);
  CHECK(differs);
  CHECK(l2_norm(we.samples.back()) == 0.0);
}

TEST_CASE("contract violations rejected") {
  Grid g = grid32();
  PhaseField lam = laminate(g);
  MaterialParams fsi;
  fsi.mat_case = MaterialCase::fsi;
  fsi.mu1 = 1.0;
  fsi.mu2 = 0.0;
  CHECK_THROWS_AS((void)solve_corrector_n(kShear, lam, fsi), std::invalid_argument);
  MaterialParams kv = kv_acceptance();
  CHECK_THROWS_AS((void)solve_memory_corrector(kShear, VectorField(g), lam, kv, 10, -0.1, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)solve_fsi_correctors(kShear, lam, kv, CorrectorOptions{}),
                  std::invalid_argument);
}
