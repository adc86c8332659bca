#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>

#include "homog/field_io.hpp"
#include "homog/kernels.hpp"
#include "homog/operators.hpp"
#include "homog/poisson.hpp"

using namespace homog;

namespace {

Grid grid64(BcMode bc = BcMode::periodic) { return Grid(2, {64, 64, 1}, {1.0, 1.0, 1.0}, bc); }

template <class FU, class FV>
VectorField analytic_face_field(const Grid& g, FU fu, FV fv) {
  VectorField out(g);
  const double hx = g.h(0), hy = g.h(1);
  for (int j = 0; j < out[0].ny(); ++j)
    for (int i = 0; i < out[0].nx(); ++i) out[0].at(i, j) = fu(i * hx, (j + 0.5) * hy);
  for (int j = 0; j < out[1].ny(); ++j)
    for (int i = 0; i < out[1].nx(); ++i) out[1].at(i, j) = fv((i + 0.5) * hx, j * hy);
  return out;
}

ScalarField random_cell_field(const Grid& g, std::uint64_t seed) {
  ScalarField f(g, Staggering::cell);
  std::uint64_t s = seed;
  for (auto& v : f.values) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    v = 2.0 * ((z >> 11) * 0x1.0p-53) - 1.0;
  }
  return f;
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS(Grid(2, {63, 64, 1}, {1.0, 1.0, 1.0}, BcMode::periodic));  // odd
  CHECK_THROWS(Grid(2, {4, 64, 1}, {1.0, 1.0, 1.0}, BcMode::periodic));   // too small
  CHECK_THROWS(Grid(2, {64, 64, 1}, {0.0, 1.0, 1.0}, BcMode::periodic));  // zero length
  Grid g = grid64();
  CHECK(g.h(0) == doctest::Approx(1.0 / 64));
  CHECK(g.cell_count() == 64 * 64);
}

TEST_CASE("divergence of constant and linear fields") {
  Grid g = grid64(BcMode::dirichlet);  // linear-field identities need non-wrapped faces
  auto cst = analytic_face_field(g, [](double, double) { return 1.7; },
                                 [](double, double) { return -0.3; });
  ScalarField d = discrete_div(cst);
  CHECK(max_abs(d) == 0.0);

  auto rot = analytic_face_field(g, [](double x, double) { return x; },
                                 [](double, double y) { return -y; });
  CHECK(max_abs(discrete_div(rot)) <= 1e-13);

  auto dil = analytic_face_field(g, [](double x, double) { return x; },
                                 [](double, double y) { return y; });
  ScalarField d2 = discrete_div(dil);
  for (double v : d2.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sym_gradient on shear, rotation, stretch") {
  Grid g = grid64(BcMode::periodic);
  // periodic wrap breaks affine fields at the seam; restrict checks to the interior
  auto shear = analytic_face_field(g, [](double, double y) { return y; },
                                   [](double, double) { return 0.0; });
  SymTensorField e = sym_gradient(shear);
  for (int j = 2; j < 62; ++j)
    for (int i = 2; i < 62; ++i) {
      CHECK(e.diag(0).at(i, j) == doctest::Approx(0.0));
      CHECK(e.diag(1).at(i, j) == doctest::Approx(0.0));
      CHECK(e.offdiag().at(i, j) == doctest::Approx(0.5).epsilon(1e-12));
    }

  auto rigid = analytic_face_field(g, [](double, double y) { return -y; },
                                   [](double x, double) { return x; });
  SymTensorField er = sym_gradient(rigid);
  for (int j = 2; j < 62; ++j)
    for (int i = 2; i < 62; ++i) {
      CHECK(std::fabs(er.offdiag().at(i, j)) <= 1e-13);
      CHECK(std::fabs(er.diag(0).at(i, j)) <= 1e-13);
    }

  auto stretch = analytic_face_field(g, [](double x, double) { return x; },
                                     [](double, double) { return 0.0; });
  SymTensorField es = sym_gradient(stretch);
  for (int j = 2; j < 62; ++j)
    for (int i = 2; i < 62; ++i) {
      CHECK(es.diag(0).at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(es.diag(1).at(i, j) == doctest::Approx(0.0));
    }
}

TEST_CASE("div(grad) equals the Poisson stencil exactly") {
  for (BcMode bc : {BcMode::periodic, BcMode::dirichlet}) {
    Grid g = grid64(bc);
    ScalarField p = random_cell_field(g, 11);
    ScalarField viaops = discrete_div(discrete_grad(p));
    ScalarField lap = discrete_laplacian(p);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      CHECK(viaops.values[i] == lap.values[i]);  // identical arithmetic
  }
}

TEST_CASE("stress_divergence is the exact negative adjoint of sym_gradient") {
  for (BcMode bc : {BcMode::periodic, BcMode::dirichlet}) {
    Grid g = grid64(bc);
    VectorField y(g), z(g);
    std::uint64_t s = 77;
    auto fill_rand = [&s](VectorField& f) {
      for (auto& c : f.comp)
        for (auto& v : c.values) {
          s = s * 6364136223846793005ull + 1442695040888963407ull;
          v = 2.0 * ((s >> 11) * 0x1.0p-53) - 1.0;
        }
    };
    fill_rand(y);
    fill_rand(z);
    if (bc == BcMode::dirichlet) {
      // constrained boundary faces hold zeros
      for (int j = 0; j < y[0].ny(); ++j) y[0].at(0, j) = y[0].at(y[0].nx() - 1, j) = 0.0;
      for (int i = 0; i < y[1].nx(); ++i) y[1].at(i, 0) = y[1].at(i, y[1].ny() - 1) = 0.0;
      for (int j = 0; j < z[0].ny(); ++j) z[0].at(0, j) = z[0].at(z[0].nx() - 1, j) = 0.0;
      for (int i = 0; i < z[1].nx(); ++i) z[1].at(i, 0) = z[1].at(i, z[1].ny() - 1) = 0.0;
    }
    SymTensorField ey = sym_gradient(y);
    VectorField dv = stress_divergence(ey);
    const double lhs = -face_inner(dv, z);
    const double rhs = tensor_energy_pairing(ey, sym_gradient(z));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("neumann poisson: zero rhs, eigenmode, random residual bound") {
  Grid g = grid64();
  ScalarField zero(g, Staggering::cell);
  auto r0 = solve_neumann_poisson(zero);
  CHECK(max_abs(r0.phi) == 0.0);

  ScalarField rhs(g, Staggering::cell);
  const double L = 1.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      rhs.at(i, j) = std::cos(2.0 * std::numbers::pi * (i + 0.5) * g.h(0) / L);
  auto r1 = solve_neumann_poisson(rhs);
  // discrete eigenvalue of the 5-point stencil for this mode
  const double lam = -4.0 / (g.h(0) * g.h(0)) * std::pow(std::sin(std::numbers::pi / 64.0), 2);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      CHECK(r1.phi.at(i, j) == doctest::Approx(rhs.at(i, j) / lam).epsilon(1e-8));
  // continuum amplitude -(L/2pi)^2 within discretization error
  const double cont = -std::pow(L / (2.0 * std::numbers::pi), 2);
  CHECK(r1.phi.at(0, 0) / rhs.at(0, 0) == doctest::Approx(cont).epsilon(2e-3));

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScalarField rr = random_cell_field(g, seed);
    subtract_mean(rr);
    auto res = solve_neumann_poisson(rr);
    CHECK(res.residual_inf <= 1e-10 * max_abs(rr));
    CHECK(std::fabs(mean(res.phi)) <= 1e-12);
  }

  ScalarField bad(g, Staggering::cell);
  for (auto& v : bad.values) v = 1.0;
  CHECK_THROWS_AS((void)solve_neumann_poisson(bad), std::invalid_argument);
}

TEST_CASE("neumann poisson on dirichlet-mode grid") {
  Grid g = grid64(BcMode::dirichlet);
  ScalarField rr = random_cell_field(g, 3);
  subtract_mean(rr);
  auto res = solve_neumann_poisson(rr);
  CHECK(res.residual_inf <= 1e-10 * max_abs(rr));
}

TEST_CASE("field serialization round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "homog_fieldio_test";
  fs::create_directories(dir);
  Grid g = grid64();
  ScalarField p = random_cell_field(g, 5);
  write_field((dir / "p.fld").string(), p, "pressure");
  ScalarField p2 = read_scalar_field((dir / "p.fld").string());
  REQUIRE(p2.values.size() == p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) CHECK(p.values[i] == p2.values[i]);

  auto v = analytic_face_field(g, [](double x, double y) { return std::sin(x + y); },
                               [](double x, double y) { return std::cos(x - y); });
  write_field((dir / "v.fld").string(), v, "velocity");
  VectorField v2 = read_vector_field((dir / "v.fld").string());
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < v[c].values.size(); ++i)
      CHECK(v[c].values[i] == v2[c].values[i]);

  SymTensorField e = sym_gradient(v);
  write_field((dir / "e.fld").string(), e, "strain");
  SymTensorField e2 = read_symtensor_field((dir / "e.fld").string());
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < e.comp[c].values.size(); ++i)
      CHECK(e.comp[c].values[i] == e2.comp[c].values[i]);
  fs::remove_all(dir);
}

TEST_CASE("serial and openmp kernel backends agree bitwise") {
  Grid g = grid64();
  ScalarField a = random_cell_field(g, 21);
  ScalarField b = random_cell_field(g, 22);
  kernels::set_backend(kernels::Backend::serial);
  const double dot_s = kernels::dot(a.data(), b.data());
  ScalarField lap_s = discrete_laplacian(a);
  kernels::set_backend(kernels::Backend::openmp);
  const double dot_p = kernels::dot(a.data(), b.data());
  ScalarField lap_p = discrete_laplacian(a);
  CHECK(dot_s == dot_p);
  for (std::size_t i = 0; i < lap_s.values.size(); ++i)
    CHECK(lap_s.values[i] == lap_p.values[i]);
}
