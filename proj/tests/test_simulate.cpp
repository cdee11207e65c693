#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "parapde/parapde.hpp"

using namespace parapde;

TEST_CASE("builtin configs keep their documented domains") {
  const SimConfig burgers = burgers_config();
  CHECK(burgers.x0 == -8.0);
  CHECK(burgers.x1 == 8.0);
  CHECK(burgers.n == 256);
  CHECK(burgers.m == 256);
  CHECK(burgers.t1 == 10.0);

  const SimConfig adv = advection_config();
  CHECK(adv.x0 == -5.0);
  CHECK(adv.x1 == 5.0);
  CHECK(adv.t1 == 2.5);

  const SimConfig ks = ks_config();
  CHECK(ks.x0 == -20.0);
  CHECK(ks.x1 == 20.0);
  CHECK(ks.n == 512);
  CHECK(ks.m == 1024);
  CHECK(ks.t1 == 200.0);

  const SimConfig ns = ns2d_config();
  CHECK(ns.n == 64);
  CHECK(ns.ny == 64);
  CHECK(ns.m == 1000);
  CHECK_THAT(ns.t1, Catch::Matchers::WithinAbs(999.0 * 0.02, 1e-12));
}

TEST_CASE("zero advection reduces burgers to the exact heat kernel") {
  SimConfig cfg = burgers_config();
  cfg.a = profiles::constant(0.0);
  cfg.init = {InitKind::sine_wave, 0.0, 1.0};
  cfg.m = 16;
  const Field1D f = solve_burgers(cfg);
  const double length = cfg.x1 - cfg.x0;
  const double k1 = 2.0 * EIGEN_PI / length;
  for (Eigen::Index j = 0; j < f.grid.nt(); ++j) {
    const double decay = std::exp(-cfg.diffusion * k1 * k1 * f.grid.t[j]);
    for (Eigen::Index i = 0; i < f.grid.nx(); ++i) {
      const double expect = decay * std::sin(k1 * (f.grid.x[i] - cfg.x0));
      REQUIRE_THAT(f.u(i, j), Catch::Matchers::WithinAbs(expect, 1e-8));
    }
  }
}

TEST_CASE("constant-speed advection translates the profile") {
  SimConfig cfg = advection_config();
  cfg.c = profiles::constant(-1.0);
  cfg.diffusion = 0.0;
  cfg.init = {InitKind::gaussian_pulse, 0.0, 2.0};
  cfg.m = 16;
  const Field1D f = solve_advection_diffusion(cfg);
  const double length = cfg.x1 - cfg.x0;
  // u_t = c u_x with constant c moves the pulse as u0(x + c t); wrap the
  // argument back into the domain since the dynamics live on the torus.
  auto exact = [&](double x, double t) {
    double arg = x + (-1.0) * t;
    while (arg < cfg.x0) arg += length;
    while (arg >= cfg.x1) arg -= length;
    const double d = arg - cfg.init.center;
    return std::exp(-d * d / cfg.init.width);
  };
  for (Eigen::Index j = 0; j < f.grid.nt(); ++j)
    for (Eigen::Index i = 0; i < f.grid.nx(); i += 3)
      REQUIRE_THAT(f.u(i, j),
                   Catch::Matchers::WithinAbs(exact(f.grid.x[i], f.grid.t[j]), 1e-6));
}

TEST_CASE("burgers conserves the spatial mean") {
  SimConfig cfg = burgers_config();
  cfg.m = 64;
  const Field1D f = solve_burgers(cfg);
  const double mean0 = f.u.col(0).mean();
  for (Eigen::Index j = 1; j < f.grid.nt(); ++j)
    REQUIRE_THAT(f.u.col(j).mean(), Catch::Matchers::WithinAbs(mean0, 1e-8));
}

TEST_CASE("solvers are deterministic") {
  SimConfig cfg = burgers_config();
  cfg.m = 16;
  cfg.t1 = 2.0;
  const Field1D f1 = solve_burgers(cfg);
  const Field1D f2 = solve_burgers(cfg);
  CHECK((f1.u.array() == f2.u.array()).all());
}

TEST_CASE("doubling the spatial resolution leaves coincident samples unchanged") {
  SECTION("burgers") {
    SimConfig cfg = burgers_config();
    cfg.m = 16;
    const Field1D coarse = solve_burgers(cfg);
    cfg.n = 512;
    const Field1D fine = solve_burgers(cfg);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coarse.grid.nt(); ++j)
      for (Eigen::Index i = 0; i < coarse.grid.nx(); ++i)
        worst = std::max(worst, std::abs(coarse.u(i, j) - fine.u(2 * i, j)));
    CHECK(worst < 1e-6);
  }
  SECTION("advection-diffusion") {
    SimConfig cfg = advection_config();
    cfg.m = 16;
    const Field1D coarse = solve_advection_diffusion(cfg);
    cfg.n = 512;
    const Field1D fine = solve_advection_diffusion(cfg);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coarse.grid.nt(); ++j)
      for (Eigen::Index i = 0; i < coarse.grid.nx(); ++i)
        worst = std::max(worst, std::abs(coarse.u(i, j) - fine.u(2 * i, j)));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("solvers reject mismatched or malformed configs") {
  CHECK_THROWS_AS(solve_burgers(advection_config()), std::invalid_argument);
  CHECK_THROWS_AS(solve_advection_diffusion(burgers_config()), std::invalid_argument);
  CHECK_THROWS_AS(solve_ks(burgers_config()), std::invalid_argument);
  CHECK_THROWS_AS(solve_ns2d(ks_config()), std::invalid_argument);

  SimConfig bad = burgers_config();
  bad.t1 = bad.t0;
  CHECK_THROWS_AS(solve_burgers(bad), std::invalid_argument);
  bad = burgers_config();
  bad.diffusion = -0.1;
  CHECK_THROWS_AS(solve_burgers(bad), std::invalid_argument);
}

TEST_CASE("forcing huge explicit steps triggers the blow-up guard") {
  SimConfig cfg = advection_config();
  cfg.diffusion = 0.0;
  cfg.m = 8;
  cfg.t1 = 10.0;
  cfg.substeps = 1;
  CHECK_THROWS_AS(solve_advection_diffusion(cfg), std::runtime_error);
}

TEST_CASE("ks solver returns the trailing half of the trajectory") {
  SimConfig cfg = ks_config();
  cfg.n = 256;
  cfg.m = 16;
  cfg.t1 = 4.0;
  const Field1D f = solve_ks(cfg);
  const double dt = cfg.t1 / static_cast<double>(cfg.m - 1);
  CHECK(f.grid.nt() == 8);
  CHECK_THAT(f.grid.t[0], Catch::Matchers::WithinAbs(8.0 * dt, 1e-12));
  CHECK_THAT(f.grid.dt, Catch::Matchers::WithinAbs(dt, 1e-12));
  CHECK(f.u.allFinite());
}

TEST_CASE("ks solver rejects coarse grids and odd snapshot counts") {
  SimConfig cfg = ks_config();
  cfg.n = 128;
  CHECK_THROWS_AS(solve_ks(cfg), std::invalid_argument);
  cfg = ks_config();
  cfg.m = 17;
  CHECK_THROWS_AS(solve_ks(cfg), std::invalid_argument);
  cfg.m = 8;
  CHECK_THROWS_AS(solve_ks(cfg), std::invalid_argument);
}

TEST_CASE("constant-coefficient ks stays bounded and chaotic") {
  SimConfig cfg = ks_config();
  cfg.n = 256;
  cfg.m = 64;
  cfg.t1 = 50.0;
  cfg.a = profiles::constant(1.0);
  cfg.b = profiles::constant(-1.0);
  cfg.c = profiles::constant(-1.0);
  const Field1D f = solve_ks(cfg);
  REQUIRE(f.u.allFinite());
  CHECK(f.u.cwiseAbs().maxCoeff() < 20.0);
  // The instability should have grown structure well above the initial scale
  // of the seeded cosine mix.
  const Eigen::VectorXd last = f.u.col(f.grid.nt() - 1);
  const double sd = std::sqrt((last.array() - last.mean()).square().mean());
  CHECK(sd > 0.1);
}

namespace {

double enstrophy(const Eigen::MatrixXd& w) {
  return w.squaredNorm() / static_cast<double>(w.size());
}

}  // namespace

TEST_CASE("inviscid vortex conserves enstrophy") {
  SimConfig cfg = ns2d_config();
  cfg.nu = profiles::constant(0.0);
  cfg.init = {InitKind::single_vortex, 0.0, 1.0};
  cfg.m = 16;
  cfg.t1 = 0.3;
  const Field2D f = solve_ns2d(cfg);
  const double z0 = enstrophy(f.omega[0]);
  REQUIRE(z0 > 0.0);
  for (std::size_t j = 1; j < f.omega.size(); ++j)
    REQUIRE_THAT(enstrophy(f.omega[j]) / z0, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("viscous flow dissipates enstrophy monotonically") {
  SimConfig cfg = ns2d_config();
  cfg.m = 16;
  cfg.t1 = 0.3;
  const Field2D f = solve_ns2d(cfg);
  double prev = enstrophy(f.omega[0]);
  for (std::size_t j = 1; j < f.omega.size(); ++j) {
    const double cur = enstrophy(f.omega[j]);
    REQUIRE(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
  CHECK(prev < enstrophy(f.omega[0]));
}

TEST_CASE("ns velocity fields are consistent with the vorticity") {
  SimConfig cfg = ns2d_config();
  cfg.m = 8;
  cfg.t1 = 0.14;
  const Field2D f = solve_ns2d(cfg);
  const DiffSpec spec{DiffMethod::spectral};
  for (std::size_t j : {std::size_t{0}, f.omega.size() - 1}) {
    const Eigen::MatrixXd div = snapshot_derivative(f.u[j], f.grid, Axis::x, 1, spec) +
                                snapshot_derivative(f.v[j], f.grid, Axis::y, 1, spec);
    const Eigen::MatrixXd curl = snapshot_derivative(f.v[j], f.grid, Axis::x, 1, spec) -
                                 snapshot_derivative(f.u[j], f.grid, Axis::y, 1, spec);
    CHECK(div.cwiseAbs().maxCoeff() < 1e-8);
    CHECK((curl - f.omega[j]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ns solver requires even grid sizes") {
  SimConfig cfg = ns2d_config();
  cfg.n = 63;
  CHECK_THROWS_AS(solve_ns2d(cfg), std::invalid_argument);
  cfg = ns2d_config();
  cfg.ny = 63;
  CHECK_THROWS_AS(solve_ns2d(cfg), std::invalid_argument);
}
