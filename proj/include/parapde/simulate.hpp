#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "parapde/grid.hpp"
#include "parapde/profiles.hpp"
#include "parapde/spectral.hpp"

namespace parapde {

enum class Model { burgers, advection_diffusion, ks, ns2d };

enum class InitKind {
  gaussian_pulse,
  gaussian_train,
  multi_mode,
  sine_wave,
  cosine_mix,
  vortices,
  single_vortex
};

// gaussian_pulse: exp(-(x-center)^2/width). sine_wave: sin(2pi(x-x0)/L).
// cosine_mix: cos(2pi(x-x0)/L)*(1+sin(2pi(x-x0)/L)). vortices: fixed layout of
// four Gaussian vortices, mean removed. single_vortex: one Gaussian vortex of
// area scale `width` at the domain center, mean removed.
struct InitSpec {
  InitKind kind = InitKind::gaussian_pulse;
  double center = 0.0;
  double width = 1.0;
};

struct SimConfig {
  Model model = Model::burgers;
  double x0 = -8.0, x1 = 8.0;  // periodic: dx = (x1-x0)/n, right edge excluded
  double y0 = 0.0, y1 = 2.0 * EIGEN_PI;
  Eigen::Index n = 256;
  Eigen::Index ny = 64;
  Eigen::Index m = 256;  // stored snapshots, t_j = t0 + j*(t1-t0)/(m-1)
  double t0 = 0.0, t1 = 10.0;
  double diffusion = 0.1;          // Burgers and advection-diffusion epsilon
  CoefficientProfile a, b, c, nu;  // roles depend on model; nu <= 0 means inviscid
  InitSpec init;
  double stability_factor = 0.5;  // explicit step <= factor * (CFL limit)
  Eigen::Index substeps = 0;      // per output interval; 0 = automatic
};

inline SimConfig burgers_config() {
  SimConfig cfg;
  cfg.model = Model::burgers;
  cfg.x0 = -8.0;
  cfg.x1 = 8.0;
  cfg.n = 256;
  cfg.m = 256;
  cfg.t0 = 0.0;
  cfg.t1 = 10.0;
  cfg.diffusion = 0.1;
  cfg.a = profiles::sinusoidal_t(-1.0, -0.25, 1.0);  // -(1 + sin(t)/4)
  cfg.init = {InitKind::gaussian_pulse, -2.0, 1.0};
  return cfg;
}

inline SimConfig advection_config() {
  SimConfig cfg;
  cfg.model = Model::advection_diffusion;
  cfg.x0 = -5.0;
  cfg.x1 = 5.0;
  cfg.n = 256;
  cfg.m = 256;
  cfg.t0 = 0.0;
  cfg.t1 = 2.5;
  cfg.diffusion = 0.1;
  // -1.5 + cos(2 pi x / 5)
  cfg.c = profiles::sinusoidal_x(-1.5, 1.0, 2.0 * EIGEN_PI / 5.0, 0.5 * EIGEN_PI);
  cfg.init = {InitKind::gaussian_pulse, 0.0, 2.0};
  return cfg;
}

inline SimConfig ks_config() {
  SimConfig cfg;
  cfg.model = Model::ks;
  cfg.x0 = -20.0;
  cfg.x1 = 20.0;
  cfg.n = 512;
  cfg.m = 1024;  // the solver returns the last m/2 snapshots
  cfg.t0 = 0.0;
  cfg.t1 = 200.0;
  // a(x) = 1 + sin(2 pi x / 20) / 4
  cfg.a = profiles::sinusoidal_x(1.0, 0.25, 2.0 * EIGEN_PI / 20.0);
  cfg.b = profiles::gaussian_bump_x(-1.0, 0.25, 2.0, 5.0);
  cfg.c = profiles::gaussian_bump_x(-1.0, -0.25, -2.0, 5.0);
  cfg.init = {InitKind::cosine_mix, 0.0, 1.0};
  return cfg;
}

inline SimConfig ns2d_config() {
  SimConfig cfg;
  cfg.model = Model::ns2d;
  cfg.x0 = 0.0;
  cfg.x1 = 2.0 * EIGEN_PI;
  cfg.y0 = 0.0;
  cfg.y1 = 2.0 * EIGEN_PI;
  cfg.n = 64;
  cfg.ny = 64;
  cfg.m = 1000;
  cfg.t0 = 0.0;
  cfg.t1 = 999 * 0.02;  // dt = 0.02
  cfg.nu = profiles::piecewise_constant_t(100.0, 75.0, 10.0);
  cfg.init = {InitKind::vortices, 0.0, 1.0};
  return cfg;
}

namespace detail {

// Half-spectrum helpers for real periodic series of length n on period L.
struct HatOps {
  Eigen::Index n;
  double length;
  Eigen::VectorXd k;  // 2 pi j / L for j = 0..n/2

  HatOps(Eigen::Index n_, double length_) : n(n_), length(length_), k(n_ / 2 + 1) {
    for (Eigen::Index j = 0; j < k.size(); ++j)
      k[j] = 2.0 * EIGEN_PI * static_cast<double>(j) / length;
  }

  Eigen::VectorXcd fwd(const Eigen::VectorXd& u) const {
    Eigen::VectorXcd out(n / 2 + 1);
    spectral::fft(u.data(), out.data(), n);
    return out;
  }

  Eigen::VectorXd inv(const Eigen::VectorXcd& hat) const {
    Eigen::VectorXd out(n);
    spectral::ifft(hat.data(), out.data(), n);
    return out;
  }

  Eigen::VectorXcd deriv(const Eigen::VectorXcd& hat, int order) const {
    Eigen::VectorXcd out(hat.size());
    for (Eigen::Index j = 0; j < hat.size(); ++j) {
      std::complex<double> factor(1.0, 0.0);
      const std::complex<double> ik(0.0, k[j]);
      for (int p = 0; p < order; ++p) factor *= ik;
      out[j] = factor * hat[j];
    }
    if (n % 2 == 0 && order % 2 == 1) out[n / 2] = 0.0;
    return out;
  }
};

inline void check_snapshot(const Eigen::VectorXd& u, double limit, const char* who) {
  if (!u.allFinite() || u.norm() > limit)
    throw std::runtime_error(std::string(who) + ": solution blew up; reduce the step size");
}

// Integrating-factor RK4: exact exponential for the diagonal symbol lin_sym,
// classical RK4 for the nonlinear remainder. nonlin(hat, t) returns the
// transformed remainder; speed(u, t) returns a wave-speed bound for the CFL
// substep estimate.
template <class NonlinF, class SpeedF>
Field1D integrate_ifrk4(const Grid1D& grid, const Eigen::VectorXd& u0,
                        const Eigen::VectorXd& lin_sym, NonlinF nonlin, SpeedF speed,
                        double factor, Eigen::Index forced_substeps, const char* who) {
  const Eigen::Index n = grid.nx(), m = grid.nt();
  HatOps ops(n, grid.dx * static_cast<double>(n));
  Field1D out;
  out.grid = grid;
  out.u.resize(n, m);
  out.u.col(0) = u0;
  Eigen::VectorXcd uh = ops.fwd(u0);
  const double limit = 1e3 * u0.norm() + 1e-9;

  double h_last = -1.0;
  Eigen::ArrayXd e_half, e_full;
  for (Eigen::Index j = 1; j < m; ++j) {
    const double t_start = grid.t[j - 1];
    Eigen::Index steps = forced_substeps;
    if (steps <= 0) {
      const double s = speed(out.u.col(j - 1), t_start);
      steps = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::ceil(grid.dt * s / (factor * grid.dx))));
    }
    const double h = grid.dt / static_cast<double>(steps);
    if (h != h_last) {
      e_half = (0.5 * h * lin_sym.array()).exp();
      e_full = e_half * e_half;
      h_last = h;
    }
    for (Eigen::Index step = 0; step < steps; ++step) {
      const double t = t_start + h * static_cast<double>(step);
      const Eigen::VectorXcd k1 = nonlin(uh, t);
      const Eigen::VectorXcd stage_a = (e_half * (uh + 0.5 * h * k1).array()).matrix();
      const Eigen::VectorXcd k2 = nonlin(stage_a, t + 0.5 * h);
      const Eigen::VectorXcd stage_b = ((e_half * uh.array()) + 0.5 * h * k2.array()).matrix();
      const Eigen::VectorXcd k3 = nonlin(stage_b, t + 0.5 * h);
      const Eigen::VectorXcd stage_c =
          ((e_full * uh.array()) + h * (e_half * k3.array())).matrix();
      const Eigen::VectorXcd k4 = nonlin(stage_c, t + h);
      uh = ((e_full * uh.array()) +
            (h / 6.0) * (e_full * k1.array() + 2.0 * (e_half * (k2 + k3).array()) + k4.array()))
               .matrix();
    }
    out.u.col(j) = ops.inv(uh);
    check_snapshot(out.u.col(j), limit, who);
  }
  return out;
}

struct Etdrk4Coeffs {
  Eigen::ArrayXd e_full, e_half, q, f1, f2, f3;
};

// Contour-integral evaluation of the ETDRK4 phi-function combinations for a
// real diagonal symbol, 32 points on the unit circle around each h*sym value.
inline Etdrk4Coeffs etdrk4_coeffs(const Eigen::VectorXd& lin_sym, double h) {
  const Eigen::Index nmodes = lin_sym.size();
  constexpr int npts = 32;
  Etdrk4Coeffs co;
  co.e_full = (h * lin_sym.array()).exp();
  co.e_half = (0.5 * h * lin_sym.array()).exp();
  co.q.setZero(nmodes);
  co.f1.setZero(nmodes);
  co.f2.setZero(nmodes);
  co.f3.setZero(nmodes);
  for (int p = 0; p < npts; ++p) {
    const double angle = EIGEN_PI * (static_cast<double>(p) + 0.5) / npts;
    const std::complex<double> r(std::cos(angle), std::sin(angle));
    for (Eigen::Index i = 0; i < nmodes; ++i) {
      const std::complex<double> z = h * lin_sym[i] + r;
      const std::complex<double> ez = std::exp(z);
      const std::complex<double> z2 = z * z, z3 = z2 * z;
      co.q[i] += ((std::exp(0.5 * z) - 1.0) / z).real();
      co.f1[i] += ((-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3).real();
      co.f2[i] += ((2.0 + z + ez * (-2.0 + z)) / z3).real();
      co.f3[i] += ((-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3).real();
    }
  }
  const double scale = h / npts;
  // Contour points average in conjugate pairs, so the real parts are exact.
  co.q *= scale;
  co.f1 *= scale;
  co.f2 *= scale;
  co.f3 *= scale;
  return co;
}

inline Eigen::VectorXd eval_on(const Eigen::VectorXd& coords, const CoefficientProfile& prof) {
  Eigen::VectorXd out(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) out[i] = prof(coords[i]);
  return out;
}

inline Eigen::VectorXd initial_profile_1d(const Grid1D& grid, const InitSpec& init) {
  const Eigen::Index n = grid.nx();
  const double length = grid.dx * static_cast<double>(n);
  Eigen::VectorXd u0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = grid.x[i];
    switch (init.kind) {
      case InitKind::gaussian_pulse:
        u0[i] = std::exp(-(x - init.center) * (x - init.center) / init.width);
        break;
      case InitKind::sine_wave:
        u0[i] = std::sin(2.0 * EIGEN_PI * (x - grid.x[0]) / length);
        break;
      case InitKind::cosine_mix: {
        const double theta = 2.0 * EIGEN_PI * (x - grid.x[0]) / length;
        u0[i] = std::cos(theta) * (1.0 + std::sin(theta));
        break;
      }
      case InitKind::gaussian_train: {
        // Three pulses of mixed sign spread across the domain. Keeps the data
        // spectrally rich while every location sees real signal.
        const double c1 = grid.x[0] + 0.2 * length + init.center;
        const double c2 = grid.x[0] + 0.5 * length + init.center;
        const double c3 = grid.x[0] + 0.8 * length + init.center;
        u0[i] = std::exp(-(x - c1) * (x - c1) / init.width) -
                0.8 * std::exp(-(x - c2) * (x - c2) / (0.8 * init.width)) +
                0.6 * std::exp(-(x - c3) * (x - c3) / (1.2 * init.width));
        break;
      }
      case InitKind::multi_mode: {
        // Five harmonics with a 1/k spectrum and fixed incommensurate phases:
        // smooth, sign-varying, and nonzero across the whole domain.
        const double theta = 2.0 * EIGEN_PI * (x - grid.x[0]) / length;
        u0[i] = 0.0;
        for (int k = 1; k <= 5; ++k)
          u0[i] += std::cos(k * theta + 2.399963229728653 * k) / static_cast<double>(k);
        break;
      }
      default:
        throw std::invalid_argument("initial condition kind is two-dimensional");
    }
  }
  return u0;
}

}  // namespace detail

// u_t = a(t) u u_x + eps u_xx on a periodic domain. The advective term is the
// flux form a(t) (u^2/2)_x, so the mean of u is conserved exactly.
inline Field1D solve_burgers(const SimConfig& cfg) {
  if (cfg.model != Model::burgers) throw std::invalid_argument("solve_burgers: wrong model");
  if (cfg.x1 <= cfg.x0 || cfg.t1 <= cfg.t0)
    throw std::invalid_argument("solve_burgers: bad domain extents");
  if (cfg.diffusion < 0.0) throw std::invalid_argument("solve_burgers: negative diffusion");
  const double length = cfg.x1 - cfg.x0;
  const Grid1D grid =
      make_grid1d(cfg.x0, length / static_cast<double>(cfg.n), cfg.n, cfg.t0,
                  (cfg.t1 - cfg.t0) / static_cast<double>(cfg.m - 1), cfg.m, true);
  detail::HatOps ops(cfg.n, length);
  const Eigen::VectorXd lin_sym = (-cfg.diffusion * ops.k.array().square()).matrix();
  const double a_bound = cfg.a.abs_bound();

  auto nonlin = [&](const Eigen::VectorXcd& uh, double t) {
    const Eigen::VectorXd u = ops.inv(uh);
    const Eigen::VectorXd flux = (0.5 * u.array().square()).matrix();
    return (cfg.a(t) * ops.deriv(ops.fwd(flux), 1)).eval();
  };
  auto speed = [&](const Eigen::Ref<const Eigen::VectorXd>& u, double) {
    return a_bound * u.cwiseAbs().maxCoeff();
  };
  return detail::integrate_ifrk4(grid, detail::initial_profile_1d(grid, cfg.init), lin_sym,
                                 nonlin, speed, cfg.stability_factor, cfg.substeps,
                                 "solve_burgers");
}

// u_t = (c(x) u)_x + eps u_xx, conservative form on a periodic domain.
inline Field1D solve_advection_diffusion(const SimConfig& cfg) {
  if (cfg.model != Model::advection_diffusion)
    throw std::invalid_argument("solve_advection_diffusion: wrong model");
  if (cfg.x1 <= cfg.x0 || cfg.t1 <= cfg.t0)
    throw std::invalid_argument("solve_advection_diffusion: bad domain extents");
  if (cfg.diffusion < 0.0)
    throw std::invalid_argument("solve_advection_diffusion: negative diffusion");
  const double length = cfg.x1 - cfg.x0;
  const Grid1D grid =
      make_grid1d(cfg.x0, length / static_cast<double>(cfg.n), cfg.n, cfg.t0,
                  (cfg.t1 - cfg.t0) / static_cast<double>(cfg.m - 1), cfg.m, true);
  detail::HatOps ops(cfg.n, length);
  const Eigen::VectorXd cvals = detail::eval_on(grid.x, cfg.c);
  const Eigen::VectorXd lin_sym = (-cfg.diffusion * ops.k.array().square()).matrix();
  const double c_bound = cfg.c.abs_bound();

  auto nonlin = [&](const Eigen::VectorXcd& uh, double) {
    const Eigen::VectorXd u = ops.inv(uh);
    const Eigen::VectorXd flux = cvals.cwiseProduct(u);
    return ops.deriv(ops.fwd(flux), 1);
  };
  auto speed = [&](const Eigen::Ref<const Eigen::VectorXd>&, double) { return c_bound; };
  return detail::integrate_ifrk4(grid, detail::initial_profile_1d(grid, cfg.init), lin_sym,
                                 nonlin, speed, cfg.stability_factor, cfg.substeps,
                                 "solve_advection_diffusion");
}

// u_t = a(x) u u_x + b(x) u_xx + c(x) u_xxxx. The spatial means of b and c
// form the stiff constant-coefficient part, integrated exponentially with
// ETDRK4; the variable-coefficient remainder and the advection are explicit.
// Integrates m snapshots and returns the trailing m/2.
inline Field1D solve_ks(const SimConfig& cfg) {
  if (cfg.model != Model::ks) throw std::invalid_argument("solve_ks: wrong model");
  if (cfg.x1 <= cfg.x0 || cfg.t1 <= cfg.t0)
    throw std::invalid_argument("solve_ks: bad domain extents");
  if (cfg.n < 256) throw std::invalid_argument("solve_ks: resolution below n=256 rejected");
  if (cfg.m < 16 || cfg.m % 2 != 0)
    throw std::invalid_argument("solve_ks: snapshot count must be even and at least 16");
  const double length = cfg.x1 - cfg.x0;
  const Grid1D grid =
      make_grid1d(cfg.x0, length / static_cast<double>(cfg.n), cfg.n, cfg.t0,
                  (cfg.t1 - cfg.t0) / static_cast<double>(cfg.m - 1), cfg.m, true);
  detail::HatOps ops(cfg.n, length);
  const Eigen::VectorXd avals = detail::eval_on(grid.x, cfg.a);
  const Eigen::VectorXd bvals = detail::eval_on(grid.x, cfg.b);
  const Eigen::VectorXd cvals = detail::eval_on(grid.x, cfg.c);
  const double b_mean = bvals.mean(), c_mean = cvals.mean();
  const Eigen::VectorXd b_rem = (bvals.array() - b_mean).matrix();
  const Eigen::VectorXd c_rem = (cvals.array() - c_mean).matrix();
  const Eigen::ArrayXd k2 = ops.k.array().square();
  const Eigen::VectorXd lin_sym = (-b_mean * k2 + c_mean * k2.square()).matrix();
  const double a_bound = cfg.a.abs_bound();

  auto nonlin = [&](const Eigen::VectorXcd& uh, double) {
    const Eigen::VectorXd u = ops.inv(uh);
    const Eigen::VectorXd ux = ops.inv(ops.deriv(uh, 1));
    const Eigen::VectorXd uxx = ops.inv(ops.deriv(uh, 2));
    const Eigen::VectorXd uxxxx = ops.inv(ops.deriv(uh, 4));
    const Eigen::VectorXd phys =
        (avals.array() * u.array() * ux.array() + b_rem.array() * uxx.array() +
         c_rem.array() * uxxxx.array())
            .matrix();
    return ops.fwd(phys);
  };

  Field1D full;
  full.grid = grid;
  full.u.resize(cfg.n, cfg.m);
  const Eigen::VectorXd u0 = detail::initial_profile_1d(grid, cfg.init);
  full.u.col(0) = u0;
  Eigen::VectorXcd uh = ops.fwd(u0);
  const double limit = 1e3 * u0.norm() + 1e-9;
  double h_last = -1.0;
  detail::Etdrk4Coeffs co;
  for (Eigen::Index j = 1; j < cfg.m; ++j) {
    const double t_start = grid.t[j - 1];
    Eigen::Index steps = cfg.substeps;
    if (steps <= 0) {
      const double s = a_bound * full.u.col(j - 1).cwiseAbs().maxCoeff();
      steps = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::ceil(grid.dt * s / (cfg.stability_factor * grid.dx))));
    }
    const double h = grid.dt / static_cast<double>(steps);
    if (h != h_last) {
      co = detail::etdrk4_coeffs(lin_sym, h);
      h_last = h;
    }
    for (Eigen::Index step = 0; step < steps; ++step) {
      const double t = t_start + h * static_cast<double>(step);
      const Eigen::VectorXcd nv = nonlin(uh, t);
      const Eigen::VectorXcd sa = (co.e_half * uh.array() + co.q * nv.array()).matrix();
      const Eigen::VectorXcd na = nonlin(sa, t + 0.5 * h);
      const Eigen::VectorXcd sb = (co.e_half * uh.array() + co.q * na.array()).matrix();
      const Eigen::VectorXcd nb = nonlin(sb, t + 0.5 * h);
      const Eigen::VectorXcd sc =
          (co.e_half * sa.array() + co.q * (2.0 * nb - nv).array()).matrix();
      const Eigen::VectorXcd nc = nonlin(sc, t + h);
      uh = (co.e_full * uh.array() + co.f1 * nv.array() + 2.0 * co.f2 * (na + nb).array() +
            co.f3 * nc.array())
               .matrix();
    }
    full.u.col(j) = ops.inv(uh);
    detail::check_snapshot(full.u.col(j), limit, "solve_ks");
  }

  const Eigen::Index keep = cfg.m / 2;
  Field1D out;
  out.grid = make_grid1d(grid.x[0], grid.dx, cfg.n, grid.t[cfg.m - keep], grid.dt, keep, true);
  out.u = full.u.rightCols(keep);
  return out;
}

// Vorticity form of 2D incompressible flow on a doubly periodic box:
// w_t + u w_x + v w_y = (1/nu) (w_xx + w_yy), with u = psi_y, v = -psi_x and
// -lap(psi) = w. Pseudo-spectral with 2/3 dealiasing; viscosity handled by an
// integrating factor so the nu(t) jump only re-scales the exponential tables.
inline Field2D solve_ns2d(const SimConfig& cfg) {
  if (cfg.model != Model::ns2d) throw std::invalid_argument("solve_ns2d: wrong model");
  if (cfg.x1 <= cfg.x0 || cfg.y1 <= cfg.y0 || cfg.t1 <= cfg.t0)
    throw std::invalid_argument("solve_ns2d: bad domain extents");
  if (cfg.n % 2 != 0 || cfg.ny % 2 != 0)
    throw std::invalid_argument("solve_ns2d: even grid sizes required");
  const Eigen::Index nx = cfg.n, ny = cfg.ny, m = cfg.m;
  const double lx = cfg.x1 - cfg.x0, ly = cfg.y1 - cfg.y0;
  const Grid2D grid = make_grid2d(cfg.x0, lx / static_cast<double>(nx), nx, cfg.y0,
                                  ly / static_cast<double>(ny), ny, cfg.t0,
                                  (cfg.t1 - cfg.t0) / static_cast<double>(m - 1), m, true, true);
  const Eigen::Index nxh = nx / 2 + 1;

  Eigen::ArrayXXd kx(nxh, ny), ky(nxh, ny);
  for (Eigen::Index i = 0; i < nxh; ++i)
    for (Eigen::Index j = 0; j < ny; ++j) {
      kx(i, j) = 2.0 * EIGEN_PI * spectral::half_freq(i) / lx;
      ky(i, j) = 2.0 * EIGEN_PI * spectral::full_freq(j, ny) / ly;
    }
  const Eigen::ArrayXXd ksq = kx.square() + ky.square();
  Eigen::ArrayXXd inv_lap = ksq;
  inv_lap(0, 0) = 1.0;
  inv_lap = 1.0 / inv_lap;
  inv_lap(0, 0) = 0.0;
  Eigen::ArrayXXd mask(nxh, ny);
  for (Eigen::Index i = 0; i < nxh; ++i)
    for (Eigen::Index j = 0; j < ny; ++j) {
      const bool keep = 3 * i <= nx && 3 * std::abs(spectral::full_freq(j, ny)) <= ny;
      mask(i, j) = keep ? 1.0 : 0.0;
    }

  // Initial vorticity: Gaussian vortices, mean removed so the Poisson solve
  // is consistent on the torus.
  Eigen::MatrixXd w0(nx, ny);
  w0.setZero();
  struct Vortex {
    double fx, fy, strength, wfrac;
  };
  std::vector<Vortex> layout;
  if (cfg.init.kind == InitKind::vortices)
    layout = {{0.32, 0.36, 5.0, 0.0101},
              {0.65, 0.70, -3.0, 0.0076},
              {0.35, 0.67, 4.0, 0.0063},
              {0.68, 0.30, -2.0, 0.0089}};
  else if (cfg.init.kind == InitKind::single_vortex)
    layout = {{0.5, 0.5, 5.0, cfg.init.width / (lx * lx)}};
  else
    throw std::invalid_argument("solve_ns2d: initial condition kind is one-dimensional");
  for (const Vortex& vx : layout) {
    const double xc = cfg.x0 + vx.fx * lx, yc = cfg.y0 + vx.fy * ly;
    const double wphys = vx.wfrac * lx * lx;
    for (Eigen::Index i = 0; i < nx; ++i)
      for (Eigen::Index j = 0; j < ny; ++j) {
        const double dx = grid.x[i] - xc, dy = grid.y[j] - yc;
        w0(i, j) += vx.strength * std::exp(-(dx * dx + dy * dy) / wphys);
      }
  }
  w0.array() -= w0.mean();

  Eigen::MatrixXcd wh = spectral::fft2(w0);
  wh.array() *= mask;

  auto velocity = [&](const Eigen::MatrixXcd& what, Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
    const Eigen::MatrixXcd psih = (what.array() * inv_lap).matrix();
    const std::complex<double> iu(0.0, 1.0);
    u = spectral::ifft2((iu * ky * psih.array()).matrix(), nx);
    v = spectral::ifft2((-iu * kx * psih.array()).matrix(), nx);
  };
  auto nonlin = [&](const Eigen::MatrixXcd& what, double) {
    Eigen::MatrixXd u, v;
    velocity(what, u, v);
    const std::complex<double> iu(0.0, 1.0);
    const Eigen::MatrixXd wx = spectral::ifft2((iu * kx * what.array()).matrix(), nx);
    const Eigen::MatrixXd wy = spectral::ifft2((iu * ky * what.array()).matrix(), nx);
    const Eigen::MatrixXd adv =
        -(u.array() * wx.array() + v.array() * wy.array()).matrix();
    Eigen::MatrixXcd out = spectral::fft2(adv);
    out.array() *= mask;
    return out;
  };

  Field2D out;
  out.grid = grid;
  out.omega.reserve(static_cast<std::size_t>(m));
  out.u.reserve(static_cast<std::size_t>(m));
  out.v.reserve(static_cast<std::size_t>(m));
  auto store = [&](const Eigen::MatrixXcd& what) {
    out.omega.push_back(spectral::ifft2(what, nx));
    Eigen::MatrixXd u, v;
    velocity(what, u, v);
    out.u.push_back(u);
    out.v.push_back(v);
  };
  store(wh);
  const double limit = 1e3 * out.omega[0].norm() + 1e-9;

  double h_last = -1.0, invnu_last = -1.0;
  Eigen::ArrayXXd e_half, e_full;
  for (Eigen::Index j = 1; j < m; ++j) {
    const double t_start = grid.t[j - 1];
    const double nu = cfg.nu(t_start);
    const double invnu = nu > 0.0 ? 1.0 / nu : 0.0;
    Eigen::Index steps = cfg.substeps;
    if (steps <= 0) {
      const double umax = out.u[static_cast<std::size_t>(j - 1)].cwiseAbs().maxCoeff();
      const double vmax = out.v[static_cast<std::size_t>(j - 1)].cwiseAbs().maxCoeff();
      const double rate = umax / grid.dx + vmax / grid.dy;
      steps = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::ceil(grid.dt * rate / cfg.stability_factor)));
    }
    const double h = grid.dt / static_cast<double>(steps);
    if (h != h_last || invnu != invnu_last) {
      e_half = (-0.5 * h * invnu * ksq).exp();
      e_full = e_half * e_half;
      h_last = h;
      invnu_last = invnu;
    }
    for (Eigen::Index step = 0; step < steps; ++step) {
      const double t = t_start + h * static_cast<double>(step);
      const Eigen::MatrixXcd k1 = nonlin(wh, t);
      const Eigen::MatrixXcd stage_a = (e_half * (wh + 0.5 * h * k1).array()).matrix();
      const Eigen::MatrixXcd k2 = nonlin(stage_a, t + 0.5 * h);
      const Eigen::MatrixXcd stage_b = (e_half * wh.array() + 0.5 * h * k2.array()).matrix();
      const Eigen::MatrixXcd k3 = nonlin(stage_b, t + 0.5 * h);
      const Eigen::MatrixXcd stage_c =
          (e_full * wh.array() + h * (e_half * k3.array())).matrix();
      const Eigen::MatrixXcd k4 = nonlin(stage_c, t + h);
      wh = (e_full * wh.array() +
            (h / 6.0) * (e_full * k1.array() + 2.0 * (e_half * (k2 + k3).array()) + k4.array()))
               .matrix();
    }
    store(wh);
    if (!out.omega.back().allFinite() || out.omega.back().norm() > limit)
      throw std::runtime_error("solve_ns2d: solution blew up; reduce the step size");
  }
  return out;
}

}  // namespace parapde
