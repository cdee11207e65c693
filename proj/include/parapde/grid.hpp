#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace parapde {

// Uniformly spaced space-time grid for one spatial dimension. Periodic grids
// exclude the right endpoint (x[n-1] + dx wraps to x[0]).
struct Grid1D {
  Eigen::VectorXd x;
  Eigen::VectorXd t;
  double dx = 0.0;
  double dt = 0.0;
  bool periodic = true;

  Eigen::Index nx() const { return x.size(); }
  Eigen::Index nt() const { return t.size(); }
};

// Doubly periodic (or not) grid for two spatial dimensions plus time.
struct Grid2D {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd t;
  double dx = 0.0;
  double dy = 0.0;
  double dt = 0.0;
  bool periodic_x = true;
  bool periodic_y = true;

  Eigen::Index nx() const { return x.size(); }
  Eigen::Index ny() const { return y.size(); }
  Eigen::Index nt() const { return t.size(); }
};

namespace detail {

inline void check_uniform(const Eigen::VectorXd& v, double h, const std::string& name) {
  if (h <= 0.0) throw std::invalid_argument(name + ": spacing must be positive");
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) {
    if (std::abs(v[i + 1] - v[i] - h) >= 1e-12 * h)
      throw std::invalid_argument(name + ": coordinates not uniformly spaced");
  }
}

}  // namespace detail

inline Eigen::VectorXd uniform_coords(double origin, double spacing, Eigen::Index count) {
  Eigen::VectorXd v(count);
  for (Eigen::Index i = 0; i < count; ++i) v[i] = origin + spacing * static_cast<double>(i);
  return v;
}

inline Grid1D make_grid1d(double x0, double dx, Eigen::Index n, double t0, double dt,
                          Eigen::Index m, bool periodic = true) {
  if (n < 8 || m < 8) throw std::invalid_argument("make_grid1d: need at least 8 points per axis");
  Grid1D g;
  g.x = uniform_coords(x0, dx, n);
  g.t = uniform_coords(t0, dt, m);
  g.dx = dx;
  g.dt = dt;
  g.periodic = periodic;
  return g;
}

inline Grid2D make_grid2d(double x0, double dx, Eigen::Index nx, double y0, double dy,
                          Eigen::Index ny, double t0, double dt, Eigen::Index m,
                          bool periodic_x = true, bool periodic_y = true) {
  if (nx < 8 || ny < 8 || m < 8)
    throw std::invalid_argument("make_grid2d: need at least 8 points per axis");
  Grid2D g;
  g.x = uniform_coords(x0, dx, nx);
  g.y = uniform_coords(y0, dy, ny);
  g.t = uniform_coords(t0, dt, m);
  g.dx = dx;
  g.dy = dy;
  g.dt = dt;
  g.periodic_x = periodic_x;
  g.periodic_y = periodic_y;
  return g;
}

inline void validate(const Grid1D& g) {
  if (g.nx() < 8 || g.nt() < 8)
    throw std::invalid_argument("Grid1D: need at least 8 points per axis");
  detail::check_uniform(g.x, g.dx, "Grid1D.x");
  detail::check_uniform(g.t, g.dt, "Grid1D.t");
}

inline void validate(const Grid2D& g) {
  if (g.nx() < 8 || g.ny() < 8 || g.nt() < 8)
    throw std::invalid_argument("Grid2D: need at least 8 points per axis");
  detail::check_uniform(g.x, g.dx, "Grid2D.x");
  detail::check_uniform(g.y, g.dy, "Grid2D.y");
  detail::check_uniform(g.t, g.dt, "Grid2D.t");
}

// Scalar field on a Grid1D. Column j of `u` is the spatial snapshot at t[j].
struct Field1D {
  Grid1D grid;
  Eigen::MatrixXd u;  // nx x nt
};

// Vorticity + velocity fields on a Grid2D. snapshot j is an nx x ny matrix.
struct Field2D {
  Grid2D grid;
  std::vector<Eigen::MatrixXd> omega;
  std::vector<Eigen::MatrixXd> u;
  std::vector<Eigen::MatrixXd> v;
};

inline void validate(const Field1D& f) {
  validate(f.grid);
  if (f.u.rows() != f.grid.nx() || f.u.cols() != f.grid.nt())
    throw std::invalid_argument("Field1D: data shape does not match grid");
  if (!f.u.allFinite()) throw std::invalid_argument("Field1D: non-finite values");
}

// Keep every stride-th sample along x and t. Noise at retained samples is
// untouched (no averaging), so i.i.d. noise stays i.i.d. while dx and dt
// grow; useful when derivative stencils need wider physical support. A
// periodic x-axis requires stride_x to divide n so the wrap distance stays
// uniform.
[[nodiscard]] inline Field1D coarsen(const Field1D& field, Eigen::Index stride_x,
                                     Eigen::Index stride_t) {
  validate(field);
  if (stride_x < 1 || stride_t < 1)
    throw std::invalid_argument("coarsen: strides must be positive");
  const Eigen::Index n = field.grid.nx(), m = field.grid.nt();
  if (field.grid.periodic && n % stride_x != 0)
    throw std::invalid_argument("coarsen: stride_x must divide n on a periodic grid");
  const Eigen::Index nc = field.grid.periodic ? n / stride_x : (n + stride_x - 1) / stride_x;
  const Eigen::Index mc = (m + stride_t - 1) / stride_t;
  if (nc < 8 || mc < 8) throw std::invalid_argument("coarsen: fewer than 8 samples would remain");
  Field1D out;
  out.grid.x.resize(nc);
  out.grid.t.resize(mc);
  out.u.resize(nc, mc);
  for (Eigen::Index i = 0; i < nc; ++i) out.grid.x[i] = field.grid.x[i * stride_x];
  for (Eigen::Index j = 0; j < mc; ++j) out.grid.t[j] = field.grid.t[j * stride_t];
  for (Eigen::Index i = 0; i < nc; ++i)
    for (Eigen::Index j = 0; j < mc; ++j) out.u(i, j) = field.u(i * stride_x, j * stride_t);
  out.grid.dx = field.grid.dx * static_cast<double>(stride_x);
  out.grid.dt = field.grid.dt * static_cast<double>(stride_t);
  out.grid.periodic = field.grid.periodic;
  return out;
}

inline void validate(const Field2D& f) {
  validate(f.grid);
  const std::size_t m = static_cast<std::size_t>(f.grid.nt());
  for (const auto* comp : {&f.omega, &f.u, &f.v}) {
    if (comp->size() != m) throw std::invalid_argument("Field2D: snapshot count mismatch");
    for (const auto& snap : *comp) {
      if (snap.rows() != f.grid.nx() || snap.cols() != f.grid.ny())
        throw std::invalid_argument("Field2D: snapshot shape mismatch");
      if (!snap.allFinite()) throw std::invalid_argument("Field2D: non-finite values");
    }
  }
}

}  // namespace parapde
