#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "parapde/grid.hpp"
#include "parapde/spectral.hpp"

namespace parapde {

enum class Axis { x, y, t, xy };

enum class DiffMethod { spectral, central_fd, poly_smooth };

struct DiffSpec {
  DiffMethod method = DiffMethod::spectral;
  int poly_degree = 4;
  int poly_half_window = 5;  // window = 2*half + 1 samples
};

namespace detail {

// Fornberg finite-difference weights: order-th derivative at z from the given
// nodes. Exact rational weights for the small equispaced stencils used here.
inline Eigen::VectorXd fd_weights(double z, const Eigen::VectorXd& nodes, int order) {
  const Eigen::Index nn = nodes.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nn, order + 1);
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < nn; ++i) {
    const int mn = static_cast<int>(std::min<Eigen::Index>(i, order));
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(order);
}

inline Eigen::VectorXd index_nodes(Eigen::Index count) {
  Eigen::VectorXd nodes(count);
  for (Eigen::Index i = 0; i < count; ++i) nodes[i] = static_cast<double>(i);
  return nodes;
}

inline Eigen::VectorXd central_fd_series(const Eigen::VectorXd& values, double h, int order) {
  const Eigen::Index n = values.size();
  const int half = order <= 2 ? 1 : 2;
  const Eigen::Index width = 2 * half + 1;
  const Eigen::Index bwidth = order + 2;  // one-sided stencil, 2nd-order accurate
  if (n < std::max(width, bwidth))
    throw std::invalid_argument("derivative: series too short for central_fd stencil");
  const double scale = std::pow(h, -order);

  const Eigen::VectorXd interior = fd_weights(half, index_nodes(width), order);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = half; i < n - half; ++i)
    out[i] = scale * interior.dot(values.segment(i - half, width));
  const Eigen::VectorXd nodes = index_nodes(bwidth);
  for (Eigen::Index i = 0; i < half; ++i) {
    out[i] = scale * fd_weights(static_cast<double>(i), nodes, order)
                         .dot(values.head(bwidth));
    const Eigen::Index r = n - 1 - i;
    out[r] = scale * fd_weights(static_cast<double>(r - (n - bwidth)), nodes, order)
                         .dot(values.tail(bwidth));
  }
  return out;
}

inline Eigen::VectorXd poly_smooth_series(const Eigen::VectorXd& values, double h, int order,
                                          int degree, int half_window) {
  const Eigen::Index n = values.size();
  const int p = half_window;
  const Eigen::Index w = 2 * p + 1;
  if (p < 1) throw std::invalid_argument("derivative: poly_smooth half window must be positive");
  if (degree >= w) throw std::invalid_argument("derivative: degree must be below window size");
  if (order > degree) throw std::invalid_argument("derivative: order exceeds polynomial degree");
  if (n < w) throw std::invalid_argument("derivative: window larger than series");

  // Least-squares fit on each window in local coordinates xi = idx - center;
  // projector rows give the fit's order-th derivative at offset xi0.
  Eigen::MatrixXd vand(w, degree + 1);
  for (Eigen::Index r = 0; r < w; ++r) {
    double xi = static_cast<double>(r - p), pw = 1.0;
    for (int col = 0; col <= degree; ++col) {
      vand(r, col) = pw;
      pw *= xi;
    }
  }
  const Eigen::MatrixXd proj =
      (vand.transpose() * vand).ldlt().solve(vand.transpose());  // (degree+1)×w
  auto deriv_row = [&](double xi0) {
    Eigen::RowVectorXd picks = Eigen::RowVectorXd::Zero(degree + 1);
    for (int col = order; col <= degree; ++col) {
      double coef = 1.0;
      for (int f = 0; f < order; ++f) coef *= static_cast<double>(col - f);
      picks[col] = coef * std::pow(xi0, col - order);
    }
    return (picks * proj).eval();
  };

  const double scale = std::pow(h, -order);
  const Eigen::RowVectorXd center_row = deriv_row(0.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = p; i < n - p; ++i)
    out[i] = scale * center_row.dot(values.segment(i - p, w));
  for (Eigen::Index i = 0; i < p; ++i) {
    out[i] = scale * deriv_row(static_cast<double>(i - p)).dot(values.head(w));
    const Eigen::Index r = n - 1 - i;
    out[r] = scale * deriv_row(static_cast<double>(p - i)).dot(values.tail(w));
  }
  return out;
}

}  // namespace detail

// Derivative of a uniformly sampled series. For spectral the series is
// treated as one full period. Boundary samples of the FD/polynomial methods
// use shifted stencils; trimming them is the caller's responsibility.
inline Eigen::VectorXd derivative(const Eigen::VectorXd& values, double h, int order,
                                  const DiffSpec& spec) {
  if (order < 1 || order > 4) throw std::invalid_argument("derivative: order must be 1..4");
  if (h <= 0.0) throw std::invalid_argument("derivative: spacing must be positive");
  switch (spec.method) {
    case DiffMethod::spectral:
      return spectral::derivative_periodic(values, h, order);
    case DiffMethod::central_fd:
      return detail::central_fd_series(values, h, order);
    case DiffMethod::poly_smooth:
      return detail::poly_smooth_series(values, h, order, spec.poly_degree,
                                        spec.poly_half_window);
  }
  throw std::invalid_argument("derivative: unknown method");
}

// Samples to drop per edge of an axis differentiated with `spec`, given the
// highest derivative order taken along it. Spectral stencils wrap, so nothing
// is trimmed; poly_smooth windows are trimmed even on periodic axes.
inline Eigen::Index edge_trim(const DiffSpec& spec, int max_order, bool periodic) {
  switch (spec.method) {
    case DiffMethod::spectral:
      return 0;
    case DiffMethod::central_fd:
      return periodic ? 0 : (max_order <= 2 ? 1 : 2);
    case DiffMethod::poly_smooth:
      return spec.poly_half_window;
  }
  return 0;
}

inline Eigen::MatrixXd differentiate_field(const Field1D& field, Axis axis, int order,
                                           const DiffSpec& spec) {
  validate(field);
  if (axis == Axis::y || axis == Axis::xy)
    throw std::invalid_argument("differentiate_field: 1D fields have axes x and t only");
  const bool periodic = axis == Axis::x && field.grid.periodic;
  if (spec.method == DiffMethod::spectral && !periodic)
    throw std::invalid_argument("differentiate_field: spectral needs a periodic axis");
  const Eigen::Index n = field.grid.nx(), m = field.grid.nt();
  Eigen::MatrixXd out(n, m);
  if (axis == Axis::x) {
    for (Eigen::Index j = 0; j < m; ++j)
      out.col(j) = derivative(field.u.col(j), field.grid.dx, order, spec);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      out.row(i) = derivative(field.u.row(i).transpose(), field.grid.dt, order, spec)
                       .transpose();
  }
  return out;
}

// Spatial derivative of one 2D snapshot (matrix indexed (ix, iy)).
inline Eigen::MatrixXd snapshot_derivative(const Eigen::MatrixXd& snap, const Grid2D& grid,
                                           Axis axis, int order, const DiffSpec& spec) {
  if (snap.rows() != grid.nx() || snap.cols() != grid.ny())
    throw std::invalid_argument("snapshot_derivative: snapshot shape does not match grid");
  if (axis == Axis::t)
    throw std::invalid_argument("snapshot_derivative: spatial axes only");
  if (axis == Axis::xy) {
    return snapshot_derivative(snapshot_derivative(snap, grid, Axis::x, order, spec), grid,
                               Axis::y, order, spec);
  }
  const bool periodic = axis == Axis::x ? grid.periodic_x : grid.periodic_y;
  if (spec.method == DiffMethod::spectral && !periodic)
    throw std::invalid_argument("snapshot_derivative: spectral needs a periodic axis");
  Eigen::MatrixXd out(snap.rows(), snap.cols());
  if (axis == Axis::x) {
    for (Eigen::Index iy = 0; iy < snap.cols(); ++iy)
      out.col(iy) = derivative(snap.col(iy), grid.dx, order, spec);
  } else {
    for (Eigen::Index ix = 0; ix < snap.rows(); ++ix)
      out.row(ix) = derivative(snap.row(ix).transpose(), grid.dy, order, spec).transpose();
  }
  return out;
}

// Differentiates the vorticity component. Axis::xy composes x then y with the
// same order along each axis.
inline std::vector<Eigen::MatrixXd> differentiate_field(const Field2D& field, Axis axis,
                                                        int order, const DiffSpec& spec) {
  validate(field);
  const Eigen::Index nx = field.grid.nx(), ny = field.grid.ny(), m = field.grid.nt();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(m));
  if (axis == Axis::t) {
    out.assign(static_cast<std::size_t>(m), Eigen::MatrixXd(nx, ny));
    Eigen::VectorXd series(m);
    for (Eigen::Index ix = 0; ix < nx; ++ix)
      for (Eigen::Index iy = 0; iy < ny; ++iy) {
        for (Eigen::Index j = 0; j < m; ++j)
          series[j] = field.omega[static_cast<std::size_t>(j)](ix, iy);
        const Eigen::VectorXd d = derivative(series, field.grid.dt, order, spec);
        for (Eigen::Index j = 0; j < m; ++j) out[static_cast<std::size_t>(j)](ix, iy) = d[j];
      }
    return out;
  }
  for (const Eigen::MatrixXd& snap : field.omega)
    out.push_back(snapshot_derivative(snap, field.grid, axis, order, spec));
  return out;
}

}  // namespace parapde
