#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parapde/features.hpp"

namespace parapde {

struct SgtrParams {
  double ridge_lambda = 1e-5;
  double epsilon = 0.0;
  int maxit = 25;
};

struct GlassoParams {
  double lambda = 0.0;
  double tol = 1e-8;  // relative objective change
  int maxit = 1000;
};

// Discovery result: active term indices and the per-block coefficient matrix
// in physical units (rows outside `active` are zero).
struct ParametricModel {
  std::vector<Eigen::Index> active;
  Eigen::MatrixXd coeffs;
  double residual_mse = 0.0;  // mean squared residual on the normalized system
  Eigen::Index k = 0;
  std::string method;
  double hyperparameter = 0.0;
  std::uint64_t seed = 0;
  bool converged = true;
};

namespace detail {

// Per-block Gram matrices; restricted ridge solves then cost O(|S|^3) instead
// of O(r |S|^2), which matters inside hyperparameter sweeps.
struct GramCache {
  std::vector<Eigen::MatrixXd> gram;
  std::vector<Eigen::VectorXd> rhs;
};

inline GramCache build_grams(const BlockSystem& sys) {
  GramCache cache;
  cache.gram.reserve(sys.theta.size());
  cache.rhs.reserve(sys.theta.size());
  for (std::size_t j = 0; j < sys.theta.size(); ++j) {
    const Eigen::MatrixXd& theta = sys.theta[j];
    cache.gram.push_back(theta.transpose() * theta);
    cache.rhs.push_back(theta.transpose() * sys.target[j]);
  }
  return cache;
}

inline Eigen::MatrixXd ridge_restricted(const BlockSystem& sys, const GramCache& cache,
                                        const std::vector<Eigen::Index>& active,
                                        double lambda) {
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, nblocks);
  if (na == 0) return out;
  Eigen::MatrixXd gsub(na, na);
  Eigen::VectorXd rsub(na);
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    const Eigen::MatrixXd& gram = cache.gram[static_cast<std::size_t>(j)];
    const Eigen::VectorXd& rhs = cache.rhs[static_cast<std::size_t>(j)];
    for (Eigen::Index a = 0; a < na; ++a) {
      rsub[a] = rhs[active[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < na; ++b)
        gsub(a, b) = gram(active[static_cast<std::size_t>(a)],
                          active[static_cast<std::size_t>(b)]);
    }
    gsub.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gsub);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("ridge solve failed in block " + std::to_string(j));
    const Eigen::VectorXd w = ldlt.solve(rsub);
    for (Eigen::Index a = 0; a < na; ++a) out(active[static_cast<std::size_t>(a)], j) = w[a];
  }
  return out;
}

inline std::vector<Eigen::Index> all_groups(const BlockSystem& sys) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(sys.num_terms()));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

inline double residual_mse_of(const BlockSystem& sys, const Eigen::MatrixXd& coeffs_norm) {
  double rss = 0.0;
  for (Eigen::Index j = 0; j < sys.num_blocks(); ++j)
    rss += (sys.theta[static_cast<std::size_t>(j)] * coeffs_norm.col(j) -
            sys.target[static_cast<std::size_t>(j)])
               .squaredNorm();
  return rss / static_cast<double>(sys.total_rows());
}

}  // namespace detail

// Unregularized per-block least squares on the active columns; minimum-norm
// solution (with a warning) when a block is rank deficient. Coefficients are
// in normalized units.
inline Eigen::MatrixXd least_squares_refit(const BlockSystem& sys,
                                           const std::vector<Eigen::Index>& active) {
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, nblocks);
  if (na == 0) return out;
  for (Eigen::Index g : active)
    if (g < 0 || g >= d) throw std::invalid_argument("least_squares_refit: bad term index");
  Eigen::Index deficient = 0;
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    const Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(j)];
    Eigen::MatrixXd sub(theta.rows(), na);
    for (Eigen::Index a = 0; a < na; ++a)
      sub.col(a) = theta.col(active[static_cast<std::size_t>(a)]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    if (cod.rank() < na) ++deficient;
    const Eigen::VectorXd w = cod.solve(sys.target[static_cast<std::size_t>(j)]);
    for (Eigen::Index a = 0; a < na; ++a) out(active[static_cast<std::size_t>(a)], j) = w[a];
  }
  if (deficient > 0)
    std::cerr << "least_squares_refit: " << deficient
              << " rank-deficient block(s); minimum-norm solution used\n";
  return out;
}

// Per-block ridge solves of the block-diagonal system. lambda = 0 falls back
// to minimum-norm least squares.
inline Eigen::MatrixXd ridge_blockwise(const BlockSystem& sys, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("ridge_blockwise: lambda must be >= 0");
  if (sys.num_blocks() == 0) throw std::invalid_argument("ridge_blockwise: empty system");
  if (lambda == 0.0) return least_squares_refit(sys, detail::all_groups(sys));
  const detail::GramCache cache = detail::build_grams(sys);
  return detail::ridge_restricted(sys, cache, detail::all_groups(sys), lambda);
}

// Sequential grouped threshold ridge: ridge initialization, repeated removal
// of groups whose coefficient 2-norm across blocks is <= epsilon (strict >
// keeps), ridge refit on the survivors, then a debiasing least-squares refit.
inline ParametricModel sgtr(const BlockSystem& sys, const SgtrParams& params,
                            const detail::GramCache* shared_cache = nullptr) {
  if (params.ridge_lambda < 0.0 || params.epsilon < 0.0 || params.maxit < 1)
    throw std::invalid_argument("sgtr: bad parameters");
  if (sys.num_blocks() == 0) throw std::invalid_argument("sgtr: empty system");
  detail::GramCache local;
  if (!shared_cache) local = detail::build_grams(sys);
  const detail::GramCache& cache = shared_cache ? *shared_cache : local;

  std::vector<Eigen::Index> current = detail::all_groups(sys);
  Eigen::MatrixXd x =
      (params.ridge_lambda == 0.0)
          ? least_squares_refit(sys, current)
          : detail::ridge_restricted(sys, cache, current, params.ridge_lambda);
  for (int it = 0; it < params.maxit; ++it) {
    std::vector<Eigen::Index> next;
    for (Eigen::Index g = 0; g < sys.num_terms(); ++g)
      if (x.row(g).norm() > params.epsilon) next.push_back(g);
    if (next == current) break;
    current = std::move(next);
    x = (params.ridge_lambda == 0.0)
            ? least_squares_refit(sys, current)
            : detail::ridge_restricted(sys, cache, current, params.ridge_lambda);
  }

  const Eigen::MatrixXd debiased = least_squares_refit(sys, current);
  ParametricModel model;
  model.method = "sgtr";
  model.hyperparameter = params.epsilon;
  model.active = current;
  model.k = static_cast<Eigen::Index>(current.size());
  model.coeffs = denormalize(debiased, sys);
  model.residual_mse = detail::residual_mse_of(sys, debiased);
  return model;
}

// Group LASSO: minimizes (1/2N)||b - A w||^2 + lambda * sum_g ||w_g||_2 by
// block coordinate descent. Group columns live in disjoint rows and are unit
// length, so each group update is an exact soft-threshold. Finishes with a
// debiasing least-squares refit on the surviving support. When raw_coeffs is
// given it receives the pre-debias normalized solution.
inline ParametricModel glasso(const BlockSystem& sys, const GlassoParams& params,
                              Eigen::MatrixXd* raw_coeffs = nullptr) {
  if (params.lambda < 0.0 || params.tol <= 0.0 || params.maxit < 1)
    throw std::invalid_argument("glasso: bad parameters");
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  if (nblocks == 0) throw std::invalid_argument("glasso: empty system");
  const double n_total = static_cast<double>(sys.total_rows());
  const double shrink = params.lambda * n_total;

  const detail::GramCache cache = detail::build_grams(sys);
  std::vector<double> bnorm2(static_cast<std::size_t>(nblocks));
  for (Eigen::Index j = 0; j < nblocks; ++j)
    bnorm2[static_cast<std::size_t>(j)] = sys.target[static_cast<std::size_t>(j)].squaredNorm();

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, nblocks);
  std::vector<Eigen::VectorXd> mw(static_cast<std::size_t>(nblocks),
                                  Eigen::VectorXd::Zero(d));  // gram * w per block
  auto objective = [&] {
    double rss = 0.0;
    for (Eigen::Index j = 0; j < nblocks; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      rss += bnorm2[js] - 2.0 * w.col(j).dot(cache.rhs[js]) + w.col(j).dot(mw[js]);
    }
    rss = std::max(rss, 0.0);
    double penalty = 0.0;
    for (Eigen::Index g = 0; g < d; ++g) penalty += w.row(g).norm();
    return rss / (2.0 * n_total) + params.lambda * penalty;
  };

  double obj = objective();
  bool converged = false;
  Eigen::VectorXd c(nblocks);
  for (int sweep = 0; sweep < params.maxit; ++sweep) {
    for (Eigen::Index g = 0; g < d; ++g) {
      for (Eigen::Index j = 0; j < nblocks; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        c[j] = cache.rhs[js][g] - mw[js][g] + w(g, j);
      }
      const double cnorm = c.norm();
      const double factor = cnorm > shrink ? 1.0 - shrink / cnorm : 0.0;
      for (Eigen::Index j = 0; j < nblocks; ++j) {
        const double wnew = factor * c[j];
        const double delta = wnew - w(g, j);
        if (delta != 0.0) {
          mw[static_cast<std::size_t>(j)] += delta * cache.gram[static_cast<std::size_t>(j)].col(g);
          w(g, j) = wnew;
        }
      }
    }
    if ((sweep + 1) % 64 == 0)  // refresh against incremental drift
      for (Eigen::Index j = 0; j < nblocks; ++j)
        mw[static_cast<std::size_t>(j)] = cache.gram[static_cast<std::size_t>(j)] * w.col(j);
    const double obj_new = objective();
    if (std::abs(obj - obj_new) <= params.tol * std::max(std::abs(obj), 1e-30)) {
      obj = obj_new;
      converged = true;
      break;
    }
    obj = obj_new;
  }
  if (!converged)
    std::cerr << "glasso: no convergence within " << params.maxit
              << " sweeps; returning last iterate\n";
  if (raw_coeffs) *raw_coeffs = w;

  std::vector<Eigen::Index> support;
  for (Eigen::Index g = 0; g < d; ++g)
    if (w.row(g).norm() > 0.0) support.push_back(g);

  const Eigen::MatrixXd debiased = least_squares_refit(sys, support);
  ParametricModel model;
  model.method = "glasso";
  model.hyperparameter = params.lambda;
  model.active = std::move(support);
  model.k = static_cast<Eigen::Index>(model.active.size());
  model.coeffs = denormalize(debiased, sys);
  model.residual_mse = detail::residual_mse_of(sys, debiased);
  model.converged = converged;
  return model;
}

}  // namespace parapde
