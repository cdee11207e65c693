#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "parapde/solvers.hpp"

namespace parapde {

enum class MethodKind { sgtr, glasso };

inline const char* method_name(MethodKind m) { return m == MethodKind::sgtr ? "sgtr" : "glasso"; }

// Smallest group-LASSO lambda that zeroes every group:
// max_g (1/N) ||A_g^T b||_2 with N the total row count.
inline double lambda_max(const BlockSystem& sys) {
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  if (d == 0 || nblocks == 0) throw std::invalid_argument("lambda_max: empty system");
  const double n_total = static_cast<double>(sys.total_rows());
  double best = 0.0;
  for (Eigen::Index g = 0; g < d; ++g) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < nblocks; ++j) {
      const double dot = sys.theta[static_cast<std::size_t>(j)].col(g).dot(
          sys.target[static_cast<std::size_t>(j)]);
      sq += dot * dot;
    }
    best = std::max(best, std::sqrt(sq) / n_total);
  }
  return best;
}

// SGTR threshold sweep endpoints: the smallest and largest ridge-solution
// group norms. Groups flagged in every block are excluded (their norm is 0
// by construction and would pin the lower endpoint).
inline std::pair<double, double> epsilon_range(const BlockSystem& sys, double ridge_lambda) {
  const Eigen::Index d = sys.num_terms();
  if (d == 0 || sys.num_blocks() == 0) throw std::invalid_argument("epsilon_range: empty system");
  const Eigen::MatrixXd x = ridge_blockwise(sys, ridge_lambda);
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (Eigen::Index g = 0; g < d; ++g) {
    if (sys.group_flagged(g)) continue;
    const double norm = x.row(g).norm();
    if (!any) {
      lo = hi = norm;
      any = true;
    } else {
      lo = std::min(lo, norm);
      hi = std::max(hi, norm);
    }
  }
  if (!any) throw std::invalid_argument("epsilon_range: all groups flagged");
  return {lo, hi};
}

// AIC-inspired loss L = N ln(RSS/N + floor) + 2k, with the residual taken on
// `sys` (the validation split during sweeps) and N the size of the original
// dataset. The model's physical coefficients are mapped into the system's
// normalized units through its recorded norms.
inline double aic_loss(const ParametricModel& model, const BlockSystem& sys, double n_data,
                       double floor_mse = 1e-5) {
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  if (model.coeffs.rows() != d || model.coeffs.cols() != nblocks)
    throw std::invalid_argument("aic_loss: coefficient shape mismatch");
  if (n_data <= 0.0) throw std::invalid_argument("aic_loss: dataset size must be positive");
  double rss = 0.0;
  Eigen::VectorXd xn(d);
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    for (Eigen::Index g = 0; g < d; ++g)
      xn[g] = sys.flagged(g, j)
                  ? 0.0
                  : model.coeffs(g, j) * sys.column_norms(g, j) / sys.target_norms[j];
    rss += (sys.theta[static_cast<std::size_t>(j)] * xn -
            sys.target[static_cast<std::size_t>(j)])
               .squaredNorm();
  }
  return n_data * std::log(rss / n_data + floor_mse) +
         2.0 * static_cast<double>(model.k);
}

struct SweepParams {
  int count = 50;
  double fraction = 0.2;
  std::uint64_t seed = 0;
  double sgtr_ridge = 1e-5;
  int sgtr_maxit = 25;
  double glasso_tol = 1e-8;
  int glasso_maxit = 1000;
  double floor_mse = 1e-5;
  int threads = 1;
};

struct SweepEntry {
  double hyperparameter = 0.0;
  ParametricModel model;
  double loss = 0.0;
  Eigen::Index k = 0;
};

struct SweepResult {
  MethodKind method = MethodKind::sgtr;
  std::vector<SweepEntry> entries;
  Eigen::Index selected = 0;
  ParametricModel final_model;  // refit on the full system at the selected support
};

// Hyperparameter sweep: 20% validation split, log-spaced grid (lambda in
// [1e-5*lambda_max, lambda_max] for GLASSO, [eps_min, eps_max] for SGTR),
// each candidate fitted on the training split and scored with aic_loss on
// the validation split against the full dataset size. Ties break toward
// fewer terms, then the larger hyperparameter.
inline SweepResult sweep(const BlockSystem& sys, MethodKind method,
                         const SweepParams& params = {}) {
  if (sys.num_terms() < 2) throw std::invalid_argument("sweep: need at least 2 groups");
  if (params.count < 2) throw std::invalid_argument("sweep: need at least 2 grid points");
  auto [train, valid] = split_validation(sys, params.fraction, params.seed);

  double lo = 0.0, hi = 0.0;
  if (method == MethodKind::glasso) {
    hi = lambda_max(train);
    lo = 1e-5 * hi;
  } else {
    std::tie(lo, hi) = epsilon_range(train, params.sgtr_ridge);
  }
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("sweep: degenerate hyperparameter range");

  const int count = params.count;
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                              static_cast<double>(count - 1));
  grid.front() = lo;
  grid.back() = hi;

  const detail::GramCache train_grams = detail::build_grams(train);
  const double n_data = static_cast<double>(sys.total_rows());

  SweepResult result;
  result.method = method;
  result.entries.resize(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  auto fit_one = [&](int i) {
    const std::size_t is = static_cast<std::size_t>(i);
    try {
      SweepEntry entry;
      entry.hyperparameter = grid[is];
      if (method == MethodKind::sgtr) {
        SgtrParams sp;
        sp.ridge_lambda = params.sgtr_ridge;
        sp.epsilon = grid[is];
        sp.maxit = params.sgtr_maxit;
        entry.model = sgtr(train, sp, &train_grams);
      } else {
        GlassoParams gp;
        gp.lambda = grid[is];
        gp.tol = params.glasso_tol;
        gp.maxit = params.glasso_maxit;
        entry.model = glasso(train, gp);
        // Score the support, not the shrinkage: replace the penalized
        // coefficients with a debiased refit before computing the loss, the
        // same polish SGTR applies internally.
        if (entry.model.k > 0)
          entry.model.coeffs =
              denormalize(least_squares_refit(train, entry.model.active), train);
      }
      entry.model.seed = params.seed;
      entry.loss = aic_loss(entry.model, valid, n_data, params.floor_mse);
      entry.k = entry.model.k;
      result.entries[is] = std::move(entry);
    } catch (...) {
      failures[is] = std::current_exception();
    }
  };

  const int threads = std::max(1, std::min(params.threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fit_one(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < count; i += threads) fit_one(i);
      });
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& failure : failures)
    if (failure) std::rethrow_exception(failure);

  Eigen::Index best = 0;
  for (int i = 1; i < count; ++i) {
    const SweepEntry& cand = result.entries[static_cast<std::size_t>(i)];
    const SweepEntry& cur = result.entries[static_cast<std::size_t>(best)];
    const bool better =
        cand.loss < cur.loss ||
        (cand.loss == cur.loss &&
         (cand.k < cur.k || (cand.k == cur.k && cand.hyperparameter > cur.hyperparameter)));
    if (better) best = i;
  }
  result.selected = best;

  const SweepEntry& chosen = result.entries[static_cast<std::size_t>(best)];
  const Eigen::MatrixXd refit = least_squares_refit(sys, chosen.model.active);
  ParametricModel final_model;
  final_model.method = method_name(method);
  final_model.hyperparameter = chosen.hyperparameter;
  final_model.seed = params.seed;
  final_model.active = chosen.model.active;
  final_model.k = chosen.model.k;
  final_model.coeffs = denormalize(refit, sys);
  final_model.residual_mse = detail::residual_mse_of(sys, refit);
  final_model.converged = chosen.model.converged;
  result.final_model = std::move(final_model);
  return result;
}

}  // namespace parapde
