#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "parapde/parapde.hpp"

using namespace parapde;

namespace {

// Random block system with b = 2.0 * theta_1 + 0.5 * theta_4 (+ noise),
// normalized. Column 4 is mildly correlated with its neighbors.
BlockSystem make_synthetic(std::uint64_t seed, Eigen::Index nblocks, Eigen::Index r,
                           Eigen::Index d, double noise) {
  RandomStream rng(seed);
  BlockSystem sys;
  for (Eigen::Index g = 0; g < d; ++g)
    sys.terms.push_back(detail::make_term_1d(static_cast<int>(g % 3) + 1,
                                             static_cast<int>(g / 3)));
  sys.coords = Eigen::VectorXd::LinSpaced(nblocks, 0.0, 1.0);
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    Eigen::MatrixXd th(r, d);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index g = 0; g < d; ++g) th(i, g) = rng.gaussian();
    for (Eigen::Index g = 1; g < d; ++g) th.col(g) += 0.4 * th.col(g - 1);
    Eigen::VectorXd b = 2.0 * th.col(1) + 0.5 * th.col(4);
    for (Eigen::Index i = 0; i < r; ++i) b[i] += noise * rng.gaussian();
    sys.theta.push_back(std::move(th));
    sys.target.push_back(std::move(b));
  }
  normalize_system(sys);
  return sys;
}

// Assemble the same restricted least-squares problem as one dense system with
// explicit block-diagonal structure and solve it directly.
Eigen::MatrixXd dense_refit(const BlockSystem& sys, const std::vector<Eigen::Index>& active,
                            double ridge) {
  const Eigen::Index nblocks = sys.num_blocks();
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  const Eigen::Index rows = sys.total_rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(rows + (ridge > 0.0 ? na * nblocks : 0),
                                              na * nblocks);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(big.rows());
  Eigen::Index roff = 0;
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    const Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(j)];
    for (Eigen::Index a = 0; a < na; ++a)
      big.block(roff, j * na + a, theta.rows(), 1) =
          theta.col(active[static_cast<std::size_t>(a)]);
    rhs.segment(roff, theta.rows()) = sys.target[static_cast<std::size_t>(j)];
    roff += theta.rows();
  }
  if (ridge > 0.0)
    big.block(rows, 0, na * nblocks, na * nblocks) =
        std::sqrt(ridge) * Eigen::MatrixXd::Identity(na * nblocks, na * nblocks);
  const Eigen::VectorXd w =
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(big).solve(rhs);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sys.num_terms(), nblocks);
  for (Eigen::Index j = 0; j < nblocks; ++j)
    for (Eigen::Index a = 0; a < na; ++a)
      out(active[static_cast<std::size_t>(a)], j) = w[j * na + a];
  return out;
}

double glasso_objective(const BlockSystem& sys, const Eigen::MatrixXd& w, double lambda) {
  double rss = 0.0;
  for (Eigen::Index j = 0; j < sys.num_blocks(); ++j)
    rss += (sys.target[static_cast<std::size_t>(j)] -
            sys.theta[static_cast<std::size_t>(j)] * w.col(j))
               .squaredNorm();
  double penalty = 0.0;
  for (Eigen::Index g = 0; g < w.rows(); ++g) penalty += w.row(g).norm();
  return rss / (2.0 * static_cast<double>(sys.total_rows())) + lambda * penalty;
}

}  // namespace

TEST_CASE("blockwise refits match the dense block-diagonal solve") {
  RandomStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 7;
    const Eigen::Index r = static_cast<Eigen::Index>(rng.below(30)) + d + 2;
    const BlockSystem sys = make_synthetic(100 + trial, 3, r, d, 0.1);
    std::vector<Eigen::Index> active;
    for (Eigen::Index g = 0; g < d; ++g)
      if (rng.uniform() < 0.5) active.push_back(g);
    if (active.empty()) active.push_back(static_cast<Eigen::Index>(rng.below(7)));

    const Eigen::MatrixXd block_ls = least_squares_refit(sys, active);
    const Eigen::MatrixXd dense_ls = dense_refit(sys, active, 0.0);
    REQUIRE((block_ls - dense_ls).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("blockwise ridge matches the dense augmented solve") {
  const BlockSystem sys = make_synthetic(7, 4, 25, 6, 0.1);
  std::vector<Eigen::Index> all(6);
  std::iota(all.begin(), all.end(), 0);
  for (double lambda : {1e-6, 1e-3, 0.5}) {
    const Eigen::MatrixXd blockwise = ridge_blockwise(sys, lambda);
    const Eigen::MatrixXd dense = dense_refit(sys, all, lambda);
    REQUIRE((blockwise - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(ridge_blockwise(sys, -1.0), std::invalid_argument);
}

TEST_CASE("least_squares_refit handles empty and invalid supports") {
  const BlockSystem sys = make_synthetic(3, 3, 20, 6, 0.1);
  const Eigen::MatrixXd none = least_squares_refit(sys, {});
  CHECK(none.rows() == 6);
  CHECK(none.cols() == 3);
  CHECK(none.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(least_squares_refit(sys, {6}), std::invalid_argument);
  CHECK_THROWS_AS(least_squares_refit(sys, {-1}), std::invalid_argument);
}

TEST_CASE("sgtr keeps the dominant column of an identity toy") {
  BlockSystem sys;
  sys.terms = {detail::make_term_1d(1, 0), detail::make_term_1d(1, 1)};
  sys.coords = Eigen::VectorXd::Zero(1);
  sys.theta = {Eigen::MatrixXd::Identity(2, 2)};
  Eigen::VectorXd b(2);
  b << 1.0, 1e-3;
  sys.target = {b};
  normalize_system(sys);

  SgtrParams params;
  params.ridge_lambda = 0.0;
  params.epsilon = 0.1;
  const ParametricModel model = sgtr(sys, params);
  REQUIRE(model.active == std::vector<Eigen::Index>{0});
  CHECK(model.k == 1);
  CHECK_THAT(model.coeffs(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(model.coeffs(1, 0) == 0.0);
  CHECK(model.method == "sgtr");
}

TEST_CASE("sgtr recovers a planted two-term model") {
  const BlockSystem sys = make_synthetic(21, 5, 60, 8, 0.0);
  SgtrParams params;
  params.ridge_lambda = 1e-5;
  params.epsilon = 0.2;
  const ParametricModel model = sgtr(sys, params);
  REQUIRE(model.active == std::vector<Eigen::Index>{1, 4});
  for (Eigen::Index j = 0; j < sys.num_blocks(); ++j) {
    REQUIRE_THAT(model.coeffs(1, j), Catch::Matchers::WithinAbs(2.0, 1e-8));
    REQUIRE_THAT(model.coeffs(4, j), Catch::Matchers::WithinAbs(0.5, 1e-8));
  }
  CHECK(model.residual_mse < 1e-12);
}

TEST_CASE("sgtr threshold boundaries behave as documented") {
  const BlockSystem sys = make_synthetic(33, 4, 50, 6, 0.02);
  const double ridge = 1e-5;
  const Eigen::MatrixXd init = ridge_blockwise(sys, ridge);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index g = 0; g < sys.num_terms(); ++g) {
    const double norm = init.row(g).norm();
    lo = std::min(lo, norm);
    hi = std::max(hi, norm);
  }

  SgtrParams params;
  params.ridge_lambda = ridge;
  params.epsilon = lo * (1.0 - 1e-6);
  CHECK(sgtr(sys, params).k == sys.num_terms());  // strictly below the smallest norm keeps all
  params.epsilon = lo * (1.0 + 1e-6);
  CHECK(sgtr(sys, params).k < sys.num_terms());
  params.epsilon = hi;
  const ParametricModel empty = sgtr(sys, params);  // >= largest norm clears the support
  CHECK(empty.k == 0);
  CHECK(empty.coeffs.cwiseAbs().maxCoeff() == 0.0);

  params.epsilon = -1.0;
  CHECK_THROWS_AS(sgtr(sys, params), std::invalid_argument);
  params.epsilon = 0.1;
  params.maxit = 0;
  CHECK_THROWS_AS(sgtr(sys, params), std::invalid_argument);
}

TEST_CASE("sgtr support is invariant to physical column rescaling") {
  auto build = [](double scale) {
    RandomStream rng(77);
    BlockSystem sys;
    for (Eigen::Index g = 0; g < 6; ++g) sys.terms.push_back(detail::make_term_1d(1, 0));
    sys.coords = Eigen::VectorXd::Zero(4);
    for (Eigen::Index j = 0; j < 4; ++j) {
      Eigen::MatrixXd th(40, 6);
      for (Eigen::Index i = 0; i < 40; ++i)
        for (Eigen::Index g = 0; g < 6; ++g) th(i, g) = rng.gaussian();
      Eigen::VectorXd b = 2.0 * th.col(1) + 0.5 * th.col(3);
      th.col(1) *= scale;  // physical rescale before normalization
      sys.theta.push_back(std::move(th));
      sys.target.push_back(std::move(b));
    }
    normalize_system(sys);
    return sys;
  };
  SgtrParams params;
  params.epsilon = 0.2;
  const ParametricModel base = sgtr(build(1.0), params);
  const ParametricModel scaled = sgtr(build(37.5), params);
  REQUIRE(base.active == std::vector<Eigen::Index>{1, 3});
  REQUIRE(scaled.active == base.active);
  for (Eigen::Index j = 0; j < 4; ++j) {
    REQUIRE_THAT(scaled.coeffs(1, j), Catch::Matchers::WithinAbs(2.0 / 37.5, 1e-8));
    REQUIRE_THAT(scaled.coeffs(3, j), Catch::Matchers::WithinAbs(0.5, 1e-8));
  }
}

TEST_CASE("sgtr results do not depend on who built the gram cache") {
  const BlockSystem sys = make_synthetic(5, 4, 30, 6, 0.05);
  const detail::GramCache cache = detail::build_grams(sys);
  SgtrParams params;
  params.epsilon = 0.15;
  const ParametricModel own = sgtr(sys, params);
  const ParametricModel shared = sgtr(sys, params, &cache);
  CHECK(own.active == shared.active);
  CHECK((own.coeffs - shared.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("group lasso soft-threshold matches the closed form") {
  // One term, eight two-row blocks: theta_j = e1, b_j = (1,1)/sqrt(2). The
  // least-squares coefficient is 1/sqrt(2) per block, so the group norm is 2
  // and N = 16 rows; lambda = 1/16 shrinks the group by exactly one half.
  BlockSystem sys;
  sys.terms = {detail::make_term_1d(1, 0)};
  sys.coords = Eigen::VectorXd::LinSpaced(8, 0.0, 1.0);
  for (int j = 0; j < 8; ++j) {
    Eigen::MatrixXd th(2, 1);
    th << 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    sys.theta.push_back(th);
    sys.target.push_back(b);
  }
  normalize_system(sys);

  GlassoParams params;
  params.lambda = 1.0 / 16.0;
  Eigen::MatrixXd raw;
  const ParametricModel model = glasso(sys, params, &raw);
  REQUIRE(model.active == std::vector<Eigen::Index>{0});
  for (int j = 0; j < 8; ++j)
    REQUIRE_THAT(raw(0, j), Catch::Matchers::WithinAbs(0.5 / std::sqrt(2.0), 1e-12));
  // Debiased output drops the shrinkage again.
  for (int j = 0; j < 8; ++j)
    REQUIRE_THAT(model.coeffs(0, j), Catch::Matchers::WithinAbs(1.0 / std::sqrt(2.0), 1e-12));

  // lambda_max for this system is 2/16 = 1/8 and zeroes the group exactly.
  CHECK_THAT(lambda_max(sys), Catch::Matchers::WithinAbs(1.0 / 8.0, 1e-15));
  params.lambda = 1.0 / 8.0;
  const ParametricModel none = glasso(sys, params, &raw);
  CHECK(none.k == 0);
  CHECK(raw.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("glasso at or above lambda_max returns the empty model") {
  const BlockSystem sys = make_synthetic(13, 5, 40, 8, 0.05);
  for (double factor : {1.0, 1.3, 10.0}) {
    GlassoParams params;
    params.lambda = factor * lambda_max(sys);
    Eigen::MatrixXd raw;
    const ParametricModel model = glasso(sys, params, &raw);
    REQUIRE(model.k == 0);
    REQUIRE(model.active.empty());
    REQUIRE(raw.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(model.coeffs.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("glasso satisfies the stationarity conditions at convergence") {
  const BlockSystem sys = make_synthetic(5, 6, 40, 8, 0.05);
  const double lmax = lambda_max(sys);
  for (double frac : {0.3, 0.05}) {
    GlassoParams params;
    params.lambda = frac * lmax;
    Eigen::MatrixXd raw;
    const ParametricModel model = glasso(sys, params, &raw);
    REQUIRE(model.converged);
    const double N = static_cast<double>(sys.total_rows());
    for (Eigen::Index g = 0; g < sys.num_terms(); ++g) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < sys.num_blocks(); ++j) {
        const Eigen::VectorXd r =
            sys.target[static_cast<std::size_t>(j)] -
            sys.theta[static_cast<std::size_t>(j)] * raw.col(j);
        const double dot = sys.theta[static_cast<std::size_t>(j)].col(g).dot(r);
        s += dot * dot;
      }
      const double grad = std::sqrt(s) / N;
      if (raw.row(g).norm() > 0.0)
        REQUIRE_THAT(grad, Catch::Matchers::WithinAbs(params.lambda, 10.0 * params.tol));
      else
        REQUIRE(grad <= params.lambda + 10.0 * params.tol);
    }
  }
}

TEST_CASE("glasso objective never increases with more sweeps") {
  const BlockSystem sys = make_synthetic(9, 5, 40, 8, 0.05);
  const double lambda = 0.1 * lambda_max(sys);
  double prev = glasso_objective(sys, Eigen::MatrixXd::Zero(8, 5), lambda);
  for (int maxit : {1, 2, 3, 5, 8, 13, 21, 40}) {
    GlassoParams params;
    params.lambda = lambda;
    params.maxit = maxit;
    params.tol = 1e-13;
    Eigen::MatrixXd raw;
    glasso(sys, params, &raw);
    const double obj = glasso_objective(sys, raw, lambda);
    REQUIRE(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("glasso reports non-convergence but still returns an iterate") {
  const BlockSystem sys = make_synthetic(29, 5, 40, 8, 0.05);
  GlassoParams params;
  params.lambda = 0.01 * lambda_max(sys);
  params.maxit = 1;
  params.tol = 1e-14;
  const ParametricModel model = glasso(sys, params);
  CHECK(!model.converged);
  CHECK(model.k > 0);

  params.maxit = 0;
  CHECK_THROWS_AS(glasso(sys, params), std::invalid_argument);
  params.maxit = 100;
  params.lambda = -0.1;
  CHECK_THROWS_AS(glasso(sys, params), std::invalid_argument);
  params.lambda = 0.1;
  params.tol = 0.0;
  CHECK_THROWS_AS(glasso(sys, params), std::invalid_argument);
}
