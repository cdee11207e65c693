#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parapde/differentiate.hpp"
#include "parapde/grid.hpp"
#include "parapde/rng.hpp"
#include "parapde/sampling.hpp"
#include "parapde/terms.hpp"

namespace parapde {

enum class BlockAxis { time, space };

struct LibrarySpec {
  int max_power = 3;
  int max_derivative = 4;
  bool include_constant = true;
  BlockAxis axis = BlockAxis::time;
  DiffSpec space_diff{};                                  // spectral by default
  DiffSpec time_diff{DiffMethod::central_fd, 4, 5};       // time axis is never periodic
  // Keep every stride-th row of each block. Derivatives are still computed on
  // the full grid; this only thins the regression rows, shrinking the
  // information-criterion dataset size when the system would otherwise be fit
  // far below the loss floor.
  Eigen::Index row_stride = 1;
};

// Grouped per-slice regressions sharing one term list. Stored columns and
// targets are unit length; column_norms/target_norms hold the physical
// lengths recorded before normalization. Group g = column g of every block.
struct BlockSystem {
  std::vector<Eigen::MatrixXd> theta;
  std::vector<Eigen::VectorXd> target;
  std::vector<TermDescriptor> terms;
  BlockAxis axis = BlockAxis::time;
  Eigen::VectorXd coords;
  Eigen::MatrixXd column_norms;
  Eigen::VectorXd target_norms;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flagged;

  Eigen::Index num_terms() const { return static_cast<Eigen::Index>(terms.size()); }
  Eigen::Index num_blocks() const { return static_cast<Eigen::Index>(theta.size()); }
  Eigen::Index total_rows() const {
    Eigen::Index r = 0;
    for (const auto& block : theta) r += block.rows();
    return r;
  }
  // True when the group's column is flagged (near zero) in every block.
  bool group_flagged(Eigen::Index g) const {
    for (Eigen::Index j = 0; j < flagged.cols(); ++j)
      if (!flagged(g, j)) return false;
    return true;
  }
};

// Records physical column and target lengths, flags near-zero columns
// (length below 1e-12*sqrt(r)), and rescales everything else to unit length.
// build_blocks calls this internally; exposed for synthetic systems.
inline void normalize_system(BlockSystem& sys) {
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  if (nblocks == 0) throw std::invalid_argument("normalize_system: empty system");
  if (sys.target.size() != static_cast<std::size_t>(nblocks) || sys.coords.size() != nblocks)
    throw std::invalid_argument("normalize_system: inconsistent block counts");
  sys.column_norms.resize(d, nblocks);
  sys.target_norms.resize(nblocks);
  sys.flagged.setConstant(d, nblocks, false);
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(j)];
    Eigen::VectorXd& b = sys.target[static_cast<std::size_t>(j)];
    if (theta.cols() != d || b.size() != theta.rows())
      throw std::invalid_argument("normalize_system: block shape mismatch");
    if (!theta.allFinite() || !b.allFinite())
      throw std::invalid_argument("normalize_system: non-finite library entries");
    const double zero_tol = 1e-12 * std::sqrt(static_cast<double>(theta.rows()));
    for (Eigen::Index g = 0; g < d; ++g) {
      const double len = theta.col(g).norm();
      sys.column_norms(g, j) = len;
      if (len < zero_tol) {
        sys.flagged(g, j) = true;
        theta.col(g).setZero();
      } else {
        theta.col(g) /= len;
      }
    }
    const double blen = b.norm();
    if (blen < zero_tol)
      throw std::invalid_argument("normalize_system: degenerate all-zero target in block " +
                                  std::to_string(j));
    sys.target_norms[j] = blen;
    b /= blen;
  }
}

namespace detail {

inline TermDescriptor make_term_1d(int power, int order) {
  TermDescriptor t;
  if (power > 0) t.base.push_back({"u", power});
  if (order > 0) {
    t.deriv_field = "u";
    t.deriv = deriv_tag_for_order(order);
  }
  return t;
}

}  // namespace detail

// Candidate library over one scalar field: powers of u times x-derivatives of
// u, one regression block per slice along the chosen axis. Targets are u_t.
// Rows whose row-axis stencil was one-sided or window-shifted are dropped;
// the block axis is never trimmed.
inline BlockSystem build_blocks(const Field1D& field, const LibrarySpec& spec) {
  validate(field);
  if (spec.max_power < 1 || spec.max_derivative < 1)
    throw std::invalid_argument("build_blocks: max_power and max_derivative must be >= 1");
  const Eigen::Index n = field.grid.nx(), m = field.grid.nt();

  const Eigen::MatrixXd ut = differentiate_field(field, Axis::t, 1, spec.time_diff);
  std::vector<Eigen::MatrixXd> dxs(static_cast<std::size_t>(spec.max_derivative) + 1);
  for (int q = 1; q <= spec.max_derivative; ++q)
    dxs[static_cast<std::size_t>(q)] = differentiate_field(field, Axis::x, q, spec.space_diff);
  // With polynomial smoothing the monomial factors are evaluated from the
  // window fit (its order-0 output), not the raw samples, so that u^p columns
  // see the same denoised field the derivative columns do.
  Eigen::MatrixXd base = field.u;
  if (spec.space_diff.method == DiffMethod::poly_smooth)
    for (Eigen::Index j = 0; j < m; ++j)
      base.col(j) = detail::poly_smooth_series(field.u.col(j), field.grid.dx, 0,
                                               spec.space_diff.poly_degree,
                                               spec.space_diff.poly_half_window);
  std::vector<Eigen::MatrixXd> pows(static_cast<std::size_t>(spec.max_power) + 1);
  pows[0] = Eigen::MatrixXd::Ones(n, m);
  for (int p = 1; p <= spec.max_power; ++p)
    pows[static_cast<std::size_t>(p)] =
        (pows[static_cast<std::size_t>(p - 1)].array() * base.array()).matrix();

  BlockSystem sys;
  sys.axis = spec.axis;
  for (int q = 0; q <= spec.max_derivative; ++q)
    for (int p = 0; p <= spec.max_power; ++p) {
      if (p == 0 && q == 0 && !spec.include_constant) continue;
      sys.terms.push_back(detail::make_term_1d(p, q));
    }
  const Eigen::Index d = sys.num_terms();

  const Eigen::Index trim_x = edge_trim(spec.space_diff, spec.max_derivative, field.grid.periodic);
  const Eigen::Index trim_t = edge_trim(spec.time_diff, 1, false);
  const bool by_time = spec.axis == BlockAxis::time;
  const Eigen::Index nblocks = by_time ? m : n;
  const Eigen::Index row_lo = by_time ? trim_x : trim_t;
  const Eigen::Index row_hi = by_time ? n - trim_x : m - trim_t;
  if (spec.row_stride < 1) throw std::invalid_argument("build_blocks: row_stride must be positive");
  const Eigen::Index stride = spec.row_stride;
  const Eigen::Index r = row_hi > row_lo ? (row_hi - row_lo + stride - 1) / stride : 0;
  if (r < 1) throw std::invalid_argument("build_blocks: no rows left after boundary trimming");
  if (r < 2 * d)
    std::cerr << "build_blocks: only " << r << " rows per block for " << d
              << " terms; fits may be underdetermined\n";

  sys.coords = by_time ? field.grid.t : field.grid.x;
  sys.theta.assign(static_cast<std::size_t>(nblocks), Eigen::MatrixXd(r, d));
  sys.target.assign(static_cast<std::size_t>(nblocks), Eigen::VectorXd(r));
  for (Eigen::Index blk = 0; blk < nblocks; ++blk) {
    Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(blk)];
    Eigen::VectorXd& b = sys.target[static_cast<std::size_t>(blk)];
    for (Eigen::Index row = 0; row < r; ++row) {
      const Eigen::Index at = row_lo + row * stride;
      const Eigen::Index ix = by_time ? at : blk;
      const Eigen::Index jt = by_time ? blk : at;
      Eigen::Index col = 0;
      for (int q = 0; q <= spec.max_derivative; ++q) {
        const double dval = q == 0 ? 1.0 : dxs[static_cast<std::size_t>(q)](ix, jt);
        for (int p = 0; p <= spec.max_power; ++p) {
          if (p == 0 && q == 0 && !spec.include_constant) continue;
          theta(row, col++) = pows[static_cast<std::size_t>(p)](ix, jt) * dval;
        }
      }
      b[row] = ut(ix, jt);
    }
  }
  normalize_system(sys);
  return sys;
}

// Vorticity library at sampled locations: constant plus derivative factors
// {w_x, w_y, w_xx, w_xy, w_yy} times base monomials
// {1, u, v, w, u^2, v^2, w^2, uv, uw, vw}. One block per retained timestep,
// targets are w_t at the sampled points.
inline BlockSystem build_blocks_2d(const Field2D& field, const SampledSet& sample,
                                   const LibrarySpec& spec) {
  validate(field);
  const Grid2D& g = field.grid;
  const Eigen::Index m = g.nt();
  if (sample.points.empty() || sample.times.empty())
    throw std::invalid_argument("build_blocks_2d: empty sample");
  for (const auto& [ix, iy] : sample.points)
    if (ix < 0 || ix >= g.nx() || iy < 0 || iy >= g.ny())
      throw std::invalid_argument("build_blocks_2d: sample point outside grid");
  for (Eigen::Index jt : sample.times)
    if (jt < 0 || jt >= m) throw std::invalid_argument("build_blocks_2d: sample time outside grid");

  const Eigen::Index trim_x = edge_trim(spec.space_diff, 2, g.periodic_x);
  const Eigen::Index trim_y = edge_trim(spec.space_diff, 2, g.periodic_y);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> kept;
  for (const auto& pt : sample.points)
    if (pt.first >= trim_x && pt.first < g.nx() - trim_x && pt.second >= trim_y &&
        pt.second < g.ny() - trim_y)
      kept.push_back(pt);
  const Eigen::Index r = static_cast<Eigen::Index>(kept.size());
  if (r < 1) throw std::invalid_argument("build_blocks_2d: no sample points after trimming");

  BlockSystem sys;
  sys.axis = BlockAxis::time;
  const std::vector<DerivTag> dtags = {DerivTag::x, DerivTag::y, DerivTag::xx, DerivTag::xy,
                                       DerivTag::yy};
  using Factors = std::vector<TermDescriptor::Factor>;
  const std::vector<Factors> bases = {
      {},           {{"u", 1}},           {{"v", 1}},           {{"w", 1}},
      {{"u", 2}},   {{"v", 2}},           {{"w", 2}},           {{"u", 1}, {"v", 1}},
      {{"u", 1}, {"w", 1}},               {{"v", 1}, {"w", 1}}};
  if (spec.include_constant) sys.terms.push_back(TermDescriptor{});
  for (DerivTag tag : dtags)
    for (const Factors& base : bases) {
      TermDescriptor t;
      t.base = base;
      t.deriv_field = "w";
      t.deriv = tag;
      sys.terms.push_back(t);
    }
  const Eigen::Index d = sys.num_terms();
  if (r < 2 * d)
    std::cerr << "build_blocks_2d: only " << r << " rows per block for " << d
              << " terms; fits may be underdetermined\n";

  // Time derivative of w along each kept point's full history.
  const Eigen::Index nblocks = static_cast<Eigen::Index>(sample.times.size());
  Eigen::MatrixXd wt(r, nblocks);
  {
    Eigen::VectorXd series(m);
    for (Eigen::Index s = 0; s < r; ++s) {
      const auto [ix, iy] = kept[static_cast<std::size_t>(s)];
      for (Eigen::Index j = 0; j < m; ++j)
        series[j] = field.omega[static_cast<std::size_t>(j)](ix, iy);
      const Eigen::VectorXd ds = derivative(series, g.dt, 1, spec.time_diff);
      for (Eigen::Index blk = 0; blk < nblocks; ++blk)
        wt(s, blk) = ds[sample.times[static_cast<std::size_t>(blk)]];
    }
  }

  sys.coords.resize(nblocks);
  sys.theta.assign(static_cast<std::size_t>(nblocks), Eigen::MatrixXd(r, d));
  sys.target.assign(static_cast<std::size_t>(nblocks), Eigen::VectorXd(r));
  for (Eigen::Index blk = 0; blk < nblocks; ++blk) {
    const Eigen::Index jt = sample.times[static_cast<std::size_t>(blk)];
    sys.coords[blk] = g.t[jt];
    // Same rule as the 1D library: under polynomial smoothing the monomial
    // factors come from the order-0 window fit (applied along x then y).
    auto monomial_snapshot = [&](const Eigen::MatrixXd& snap) {
      if (spec.space_diff.method != DiffMethod::poly_smooth) return snap;
      Eigen::MatrixXd sm = snap;
      for (Eigen::Index iy = 0; iy < sm.cols(); ++iy)
        sm.col(iy) = detail::poly_smooth_series(sm.col(iy), g.dx, 0, spec.space_diff.poly_degree,
                                                spec.space_diff.poly_half_window);
      for (Eigen::Index ix = 0; ix < sm.rows(); ++ix)
        sm.row(ix) = detail::poly_smooth_series(sm.row(ix).transpose(), g.dy, 0,
                                                spec.space_diff.poly_degree,
                                                spec.space_diff.poly_half_window)
                         .transpose();
      return sm;
    };
    const Eigen::MatrixXd w = monomial_snapshot(field.omega[static_cast<std::size_t>(jt)]);
    const Eigen::MatrixXd u = monomial_snapshot(field.u[static_cast<std::size_t>(jt)]);
    const Eigen::MatrixXd v = monomial_snapshot(field.v[static_cast<std::size_t>(jt)]);
    std::vector<Eigen::MatrixXd> derivs;
    derivs.reserve(dtags.size());
    for (DerivTag tag : dtags) {
      Axis ax = Axis::x;
      int order = 1;
      switch (tag) {
        case DerivTag::x: ax = Axis::x; order = 1; break;
        case DerivTag::y: ax = Axis::y; order = 1; break;
        case DerivTag::xx: ax = Axis::x; order = 2; break;
        case DerivTag::yy: ax = Axis::y; order = 2; break;
        case DerivTag::xy: ax = Axis::xy; order = 1; break;
        default: throw std::logic_error("build_blocks_2d: unexpected tag");
      }
      derivs.push_back(snapshot_derivative(w, g, ax, order, spec.space_diff));
    }
    Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(blk)];
    Eigen::VectorXd& b = sys.target[static_cast<std::size_t>(blk)];
    for (Eigen::Index s = 0; s < r; ++s) {
      const auto [ix, iy] = kept[static_cast<std::size_t>(s)];
      auto field_value = [&](const std::string& name) {
        if (name == "u") return u(ix, iy);
        if (name == "v") return v(ix, iy);
        return w(ix, iy);
      };
      std::vector<double> base_vals;
      base_vals.reserve(bases.size());
      for (const Factors& base : bases) {
        double val = 1.0;
        for (const auto& f : base)
          for (int p = 0; p < f.power; ++p) val *= field_value(f.field);
        base_vals.push_back(val);
      }
      Eigen::Index col = 0;
      if (spec.include_constant) theta(s, col++) = 1.0;
      for (std::size_t di = 0; di < dtags.size(); ++di)
        for (std::size_t bi = 0; bi < bases.size(); ++bi)
          theta(s, col++) = base_vals[bi] * derivs[di](ix, iy);
      b[s] = wt(s, blk);
    }
  }
  normalize_system(sys);
  return sys;
}

// Maps normalized-unit coefficients back to physical units:
// xi_phys(g,j) = xi(g,j) * |b_j| / |theta_g_j|; flagged columns give 0.
inline Eigen::MatrixXd denormalize(const Eigen::MatrixXd& coeffs, const BlockSystem& sys) {
  if (coeffs.rows() != sys.num_terms() || coeffs.cols() != sys.num_blocks())
    throw std::invalid_argument("denormalize: coefficient shape mismatch");
  Eigen::MatrixXd out(coeffs.rows(), coeffs.cols());
  for (Eigen::Index j = 0; j < coeffs.cols(); ++j)
    for (Eigen::Index g = 0; g < coeffs.rows(); ++g)
      out(g, j) = sys.flagged(g, j)
                      ? 0.0
                      : coeffs(g, j) * sys.target_norms[j] / sys.column_norms(g, j);
  return out;
}

// Per-block random row split. Training blocks are renormalized on their own
// rows; validation blocks reuse the training scale factors so training
// coefficients apply unchanged (validation norms are not recomputed).
inline std::pair<BlockSystem, BlockSystem> split_validation(const BlockSystem& sys,
                                                            double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_validation: fraction must be in (0,1)");
  const Eigen::Index d = sys.num_terms(), nblocks = sys.num_blocks();
  for (const auto& block : sys.theta)
    if (block.rows() < 5)
      throw std::invalid_argument("split_validation: every block needs at least 5 rows");

  BlockSystem train, valid;
  for (BlockSystem* part : {&train, &valid}) {
    part->terms = sys.terms;
    part->axis = sys.axis;
    part->coords = sys.coords;
    part->column_norms.resize(d, nblocks);
    part->target_norms.resize(nblocks);
    part->flagged.setConstant(d, nblocks, false);
  }

  RandomStream rng(seed);
  for (Eigen::Index j = 0; j < nblocks; ++j) {
    const Eigen::MatrixXd& theta = sys.theta[static_cast<std::size_t>(j)];
    const Eigen::VectorXd& b = sys.target[static_cast<std::size_t>(j)];
    const Eigen::Index r = theta.rows();
    Eigen::Index vcount = static_cast<Eigen::Index>(
        std::lround(fraction * static_cast<double>(r)));
    vcount = std::max<Eigen::Index>(1, std::min(vcount, r - 1));

    std::vector<std::size_t> picks =
        rng.sample_without_replacement(static_cast<std::size_t>(r),
                                       static_cast<std::size_t>(vcount));
    std::vector<bool> is_valid(static_cast<std::size_t>(r), false);
    for (std::size_t p : picks) is_valid[p] = true;

    Eigen::MatrixXd theta_tr(r - vcount, d), theta_va(vcount, d);
    Eigen::VectorXd b_tr(r - vcount), b_va(vcount);
    Eigen::Index it = 0, iv = 0;
    for (Eigen::Index row = 0; row < r; ++row) {
      if (is_valid[static_cast<std::size_t>(row)]) {
        theta_va.row(iv) = theta.row(row);
        b_va[iv++] = b[row];
      } else {
        theta_tr.row(it) = theta.row(row);
        b_tr[it++] = b[row];
      }
    }

    const double zero_tol = 1e-12 * std::sqrt(static_cast<double>(r - vcount));
    for (Eigen::Index g = 0; g < d; ++g) {
      const double tau = theta_tr.col(g).norm();
      if (sys.flagged(g, j) || tau < zero_tol) {
        train.flagged(g, j) = valid.flagged(g, j) = true;
        train.column_norms(g, j) = valid.column_norms(g, j) = 0.0;
        theta_tr.col(g).setZero();
        theta_va.col(g).setZero();
      } else {
        train.column_norms(g, j) = valid.column_norms(g, j) = sys.column_norms(g, j) * tau;
        theta_tr.col(g) /= tau;
        theta_va.col(g) /= tau;
      }
    }
    const double tau_b = b_tr.norm();
    if (tau_b < zero_tol)
      throw std::invalid_argument("split_validation: degenerate training target in block " +
                                  std::to_string(j));
    train.target_norms[j] = valid.target_norms[j] = sys.target_norms[j] * tau_b;
    b_tr /= tau_b;
    b_va /= tau_b;

    train.theta.push_back(std::move(theta_tr));
    train.target.push_back(std::move(b_tr));
    valid.theta.push_back(std::move(theta_va));
    valid.target.push_back(std::move(b_va));
  }
  return {std::move(train), std::move(valid)};
}

}  // namespace parapde
