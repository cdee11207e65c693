#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "parapde/grid.hpp"
#include "parapde/rng.hpp"
#include "parapde/spectral.hpp"

namespace parapde {

// Additive white-noise description. `level` scales the noise standard
// deviation relative to the RMS value of the field: sigma = level * RMS(U),
// where RMS(U) = ||U||_2 / sqrt(#entries).
struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
};

inline double rms(const Eigen::MatrixXd& m) {
  return m.norm() / std::sqrt(static_cast<double>(m.size()));
}

// Returns field + eta with eta i.i.d. N(0, sigma^2), sigma = level * RMS(u).
// The noise stream is consumed in row-major order over the data matrix, so a
// given (field, spec) pair always produces the same output.
[[nodiscard]] inline Field1D add_noise(const Field1D& field, const NoiseSpec& spec) {
  if (spec.level < 0.0) throw std::invalid_argument("add_noise: level must be nonnegative");
  Field1D out = field;
  if (spec.level == 0.0) return out;
  const double sigma = spec.level * rms(field.u);
  RandomStream rng(spec.seed);
  for (Eigen::Index i = 0; i < out.u.rows(); ++i)
    for (Eigen::Index j = 0; j < out.u.cols(); ++j)
      out.u(i, j) += sigma * rng.gaussian();
  return out;
}

// Denoising prefilter: zero every spatial Fourier mode above `keep` in each
// snapshot. Useful ahead of spectral differentiation when the signal band is
// known to be narrow; requires a periodic grid.
[[nodiscard]] inline Field1D lowpass_modes(const Field1D& field, Eigen::Index keep) {
  validate(field);
  if (!field.grid.periodic)
    throw std::invalid_argument("lowpass_modes: requires a periodic grid");
  const Eigen::Index n = field.grid.nx();
  if (keep < 1 || keep >= n / 2)
    throw std::invalid_argument("lowpass_modes: keep must be in [1, n/2)");
  Field1D out = field;
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n / 2 + 1));
  Eigen::VectorXd snapshot(n);
  for (Eigen::Index j = 0; j < field.grid.nt(); ++j) {
    snapshot = field.u.col(j);
    spectral::fft(snapshot.data(), coeffs.data(), n);
    for (Eigen::Index q = keep + 1; q <= n / 2; ++q)
      coeffs[static_cast<std::size_t>(q)] = 0.0;
    spectral::ifft(coeffs.data(), snapshot.data(), n);
    out.u.col(j) = snapshot;
  }
  return out;
}

// 2D variant. Each component (omega, u, v) is perturbed relative to its own
// RMS so components with different physical scales receive comparable
// relative corruption. Stream order: component, then snapshot, then row-major
// over each snapshot.
[[nodiscard]] inline Field2D add_noise(const Field2D& field, const NoiseSpec& spec) {
  if (spec.level < 0.0) throw std::invalid_argument("add_noise: level must be nonnegative");
  Field2D out = field;
  if (spec.level == 0.0) return out;
  RandomStream rng(spec.seed);
  auto perturb = [&](std::vector<Eigen::MatrixXd>& comp) {
    double sumsq = 0.0;
    std::size_t count = 0;
    for (const auto& snap : comp) {
      sumsq += snap.squaredNorm();
      count += static_cast<std::size_t>(snap.size());
    }
    const double sigma = spec.level * std::sqrt(sumsq / static_cast<double>(count));
    for (auto& snap : comp)
      for (Eigen::Index i = 0; i < snap.rows(); ++i)
        for (Eigen::Index j = 0; j < snap.cols(); ++j)
          snap(i, j) += sigma * rng.gaussian();
  };
  perturb(out.omega);
  perturb(out.u);
  perturb(out.v);
  return out;
}

}  // namespace parapde
