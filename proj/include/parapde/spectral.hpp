#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

namespace parapde::spectral {

namespace detail {

// Shared plan cache. Plans are created once per (kind, shape) with
// FFTW_ESTIMATE (deterministic, no measurement) and FFTW_UNALIGNED so the
// new-array execute functions accept arbitrary buffers. Plan creation is not
// thread-safe, hence the mutex; execution on distinct arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c_1d(Eigen::Index n) {
    return get({0, n, 1}, [&] {
      std::vector<double> in(static_cast<std::size_t>(n));
      std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
      return fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
  }

  fftw_plan c2r_1d(Eigen::Index n) {
    return get({1, n, 1}, [&] {
      std::vector<fftw_complex> in(static_cast<std::size_t>(n / 2 + 1));
      std::vector<double> out(static_cast<std::size_t>(n));
      return fftw_plan_dft_c2r_1d(static_cast<int>(n), in.data(), out.data(),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
  }

  // Shapes follow FFTW's row-major convention: n0 outer, n1 inner/contiguous.
  fftw_plan r2c_2d(Eigen::Index n0, Eigen::Index n1) {
    return get({2, n0, n1}, [&] {
      std::vector<double> in(static_cast<std::size_t>(n0 * n1));
      std::vector<fftw_complex> out(static_cast<std::size_t>(n0 * (n1 / 2 + 1)));
      return fftw_plan_dft_r2c_2d(static_cast<int>(n0), static_cast<int>(n1), in.data(),
                                  out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
  }

  fftw_plan c2r_2d(Eigen::Index n0, Eigen::Index n1) {
    return get({3, n0, n1}, [&] {
      std::vector<fftw_complex> in(static_cast<std::size_t>(n0 * (n1 / 2 + 1)));
      std::vector<double> out(static_cast<std::size_t>(n0 * n1));
      return fftw_plan_dft_c2r_2d(static_cast<int>(n0), static_cast<int>(n1), in.data(),
                                  out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) {
      (void)key;
      fftw_destroy_plan(plan);
    }
  }
  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  template <class Make>
  fftw_plan get(std::tuple<int, Eigen::Index, Eigen::Index> key, Make make) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_plan plan = make();
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, Eigen::Index, Eigen::Index>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

// Unnormalized forward r2c transform; out has n/2+1 coefficients.
inline void fft(const double* in, std::complex<double>* out, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("fft: need at least 2 samples");
  fftw_plan plan = detail::PlanCache::instance().r2c_1d(n);
  fftw_execute_dft_r2c(plan, const_cast<double*>(in), detail::as_fftw(out));
}

// Inverse of fft, including the 1/n normalization. Input is preserved.
inline void ifft(const std::complex<double>* in, double* out, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("ifft: need at least 2 samples");
  fftw_plan plan = detail::PlanCache::instance().c2r_1d(n);
  std::vector<std::complex<double>> scratch(in, in + (n / 2 + 1));
  fftw_execute_dft_c2r(plan, detail::as_fftw(scratch.data()), out);
  const double scale = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] *= scale;
}

// Integer frequency for half-spectrum index k of an n-point transform.
inline double half_freq(Eigen::Index k) { return static_cast<double>(k); }

// Integer frequency for full-spectrum index k (used along non-halved axes).
inline double full_freq(Eigen::Index k, Eigen::Index n) {
  return static_cast<double>(k <= n / 2 ? k : k - n);
}

// d^order/dx^order of a periodic series sampled at spacing h, one full period.
inline Eigen::VectorXd derivative_periodic(const Eigen::VectorXd& values, double h, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("derivative_periodic: order must be 1..4");
  if (h <= 0.0) throw std::invalid_argument("derivative_periodic: spacing must be positive");
  const Eigen::Index n = values.size();
  const double length = h * static_cast<double>(n);
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n / 2 + 1));
  fft(values.data(), coeffs.data(), n);
  const double two_pi = 2.0 * EIGEN_PI;
  for (Eigen::Index k = 0; k < n / 2 + 1; ++k) {
    const std::complex<double> ik(0.0, two_pi * half_freq(k) / length);
    std::complex<double> factor(1.0, 0.0);
    for (int p = 0; p < order; ++p) factor *= ik;
    coeffs[static_cast<std::size_t>(k)] *= factor;
  }
  if (n % 2 == 0 && order % 2 == 1) coeffs[static_cast<std::size_t>(n / 2)] = 0.0;
  Eigen::VectorXd out(n);
  ifft(coeffs.data(), out.data(), n);
  return out;
}

// 2D transforms for column-major nx×ny matrices. The contiguous Eigen axis is
// the first index, so FFTW sees the data as ny×nx row-major; the half-complex
// axis is therefore x. Forward output: (nx/2+1)×ny, entry (kx, iy-as-ky).
inline Eigen::MatrixXcd fft2(const Eigen::MatrixXd& real) {
  const Eigen::Index nx = real.rows(), ny = real.cols();
  if (nx < 2 || ny < 2) throw std::invalid_argument("fft2: need at least 2 samples per axis");
  Eigen::MatrixXcd out(nx / 2 + 1, ny);
  fftw_plan plan = detail::PlanCache::instance().r2c_2d(ny, nx);
  fftw_execute_dft_r2c(plan, const_cast<double*>(real.data()), detail::as_fftw(out.data()));
  return out;
}

// Inverse of fft2 with 1/(nx·ny) normalization. Input is preserved.
inline Eigen::MatrixXd ifft2(const Eigen::MatrixXcd& spec, Eigen::Index nx) {
  const Eigen::Index ny = spec.cols();
  if (spec.rows() != nx / 2 + 1) throw std::invalid_argument("ifft2: spectrum shape mismatch");
  Eigen::MatrixXcd scratch = spec;
  Eigen::MatrixXd out(nx, ny);
  fftw_plan plan = detail::PlanCache::instance().c2r_2d(ny, nx);
  fftw_execute_dft_c2r(plan, detail::as_fftw(scratch.data()), out.data());
  out /= static_cast<double>(nx * ny);
  return out;
}

}  // namespace parapde::spectral
