#pragma once

#include <cmath>
#include <stdexcept>

namespace parapde {

enum class ProfileKind {
  constant,
  sinusoidal_t,
  sinusoidal_x,
  gaussian_bump_x,
  piecewise_constant_t,
};

// Scalar coefficient profile evaluated at one coordinate (time or space,
// depending on kind). Sinusoids: offset + amplitude*sin(frequency*s + phase).
// Gaussian bump: offset + amplitude*exp(-(s-center)^2/width). Piecewise
// constant: amplitude before switch_time, offset at and after it.
struct CoefficientProfile {
  ProfileKind kind = ProfileKind::constant;
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  double center = 0.0;
  double width = 1.0;
  double switch_time = 0.0;

  double operator()(double s) const {
    switch (kind) {
      case ProfileKind::constant:
        return offset;
      case ProfileKind::sinusoidal_t:
      case ProfileKind::sinusoidal_x:
        return offset + amplitude * std::sin(frequency * s + phase);
      case ProfileKind::gaussian_bump_x:
        return offset + amplitude * std::exp(-(s - center) * (s - center) / width);
      case ProfileKind::piecewise_constant_t:
        return s < switch_time ? amplitude : offset;
    }
    return offset;
  }

  // Upper bound on |value| over all coordinates, used for CFL estimates.
  double abs_bound() const {
    switch (kind) {
      case ProfileKind::constant:
        return std::abs(offset);
      case ProfileKind::sinusoidal_t:
      case ProfileKind::sinusoidal_x:
      case ProfileKind::gaussian_bump_x:
        return std::abs(offset) + std::abs(amplitude);
      case ProfileKind::piecewise_constant_t:
        return std::max(std::abs(amplitude), std::abs(offset));
    }
    return std::abs(offset);
  }
};

namespace profiles {

inline CoefficientProfile constant(double value) {
  CoefficientProfile p;
  p.kind = ProfileKind::constant;
  p.offset = value;
  return p;
}

inline CoefficientProfile sinusoidal_t(double offset, double amplitude, double frequency,
                                       double phase = 0.0) {
  CoefficientProfile p;
  p.kind = ProfileKind::sinusoidal_t;
  p.offset = offset;
  p.amplitude = amplitude;
  p.frequency = frequency;
  p.phase = phase;
  return p;
}

inline CoefficientProfile sinusoidal_x(double offset, double amplitude, double frequency,
                                       double phase = 0.0) {
  CoefficientProfile p;
  p.kind = ProfileKind::sinusoidal_x;
  p.offset = offset;
  p.amplitude = amplitude;
  p.frequency = frequency;
  p.phase = phase;
  return p;
}

inline CoefficientProfile gaussian_bump_x(double offset, double amplitude, double center,
                                          double width) {
  if (width <= 0.0) throw std::invalid_argument("gaussian_bump_x: width must be positive");
  CoefficientProfile p;
  p.kind = ProfileKind::gaussian_bump_x;
  p.offset = offset;
  p.amplitude = amplitude;
  p.center = center;
  p.width = width;
  return p;
}

inline CoefficientProfile piecewise_constant_t(double before, double after, double switch_time) {
  CoefficientProfile p;
  p.kind = ProfileKind::piecewise_constant_t;
  p.amplitude = before;
  p.offset = after;
  p.switch_time = switch_time;
  return p;
}

}  // namespace profiles

}  // namespace parapde
