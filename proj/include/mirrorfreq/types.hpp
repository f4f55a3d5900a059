#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace mirrorfreq {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ============================================================================
// Error types
// ============================================================================

/// A time-domain run exceeded the state-magnitude guard (numeric blow-up).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, double mag)
      : std::runtime_error("state diverged at t=" + std::to_string(t) +
                           " s (max |state| = " + std::to_string(mag) + " pu)"),
        time(t),
        magnitude(mag) {}
  double time;
  double magnitude;
};

/// A 2x2 solve hit a (numerically) singular matrix.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double cond_estimate)
      : std::runtime_error("singular 2x2 matrix (condition estimate " +
                           std::to_string(cond_estimate) + ")"),
        cond(cond_estimate) {}
  double cond;
};

/// Single-measurement symmetric-structure identification with a vanishing
/// denominator (circularly polarized excitation).
class DegenerateExcitationError : public std::runtime_error {
 public:
  explicit DegenerateExcitationError(double f_hz)
      : std::runtime_error("degenerate excitation at f = " + std::to_string(f_hz) +
                           " Hz: Id^2 + Iq^2 vanishes"),
        freq_hz(f_hz) {}
  double freq_hz;
};

/// A measurement run failed the periodic steady-state gate.
class SteadyStateError : public std::runtime_error {
 public:
  SteadyStateError(double deviation, const std::string& channel)
      : std::runtime_error("steady-state gate failed: max periodic deviation " +
                           std::to_string(deviation) + " pu on channel " + channel),
        max_deviation(deviation),
        channel_name(channel) {}
  double max_deviation;
  std::string channel_name;
};

// ============================================================================
// Small complex linear algebra (2-vectors and 2x2 matrices)
// ============================================================================

struct Vec2c {
  cplx x{};
  cplx y{};
};

/// Dense 2x2 complex matrix, row-major [[m00, m01], [m10, m11]].
struct Mat2c {
  cplx m00{}, m01{}, m10{}, m11{};

  static Mat2c identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2c diag(cplx d0, cplx d1) { return {d0, 0.0, 0.0, d1}; }

  Mat2c operator+(const Mat2c& o) const {
    return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
  }
  Mat2c operator-(const Mat2c& o) const {
    return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
  }
  Mat2c operator*(const Mat2c& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  Mat2c operator*(cplx s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
  Vec2c operator*(const Vec2c& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }

  cplx trace() const { return m00 + m11; }
  cplx det() const { return m00 * m11 - m01 * m10; }

  /// Conjugate transpose.
  Mat2c adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }
  Mat2c conj() const {
    return {std::conj(m00), std::conj(m01), std::conj(m10), std::conj(m11)};
  }

  double max_abs() const {
    return std::max(std::max(std::abs(m00), std::abs(m01)),
                    std::max(std::abs(m10), std::abs(m11)));
  }
  double frobenius() const {
    return std::sqrt(std::norm(m00) + std::norm(m01) + std::norm(m10) + std::norm(m11));
  }

  /// 2-norm condition number via the closed-form singular values.
  double cond() const {
    const double p = std::norm(m00) + std::norm(m10);
    const double r = std::norm(m01) + std::norm(m11);
    const cplx q = std::conj(m00) * m01 + std::conj(m10) * m11;
    const double mid = 0.5 * (p + r);
    const double rad = std::sqrt(0.25 * (p - r) * (p - r) + std::norm(q));
    const double smax2 = mid + rad;
    const double smin2 = mid - rad;
    if (!(smin2 > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(smax2 / smin2);
  }

  Mat2c inverse() const {
    const cplx d = det();
    if (!(std::abs(d) > 0.0) || !std::isfinite(std::abs(d))) {
      throw SingularMatrixError(cond());
    }
    const cplx s = 1.0 / d;
    return {m11 * s, -m01 * s, -m10 * s, m00 * s};
  }

  /// Closed-form eigenvalues (quadratic formula), canonical order:
  /// larger real part first, ties broken by larger imaginary part.
  std::array<cplx, 2> eigenvalues() const {
    const cplx tr = trace();
    const cplx disc = std::sqrt(tr * tr - 4.0 * det());
    cplx l1 = 0.5 * (tr + disc);
    cplx l2 = 0.5 * (tr - disc);
    if (l2.real() > l1.real() ||
        (l2.real() == l1.real() && l2.imag() > l1.imag())) {
      std::swap(l1, l2);
    }
    return {l1, l2};
  }
};

inline Mat2c operator*(cplx s, const Mat2c& m) { return m * s; }

}  // namespace mirrorfreq
