#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mirrorfreq/types.hpp"

namespace mirrorfreq::phasor {

// ============================================================================
// Harmonic phasors
// ============================================================================

enum class Frame { abc, dq, pn };

/// Complex amplitude of one cosine-referenced tone:
///   x(t) = Re{ value * exp(j*2*pi*freq_hz*t) }
/// freq_hz is signed; negative frequencies are the conjugate images that
/// appear when sub-fundamental mirror components are tracked before folding.
struct HarmonicPhasor {
  cplx value{};
  double freq_hz{};
  Frame frame{Frame::abc};

  double amplitude() const { return std::abs(value); }

  /// Phase in radians, normalized to (-pi, pi].
  double phase_rad() const {
    double p = std::arg(value);
    if (p <= -kPi) p += kTwoPi;
    return p;
  }
  /// Phase in degrees, normalized to (-180, 180].
  double phase_deg() const { return phase_rad() * 180.0 / kPi; }
};

/// Relabel a negative-frequency phasor as its physical positive-frequency
/// image (conjugate value at |f|). Positive-frequency inputs pass through.
HarmonicPhasor fold_negative_frequency(const HarmonicPhasor& ph);

// ============================================================================
// Sample series
// ============================================================================

struct ThreePhaseSeries {
  double t0 = 0.0;  // absolute time of sample 0 [s]
  double fs = 0.0;  // sample rate [Hz]
  std::vector<double> a, b, c;

  std::size_t size() const { return a.size(); }
};

/// Rotating-frame angle reference: theta(t) = theta0 + omega * t (absolute t).
struct ThetaRef {
  enum class Kind { Ramp, Recorded };
  Kind kind = Kind::Ramp;
  double omega = 0.0;   // [rad/s]
  double theta0 = 0.0;  // [rad]
};

struct DqSeries {
  double t0 = 0.0;
  double fs = 0.0;
  std::vector<double> d, q;
  ThetaRef theta{};

  std::size_t size() const { return d.size(); }
};

// ============================================================================
// Transforms
// ============================================================================

/// Amplitude sqrt(2/3)-scaled rotating transform (orthonormal rows, zero
/// sequence discarded):
///   d = sqrt(2/3) [ cos(th) a + cos(th - 2pi/3) b + cos(th + 2pi/3) c ]
///   q = sqrt(2/3) [-sin(th) a - sin(th - 2pi/3) b - sin(th + 2pi/3) c ]
DqSeries park_transform(const ThreePhaseSeries& abc, const ThetaRef& theta);
DqSeries park_transform(const ThreePhaseSeries& abc, std::span<const double> theta_samples);

/// Inverse of park_transform for zero-sequence-free signals (transpose map).
ThreePhaseSeries inverse_park(const DqSeries& dq);
ThreePhaseSeries inverse_park(const DqSeries& dq, std::span<const double> theta_samples);

/// Sequence separation of three same-frequency phase phasors
/// (a = exp(j*2pi/3), no 1/3 prefactor):
///   Vp = Va + a Vb + a^2 Vc,   Vn = Va + a^2 Vb + a Vc
/// Returns {positive, negative}; any common normalization cancels in
/// impedance ratios.
std::pair<HarmonicPhasor, HarmonicPhasor> symmetric_components(
    const HarmonicPhasor& va, const HarmonicPhasor& vb, const HarmonicPhasor& vc);

/// Rotating-frame phasor pair at f_dq -> sequence phasors at the two mirror
/// frequencies:
///   Vp = (Vd + j Vq)/sqrt(6)  at f_dq + f1
///   Vn = (Vd - j Vq)/sqrt(6)  at f_dq - f1   (signed frequency)
std::pair<HarmonicPhasor, HarmonicPhasor> dq_to_sequence(
    const HarmonicPhasor& vd, const HarmonicPhasor& vq, double f1_hz);

/// Inverse maps. For a positive-sequence phasor at fp:
///   Vd = sqrt(3/2) Vp, Vq = -j sqrt(3/2) Vp   at f_dq = fp - f1
/// For a negative-sequence phasor at fn:
///   Vd = sqrt(3/2) Vn, Vq = +j sqrt(3/2) Vn   at f_dq = fn + f1
std::pair<HarmonicPhasor, HarmonicPhasor> sequence_to_dq(
    const HarmonicPhasor& seq_phasor, bool is_positive_sequence, double f1_hz);

// ============================================================================
// Single-bin projection
// ============================================================================

/// Extract the phasor of the tone at (signed) frequency f from a real sample
/// series over the window [w_start, w_end), both in absolute seconds.
///
/// Preconditions (throws std::invalid_argument):
///  - the window is sample-aligned and inside the series,
///  - |f| * (w_end - w_start) is an integer number of cycles
///    (commensurate rectangular window; single-bin projection is exact).
/// f = 0 returns the windowed mean. The phase reference is absolute t = 0.
HarmonicPhasor extract_phasor(std::span<const double> x, double t0, double fs,
                              double f, double w_start, double w_end,
                              Frame frame = Frame::abc);

}  // namespace mirrorfreq::phasor
