#include "mirrorfreq/phasor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mirrorfreq::phasor {

namespace {

constexpr double kSq23 = 0.81649658092772603273;  // sqrt(2/3)
constexpr double kInvSq6 = 0.40824829046386301637;  // 1/sqrt(6)
constexpr double kSq32 = 1.22474487139158904909;  // sqrt(3/2)
constexpr double kShift = 2.0 * kPi / 3.0;

void check_series(const ThreePhaseSeries& s) {
  if (s.fs <= 0.0) throw std::invalid_argument("three-phase series: sample rate must be positive");
  if (s.b.size() != s.a.size() || s.c.size() != s.a.size()) {
    throw std::invalid_argument("three-phase series: phase arrays differ in length");
  }
}

}  // namespace

HarmonicPhasor fold_negative_frequency(const HarmonicPhasor& ph) {
  if (ph.freq_hz >= 0.0) return ph;
  return {std::conj(ph.value), -ph.freq_hz, ph.frame};
}

DqSeries park_transform(const ThreePhaseSeries& abc, const ThetaRef& theta) {
  check_series(abc);
  if (theta.kind != ThetaRef::Kind::Ramp) {
    throw std::invalid_argument("park_transform(ThetaRef): ramp reference expected; "
                                "pass samples for a recorded angle");
  }
  DqSeries out;
  out.t0 = abc.t0;
  out.fs = abc.fs;
  out.theta = theta;
  const std::size_t n = abc.size();
  out.d.resize(n);
  out.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = abc.t0 + static_cast<double>(i) / abc.fs;
    const double th = theta.theta0 + theta.omega * t;
    const double ca = std::cos(th), cb = std::cos(th - kShift), cc = std::cos(th + kShift);
    const double sa = std::sin(th), sb = std::sin(th - kShift), sc = std::sin(th + kShift);
    out.d[i] = kSq23 * (ca * abc.a[i] + cb * abc.b[i] + cc * abc.c[i]);
    out.q[i] = kSq23 * (-sa * abc.a[i] - sb * abc.b[i] - sc * abc.c[i]);
  }
  return out;
}

DqSeries park_transform(const ThreePhaseSeries& abc, std::span<const double> theta_samples) {
  check_series(abc);
  if (theta_samples.size() != abc.size()) {
    throw std::invalid_argument("park_transform: theta sample count must match the series");
  }
  DqSeries out;
  out.t0 = abc.t0;
  out.fs = abc.fs;
  out.theta.kind = ThetaRef::Kind::Recorded;
  const std::size_t n = abc.size();
  out.d.resize(n);
  out.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = theta_samples[i];
    const double ca = std::cos(th), cb = std::cos(th - kShift), cc = std::cos(th + kShift);
    const double sa = std::sin(th), sb = std::sin(th - kShift), sc = std::sin(th + kShift);
    out.d[i] = kSq23 * (ca * abc.a[i] + cb * abc.b[i] + cc * abc.c[i]);
    out.q[i] = kSq23 * (-sa * abc.a[i] - sb * abc.b[i] - sc * abc.c[i]);
  }
  return out;
}

namespace {

ThreePhaseSeries inverse_park_impl(const DqSeries& dq, const double* theta_samples) {
  if (dq.fs <= 0.0) throw std::invalid_argument("dq series: sample rate must be positive");
  if (dq.q.size() != dq.d.size()) throw std::invalid_argument("dq series: axis arrays differ in length");
  ThreePhaseSeries out;
  out.t0 = dq.t0;
  out.fs = dq.fs;
  const std::size_t n = dq.size();
  out.a.resize(n);
  out.b.resize(n);
  out.c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double th;
    if (theta_samples) {
      th = theta_samples[i];
    } else {
      const double t = dq.t0 + static_cast<double>(i) / dq.fs;
      th = dq.theta.theta0 + dq.theta.omega * t;
    }
    const double d = dq.d[i], q = dq.q[i];
    out.a[i] = kSq23 * (std::cos(th) * d - std::sin(th) * q);
    out.b[i] = kSq23 * (std::cos(th - kShift) * d - std::sin(th - kShift) * q);
    out.c[i] = kSq23 * (std::cos(th + kShift) * d - std::sin(th + kShift) * q);
  }
  return out;
}

}  // namespace

ThreePhaseSeries inverse_park(const DqSeries& dq) {
  if (dq.theta.kind != ThetaRef::Kind::Ramp) {
    throw std::invalid_argument("inverse_park: series carries a recorded angle; pass its samples");
  }
  return inverse_park_impl(dq, nullptr);
}

ThreePhaseSeries inverse_park(const DqSeries& dq, std::span<const double> theta_samples) {
  if (theta_samples.size() != dq.size()) {
    throw std::invalid_argument("inverse_park: theta sample count must match the series");
  }
  return inverse_park_impl(dq, theta_samples.data());
}

std::pair<HarmonicPhasor, HarmonicPhasor> symmetric_components(
    const HarmonicPhasor& va, const HarmonicPhasor& vb, const HarmonicPhasor& vc) {
  const double tol = 1e-9 * std::max(1.0, std::abs(va.freq_hz));
  if (std::abs(va.freq_hz - vb.freq_hz) > tol || std::abs(va.freq_hz - vc.freq_hz) > tol) {
    throw std::invalid_argument("symmetric_components: phase phasors must share one frequency");
  }
  const cplx a = std::polar(1.0, kShift);
  const cplx a2 = std::polar(1.0, -kShift);  // a^2 == conj(a)
  HarmonicPhasor p{va.value + a * vb.value + a2 * vc.value, va.freq_hz, Frame::pn};
  HarmonicPhasor n{va.value + a2 * vb.value + a * vc.value, va.freq_hz, Frame::pn};
  return {p, n};
}

std::pair<HarmonicPhasor, HarmonicPhasor> dq_to_sequence(
    const HarmonicPhasor& vd, const HarmonicPhasor& vq, double f1_hz) {
  const double tol = 1e-9 * std::max(1.0, std::abs(vd.freq_hz));
  if (std::abs(vd.freq_hz - vq.freq_hz) > tol) {
    throw std::invalid_argument("dq_to_sequence: d and q phasors must share one frequency");
  }
  const cplx j(0.0, 1.0);
  HarmonicPhasor p{(vd.value + j * vq.value) * kInvSq6, vd.freq_hz + f1_hz, Frame::pn};
  HarmonicPhasor n{(vd.value - j * vq.value) * kInvSq6, vd.freq_hz - f1_hz, Frame::pn};
  return {p, n};
}

std::pair<HarmonicPhasor, HarmonicPhasor> sequence_to_dq(
    const HarmonicPhasor& seq_phasor, bool is_positive_sequence, double f1_hz) {
  const cplx j(0.0, 1.0);
  const cplx base = kSq32 * seq_phasor.value;
  if (is_positive_sequence) {
    const double f_dq = seq_phasor.freq_hz - f1_hz;
    return {HarmonicPhasor{base, f_dq, Frame::dq},
            HarmonicPhasor{-j * base, f_dq, Frame::dq}};
  }
  const double f_dq = seq_phasor.freq_hz + f1_hz;
  return {HarmonicPhasor{base, f_dq, Frame::dq},
          HarmonicPhasor{j * base, f_dq, Frame::dq}};
}

HarmonicPhasor extract_phasor(std::span<const double> x, double t0, double fs,
                              double f, double w_start, double w_end, Frame frame) {
  if (fs <= 0.0) throw std::invalid_argument("extract_phasor: sample rate must be positive");
  if (!(w_end > w_start)) throw std::invalid_argument("extract_phasor: empty window");

  const double i0_real = (w_start - t0) * fs;
  const double i0_round = std::round(i0_real);
  if (std::abs(i0_real - i0_round) > 1e-6 || i0_round < 0.0) {
    throw std::invalid_argument("extract_phasor: window start is not sample-aligned");
  }
  const double n_real = (w_end - w_start) * fs;
  const double n_round = std::round(n_real);
  if (std::abs(n_real - n_round) > 1e-6 || n_round < 1.0) {
    throw std::invalid_argument("extract_phasor: window length is not sample-aligned");
  }
  const std::size_t i0 = static_cast<std::size_t>(i0_round);
  const std::size_t n = static_cast<std::size_t>(n_round);
  if (i0 + n > x.size()) throw std::invalid_argument("extract_phasor: window exceeds the series");

  const double cycles = std::abs(f) * (w_end - w_start);
  if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles)) {
    throw std::invalid_argument("extract_phasor: window is not commensurate with f = " +
                                std::to_string(f) + " Hz");
  }

  if (f == 0.0) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += x[i0 + k];
    return {cplx(acc / static_cast<double>(n), 0.0), 0.0, frame};
  }

  // Single-bin projection with a periodically re-seeded rotator: the
  // recurrence costs one complex multiply per sample and the exact re-seed
  // every 256 samples keeps the accumulated phase error near machine level.
  const double w = kTwoPi * f;  // rad/s
  cplx acc(0.0, 0.0);
  const cplx step = std::polar(1.0, -w / fs);
  cplx rot;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 256 == 0) {
      const double tk = w_start + static_cast<double>(k) / fs;
      rot = std::polar(1.0, -w * tk);
    }
    acc += x[i0 + k] * rot;
    rot *= step;
  }
  return {acc * (2.0 / static_cast<double>(n)), f, frame};
}

}  // namespace mirrorfreq::phasor
