#include "mirrorfreq/impedance.hpp"

#include <cmath>

namespace mirrorfreq::impedance {

namespace {
constexpr double kInvSq2 = 0.70710678118654752440;
const cplx kJ(0.0, 1.0);
}  // namespace

Mat2c az() { return Mat2c{kInvSq2, kInvSq2 * kJ, kInvSq2, -kInvSq2 * kJ}; }

Mat2c az_inverse() { return az().adjoint(); }

Mat2c dq_to_pn(const Mat2c& zdq) { return az() * zdq * az_inverse(); }

Mat2c pn_to_dq(const Mat2c& zpn) { return az_inverse() * zpn * az(); }

ImpedancePn zdq_to_zpn(const ImpedanceDq& zdq, double f1_hz) {
  return ImpedancePn{dq_to_pn(zdq.z), zdq.f_dq, f1_hz};
}

ImpedanceDq zpn_to_zdq(const ImpedancePn& zpn) {
  return ImpedanceDq{pn_to_dq(zpn.z), zpn.f_dq};
}

MfdCheck mfd_classify(const Mat2c& z, Domain domain, double rel_tol) {
  MfdCheck out;
  const double scale = z.max_abs();
  if (domain == Domain::dq) {
    out.zx = 0.5 * (z.m00 + z.m11);
    out.zy = 0.5 * (z.m01 - z.m10);
    const double asym = std::max(std::abs(z.m00 - z.m11), std::abs(z.m01 + z.m10));
    out.residual = (scale > 0.0) ? asym / scale : 0.0;
  } else {
    out.zx = 0.5 * (z.m00 + z.m11);
    out.zy = -0.5 * kJ * (z.m11 - z.m00);
    const double diag = std::max(std::abs(z.m00), std::abs(z.m11));
    const double off = std::max(std::abs(z.m01), std::abs(z.m10));
    out.residual = (diag > 0.0) ? off / diag : (off > 0.0 ? 1.0 : 0.0);
  }
  out.is_mfd = out.residual <= rel_tol;
  return out;
}

std::pair<cplx, cplx> mfd_single_measurement(cplx vd, cplx vq, cplx id, cplx iq,
                                             double f_hz) {
  // |id^2 + iq^2| / (|id|^2 + |iq|^2) measures how far the excitation is from
  // circular polarization (iq = -+ j id), which carries a single sequence and
  // cannot identify both parameters. Measured data is never exactly circular,
  // so the floor is a fraction, not an epsilon.
  const cplx den = id * id + iq * iq;
  const double mag_scale = std::norm(id) + std::norm(iq);
  if (std::abs(den) < 1e-3 * std::max(mag_scale, 1e-300)) {
    throw DegenerateExcitationError(f_hz);
  }
  const cplx zx = (vd * id + vq * iq) / den;
  const cplx zy = (vd * iq - vq * id) / den;
  return {zx, zy};
}

OriginalSequenceSet original_from_modified(const Mat2c& s, const Mat2c& l,
                                           InjectionKind kind) {
  // s, l: modified sequence matrices [[Zpp, Zpn],[Znp, Znn]] of the two
  // subsystems. D_S, D_L are their determinants.
  const cplx ds = s.det();
  const cplx dl = l.det();
  OriginalSequenceSet out;
  if (kind == InjectionKind::shunt) {
    out.zp_load = (l.m00 * ds + s.m00 * dl) / (ds + l.m11 * s.m00 - l.m01 * s.m10);
    out.zp_src = (s.m00 * dl + l.m00 * ds) / (dl + s.m11 * l.m00 - s.m01 * l.m10);
    out.zn_load = (l.m11 * ds + s.m11 * dl) / (ds + l.m00 * s.m11 - l.m10 * s.m01);
    out.zn_src = (s.m11 * dl + l.m11 * ds) / (dl + s.m00 * l.m11 - s.m10 * l.m01);
  } else {
    out.zp_load = (l.m00 * s.m11 - l.m01 * s.m10 + dl) / (s.m11 + l.m11);
    out.zp_src = (s.m00 * l.m11 - s.m01 * l.m10 + ds) / (l.m11 + s.m11);
    out.zn_load = (l.m11 * s.m00 - l.m10 * s.m01 + dl) / (s.m00 + l.m00);
    out.zn_src = (s.m11 * l.m00 - s.m10 * l.m01 + ds) / (l.m00 + s.m00);
  }
  return out;
}

FoldedScalar fold_negative_frequency(double f_hz, cplx z) {
  if (f_hz >= 0.0) return {f_hz, z, false};
  return {-f_hz, std::conj(z), true};
}

}  // namespace mirrorfreq::impedance
