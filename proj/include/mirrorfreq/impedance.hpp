#pragma once

#include <utility>

#include "mirrorfreq/types.hpp"

namespace mirrorfreq::impedance {

// ============================================================================
// Domains and tagged matrices
// ============================================================================

enum class Domain { dq, pn };
enum class InjectionKind { shunt, series };

/// Rotating-frame impedance matrix [[Zdd, Zdq],[Zqd, Zqq]], valid at one
/// rotating-frame frequency f_dq.
struct ImpedanceDq {
  Mat2c z{};
  double f_dq = 0.0;
};

/// Modified sequence-domain impedance matrix [[Zpp, Zpn],[Znp, Znn]].
/// Row/column frequencies: Zpp maps f_p -> f_p, Znn maps f_n -> f_n,
/// Zpn maps f_n -> f_p, Znp maps f_p -> f_n, with
///   f_p = f_dq + f1,  f_n = f_dq - f1 (signed).
struct ImpedancePn {
  Mat2c z{};
  double f_dq = 0.0;
  double f1 = 0.0;

  double f_p() const { return f_dq + f1; }
  double f_n() const { return f_dq - f1; }
  bool sub_fundamental() const { return f_n() < 0.0; }
};

// ============================================================================
// The unitary frame map
// ============================================================================

/// A = (1/sqrt(2)) [[1, j],[1, -j]]; A * A^H = I, det(A) = -j.
Mat2c az();
/// A^-1 = A^H = (1/sqrt(2)) [[1, 1],[-j, j]].
Mat2c az_inverse();

/// Similarity transforms Zpn = A Zdq A^-1 and back; same map for admittances.
Mat2c dq_to_pn(const Mat2c& zdq);
Mat2c pn_to_dq(const Mat2c& zpn);

ImpedancePn zdq_to_zpn(const ImpedanceDq& zdq, double f1_hz);
ImpedanceDq zpn_to_zdq(const ImpedancePn& zpn);

// ============================================================================
// Mirror-frequency decoupling (MFD) structure
// ============================================================================

/// In dq a mirror-frequency-decoupled matrix has the symmetric structure
/// [[Zx, Zy],[-Zy, Zx]]; in the modified sequence domain it is diagonal with
/// Zpp = Zx - j Zy and Znn = Zx + j Zy.
struct MfdCheck {
  bool is_mfd = false;
  double residual = 0.0;  // relative asymmetry/off-diagonal magnitude
  cplx zx{};
  cplx zy{};
};

/// Classify against the MFD structure with a relative tolerance (default 5%).
MfdCheck mfd_classify(const Mat2c& z, Domain domain, double rel_tol = 0.05);

/// Single-run identification of a symmetric (MFD) dq matrix from one
/// voltage/current phasor pair:
///   Zx = (Vd Id + Vq Iq) / (Id^2 + Iq^2)
///   Zy = (Vd Iq - Vq Id) / (Id^2 + Iq^2)
/// The denominator uses complex squares and vanishes for circularly polarized
/// excitation; that raises DegenerateExcitationError (f_hz is used only to
/// label the error).
std::pair<cplx, cplx> mfd_single_measurement(cplx vd, cplx vq, cplx id, cplx iq,
                                             double f_hz = 0.0);

// ============================================================================
// Original (single-frequency) sequence impedances from the modified matrices
// ============================================================================

/// The classical single-frequency definitions Zp = Vp/Ip, Zn = Vn/In depend
/// on how the perturbation is injected. Given both subsystem matrices these
/// closed forms recover the original impedances for shunt-current and
/// series-voltage injection. D_S, D_L are the matrix determinants (equal in
/// both domains).
struct OriginalSequenceSet {
  cplx zp_src{}, zp_load{}, zn_src{}, zn_load{};
};

OriginalSequenceSet original_from_modified(const Mat2c& zpn_src, const Mat2c& zpn_load,
                                           InjectionKind kind);

/// Reporting helper for sub-fundamental points: a negative-frequency
/// negative-sequence impedance is physically a positive-sequence impedance at
/// |f| with conjugated value. Non-negative frequencies pass through.
struct FoldedScalar {
  double f_hz = 0.0;
  cplx z{};
  bool folded = false;
};
FoldedScalar fold_negative_frequency(double f_hz, cplx z);

}  // namespace mirrorfreq::impedance
