#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mirrorfreq/types.hpp"

namespace mirrorfreq::stability {

// ============================================================================
// Minor-loop gain
// ============================================================================

/// One frequency point of the source-impedance x load-admittance product
/// L = Z_src * Z_load^-1 together with its closed-form eigenvalue pair.
struct MinorLoopPoint {
  double f_dq = 0.0;
  Mat2c loop{};
  std::array<cplx, 2> eig{};
};

/// Build minor-loop points from aligned impedance samples. The eigenvalue
/// pair of the product is invariant under the unitary dq<->pn frame map, so
/// the same routine serves both domains.
std::vector<MinorLoopPoint> minor_loop_gain(std::span<const double> f_dq,
                                            std::span<const Mat2c> z_src,
                                            std::span<const Mat2c> z_load);

// ============================================================================
// Characteristic loci
// ============================================================================

/// Two frequency-continuous eigenvalue branches.
struct Loci {
  std::vector<double> f_dq;
  std::vector<cplx> l1, l2;
};

/// Pair eigenvalues across adjacent frequency points by minimum total
/// distance; ties keep the previous assignment. The first point uses the
/// canonical eigenvalue order.
Loci build_loci(const std::vector<MinorLoopPoint>& points);

/// Assemble loci directly from two scalar transfer samples (used for the
/// decoupled original-definition loop, which is diagonal by construction).
Loci build_loci_pair(std::span<const double> f_dq, std::span<const cplx> e1,
                     std::span<const cplx> e2);

// ============================================================================
// Generalized Nyquist assessment
// ============================================================================

struct GncSettings {
  /// The criterion presumes both stand-alone subsystems are stable; this is
  /// asserted by the caller, never verified here.
  bool open_loop_stable_assumed = true;
  double max_arg_step = kPi / 4.0;  // grid-adequacy sentinel
  double marginal_distance = 1e-9;  // loci passing this close to -1 => marginal
};

struct GncResult {
  bool stable = false;       // meaningful only under the open-loop assumption
  int encirclements = 0;     // net encirclements of (-1, 0)
  double winding_residual = 0.0;  // distance of the winding sum from an integer
  double margin = 0.0;       // min distance of any locus sample to (-1, 0)
  double critical_f = 0.0;   // frequency of the closest approach
  bool marginal = false;
  bool grid_insufficient = false;
  double max_arg_step_seen = 0.0;
  bool open_loop_stable_assumed = true;
};

/// Count net encirclements of (-1, 0) by both loci, closing each sampled
/// branch with its conjugate mirror (the negative-frequency half of the
/// Nyquist contour). Sets grid_insufficient when any single angular step
/// around -1 exceeds the sentinel or the winding sum is far from an integer.
GncResult assess(const Loci& loci, const GncSettings& settings = {});

/// Max over frequency of the distance between the eigenvalue sets of two
/// loci, normalized by the local eigenvalue scale (order-insensitive).
double loci_set_distance(const Loci& a, const Loci& b);

}  // namespace mirrorfreq::stability
