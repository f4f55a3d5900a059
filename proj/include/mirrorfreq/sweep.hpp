#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mirrorfreq/impedance.hpp"
#include "mirrorfreq/simcore.hpp"
#include "mirrorfreq/types.hpp"

namespace mirrorfreq::sweep {

using impedance::InjectionKind;

enum class PointStatus { ok, excluded, diverged, gate_failed, ill_conditioned };
const char* to_string(PointStatus s);

/// Interface phasors of one injection run. dq entries are rotating-frame
/// values at f_dq; p entries sit at f_dq + f1, n entries at the signed
/// mirror frequency f_dq - f1.
struct RunPhasors {
  cplx v_s_d{}, v_s_q{}, v_s_p{}, v_s_n{};
  cplx v_l_d{}, v_l_q{}, v_l_p{}, v_l_n{};
  cplx i_s_d{}, i_s_q{}, i_s_p{}, i_s_n{};
  cplx i_l_d{}, i_l_q{}, i_l_p{}, i_l_n{};
};

struct SweepPoint {
  double f_dq = 0.0;
  PointStatus status = PointStatus::ok;
  std::string message;

  Mat2c z_src_dq{}, z_load_dq{};  // rotating-frame matrices at f_dq
  Mat2c z_src_pn{}, z_load_pn{};  // sequence matrices on (f_p, f_n)
  double cond_src_dq = 0.0, cond_load_dq = 0.0;
  double cond_src_pn = 0.0, cond_load_pn = 0.0;
  bool mirror_folded = false;  // f_dq < f1: the mirror frequency is negative
  RunPhasors runs[2];

  bool ok() const { return status == PointStatus::ok; }
};

struct SweepPlan {
  simcore::CaseConfig cfg;
  InjectionKind kind = InjectionKind::shunt;
  std::vector<double> f_dq;
};

struct SweepResult {
  simcore::CaseConfig cfg;
  InjectionKind kind = InjectionKind::shunt;
  std::vector<SweepPoint> points;

  std::size_t count(PointStatus s) const;
  bool all_ok() const;
};

/// Integer log-spaced frequencies in [fmin, fmax] Hz, deduplicated, with the
/// fundamental and its double removed (their second injection runs
/// degenerate to DC / to the fundamental itself).
std::vector<double> make_log_grid(double fmin, double fmax, int n, double f1_hz = 50.0);
std::vector<double> make_default_grid();  // 2..1000 Hz, ~40 points

/// Why f_dq cannot be measured, or an empty string if it can.
std::string exclusion_reason(double f_dq, double f1_hz);

/// Two-run measurement of a single frequency point. Solves its own operating
/// point first; run_sweep shares one equilibrium across all points instead.
SweepPoint measure_point(const simcore::CaseConfig& cfg, InjectionKind kind, double f_dq);

/// Frequency sweep; points are independent, so the parallel and serial
/// drivers produce bit-identical results. threads = 0 keeps the runtime
/// default thread count.
SweepResult run_sweep(const SweepPlan& plan, int threads = 0);
SweepResult run_sweep_serial(const SweepPlan& plan);

/// Original (single-definition) sequence impedances obtained two ways from
/// the same sweep: through the closed-form conversion of the measured 2x2
/// matrices, and directly as the per-run phasor ratios V_p/I_p (run 1) and
/// V_n/I_n (run 2). For mirror-frequency-coupled subsystems the two original
/// definitions depend on the injection kind; the direct ratios reflect that
/// automatically.
struct OriginalComparisonRow {
  double f_dq = 0.0, f_p = 0.0, f_n = 0.0;
  cplx zp_src_formula{}, zp_src_direct{};
  cplx zn_src_formula{}, zn_src_direct{};
  cplx zp_load_formula{}, zp_load_direct{};
  cplx zn_load_formula{}, zn_load_direct{};
};
std::vector<OriginalComparisonRow> compare_original(const SweepResult& res);

}  // namespace mirrorfreq::sweep
