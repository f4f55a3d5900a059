#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirrorfreq/impedance.hpp"
#include "mirrorfreq/phasor.hpp"
#include "mirrorfreq/types.hpp"

namespace mirrorfreq::simcore {

using impedance::InjectionKind;

// ============================================================================
// Case parameterization (all electrical quantities in per-unit)
// ============================================================================

struct BaseValues {
  double v_base = 690.0;       // line-to-line RMS [V]
  double s_base = 1e6;         // [VA]
  double v_dc_base = 1400.0;   // [V]
  double f1_hz = 50.0;         // fundamental [Hz]
};

/// Series branch: pu resistance and pu reactance at the fundamental.
struct RlBranch {
  double r = 0.0;
  double x = 0.0;
};

/// Parallel PI form u = kp * e + (kp/ti) * integral(e).
struct PiGains {
  double kp = 0.0;
  double ti = 1.0;
};

/// Measurement filters (identical per axis, hence incapable of
/// introducing mirror-frequency coupling).
struct MeasFilters {
  double tau_v = 2e-4;
  double tau_i = 2e-4;
};

enum class SourceMode { VoltagePi, FixedEmf };

/// Voltage-forming converter behind its series impedance, synchronized to the
/// fixed ramp theta = w1 t. The bus-voltage reference is the setpoint minus a
/// virtual-inductance drop computed from the converter's own output current
/// (flux convention: drop_d = -Xvq * i_q, drop_q = +Xvd * i_d).
struct SourceParams {
  SourceMode mode = SourceMode::VoltagePi;
  RlBranch z{0.007, 0.15};
  double l_vd = 0.0;  // virtual inductance, pu reactance at f1
  double l_vq = 0.0;
  PiGains pi_d{1.0, 0.1};
  PiGains pi_q{1.3, 0.2};
  double v_ref_d = 1.0;
  double v_ref_q = 0.0;
  MeasFilters meas{2e-4, 2e-4};
  double emf_d = 1.0;  // FixedEmf mode only
  double emf_q = 0.0;
};

enum class LoadMode { DcVoltageCtrl, CurrentCtrl, FixedEmf };
enum class SyncKind { FixedRamp, Pll };

struct PllParams {
  double kp = 177.7;    // ~20 Hz bandwidth at |v| = 1 pu
  double ki = 15791.0;
};

struct DcLinkParams {
  double c_farad = 11.5e-3;
  PiGains pi{8.33, 0.0036};
  double v_ref = 1.0;
  double i_dc = 1.1;  // DC-side current draw [pu]
};

/// Current-controlled converter behind its series impedance. Inner current
/// PI per axis with decoupling feed-forward (+-w1 L cross terms from the
/// filtered current) plus voltage feed-forward: the filtered measured voltage
/// when the converter carries a voltage sensor (PLL synchronization), the
/// constant nominal (1, 0) otherwise. The d-axis reference comes either from
/// the DC-link voltage PI or from a setpoint.
struct LoadParams {
  LoadMode mode = LoadMode::DcVoltageCtrl;
  RlBranch z{0.02, 0.25};
  PiGains pi_d{1.59, 0.047};
  PiGains pi_q{2.07, 0.033};
  SyncKind sync = SyncKind::Pll;
  PllParams pll{};
  DcLinkParams dc{};
  double i_ref_d = 1.1;  // CurrentCtrl mode
  double i_ref_q = 0.4;  // both control modes
  MeasFilters meas{2e-4, 6e-4};
  double emf_d = 0.95;  // FixedEmf mode only
  double emf_q = 0.0;
};

struct SimSettings {
  double dt = 2e-5;                  // fixed RK4 step [s]
  double settle = 0.6;               // post-switch-on settling [s]
  double window = 1.0;               // measurement window [s]
  // Per-phase peak [pu]. Near a low-margin resonance the interconnected
  // network amplifies the response by 1/|1 + lambda|, so the perturbation
  // must start small to stay in the small-signal regime.
  double injection_amplitude = 0.005;
  double divergence_limit = 1e3;     // |state| guard [pu]
  double gate_tol = 1e-5;            // steady-state gate [pu]
};

struct CaseConfig {
  std::string name = "custom";
  BaseValues base{};
  SourceParams source{};
  LoadParams load{};
  SimSettings sim{};
};

// Built-in presets.
CaseConfig case_a1();
CaseConfig case_a2();
CaseConfig case_b();
CaseConfig oracle_rl(double r_load = 0.02, double x_load = 0.25);
bool is_preset_name(const std::string& name);
CaseConfig preset_case(const std::string& name);  // A1 | A2 | B | oracle-rl

// Closed-form matrices of a passive RL branch (extraction oracle).
Mat2c rl_zdq(const RlBranch& z, double f_dq, double f1_hz);
Mat2c rl_zpn(const RlBranch& z, double f_dq, double f1_hz);

// ============================================================================
// Injection
// ============================================================================

struct InjectionRun {
  InjectionKind kind = InjectionKind::shunt;
  int run = 1;              // 1: positive sequence at f_dq + f1, 2: negative at f_dq - f1
  double f_dq = 0.0;        // [Hz]
  double amplitude = 0.02;  // per-phase peak [pu]
};

/// Balanced perturbation set, per phase:
///   run 1: A [sin(w t), sin(w t - 2pi/3), sin(w t + 2pi/3)], w = 2pi (f_dq + f1)
///   run 2: A [sin(w t), sin(w t + 2pi/3), sin(w t - 2pi/3)], w = 2pi (f_dq - f1)
/// Run 2's reversed phase order makes it a negative-sequence set; for
/// f_dq < f1 its frequency is negative and the formula is evaluated as is.
phasor::ThreePhaseSeries inject_signal(const InjectionRun& inj, double f1_hz,
                                       double t0, double fs, std::size_t n);

/// Rotating-frame image of inject_signal (both runs land at f_dq):
///   run 1: sqrt(3/2) A (sin(w t), -cos(w t)),  w = 2pi f_dq
///   run 2: sqrt(3/2) A (sin(w t), +cos(w t))
void injection_dq(const InjectionRun& inj, double t, double out[2]);
void injection_dq_derivative(const InjectionRun& inj, double t, double out[2]);

// ============================================================================
// Time-domain simulation
// ============================================================================

/// Sampled three-phase interface signals plus named auxiliary channels.
/// Currents are measured INTO each subsystem (the convention the sequence-
/// domain network equations use). interface_v is the source-side interface
/// voltage; with series injection the load-side voltage differs and is
/// recorded in aux (v_l_a/b/c and v_l_d/q).
struct SimRecord {
  double dt = 0.0;
  phasor::ThreePhaseSeries interface_v;
  phasor::ThreePhaseSeries source_i;
  phasor::ThreePhaseSeries load_i;
  std::map<std::string, std::vector<double>> aux;
  bool diverged = false;
  double t_divergence = 0.0;
};

struct IdcStep {
  double t = 0.0;
  double value = 0.0;
};
using IdcSchedule = std::vector<IdcStep>;

/// Offsets into the state vector; -1 marks states absent from the case.
struct StateLayout {
  int il = -1;     // 2: branch current into the load (global dq)
  int xs = -1;     // 2: source voltage PI integrators
  int vfs = -1;    // 2: source voltage measurement filter
  int ifs = -1;    // 2: source current measurement filter
  int ifl = -1;    // 2: load current measurement filter (controller frame)
  int vfl = -1;    // 2: load voltage measurement filter (controller frame)
  int xl = -1;     // 2: load current PI integrators
  int vdc = -1;    // 1: DC-link voltage
  int xdc = -1;    // 1: DC-voltage PI integrator
  int xpll = -1;   // 1: PLL integrator
  int delta = -1;  // 1: controller frame angle minus the global ramp
  int n = 0;
};

/// Averaged model of the two-converter interface system in the global
/// rotating frame. The two RL branches meet at the interface without an
/// artificial bus capacitance: the node is eliminated exactly, leaving the
/// branch current as the single electrical state.
class CaseModel {
 public:
  explicit CaseModel(const CaseConfig& cfg);

  const CaseConfig& config() const { return cfg_; }
  const StateLayout& layout() const { return lay_; }
  int state_size() const { return lay_.n; }

  struct RunInputs {
    std::optional<InjectionRun> inj{};
    const IdcSchedule* idc_schedule = nullptr;  // overrides the configured constant
    double idc_ramp = 0.0;                      // soft-start time for the DC draw [s]
  };

  struct Outputs {
    double v_s[2];        // source-side interface voltage (global dq)
    double v_l[2];        // load-side interface voltage
    double i_src_in[2];   // current into the source subsystem
    double i_load_in[2];  // current into the load subsystem
    double e_s[2], e_l[2];
    double i_inj[2], v_inj[2];
    double vdc, delta, idc;
  };

  void deriv(double t, const double* x, double* dx, const RunInputs& in,
             Outputs* out = nullptr) const;

  std::vector<double> initial_state() const;

 private:
  CaseConfig cfg_;
  StateLayout lay_;
  double w1_;          // 2 pi f1
  double lh_s_, lh_l_; // pu inductances x / w1 [pu s]
  double c_eff_;       // DC-link electrostatic time constant [s]
};

/// Periodic operating point of the unforced model (a fixed point in the
/// rotating frame): short un-recorded pre-simulation followed by a damped
/// Newton polish. Deterministic.
std::vector<double> find_equilibrium(const CaseModel& model);

struct RunOptions {
  const std::vector<double>* x0 = nullptr;   // start state (default: equilibrium)
  const IdcSchedule* idc_schedule = nullptr;
  bool throw_on_divergence = true;           // false: return the truncated record
};

SimRecord run_time_domain(const CaseConfig& cfg, std::optional<InjectionRun> inj,
                          double duration, const RunOptions& opts = {});

// ============================================================================
// Record analysis
// ============================================================================

struct GateReport {
  bool passed = false;
  double max_deviation = 0.0;
  std::string channel;
};

/// Periodic steady-state gate: over the two periods immediately before
/// window_start, every recorded channel must satisfy |x(t) - x(t + period)|
/// <= tol sample-wise.
GateReport steady_state_gate(const SimRecord& rec, double period,
                             double window_start, double tol);

/// Combined period of the fundamental and an integer-Hz injection set:
/// 1 / gcd(f1, |f_dq|) seconds (1/f1 when no injection is active).
double gate_period(double f1_hz, double f_dq_hz);

/// Per-bin maximum deviation from the bin mean of one aux channel; used to
/// judge oscillation decay or growth in step simulations.
std::vector<double> ripple_profile(const SimRecord& rec, const std::string& channel,
                                   double t_from, double t_to, double bin_seconds);

}  // namespace mirrorfreq::simcore
