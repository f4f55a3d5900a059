#include "mirrorfreq/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>

namespace mirrorfreq::simcore {

namespace {

constexpr double kSq32 = 1.22474487139158905;  // sqrt(3/2)
constexpr double kSq23 = 0.81649658092772603;  // sqrt(2/3)
constexpr double kShift = kTwoPi / 3.0;

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

// Solves A d = b in place by Gaussian elimination with partial pivoting.
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300)
      throw SteadyStateError(0.0, "equilibrium jacobian is singular");
    if (piv != col) {
      for (int c = col; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
}

double scheduled_idc(const CaseModel::RunInputs& in, const DcLinkParams& dc, double t) {
  double v = dc.i_dc;
  if (in.idc_schedule && !in.idc_schedule->empty()) {
    v = in.idc_schedule->front().value;
    for (const auto& s : *in.idc_schedule) {
      if (s.t <= t)
        v = s.value;
      else
        break;
    }
  }
  if (in.idc_ramp > 0.0 && t < in.idc_ramp) v *= std::max(0.0, t) / in.idc_ramp;
  return v;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// ============================================================================
// Presets
// ============================================================================

CaseConfig case_a1() {
  CaseConfig c;
  c.name = "A1";
  c.source.mode = SourceMode::VoltagePi;
  c.source.z = {0.007, 0.15};
  c.source.l_vd = 0.0;
  c.source.l_vq = 0.2;
  c.source.pi_d = {1.0, 0.1};
  c.source.pi_q = {1.3, 0.2};
  c.source.v_ref_d = 1.0;
  c.source.v_ref_q = 0.0;
  c.load.mode = LoadMode::DcVoltageCtrl;
  c.load.z = {0.02, 0.25};
  c.load.pi_d = {1.59, 0.047};
  c.load.pi_q = {2.07, 0.033};
  c.load.sync = SyncKind::Pll;
  c.load.dc.c_farad = 11.5e-3;
  c.load.dc.pi = {8.33, 0.0036};
  c.load.dc.v_ref = 1.0;
  c.load.dc.i_dc = 1.1;
  c.load.i_ref_q = 0.4;
  c.source.meas = {1e-3, 2e-4};
  c.load.meas = {2e-3, 6e-4};
  c.sim.settle = 1.2;
  return c;
}

CaseConfig case_a2() {
  CaseConfig c = case_a1();
  c.name = "A2";
  c.source.l_vd = 0.1;
  c.source.l_vq = 0.1;
  c.source.pi_q = {1.0, 0.1};
  return c;
}

CaseConfig case_b() {
  CaseConfig c = case_a2();
  c.name = "B";
  c.load.mode = LoadMode::CurrentCtrl;
  c.load.sync = SyncKind::FixedRamp;
  c.load.pi_q = {1.59, 0.047};
  c.load.i_ref_d = 1.1;
  return c;
}

CaseConfig oracle_rl(double r_load, double x_load) {
  CaseConfig c;
  c.name = "oracle-rl";
  c.source.mode = SourceMode::FixedEmf;
  c.source.z = {0.007, 0.15};
  c.source.emf_d = 1.0;
  c.source.emf_q = 0.0;
  c.load.mode = LoadMode::FixedEmf;
  c.load.z = {r_load, x_load};
  c.load.emf_d = 0.95;
  c.load.emf_q = 0.0;
  return c;
}

bool is_preset_name(const std::string& name) {
  return name == "A1" || name == "A2" || name == "B" || name == "oracle-rl";
}

CaseConfig preset_case(const std::string& name) {
  if (name == "A1") return case_a1();
  if (name == "A2") return case_a2();
  if (name == "B") return case_b();
  if (name == "oracle-rl") return oracle_rl();
  throw std::invalid_argument("unknown case preset: " + name);
}

Mat2c rl_zdq(const RlBranch& z, double f_dq, double f1_hz) {
  const double lh = z.x / (kTwoPi * f1_hz);
  const cplx diag(z.r, kTwoPi * f_dq * lh);
  return Mat2c{diag, cplx(-z.x, 0.0), cplx(z.x, 0.0), diag};
}

Mat2c rl_zpn(const RlBranch& z, double f_dq, double f1_hz) {
  const double lh = z.x / (kTwoPi * f1_hz);
  return Mat2c::diag(cplx(z.r, kTwoPi * (f_dq + f1_hz) * lh),
                     cplx(z.r, kTwoPi * (f_dq - f1_hz) * lh));
}

// ============================================================================
// Injection
// ============================================================================

phasor::ThreePhaseSeries inject_signal(const InjectionRun& inj, double f1_hz,
                                       double t0, double fs, std::size_t n) {
  require(inj.run == 1 || inj.run == 2, "injection run must be 1 or 2");
  const double f_abc = inj.run == 1 ? inj.f_dq + f1_hz : inj.f_dq - f1_hz;
  const double w = kTwoPi * f_abc;
  const double shift = inj.run == 1 ? kShift : -kShift;
  phasor::ThreePhaseSeries s;
  s.t0 = t0;
  s.fs = fs;
  s.a.resize(n);
  s.b.resize(n);
  s.c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / fs;
    s.a[k] = inj.amplitude * std::sin(w * t);
    s.b[k] = inj.amplitude * std::sin(w * t - shift);
    s.c[k] = inj.amplitude * std::sin(w * t + shift);
  }
  return s;
}

void injection_dq(const InjectionRun& inj, double t, double out[2]) {
  const double w = kTwoPi * inj.f_dq;
  const double s = kSq32 * inj.amplitude;
  out[0] = s * std::sin(w * t);
  out[1] = (inj.run == 1 ? -s : s) * std::cos(w * t);
}

void injection_dq_derivative(const InjectionRun& inj, double t, double out[2]) {
  const double w = kTwoPi * inj.f_dq;
  const double s = kSq32 * inj.amplitude;
  out[0] = s * w * std::cos(w * t);
  out[1] = (inj.run == 1 ? s : -s) * w * std::sin(w * t);
}

// ============================================================================
// CaseModel
// ============================================================================

CaseModel::CaseModel(const CaseConfig& cfg) : cfg_(cfg) {
  require(cfg_.base.f1_hz > 0.0, "fundamental frequency must be positive");
  require(cfg_.sim.dt > 0.0, "time step must be positive");
  require(cfg_.sim.divergence_limit > 0.0, "divergence limit must be positive");
  require(cfg_.source.z.x > 0.0 && cfg_.load.z.x > 0.0,
          "both interface branches need positive reactance");
  if (cfg_.source.mode == SourceMode::VoltagePi) {
    require(cfg_.source.meas.tau_v > 0.0 && cfg_.source.meas.tau_i > 0.0,
            "source measurement time constants must be positive");
    require(cfg_.source.pi_d.ti > 0.0 && cfg_.source.pi_q.ti > 0.0,
            "source PI integration times must be positive");
  }
  if (cfg_.load.mode != LoadMode::FixedEmf) {
    require(cfg_.load.meas.tau_i > 0.0, "load current filter time constant must be positive");
    require(cfg_.load.pi_d.ti > 0.0 && cfg_.load.pi_q.ti > 0.0,
            "load PI integration times must be positive");
    if (cfg_.load.sync == SyncKind::Pll)
      require(cfg_.load.meas.tau_v > 0.0, "load voltage filter time constant must be positive");
    if (cfg_.load.mode == LoadMode::DcVoltageCtrl) {
      require(cfg_.load.dc.c_farad > 0.0, "DC-link capacitance must be positive");
      require(cfg_.load.dc.pi.ti > 0.0, "DC-link PI integration time must be positive");
    }
  }

  w1_ = kTwoPi * cfg_.base.f1_hz;
  lh_s_ = cfg_.source.z.x / w1_;
  lh_l_ = cfg_.load.z.x / w1_;
  c_eff_ = cfg_.load.dc.c_farad * cfg_.base.v_dc_base * cfg_.base.v_dc_base / cfg_.base.s_base;

  int ofs = 0;
  auto take = [&ofs](int m) {
    const int at = ofs;
    ofs += m;
    return at;
  };
  lay_.il = take(2);
  if (cfg_.source.mode == SourceMode::VoltagePi) {
    lay_.xs = take(2);
    lay_.vfs = take(2);
    lay_.ifs = take(2);
  }
  if (cfg_.load.mode != LoadMode::FixedEmf) {
    lay_.ifl = take(2);
    lay_.xl = take(2);
    if (cfg_.load.mode == LoadMode::DcVoltageCtrl) {
      lay_.vdc = take(1);
      lay_.xdc = take(1);
    }
    if (cfg_.load.sync == SyncKind::Pll) {
      lay_.vfl = take(2);
      lay_.xpll = take(1);
      lay_.delta = take(1);
    }
  }
  lay_.n = ofs;
}

std::vector<double> CaseModel::initial_state() const {
  std::vector<double> x(static_cast<std::size_t>(lay_.n), 0.0);
  if (lay_.xs >= 0) {
    x[lay_.xs + 0] = cfg_.source.v_ref_d;
    x[lay_.xs + 1] = cfg_.source.v_ref_q;
  }
  if (lay_.vfs >= 0) {
    x[lay_.vfs + 0] = cfg_.source.v_ref_d;
    x[lay_.vfs + 1] = cfg_.source.v_ref_q;
  }
  if (lay_.vfl >= 0) x[lay_.vfl + 0] = 1.0;
  if (lay_.vdc >= 0) x[lay_.vdc] = cfg_.load.dc.v_ref;
  return x;
}

void CaseModel::deriv(double t, const double* x, double* dx, const RunInputs& in,
                      Outputs* out) const {
  const SourceParams& src = cfg_.source;
  const LoadParams& load = cfg_.load;

  double ii[2] = {0.0, 0.0};   // shunt current injection (global dq)
  double dii[2] = {0.0, 0.0};
  double vi[2] = {0.0, 0.0};   // series voltage injection
  if (in.inj) {
    if (in.inj->kind == InjectionKind::shunt) {
      injection_dq(*in.inj, t, ii);
      injection_dq_derivative(*in.inj, t, dii);
    } else {
      injection_dq(*in.inj, t, vi);
    }
  }

  const double il[2] = {x[lay_.il + 0], x[lay_.il + 1]};
  const double is_out[2] = {il[0] - ii[0], il[1] - ii[1]};  // out of the source

  // --- source EMF ------------------------------------------------------
  double es[2];
  if (src.mode == SourceMode::FixedEmf) {
    es[0] = src.emf_d;
    es[1] = src.emf_q;
  } else {
    const double* vfs = x + lay_.vfs;
    const double* ifs = x + lay_.ifs;
    const double* xs = x + lay_.xs;
    const double vref[2] = {src.v_ref_d - src.l_vq * ifs[1],
                            src.v_ref_q + src.l_vd * ifs[0]};
    const double err[2] = {vref[0] - vfs[0], vref[1] - vfs[1]};
    es[0] = src.pi_d.kp * err[0] + xs[0];
    es[1] = src.pi_q.kp * err[1] + xs[1];
    dx[lay_.xs + 0] = src.pi_d.kp / src.pi_d.ti * err[0];
    dx[lay_.xs + 1] = src.pi_q.kp / src.pi_q.ti * err[1];
  }

  // --- load EMF ----------------------------------------------------------
  double el[2];
  const double delta = lay_.delta >= 0 ? x[lay_.delta] : 0.0;
  const double cd = std::cos(delta);
  const double sd = std::sin(delta);
  double idc_now = 0.0;
  if (load.mode == LoadMode::FixedEmf) {
    el[0] = load.emf_d;
    el[1] = load.emf_q;
  } else {
    const double* ifl = x + lay_.ifl;
    const double* xl = x + lay_.xl;
    double iref_d;
    if (load.mode == LoadMode::DcVoltageCtrl) {
      const double edc = load.dc.v_ref - x[lay_.vdc];
      iref_d = load.dc.pi.kp * edc + x[lay_.xdc];
      dx[lay_.xdc] = load.dc.pi.kp / load.dc.pi.ti * edc;
      idc_now = scheduled_idc(in, load.dc, t);
    } else {
      iref_d = load.i_ref_d;
    }
    const double err[2] = {iref_d - ifl[0], load.i_ref_q - ifl[1]};
    const double u[2] = {load.pi_d.kp * err[0] + xl[0],
                         load.pi_q.kp * err[1] + xl[1]};
    dx[lay_.xl + 0] = load.pi_d.kp / load.pi_d.ti * err[0];
    dx[lay_.xl + 1] = load.pi_q.kp / load.pi_q.ti * err[1];
    // voltage feed-forward: the filtered controller-frame measurement when a
    // voltage sensor is present (PLL-synchronized converters), else the
    // nominal (1, 0)
    const bool ffm = lay_.vfl >= 0;
    const double vff_d = ffm ? x[lay_.vfl + 0] : 1.0;
    const double vff_q = ffm ? x[lay_.vfl + 1] : 0.0;
    const double ectl[2] = {vff_d + load.z.x * ifl[1] - u[0],
                            vff_q - load.z.x * ifl[0] - u[1]};
    el[0] = cd * ectl[0] - sd * ectl[1];
    el[1] = sd * ectl[0] + cd * ectl[1];
    // current measurement in the controller frame
    const double il_ctl[2] = {cd * il[0] + sd * il[1], -sd * il[0] + cd * il[1]};
    dx[lay_.ifl + 0] = (il_ctl[0] - x[lay_.ifl + 0]) / load.meas.tau_i;
    dx[lay_.ifl + 1] = (il_ctl[1] - x[lay_.ifl + 1]) / load.meas.tau_i;
  }

  // --- network: the interface node is eliminated exactly, the branch
  // current into the load is the only electrical state ----------------------
  const double denom = lh_s_ + lh_l_;
  const double rhs[2] = {
      es[0] - el[0] - src.z.r * is_out[0] - load.z.r * il[0] + src.z.x * is_out[1] +
          load.z.x * il[1] + lh_s_ * dii[0] - vi[0],
      es[1] - el[1] - src.z.r * is_out[1] - load.z.r * il[1] - src.z.x * is_out[0] -
          load.z.x * il[0] + lh_s_ * dii[1] - vi[1],
  };
  const double dil[2] = {rhs[0] / denom, rhs[1] / denom};
  dx[lay_.il + 0] = dil[0];
  dx[lay_.il + 1] = dil[1];

  // interface voltages (source side; series injection sits between the sides)
  const double dis[2] = {dil[0] - dii[0], dil[1] - dii[1]};
  const double vs[2] = {
      es[0] - src.z.r * is_out[0] - lh_s_ * dis[0] + src.z.x * is_out[1],
      es[1] - src.z.r * is_out[1] - lh_s_ * dis[1] - src.z.x * is_out[0],
  };
  const double vl[2] = {vs[0] - vi[0], vs[1] - vi[1]};

  // --- measurement filters, PLL, DC link ---------------------------------
  if (lay_.vfs >= 0) {
    dx[lay_.vfs + 0] = (vs[0] - x[lay_.vfs + 0]) / src.meas.tau_v;
    dx[lay_.vfs + 1] = (vs[1] - x[lay_.vfs + 1]) / src.meas.tau_v;
    dx[lay_.ifs + 0] = (is_out[0] - x[lay_.ifs + 0]) / src.meas.tau_i;
    dx[lay_.ifs + 1] = (is_out[1] - x[lay_.ifs + 1]) / src.meas.tau_i;
  }
  if (lay_.vfl >= 0) {
    const double vl_ctl[2] = {cd * vl[0] + sd * vl[1], -sd * vl[0] + cd * vl[1]};
    dx[lay_.vfl + 0] = (vl_ctl[0] - x[lay_.vfl + 0]) / load.meas.tau_v;
    dx[lay_.vfl + 1] = (vl_ctl[1] - x[lay_.vfl + 1]) / load.meas.tau_v;
    dx[lay_.xpll] = load.pll.ki * x[lay_.vfl + 1];
    dx[lay_.delta] = load.pll.kp * x[lay_.vfl + 1] + x[lay_.xpll];
  }
  if (lay_.vdc >= 0) {
    const double p_ac = el[0] * il[0] + el[1] * il[1];
    dx[lay_.vdc] = (p_ac / x[lay_.vdc] - idc_now) / c_eff_;
  }

  if (out) {
    out->v_s[0] = vs[0];
    out->v_s[1] = vs[1];
    out->v_l[0] = vl[0];
    out->v_l[1] = vl[1];
    out->i_src_in[0] = -is_out[0];
    out->i_src_in[1] = -is_out[1];
    out->i_load_in[0] = il[0];
    out->i_load_in[1] = il[1];
    out->e_s[0] = es[0];
    out->e_s[1] = es[1];
    out->e_l[0] = el[0];
    out->e_l[1] = el[1];
    out->i_inj[0] = ii[0];
    out->i_inj[1] = ii[1];
    out->v_inj[0] = vi[0];
    out->v_inj[1] = vi[1];
    out->vdc = lay_.vdc >= 0 ? x[lay_.vdc] : 1.0;
    out->delta = delta;
    out->idc = idc_now;
  }
}

// ============================================================================
// Equilibrium
// ============================================================================

namespace {

// In-place fixed-step RK4 from t0 over the given duration.
void integrate(const CaseModel& m, const CaseModel::RunInputs& in, std::vector<double>& x,
               double t0, double duration) {
  const double dt = m.config().sim.dt;
  const int n = m.state_size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), xt(n);
  const auto steps = static_cast<long long>(std::llround(duration / dt));
  for (long long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    m.deriv(t, x.data(), k1.data(), in);
    for (int i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k1[i];
    m.deriv(t + 0.5 * dt, xt.data(), k2.data(), in);
    for (int i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k2[i];
    m.deriv(t + 0.5 * dt, xt.data(), k3.data(), in);
    for (int i = 0; i < n; ++i) xt[i] = x[i] + dt * k3[i];
    m.deriv(t + dt, xt.data(), k4.data(), in);
    for (int i = 0; i < n; ++i)
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    double mag = 0.0;
    for (int i = 0; i < n; ++i) mag = std::max(mag, std::abs(x[i]));
    if (mag > m.config().sim.divergence_limit)
      throw DivergenceError(t + dt, mag);
  }
}

}  // namespace

std::vector<double> find_equilibrium(const CaseModel& model) {
  const int n = model.state_size();
  const double tol = 1e-11;

  CaseModel::RunInputs soft{};
  soft.idc_ramp = 0.3;
  CaseModel::RunInputs hold{};

  std::vector<double> x = model.initial_state();
  integrate(model, soft, x, 0.0, 1.0);

  std::vector<double> f(n), f_try(n), x_try(n), step(n), jac(n * n);
  const auto resid = [&](const std::vector<double>& s, std::vector<double>& out) {
    model.deriv(0.0, s.data(), out.data(), hold);
  };

  for (int round = 0; round < 3; ++round) {
    resid(x, f);
    double fn = inf_norm(f);
    bool stalled = false;
    for (int iter = 0; iter < 50 && fn > tol && !stalled; ++iter) {
      for (int j = 0; j < n; ++j) {
        const double h = 1e-7 * (1.0 + std::abs(x[j]));
        x_try = x;
        x_try[j] += h;
        resid(x_try, f_try);
        for (int i = 0; i < n; ++i) jac[i * n + j] = (f_try[i] - f[i]) / h;
      }
      step = f;
      for (double& e : step) e = -e;
      std::vector<double> jac_copy = jac;
      solve_dense(jac_copy, step, n);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha >= 1.0 / 1024.0) {
        for (int i = 0; i < n; ++i) x_try[i] = x[i] + alpha * step[i];
        resid(x_try, f_try);
        const double fn_try = inf_norm(f_try);
        if (fn_try < (1.0 - 0.25 * alpha) * fn || fn_try <= tol) {
          x = x_try;
          f = f_try;
          fn = fn_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) stalled = true;
    }
    if (fn <= tol) return x;
    // let the dynamics pull the iterate closer and try again
    integrate(model, hold, x, 1.0 + round, 1.0);
  }
  resid(x, f);
  throw SteadyStateError(inf_norm(f), "equilibrium solve did not converge");
}

// ============================================================================
// Time-domain run
// ============================================================================

SimRecord run_time_domain(const CaseConfig& cfg, std::optional<InjectionRun> inj,
                          double duration, const RunOptions& opts) {
  require(duration > 0.0, "run duration must be positive");
  CaseModel model(cfg);
  const int n = model.state_size();
  if (opts.idc_schedule) {
    const auto& sch = *opts.idc_schedule;
    for (std::size_t i = 1; i < sch.size(); ++i)
      require(sch[i].t > sch[i - 1].t, "schedule times must be strictly increasing");
    require(sch.empty() || sch.front().t <= 0.0, "schedule must define a value from t = 0");
  }

  std::vector<double> x;
  if (opts.x0) {
    require(static_cast<int>(opts.x0->size()) == n, "start state has wrong dimension");
    x = *opts.x0;
  } else {
    x = find_equilibrium(model);
  }

  const double dt = cfg.sim.dt;
  const double fs = 1.0 / dt;
  const double w1 = kTwoPi * cfg.base.f1_hz;
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));

  SimRecord rec;
  rec.dt = dt;
  for (phasor::ThreePhaseSeries* s : {&rec.interface_v, &rec.source_i, &rec.load_i}) {
    s->t0 = 0.0;
    s->fs = fs;
    s->a.reserve(steps + 1);
    s->b.reserve(steps + 1);
    s->c.reserve(steps + 1);
  }
  static const char* kAux[] = {"v_l_a", "v_l_b",  "v_l_c",     "v_s_d", "v_s_q",
                               "v_l_d", "v_l_q",  "i_s_d",     "i_s_q", "i_l_d",
                               "i_l_q", "v_dc",   "pll_delta", "i_dc"};
  for (const char* name : kAux) rec.aux[name].reserve(steps + 1);

  const auto push_abc = [](phasor::ThreePhaseSeries& s, double d, double q, double theta) {
    s.a.push_back(kSq23 * (std::cos(theta) * d - std::sin(theta) * q));
    s.b.push_back(kSq23 * (std::cos(theta - kShift) * d - std::sin(theta - kShift) * q));
    s.c.push_back(kSq23 * (std::cos(theta + kShift) * d - std::sin(theta + kShift) * q));
  };

  CaseModel::RunInputs in{};
  in.inj = inj;
  in.idc_schedule = opts.idc_schedule;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), xt(n);
  CaseModel::Outputs out{};
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    model.deriv(t, x.data(), k1.data(), in, &out);
    const double theta = w1 * t;
    push_abc(rec.interface_v, out.v_s[0], out.v_s[1], theta);
    push_abc(rec.source_i, out.i_src_in[0], out.i_src_in[1], theta);
    push_abc(rec.load_i, out.i_load_in[0], out.i_load_in[1], theta);
    {
      auto& vla = rec.aux["v_l_a"];
      auto& vlb = rec.aux["v_l_b"];
      auto& vlc = rec.aux["v_l_c"];
      const double d = out.v_l[0], q = out.v_l[1];
      vla.push_back(kSq23 * (std::cos(theta) * d - std::sin(theta) * q));
      vlb.push_back(kSq23 * (std::cos(theta - kShift) * d - std::sin(theta - kShift) * q));
      vlc.push_back(kSq23 * (std::cos(theta + kShift) * d - std::sin(theta + kShift) * q));
    }
    rec.aux["v_s_d"].push_back(out.v_s[0]);
    rec.aux["v_s_q"].push_back(out.v_s[1]);
    rec.aux["v_l_d"].push_back(out.v_l[0]);
    rec.aux["v_l_q"].push_back(out.v_l[1]);
    rec.aux["i_s_d"].push_back(out.i_src_in[0]);
    rec.aux["i_s_q"].push_back(out.i_src_in[1]);
    rec.aux["i_l_d"].push_back(out.i_load_in[0]);
    rec.aux["i_l_q"].push_back(out.i_load_in[1]);
    rec.aux["v_dc"].push_back(out.vdc);
    rec.aux["pll_delta"].push_back(out.delta);
    rec.aux["i_dc"].push_back(out.idc);

    if (k == steps) break;

    for (int i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k1[i];
    model.deriv(t + 0.5 * dt, xt.data(), k2.data(), in);
    for (int i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k2[i];
    model.deriv(t + 0.5 * dt, xt.data(), k3.data(), in);
    for (int i = 0; i < n; ++i) xt[i] = x[i] + dt * k3[i];
    model.deriv(t + dt, xt.data(), k4.data(), in);
    for (int i = 0; i < n; ++i)
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    double mag = 0.0;
    for (int i = 0; i < n; ++i) mag = std::max(mag, std::abs(x[i]));
    if (mag > cfg.sim.divergence_limit) {
      rec.diverged = true;
      rec.t_divergence = t + dt;
      if (opts.throw_on_divergence) throw DivergenceError(t + dt, mag);
      break;
    }
  }
  return rec;
}

// ============================================================================
// Record analysis
// ============================================================================

GateReport steady_state_gate(const SimRecord& rec, double period, double window_start,
                             double tol) {
  require(rec.dt > 0.0 && !rec.interface_v.a.empty(), "empty record");
  const double fs = 1.0 / rec.dt;
  const auto np = static_cast<std::ptrdiff_t>(std::llround(period * fs));
  require(np > 0 && std::abs(period * fs - static_cast<double>(np)) < 1e-6,
          "gate period must be a sample multiple");
  const auto i0 = static_cast<std::ptrdiff_t>(std::llround((window_start - 2.0 * period) * fs));
  const auto have = static_cast<std::ptrdiff_t>(rec.interface_v.a.size());
  require(i0 >= 0 && i0 + 2 * np <= have, "record too short for the gate window");

  GateReport rep;
  rep.passed = true;
  const auto probe = [&](const std::vector<double>& v, const std::string& name) {
    for (std::ptrdiff_t i = i0; i < i0 + np; ++i) {
      const double dev = std::abs(v[i + np] - v[i]);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.channel = name;
      }
    }
  };
  probe(rec.interface_v.a, "interface_v.a");
  probe(rec.interface_v.b, "interface_v.b");
  probe(rec.interface_v.c, "interface_v.c");
  probe(rec.source_i.a, "source_i.a");
  probe(rec.source_i.b, "source_i.b");
  probe(rec.source_i.c, "source_i.c");
  probe(rec.load_i.a, "load_i.a");
  probe(rec.load_i.b, "load_i.b");
  probe(rec.load_i.c, "load_i.c");
  for (const auto& [name, v] : rec.aux) probe(v, name);
  rep.passed = rep.max_deviation <= tol;
  return rep;
}

double gate_period(double f1_hz, double f_dq_hz) {
  const auto f1 = static_cast<long long>(std::llround(f1_hz));
  const auto fd = static_cast<long long>(std::llround(std::abs(f_dq_hz)));
  require(f1 > 0 && std::abs(f1_hz - static_cast<double>(f1)) < 1e-9,
          "fundamental frequency must be a positive integer in Hz");
  require(std::abs(std::abs(f_dq_hz) - static_cast<double>(fd)) < 1e-9,
          "gate period needs an integer frequency in Hz");
  return 1.0 / static_cast<double>(std::gcd(f1, fd));
}

std::vector<double> ripple_profile(const SimRecord& rec, const std::string& channel,
                                   double t_from, double t_to, double bin_seconds) {
  const auto it = rec.aux.find(channel);
  require(it != rec.aux.end(), "unknown aux channel");
  require(bin_seconds > 0.0 && t_to > t_from, "bad ripple window");
  const double fs = 1.0 / rec.dt;
  const auto nbin = static_cast<std::size_t>(std::llround(bin_seconds * fs));
  require(nbin > 0, "ripple bin too small");
  const auto& v = it->second;
  std::vector<double> profile;
  auto start = static_cast<std::size_t>(std::llround(t_from * fs));
  const auto stop = std::min(static_cast<std::size_t>(std::llround(t_to * fs)), v.size());
  while (start + nbin <= stop) {
    double mean = 0.0;
    for (std::size_t i = start; i < start + nbin; ++i) mean += v[i];
    mean /= static_cast<double>(nbin);
    double dev = 0.0;
    for (std::size_t i = start; i < start + nbin; ++i)
      dev = std::max(dev, std::abs(v[i] - mean));
    profile.push_back(dev);
    start += nbin;
  }
  return profile;
}

}  // namespace mirrorfreq::simcore
