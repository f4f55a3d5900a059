#include "mirrorfreq/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <sstream>

#ifdef MIRRORFREQ_HAVE_OPENMP
#include <omp.h>
#endif

#include "mirrorfreq/phasor.hpp"

namespace mirrorfreq::sweep {

namespace {

constexpr double kCondLimit = 1e6;

struct Solve2 {
  Mat2c z;
  double cond;
};

// Z = [v1 v2] [i1 i2]^-1 with the two runs as columns; any phase reference
// common to one run's voltage and current cancels column-wise.
Solve2 solve_two_run(cplx v1a, cplx v1b, cplx v2a, cplx v2b, cplx i1a, cplx i1b,
                     cplx i2a, cplx i2b) {
  const Mat2c v{v1a, v2a, v1b, v2b};
  const Mat2c cur{i1a, i2a, i1b, i2b};
  return {v * cur.inverse(), cur.cond()};
}

RunPhasors extract_run(const simcore::SimRecord& rec, double f1, double f_dq,
                       double w0, double w1) {
  const double fs = rec.interface_v.fs;
  const double fp = f_dq + f1;
  const double fn = f_dq - f1;
  const phasor::ThetaRef ramp{phasor::ThetaRef::Kind::Ramp, kTwoPi * f1, 0.0};

  const auto dq_pair = [&](const phasor::ThreePhaseSeries& s, cplx& d, cplx& q) {
    const phasor::DqSeries dq = phasor::park_transform(s, ramp);
    d = phasor::extract_phasor(dq.d, dq.t0, fs, f_dq, w0, w1, phasor::Frame::dq).value;
    q = phasor::extract_phasor(dq.q, dq.t0, fs, f_dq, w0, w1, phasor::Frame::dq).value;
  };
  const auto seq_at = [&](const phasor::ThreePhaseSeries& s, double f, bool positive) {
    const auto pa = phasor::extract_phasor(s.a, s.t0, fs, f, w0, w1);
    const auto pb = phasor::extract_phasor(s.b, s.t0, fs, f, w0, w1);
    const auto pc = phasor::extract_phasor(s.c, s.t0, fs, f, w0, w1);
    const auto [p, n] = phasor::symmetric_components(pa, pb, pc);
    return positive ? p.value : n.value;
  };

  const phasor::ThreePhaseSeries v_load{rec.interface_v.t0, fs, rec.aux.at("v_l_a"),
                                        rec.aux.at("v_l_b"), rec.aux.at("v_l_c")};

  RunPhasors r;
  dq_pair(rec.interface_v, r.v_s_d, r.v_s_q);
  dq_pair(v_load, r.v_l_d, r.v_l_q);
  dq_pair(rec.source_i, r.i_s_d, r.i_s_q);
  dq_pair(rec.load_i, r.i_l_d, r.i_l_q);
  r.v_s_p = seq_at(rec.interface_v, fp, true);
  r.v_s_n = seq_at(rec.interface_v, fn, false);
  r.v_l_p = seq_at(v_load, fp, true);
  r.v_l_n = seq_at(v_load, fn, false);
  r.i_s_p = seq_at(rec.source_i, fp, true);
  r.i_s_n = seq_at(rec.source_i, fn, false);
  r.i_l_p = seq_at(rec.load_i, fp, true);
  r.i_l_n = seq_at(rec.load_i, fn, false);
  return r;
}

SweepPoint measure_point_at(const simcore::CaseConfig& cfg, InjectionKind kind,
                            double f_dq, const std::vector<double>& x_eq) {
  SweepPoint pt;
  pt.f_dq = f_dq;
  const double f1 = cfg.base.f1_hz;
  pt.mirror_folded = f_dq < f1;

  pt.message = exclusion_reason(f_dq, f1);
  if (!pt.message.empty()) {
    pt.status = PointStatus::excluded;
    return pt;
  }

  const double period = simcore::gate_period(f1, f_dq);
  const double w0 = cfg.sim.settle + 2.0 * period;
  const double w1 = w0 + cfg.sim.window;

  for (int run = 1; run <= 2; ++run) {
    simcore::InjectionRun inj;
    inj.kind = kind;
    inj.run = run;
    inj.f_dq = f_dq;
    inj.amplitude = cfg.sim.injection_amplitude;
    simcore::RunOptions opts;
    opts.x0 = &x_eq;
    opts.throw_on_divergence = false;
    const simcore::SimRecord rec = simcore::run_time_domain(cfg, inj, w1, opts);
    if (rec.diverged) {
      pt.status = PointStatus::diverged;
      std::ostringstream os;
      os << "run " << run << " diverged at t = " << rec.t_divergence << " s";
      pt.message = os.str();
      return pt;
    }
    const auto gate = simcore::steady_state_gate(rec, period, w0, cfg.sim.gate_tol);
    if (!gate.passed) {
      pt.status = PointStatus::gate_failed;
      std::ostringstream os;
      os << "run " << run << " not periodic: deviation " << gate.max_deviation
         << " pu on " << gate.channel;
      pt.message = os.str();
      return pt;
    }
    pt.runs[run - 1] = extract_run(rec, f1, f_dq, w0, w1);
  }

  const RunPhasors& a = pt.runs[0];
  const RunPhasors& b = pt.runs[1];
  try {
    const Solve2 sdq = solve_two_run(a.v_s_d, a.v_s_q, b.v_s_d, b.v_s_q,
                                     a.i_s_d, a.i_s_q, b.i_s_d, b.i_s_q);
    const Solve2 ldq = solve_two_run(a.v_l_d, a.v_l_q, b.v_l_d, b.v_l_q,
                                     a.i_l_d, a.i_l_q, b.i_l_d, b.i_l_q);
    const Solve2 spn = solve_two_run(a.v_s_p, a.v_s_n, b.v_s_p, b.v_s_n,
                                     a.i_s_p, a.i_s_n, b.i_s_p, b.i_s_n);
    const Solve2 lpn = solve_two_run(a.v_l_p, a.v_l_n, b.v_l_p, b.v_l_n,
                                     a.i_l_p, a.i_l_n, b.i_l_p, b.i_l_n);
    pt.z_src_dq = sdq.z;
    pt.cond_src_dq = sdq.cond;
    pt.z_load_dq = ldq.z;
    pt.cond_load_dq = ldq.cond;
    pt.z_src_pn = spn.z;
    pt.cond_src_pn = spn.cond;
    pt.z_load_pn = lpn.z;
    pt.cond_load_pn = lpn.cond;
  } catch (const SingularMatrixError& e) {
    pt.status = PointStatus::ill_conditioned;
    pt.message = e.what();
    return pt;
  }
  const double worst = std::max(std::max(pt.cond_src_dq, pt.cond_load_dq),
                                std::max(pt.cond_src_pn, pt.cond_load_pn));
  if (worst > kCondLimit) {
    pt.status = PointStatus::ill_conditioned;
    std::ostringstream os;
    os << "excitation condition number " << worst << " exceeds " << kCondLimit;
    pt.message = os.str();
  }
  return pt;
}

SweepResult run_sweep_impl(const SweepPlan& plan, int threads, bool parallel) {
  const simcore::CaseModel model(plan.cfg);  // validates the configuration
  const std::vector<double> x_eq = simcore::find_equilibrium(model);

  SweepResult res;
  res.cfg = plan.cfg;
  res.kind = plan.kind;
  res.points.resize(plan.f_dq.size());
  const auto n = static_cast<std::ptrdiff_t>(plan.f_dq.size());
#ifdef MIRRORFREQ_HAVE_OPENMP
  if (parallel) {
    if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      res.points[i] = measure_point_at(plan.cfg, plan.kind, plan.f_dq[i], x_eq);
    return res;
  }
#endif
  (void)threads;
  (void)parallel;
  for (std::ptrdiff_t i = 0; i < n; ++i)
    res.points[i] = measure_point_at(plan.cfg, plan.kind, plan.f_dq[i], x_eq);
  return res;
}

}  // namespace

const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::excluded: return "excluded";
    case PointStatus::diverged: return "diverged";
    case PointStatus::gate_failed: return "gate_failed";
    case PointStatus::ill_conditioned: return "ill_conditioned";
  }
  return "unknown";
}

std::size_t SweepResult::count(PointStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(),
                    [s](const SweepPoint& p) { return p.status == s; }));
}

bool SweepResult::all_ok() const { return count(PointStatus::ok) == points.size(); }

std::vector<double> make_log_grid(double fmin, double fmax, int n, double f1_hz) {
  if (!(fmin > 0.0) || !(fmax > fmin) || n < 2)
    throw std::invalid_argument("grid needs 0 < fmin < fmax and n >= 2");
  std::set<long long> vals;
  const double l0 = std::log(fmin);
  const double l1 = std::log(fmax);
  for (int k = 0; k < n; ++k) {
    const double f = std::exp(l0 + (l1 - l0) * static_cast<double>(k) /
                                       static_cast<double>(n - 1));
    const auto fi = static_cast<long long>(std::llround(f));
    if (fi >= 1) vals.insert(fi);
  }
  vals.erase(static_cast<long long>(std::llround(f1_hz)));
  vals.erase(static_cast<long long>(std::llround(2.0 * f1_hz)));
  std::vector<double> grid;
  grid.reserve(vals.size());
  for (long long v : vals) grid.push_back(static_cast<double>(v));
  return grid;
}

std::vector<double> make_default_grid() { return make_log_grid(2.0, 1000.0, 48, 50.0); }

std::string exclusion_reason(double f_dq, double f1_hz) {
  if (!(f_dq > 0.0)) return "frequency must be positive";
  if (std::abs(f_dq - std::round(f_dq)) > 1e-9)
    return "non-integer frequency breaks window commensurability";
  if (std::abs(f1_hz - std::round(f1_hz)) > 1e-9)
    return "fundamental frequency is not an integer number of Hz";
  const auto fi = static_cast<long long>(std::llround(f_dq));
  const auto f1 = static_cast<long long>(std::llround(f1_hz));
  if (fi == f1) return "second injection run would degenerate to DC";
  if (fi == 2 * f1) return "second injection run would collide with the fundamental";
  return {};
}

SweepPoint measure_point(const simcore::CaseConfig& cfg, InjectionKind kind, double f_dq) {
  const simcore::CaseModel model(cfg);
  return measure_point_at(cfg, kind, f_dq, simcore::find_equilibrium(model));
}

SweepResult run_sweep(const SweepPlan& plan, int threads) {
  return run_sweep_impl(plan, threads, true);
}

SweepResult run_sweep_serial(const SweepPlan& plan) {
  return run_sweep_impl(plan, 0, false);
}

std::vector<OriginalComparisonRow> compare_original(const SweepResult& res) {
  const double f1 = res.cfg.base.f1_hz;
  std::vector<OriginalComparisonRow> rows;
  rows.reserve(res.points.size());
  for (const SweepPoint& pt : res.points) {
    if (!pt.ok()) continue;
    const auto orig =
        impedance::original_from_modified(pt.z_src_pn, pt.z_load_pn, res.kind);
    OriginalComparisonRow row;
    row.f_dq = pt.f_dq;
    row.f_p = pt.f_dq + f1;
    row.f_n = pt.f_dq - f1;
    row.zp_src_formula = orig.zp_src;
    row.zn_src_formula = orig.zn_src;
    row.zp_load_formula = orig.zp_load;
    row.zn_load_formula = orig.zn_load;
    row.zp_src_direct = pt.runs[0].v_s_p / pt.runs[0].i_s_p;
    row.zn_src_direct = pt.runs[1].v_s_n / pt.runs[1].i_s_n;
    row.zp_load_direct = pt.runs[0].v_l_p / pt.runs[0].i_l_p;
    row.zn_load_direct = pt.runs[1].v_l_n / pt.runs[1].i_l_n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mirrorfreq::sweep
