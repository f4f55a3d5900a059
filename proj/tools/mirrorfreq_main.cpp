// Command-line front end: impedance sweeps, domain transforms, Nyquist
// analysis, original-definition comparisons and step simulations, with
// reproducible JSON/CSV outputs plus a run manifest per output directory.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirrorfreq/io.hpp"
#include "mirrorfreq/stability.hpp"
#include "mirrorfreq/version.hpp"

using namespace mirrorfreq;

namespace {

struct CommonFlags {
  std::string case_name = "A1";
  std::string injection = "shunt";
  double fmin = 2.0;
  double fmax = 1000.0;
  int grid_n = 40;
  std::string out_dir = "out";
  int threads = 0;
};

void add_case_flags(CLI::App* cmd, CommonFlags& fl, bool with_grid = true) {
  cmd->add_option("--case", fl.case_name,
                  "Case preset (A1 | A2 | B | oracle-rl) or path of a JSON config");
  cmd->add_option("--injection", fl.injection, "Perturbation injection kind")
      ->check(CLI::IsMember({"shunt", "series"}));
  if (with_grid) {
    cmd->add_option("--fmin", fl.fmin, "Lowest rotating-frame frequency [Hz]");
    cmd->add_option("--fmax", fl.fmax, "Highest rotating-frame frequency [Hz]");
    cmd->add_option("--grid", fl.grid_n, "Number of log-grid points");
  }
  cmd->add_option("--out", fl.out_dir, "Output directory");
  cmd->add_option("--threads", fl.threads,
                  "Sweep worker threads (0 = runtime default); the "
                  "MIRRORFREQ_THREADS environment variable overrides this");
}

int resolve_threads(int flag_value) {
  const char* env = std::getenv("MIRRORFREQ_THREADS");
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
      throw std::invalid_argument("MIRRORFREQ_THREADS must be a non-negative integer");
    }
    return static_cast<int>(v);
  }
  return flag_value;
}

sweep::InjectionKind injection_kind(const std::string& s) {
  return s == "series" ? sweep::InjectionKind::series : sweep::InjectionKind::shunt;
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  return out.empty() ? std::string("case") : out;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

std::string out_path(const CommonFlags& fl, const std::string& file) {
  std::filesystem::create_directories(fl.out_dir);
  return (std::filesystem::path(fl.out_dir) / file).string();
}

void write_manifest(const CommonFlags& fl, const std::string& command,
                    const std::vector<std::string>& outputs) {
  io::write_text_file(out_path(fl, "manifest.json"), io::manifest_json(command, outputs));
}

int flagged_points(const sweep::SweepResult& res) {
  int n = 0;
  for (const auto& pt : res.points) {
    if (pt.status != sweep::PointStatus::ok && pt.status != sweep::PointStatus::excluded) ++n;
  }
  return n;
}

sweep::SweepResult run_case_sweep(const CommonFlags& fl, const simcore::CaseConfig& cfg) {
  sweep::SweepPlan plan;
  plan.cfg = cfg;
  plan.kind = injection_kind(fl.injection);
  plan.f_dq = sweep::make_log_grid(fl.fmin, fl.fmax, fl.grid_n, cfg.base.f1_hz);
  return sweep::run_sweep(plan, resolve_threads(fl.threads));
}

void print_sweep_summary(const sweep::SweepResult& res) {
  std::printf("points: %zu ok, %zu excluded, %zu gate-failed, %zu diverged, %zu ill-conditioned\n",
              res.count(sweep::PointStatus::ok), res.count(sweep::PointStatus::excluded),
              res.count(sweep::PointStatus::gate_failed),
              res.count(sweep::PointStatus::diverged),
              res.count(sweep::PointStatus::ill_conditioned));
  for (const auto& pt : res.points) {
    if (pt.status != sweep::PointStatus::ok && pt.status != sweep::PointStatus::excluded) {
      std::printf("  flagged f_dq=%g Hz: %s (%s)\n", pt.f_dq, sweep::to_string(pt.status),
                  pt.message.c_str());
    }
  }
}

// Max deviation of the measured matrices from the passive-branch closed form;
// only meaningful for the oracle-rl case.
void print_oracle_errors(const sweep::SweepResult& res) {
  double mag = 0.0, deg = 0.0;
  for (const auto& pt : res.points) {
    if (!pt.ok()) continue;
    const Mat2c refs[4] = {
        simcore::rl_zdq(res.cfg.source.z, pt.f_dq, res.cfg.base.f1_hz),
        simcore::rl_zdq(res.cfg.load.z, pt.f_dq, res.cfg.base.f1_hz),
        simcore::rl_zpn(res.cfg.source.z, pt.f_dq, res.cfg.base.f1_hz),
        simcore::rl_zpn(res.cfg.load.z, pt.f_dq, res.cfg.base.f1_hz)};
    const Mat2c* meas[4] = {&pt.z_src_dq, &pt.z_load_dq, &pt.z_src_pn, &pt.z_load_pn};
    for (int k = 0; k < 4; ++k) {
      const cplx ref[4] = {refs[k].m00, refs[k].m01, refs[k].m10, refs[k].m11};
      const cplx got[4] = {meas[k]->m00, meas[k]->m01, meas[k]->m10, meas[k]->m11};
      for (int e = 0; e < 4; ++e) {
        if (std::abs(ref[e]) < 1e-9) continue;
        mag = std::max(mag, std::abs(std::abs(got[e]) / std::abs(ref[e]) - 1.0));
        double dphi = std::arg(got[e] / ref[e]) * 180.0 / kPi;
        deg = std::max(deg, std::abs(dphi));
      }
    }
  }
  std::printf("closed-form deviation: max %.3g%% magnitude, max %.3g deg phase\n",
              100.0 * mag, deg);
}

stability::Loci loci_for_domain(const sweep::SweepResult& res, const std::string& domain) {
  std::vector<double> f;
  std::vector<Mat2c> zs, zl;
  std::vector<cplx> e1, e2;
  for (const auto& pt : res.points) {
    if (!pt.ok()) continue;
    f.push_back(pt.f_dq);
    if (domain == "dq") {
      zs.push_back(pt.z_src_dq);
      zl.push_back(pt.z_load_dq);
    } else if (domain == "pn") {
      zs.push_back(pt.z_src_pn);
      zl.push_back(pt.z_load_pn);
    } else {  // original: two decoupled scalar loops per sequence
      const auto o = impedance::original_from_modified(pt.z_src_pn, pt.z_load_pn, res.kind);
      e1.push_back(o.zp_src / o.zp_load);
      e2.push_back(o.zn_src / o.zn_load);
    }
  }
  if (domain == "original") return stability::build_loci_pair(f, e1, e2);
  return stability::build_loci(stability::minor_loop_gain(f, zs, zl));
}

int cmd_sweep(const CommonFlags& fl, const std::string& command) {
  const simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const sweep::SweepResult res = run_case_sweep(fl, cfg);
  const std::string stem = "sweep_" + safe_name(cfg.name) + "_" + fl.injection;
  const std::string json_path = out_path(fl, stem + ".json");
  const std::string csv_path = out_path(fl, stem + ".csv");
  io::write_text_file(json_path, io::sweep_to_json(res));
  io::write_text_file(csv_path, io::sweep_to_csv(res));
  write_manifest(fl, command, {json_path, csv_path});
  std::printf("case %s, %s injection, %zu frequencies -> %s\n", cfg.name.c_str(),
              fl.injection.c_str(), res.points.size(), json_path.c_str());
  print_sweep_summary(res);
  if (cfg.source.mode == simcore::SourceMode::FixedEmf &&
      cfg.load.mode == simcore::LoadMode::FixedEmf) {
    print_oracle_errors(res);
  }
  return flagged_points(res) == 0 ? 0 : 1;
}

int cmd_gnc(const CommonFlags& fl, const std::string& domain, const std::string& command) {
  const simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const sweep::SweepResult res = run_case_sweep(fl, cfg);
  const stability::Loci loci = loci_for_domain(res, domain);
  const auto verdict = stability::assess(loci);

  io::GncReport rep;
  rep.case_name = cfg.name;
  rep.domain = domain;
  rep.injection = fl.injection;
  rep.f_dq = loci.f_dq;
  rep.result = verdict;
  const std::string stem = safe_name(cfg.name) + "_" + domain + "_" + fl.injection;
  const std::string loci_path = out_path(fl, "loci_" + stem + ".csv");
  const std::string json_path = out_path(fl, "gnc_" + stem + ".json");
  io::write_text_file(loci_path, io::loci_to_csv(loci));
  io::write_text_file(json_path, io::gnc_to_json(rep));
  write_manifest(fl, command, {loci_path, json_path});

  print_sweep_summary(res);
  std::printf("%s/%s verdict: %s, margin %.4f at %g Hz, %d encirclements%s%s\n",
              cfg.name.c_str(), domain.c_str(), verdict.stable ? "stable" : "unstable",
              verdict.margin, verdict.critical_f, verdict.encirclements,
              verdict.marginal ? ", marginal" : "",
              verdict.grid_insufficient ? ", GRID INSUFFICIENT" : "");
  if (verdict.grid_insufficient) {
    std::fprintf(stderr,
                 "error: loci angular steps too coarse around (-1,0) "
                 "(max %.2f rad); refine the grid near %g Hz\n",
                 verdict.max_arg_step_seen, verdict.critical_f);
    return 2;
  }
  return flagged_points(res) == 0 ? 0 : 1;
}

int cmd_compare_original(const CommonFlags& fl, const std::string& command) {
  const simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const sweep::SweepResult res = run_case_sweep(fl, cfg);
  const auto rows = sweep::compare_original(res);
  const std::string path =
      out_path(fl, "original_" + safe_name(cfg.name) + "_" + fl.injection + ".csv");
  io::write_text_file(path, io::original_comparison_to_csv(rows));
  write_manifest(fl, command, {path});
  print_sweep_summary(res);

  double worst = 0.0;
  for (const auto& r : rows) {
    const std::pair<cplx, cplx> pairs[] = {{r.zp_src_formula, r.zp_src_direct},
                                           {r.zn_src_formula, r.zn_src_direct},
                                           {r.zp_load_formula, r.zp_load_direct},
                                           {r.zn_load_formula, r.zn_load_direct}};
    for (const auto& [formula, direct] : pairs) {
      if (std::abs(direct) > 1e-9) {
        worst = std::max(worst, std::abs(formula - direct) / std::abs(direct));
      }
    }
  }
  std::printf("%zu comparison rows -> %s; max formula-vs-direct deviation %.3g%%\n",
              rows.size(), path.c_str(), 100.0 * worst);
  return flagged_points(res) == 0 ? 0 : 1;
}

int cmd_mfd_check(const CommonFlags& fl, const std::string& command) {
  const simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const sweep::SweepResult res = run_case_sweep(fl, cfg);
  const std::string path =
      out_path(fl, "mfd_" + safe_name(cfg.name) + "_" + fl.injection + ".csv");
  io::write_text_file(path, io::mfd_report_to_csv(res));
  write_manifest(fl, command, {path});
  print_sweep_summary(res);

  for (const char* side : {"src", "load"}) {
    double worst = 0.0, worst_f = 0.0;
    for (const auto& pt : res.points) {
      if (!pt.ok()) continue;
      const Mat2c& z = side[0] == 's' ? pt.z_src_pn : pt.z_load_pn;
      const double r = impedance::mfd_classify(z, impedance::Domain::pn).residual;
      if (r > worst) {
        worst = r;
        worst_f = pt.f_dq;
      }
    }
    std::printf("%s: max mirror-coupling residual %.4f at f_dq=%g Hz -> %s\n", side, worst,
                worst_f, worst < 0.05 ? "decoupled at 5%" : "coupled");
  }
  return flagged_points(res) == 0 ? 0 : 1;
}

simcore::IdcSchedule parse_schedule(const std::string& text) {
  simcore::IdcSchedule sched;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("schedule items must look like t:value, got '" + item + "'");
    }
    sched.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (sched.empty()) throw std::invalid_argument("empty step schedule");
  return sched;
}

int cmd_step_sim(const CommonFlags& fl, const std::string& schedule_text, double duration,
                 int decimate, const std::string& command) {
  simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const simcore::IdcSchedule sched = parse_schedule(schedule_text);
  cfg.load.dc.i_dc = sched.front().value;  // equilibrium matches the schedule start

  simcore::RunOptions opts;
  opts.idc_schedule = &sched;
  opts.throw_on_divergence = false;
  const simcore::SimRecord rec = simcore::run_time_domain(cfg, std::nullopt, duration, opts);

  const std::string path = out_path(fl, "stepsim_" + safe_name(cfg.name) + ".csv");
  io::write_text_file(path, io::timeseries_to_csv(rec, decimate));
  write_manifest(fl, command, {path});

  std::printf("case %s, schedule %s, %.3g s -> %s\n", cfg.name.c_str(), schedule_text.c_str(),
              duration, path.c_str());
  if (rec.diverged) {
    std::printf("diverged at t = %.4f s\n", rec.t_divergence);
  } else {
    // Oscillation envelope of the d-axis load current around each step.
    const double t_end = rec.dt * static_cast<double>(rec.interface_v.size() - 1);
    for (const auto& step : sched) {
      const double from = std::min(step.t, t_end);
      const double to = std::min(step.t + 0.5, t_end);
      if (to - from < 0.1) continue;
      const auto rip = simcore::ripple_profile(rec, "i_l_d", from, to, to - from);
      std::printf("envelope of i_l_d in [%.2f, %.2f] s after the %.3g pu step: %.4f pu\n",
                  from, to, step.value, rip.empty() ? 0.0 : rip.front());
    }
  }
  return 0;
}

int cmd_dump_config(const CommonFlags& fl, bool to_file, const std::string& command) {
  const simcore::CaseConfig cfg = io::load_case(fl.case_name);
  const std::string text = io::case_config_to_json(cfg);
  if (to_file) {
    const std::string path = out_path(fl, "case_" + safe_name(cfg.name) + ".json");
    io::write_text_file(path, text);
    write_manifest(fl, command, {path});
    std::printf("%s\n", path.c_str());
  } else {
    std::fputs(text.c_str(), stdout);
  }
  return 0;
}

// ----------------------------------------------------------------------------
// validate: fast invariant scoreboard with optional fault injection
// ----------------------------------------------------------------------------

struct Score {
  int passed = 0;
  int failed = 0;
};

void report(Score& sc, const char* name, bool ok, const std::string& detail) {
  std::printf("%-34s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
  (ok ? sc.passed : sc.failed) += 1;
}

int cmd_validate(const CommonFlags& fl, const std::string& fault) {
  Score sc;
  std::mt19937 rng(20260816);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto rnd = [&] { return cplx(u(rng), u(rng)); };
  const auto rnd_mat = [&] { return Mat2c{rnd(), rnd(), rnd(), rnd()}; };

  // Frame-map determinant preservation (optionally fault-injected).
  {
    Mat2c a = impedance::az();
    Mat2c ainv = impedance::az_inverse();
    if (fault == "az") a.m01 *= 1.01;  // break unitarity on purpose
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Mat2c z = rnd_mat();
      const Mat2c zpn = a * z * ainv;
      worst = std::max(worst, std::abs(zpn.det() - z.det()));
    }
    report(sc, "determinant preserved", worst < 1e-13,
           "max |det(Z_pn) - det(Z_dq)| = " + io::format_double(worst));
  }

  // Round trip and eigenvalue equivalence of the similarity transform.
  {
    double worst_rt = 0.0, worst_eig = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Mat2c z = rnd_mat();
      worst_rt = std::max(worst_rt,
                          (impedance::pn_to_dq(impedance::dq_to_pn(z)) - z).max_abs());
      const Mat2c zs = rnd_mat(), zl = rnd_mat();
      if (std::abs(zl.det()) < 1e-3) continue;
      const auto edq = (zs * zl.inverse()).eigenvalues();
      const auto epn =
          (impedance::dq_to_pn(zs) * impedance::dq_to_pn(zl).inverse()).eigenvalues();
      const double direct = std::abs(edq[0] - epn[0]) + std::abs(edq[1] - epn[1]);
      const double crossed = std::abs(edq[0] - epn[1]) + std::abs(edq[1] - epn[0]);
      worst_eig = std::max(worst_eig, std::min(direct, crossed));
    }
    report(sc, "transform round trip", worst_rt < 1e-14,
           "max entry error " + io::format_double(worst_rt));
    report(sc, "loop eigenvalue equivalence", worst_eig < 1e-11,
           "max eigenvalue-set distance " + io::format_double(worst_eig));
  }

  // Mirror-frequency-decoupled structure in both directions.
  {
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
      const cplx zx = rnd(), zy = rnd();
      const Mat2c zdq{zx, zy, -zy, zx};
      const Mat2c zpn = impedance::dq_to_pn(zdq);
      const double scale = std::max(zdq.max_abs(), 1e-12);
      ok = ok && std::abs(zpn.m01) / scale < 1e-13 && std::abs(zpn.m10) / scale < 1e-13;
      ok = ok && impedance::mfd_classify(zdq, impedance::Domain::dq).is_mfd;
      const Mat2c back = impedance::pn_to_dq(Mat2c::diag(rnd(), rnd()));
      ok = ok && impedance::mfd_classify(back, impedance::Domain::dq, 1e-10).is_mfd;
    }
    report(sc, "decoupled structure map", ok, "10000 constructed matrices");
  }

  // Closed-form original impedances against a brute-force network solve.
  {
    double worst = 0.0;
    int n = 0;
    for (int i = 0; i < 10000; ++i) {
      const Mat2c s = rnd_mat(), l = rnd_mat();
      const Mat2c sum = s + l;
      if (std::abs(sum.det()) < 1e-2) continue;
      // Shunt positive-sequence unit current: i_load = sum^-1 * (s column p).
      const Mat2c inv = sum.inverse();
      const Vec2c il = inv * Vec2c{s.m00, s.m10};
      const cplx vp = l.m00 * il.x + l.m01 * il.y;
      if (std::abs(il.x) < 1e-2 || std::abs(1.0 - il.x) < 1e-2) continue;
      const auto f = impedance::original_from_modified(s, l, impedance::InjectionKind::shunt);
      worst = std::max(worst, std::abs(f.zp_load - vp / il.x) /
                                  std::max(1.0, std::abs(vp / il.x)));
      worst = std::max(worst, std::abs(f.zp_src - vp / (1.0 - il.x)) /
                                  std::max(1.0, std::abs(vp / (1.0 - il.x))));
      ++n;
    }
    report(sc, "original-impedance closed form", worst < 1e-10 && n > 9000,
           io::format_double(worst) + " worst relative error over " + std::to_string(n) +
               " interconnections");
  }

  // End-to-end extraction against the passive-branch closed form (small grid).
  {
    sweep::SweepPlan plan;
    plan.cfg = simcore::preset_case("oracle-rl");
    plan.kind = injection_kind(fl.injection);
    plan.f_dq = {15.0, 35.0, 120.0, 340.0, 760.0};
    sweep::SweepResult res = sweep::run_sweep(plan, resolve_threads(fl.threads));
    double worst = 0.0;
    bool all_ok = true;
    for (auto& pt : res.points) {
      if (!pt.ok()) {
        all_ok = false;
        continue;
      }
      if (fault == "oracle-bias") pt.z_load_dq = pt.z_load_dq * cplx(1.01, 0.0);
      const Mat2c ref_s = simcore::rl_zdq(plan.cfg.source.z, pt.f_dq, plan.cfg.base.f1_hz);
      const Mat2c ref_l = simcore::rl_zdq(plan.cfg.load.z, pt.f_dq, plan.cfg.base.f1_hz);
      worst = std::max(worst, (pt.z_src_dq - ref_s).max_abs() / ref_s.max_abs());
      worst = std::max(worst, (pt.z_load_dq - ref_l).max_abs() / ref_l.max_abs());
    }
    report(sc, "oracle extraction", all_ok && worst < 0.01,
           "max relative deviation " + io::format_double(worst) + " over 5 frequencies");
  }

  std::printf("%d passed, %d failed\n", sc.passed, sc.failed);
  return sc.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impedance extraction, sequence-domain transforms and generalized "
               "Nyquist analysis for AC converter interface systems"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags fl;
  std::string gnc_domain = "dq";
  std::string schedule_text = "0:1.1,2:1.2";
  double duration = 4.0;
  int decimate = 20;
  bool dump_to_file = false;
  std::string fault;

  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "Measure both subsystem impedance matrices over a frequency grid");
  add_case_flags(c_sweep, fl);

  CLI::App* c_gnc = app.add_subcommand(
      "gnc", "Sweep, build characteristic loci and apply the generalized Nyquist criterion");
  add_case_flags(c_gnc, fl);
  c_gnc->add_option("--domain", gnc_domain, "Loci domain")
      ->check(CLI::IsMember({"dq", "pn", "original"}));

  CLI::App* c_cmp = app.add_subcommand(
      "compare-original",
      "Compare single-frequency sequence impedances: direct ratios vs closed form");
  add_case_flags(c_cmp, fl);

  CLI::App* c_mfd = app.add_subcommand(
      "mfd-check", "Classify measured matrices against the mirror-decoupled structure");
  add_case_flags(c_mfd, fl);

  CLI::App* c_step = app.add_subcommand(
      "step-sim", "Time-domain run with stepwise DC-current changes");
  add_case_flags(c_step, fl, /*with_grid=*/false);
  c_step->add_option("--schedule", schedule_text, "Steps as t:value[,t:value...] [s, pu]");
  c_step->add_option("--duration", duration, "Simulated time [s]");
  c_step->add_option("--decimate", decimate, "Keep every k-th sample")
      ->check(CLI::PositiveNumber);

  CLI::App* c_val = app.add_subcommand(
      "validate", "Run the invariant scoreboard (closed forms, transforms, oracle)");
  add_case_flags(c_val, fl, /*with_grid=*/false);
  c_val->add_option("--fault-inject", fault, "Deliberately break one check")
      ->check(CLI::IsMember({"az", "oracle-bias"}));

  CLI::App* c_dump = app.add_subcommand("dump-config", "Print or save the resolved case config");
  add_case_flags(c_dump, fl, /*with_grid=*/false);
  c_dump->add_flag("--to-file", dump_to_file, "Write into --out instead of stdout");

  CLI11_PARSE(app, argc, argv);
  const std::string command = join_args(argc, argv);

  try {
    if (c_sweep->parsed()) return cmd_sweep(fl, command);
    if (c_gnc->parsed()) return cmd_gnc(fl, gnc_domain, command);
    if (c_cmp->parsed()) return cmd_compare_original(fl, command);
    if (c_mfd->parsed()) return cmd_mfd_check(fl, command);
    if (c_step->parsed()) return cmd_step_sim(fl, schedule_text, duration, decimate, command);
    if (c_val->parsed()) return cmd_validate(fl, fault);
    if (c_dump->parsed()) return cmd_dump_config(fl, dump_to_file, command);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
