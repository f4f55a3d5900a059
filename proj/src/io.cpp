#include "mirrorfreq/io.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mirrorfreq/version.hpp"

namespace mirrorfreq::io {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kCrlf = "\r\n";

ordered_json j_cplx(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

cplx cplx_from(const ordered_json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

ordered_json j_mat(const Mat2c& m) {
  return ordered_json::array({j_cplx(m.m00), j_cplx(m.m01), j_cplx(m.m10), j_cplx(m.m11)});
}

Mat2c mat_from(const ordered_json& j) {
  return {cplx_from(j.at(0)), cplx_from(j.at(1)), cplx_from(j.at(2)), cplx_from(j.at(3))};
}

std::string mag_of(cplx z) { return format_double(std::abs(z)); }
std::string deg_of(cplx z) { return format_double(std::arg(z) * 180.0 / kPi); }

// --- enum <-> string ---------------------------------------------------------

std::string source_mode_name(simcore::SourceMode m) {
  return m == simcore::SourceMode::VoltagePi ? "voltage_pi" : "fixed_emf";
}
simcore::SourceMode source_mode_from(const std::string& s) {
  if (s == "voltage_pi") return simcore::SourceMode::VoltagePi;
  if (s == "fixed_emf") return simcore::SourceMode::FixedEmf;
  throw std::invalid_argument("unknown source mode: " + s);
}

std::string load_mode_name(simcore::LoadMode m) {
  switch (m) {
    case simcore::LoadMode::DcVoltageCtrl: return "dc_voltage";
    case simcore::LoadMode::CurrentCtrl: return "current";
    case simcore::LoadMode::FixedEmf: return "fixed_emf";
  }
  return "unknown";
}
simcore::LoadMode load_mode_from(const std::string& s) {
  if (s == "dc_voltage") return simcore::LoadMode::DcVoltageCtrl;
  if (s == "current") return simcore::LoadMode::CurrentCtrl;
  if (s == "fixed_emf") return simcore::LoadMode::FixedEmf;
  throw std::invalid_argument("unknown load mode: " + s);
}

std::string sync_name(simcore::SyncKind s) {
  return s == simcore::SyncKind::Pll ? "pll" : "fixed_ramp";
}
simcore::SyncKind sync_from(const std::string& s) {
  if (s == "pll") return simcore::SyncKind::Pll;
  if (s == "fixed_ramp") return simcore::SyncKind::FixedRamp;
  throw std::invalid_argument("unknown synchronization kind: " + s);
}

std::string injection_name(sweep::InjectionKind k) {
  return k == sweep::InjectionKind::shunt ? "shunt" : "series";
}
sweep::InjectionKind injection_from(const std::string& s) {
  if (s == "shunt") return sweep::InjectionKind::shunt;
  if (s == "series") return sweep::InjectionKind::series;
  throw std::invalid_argument("unknown injection kind: " + s);
}

sweep::PointStatus status_from(const std::string& s) {
  using sweep::PointStatus;
  if (s == "ok") return PointStatus::ok;
  if (s == "excluded") return PointStatus::excluded;
  if (s == "diverged") return PointStatus::diverged;
  if (s == "gate_failed") return PointStatus::gate_failed;
  if (s == "ill_conditioned") return PointStatus::ill_conditioned;
  throw std::invalid_argument("unknown point status: " + s);
}

// --- config <-> json ----------------------------------------------------------

ordered_json config_obj(const simcore::CaseConfig& cfg) {
  ordered_json pi = ordered_json::object();
  const auto j_pi = [](const simcore::PiGains& g) {
    return ordered_json{{"kp", g.kp}, {"ti", g.ti}};
  };
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["base"] = {{"v_base", cfg.base.v_base},
               {"s_base", cfg.base.s_base},
               {"v_dc_base", cfg.base.v_dc_base},
               {"f1_hz", cfg.base.f1_hz}};
  j["source"] = {{"mode", source_mode_name(cfg.source.mode)},
                 {"r", cfg.source.z.r},
                 {"x", cfg.source.z.x},
                 {"l_vd", cfg.source.l_vd},
                 {"l_vq", cfg.source.l_vq},
                 {"pi_d", j_pi(cfg.source.pi_d)},
                 {"pi_q", j_pi(cfg.source.pi_q)},
                 {"v_ref_d", cfg.source.v_ref_d},
                 {"v_ref_q", cfg.source.v_ref_q},
                 {"tau_v", cfg.source.meas.tau_v},
                 {"tau_i", cfg.source.meas.tau_i},
                 {"emf_d", cfg.source.emf_d},
                 {"emf_q", cfg.source.emf_q}};
  j["load"] = {{"mode", load_mode_name(cfg.load.mode)},
               {"r", cfg.load.z.r},
               {"x", cfg.load.z.x},
               {"pi_d", j_pi(cfg.load.pi_d)},
               {"pi_q", j_pi(cfg.load.pi_q)},
               {"sync", sync_name(cfg.load.sync)},
               {"pll", ordered_json{{"kp", cfg.load.pll.kp}, {"ki", cfg.load.pll.ki}}},
               {"dc",
                ordered_json{{"c_farad", cfg.load.dc.c_farad},
                             {"kp", cfg.load.dc.pi.kp},
                             {"ti", cfg.load.dc.pi.ti},
                             {"v_ref", cfg.load.dc.v_ref},
                             {"i_dc", cfg.load.dc.i_dc}}},
               {"i_ref_d", cfg.load.i_ref_d},
               {"i_ref_q", cfg.load.i_ref_q},
               {"tau_v", cfg.load.meas.tau_v},
               {"tau_i", cfg.load.meas.tau_i},
               {"emf_d", cfg.load.emf_d},
               {"emf_q", cfg.load.emf_q}};
  j["sim"] = {{"dt", cfg.sim.dt},
              {"settle", cfg.sim.settle},
              {"window", cfg.sim.window},
              {"injection_amplitude", cfg.sim.injection_amplitude},
              {"divergence_limit", cfg.sim.divergence_limit},
              {"gate_tol", cfg.sim.gate_tol}};
  return j;
}

simcore::CaseConfig config_from_obj(const ordered_json& j) {
  simcore::CaseConfig cfg;  // defaults fill anything a file omits
  cfg.name = j.value("name", cfg.name);
  if (j.contains("base")) {
    const auto& b = j.at("base");
    cfg.base.v_base = b.value("v_base", cfg.base.v_base);
    cfg.base.s_base = b.value("s_base", cfg.base.s_base);
    cfg.base.v_dc_base = b.value("v_dc_base", cfg.base.v_dc_base);
    cfg.base.f1_hz = b.value("f1_hz", cfg.base.f1_hz);
  }
  if (j.contains("source")) {
    const auto& s = j.at("source");
    cfg.source.mode = source_mode_from(s.value("mode", source_mode_name(cfg.source.mode)));
    cfg.source.z.r = s.value("r", cfg.source.z.r);
    cfg.source.z.x = s.value("x", cfg.source.z.x);
    cfg.source.l_vd = s.value("l_vd", cfg.source.l_vd);
    cfg.source.l_vq = s.value("l_vq", cfg.source.l_vq);
    if (s.contains("pi_d")) {
      cfg.source.pi_d.kp = s.at("pi_d").value("kp", cfg.source.pi_d.kp);
      cfg.source.pi_d.ti = s.at("pi_d").value("ti", cfg.source.pi_d.ti);
    }
    if (s.contains("pi_q")) {
      cfg.source.pi_q.kp = s.at("pi_q").value("kp", cfg.source.pi_q.kp);
      cfg.source.pi_q.ti = s.at("pi_q").value("ti", cfg.source.pi_q.ti);
    }
    cfg.source.v_ref_d = s.value("v_ref_d", cfg.source.v_ref_d);
    cfg.source.v_ref_q = s.value("v_ref_q", cfg.source.v_ref_q);
    cfg.source.meas.tau_v = s.value("tau_v", cfg.source.meas.tau_v);
    cfg.source.meas.tau_i = s.value("tau_i", cfg.source.meas.tau_i);
    cfg.source.emf_d = s.value("emf_d", cfg.source.emf_d);
    cfg.source.emf_q = s.value("emf_q", cfg.source.emf_q);
  }
  if (j.contains("load")) {
    const auto& l = j.at("load");
    cfg.load.mode = load_mode_from(l.value("mode", load_mode_name(cfg.load.mode)));
    cfg.load.z.r = l.value("r", cfg.load.z.r);
    cfg.load.z.x = l.value("x", cfg.load.z.x);
    if (l.contains("pi_d")) {
      cfg.load.pi_d.kp = l.at("pi_d").value("kp", cfg.load.pi_d.kp);
      cfg.load.pi_d.ti = l.at("pi_d").value("ti", cfg.load.pi_d.ti);
    }
    if (l.contains("pi_q")) {
      cfg.load.pi_q.kp = l.at("pi_q").value("kp", cfg.load.pi_q.kp);
      cfg.load.pi_q.ti = l.at("pi_q").value("ti", cfg.load.pi_q.ti);
    }
    cfg.load.sync = sync_from(l.value("sync", sync_name(cfg.load.sync)));
    if (l.contains("pll")) {
      cfg.load.pll.kp = l.at("pll").value("kp", cfg.load.pll.kp);
      cfg.load.pll.ki = l.at("pll").value("ki", cfg.load.pll.ki);
    }
    if (l.contains("dc")) {
      const auto& d = l.at("dc");
      cfg.load.dc.c_farad = d.value("c_farad", cfg.load.dc.c_farad);
      cfg.load.dc.pi.kp = d.value("kp", cfg.load.dc.pi.kp);
      cfg.load.dc.pi.ti = d.value("ti", cfg.load.dc.pi.ti);
      cfg.load.dc.v_ref = d.value("v_ref", cfg.load.dc.v_ref);
      cfg.load.dc.i_dc = d.value("i_dc", cfg.load.dc.i_dc);
    }
    cfg.load.i_ref_d = l.value("i_ref_d", cfg.load.i_ref_d);
    cfg.load.i_ref_q = l.value("i_ref_q", cfg.load.i_ref_q);
    cfg.load.meas.tau_v = l.value("tau_v", cfg.load.meas.tau_v);
    cfg.load.meas.tau_i = l.value("tau_i", cfg.load.meas.tau_i);
    cfg.load.emf_d = l.value("emf_d", cfg.load.emf_d);
    cfg.load.emf_q = l.value("emf_q", cfg.load.emf_q);
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    cfg.sim.dt = s.value("dt", cfg.sim.dt);
    cfg.sim.settle = s.value("settle", cfg.sim.settle);
    cfg.sim.window = s.value("window", cfg.sim.window);
    cfg.sim.injection_amplitude = s.value("injection_amplitude", cfg.sim.injection_amplitude);
    cfg.sim.divergence_limit = s.value("divergence_limit", cfg.sim.divergence_limit);
    cfg.sim.gate_tol = s.value("gate_tol", cfg.sim.gate_tol);
  }
  return cfg;
}

ordered_json run_phasors_obj(const sweep::RunPhasors& r) {
  ordered_json j;
  j["v_s_d"] = j_cplx(r.v_s_d);
  j["v_s_q"] = j_cplx(r.v_s_q);
  j["v_s_p"] = j_cplx(r.v_s_p);
  j["v_s_n"] = j_cplx(r.v_s_n);
  j["v_l_d"] = j_cplx(r.v_l_d);
  j["v_l_q"] = j_cplx(r.v_l_q);
  j["v_l_p"] = j_cplx(r.v_l_p);
  j["v_l_n"] = j_cplx(r.v_l_n);
  j["i_s_d"] = j_cplx(r.i_s_d);
  j["i_s_q"] = j_cplx(r.i_s_q);
  j["i_s_p"] = j_cplx(r.i_s_p);
  j["i_s_n"] = j_cplx(r.i_s_n);
  j["i_l_d"] = j_cplx(r.i_l_d);
  j["i_l_q"] = j_cplx(r.i_l_q);
  j["i_l_p"] = j_cplx(r.i_l_p);
  j["i_l_n"] = j_cplx(r.i_l_n);
  return j;
}

sweep::RunPhasors run_phasors_from(const ordered_json& j) {
  sweep::RunPhasors r;
  r.v_s_d = cplx_from(j.at("v_s_d"));
  r.v_s_q = cplx_from(j.at("v_s_q"));
  r.v_s_p = cplx_from(j.at("v_s_p"));
  r.v_s_n = cplx_from(j.at("v_s_n"));
  r.v_l_d = cplx_from(j.at("v_l_d"));
  r.v_l_q = cplx_from(j.at("v_l_q"));
  r.v_l_p = cplx_from(j.at("v_l_p"));
  r.v_l_n = cplx_from(j.at("v_l_n"));
  r.i_s_d = cplx_from(j.at("i_s_d"));
  r.i_s_q = cplx_from(j.at("i_s_q"));
  r.i_s_p = cplx_from(j.at("i_s_p"));
  r.i_s_n = cplx_from(j.at("i_s_n"));
  r.i_l_d = cplx_from(j.at("i_l_d"));
  r.i_l_q = cplx_from(j.at("i_l_q"));
  r.i_l_p = cplx_from(j.at("i_l_p"));
  r.i_l_n = cplx_from(j.at("i_l_n"));
  return r;
}

}  // namespace

// ----------------------------------------------------------------------------
// Primitives
// ----------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

// ----------------------------------------------------------------------------
// Case configuration
// ----------------------------------------------------------------------------

std::string case_config_to_json(const simcore::CaseConfig& cfg) {
  return config_obj(cfg).dump(2) + "\n";
}

simcore::CaseConfig case_config_from_json(const std::string& text) {
  return config_from_obj(ordered_json::parse(text));
}

simcore::CaseConfig load_case(const std::string& name_or_path) {
  if (simcore::is_preset_name(name_or_path)) return simcore::preset_case(name_or_path);
  return case_config_from_json(read_text_file(name_or_path));
}

// ----------------------------------------------------------------------------
// Sweep results
// ----------------------------------------------------------------------------

std::string sweep_to_json(const sweep::SweepResult& res) {
  const double f1 = res.cfg.base.f1_hz;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["artifact"] = "impedance_sweep";
  j["tool_version"] = kVersion;
  j["injection"] = injection_name(res.kind);
  j["config"] = config_obj(res.cfg);
  j["points"] = ordered_json::array();
  for (const auto& pt : res.points) {
    ordered_json p;
    p["f_dq"] = pt.f_dq;
    p["f_p"] = pt.f_dq + f1;
    p["f_n"] = pt.f_dq - f1;
    p["status"] = sweep::to_string(pt.status);
    p["message"] = pt.message;
    p["mirror_folded"] = pt.mirror_folded;
    p["z_src_dq"] = j_mat(pt.z_src_dq);
    p["z_load_dq"] = j_mat(pt.z_load_dq);
    p["z_src_pn"] = j_mat(pt.z_src_pn);
    p["z_load_pn"] = j_mat(pt.z_load_pn);
    p["cond"] = {{"src_dq", pt.cond_src_dq},
                 {"load_dq", pt.cond_load_dq},
                 {"src_pn", pt.cond_src_pn},
                 {"load_pn", pt.cond_load_pn}};
    if (pt.mirror_folded && pt.ok()) {
      const auto fs = impedance::fold_negative_frequency(pt.f_dq - f1, pt.z_src_pn.m11);
      const auto fl = impedance::fold_negative_frequency(pt.f_dq - f1, pt.z_load_pn.m11);
      p["folded_mirror"] = {{"f_hz", fs.f_hz},
                            {"z_src_nn", j_cplx(fs.z)},
                            {"z_load_nn", j_cplx(fl.z)}};
    }
    p["runs"] = ordered_json::array({run_phasors_obj(pt.runs[0]), run_phasors_obj(pt.runs[1])});
    j["points"].push_back(std::move(p));
  }
  return j.dump(2) + "\n";
}

sweep::SweepResult sweep_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  sweep::SweepResult res;
  res.kind = injection_from(j.at("injection").get<std::string>());
  res.cfg = config_from_obj(j.at("config"));
  for (const auto& p : j.at("points")) {
    sweep::SweepPoint pt;
    pt.f_dq = p.at("f_dq").get<double>();
    pt.status = status_from(p.at("status").get<std::string>());
    pt.message = p.value("message", std::string{});
    pt.mirror_folded = p.value("mirror_folded", false);
    pt.z_src_dq = mat_from(p.at("z_src_dq"));
    pt.z_load_dq = mat_from(p.at("z_load_dq"));
    pt.z_src_pn = mat_from(p.at("z_src_pn"));
    pt.z_load_pn = mat_from(p.at("z_load_pn"));
    if (p.contains("cond")) {
      pt.cond_src_dq = p.at("cond").value("src_dq", 0.0);
      pt.cond_load_dq = p.at("cond").value("load_dq", 0.0);
      pt.cond_src_pn = p.at("cond").value("src_pn", 0.0);
      pt.cond_load_pn = p.at("cond").value("load_pn", 0.0);
    }
    if (p.contains("runs")) {
      pt.runs[0] = run_phasors_from(p.at("runs").at(0));
      pt.runs[1] = run_phasors_from(p.at("runs").at(1));
    }
    res.points.push_back(std::move(pt));
  }
  return res;
}

std::string sweep_to_csv(const sweep::SweepResult& res) {
  const double f1 = res.cfg.base.f1_hz;
  std::ostringstream os;
  os << "f_dq,f_p,f_n,mirror_folded,status,message,"
        "cond_src_dq,cond_load_dq,cond_src_pn,cond_load_pn";
  static const char* kMatNames[] = {"z_src_dq", "z_load_dq", "z_src_pn", "z_load_pn"};
  static const char* kEntryNames[] = {"00", "01", "10", "11"};
  for (const char* m : kMatNames)
    for (const char* e : kEntryNames)
      os << ',' << m << '_' << e << "_mag," << m << '_' << e << "_deg";
  os << kCrlf;
  for (const auto& pt : res.points) {
    os << format_double(pt.f_dq) << ',' << format_double(pt.f_dq + f1) << ','
       << format_double(pt.f_dq - f1) << ',' << (pt.mirror_folded ? 1 : 0) << ','
       << sweep::to_string(pt.status) << ',' << csv_escape(pt.message) << ','
       << format_double(pt.cond_src_dq) << ',' << format_double(pt.cond_load_dq) << ','
       << format_double(pt.cond_src_pn) << ',' << format_double(pt.cond_load_pn);
    for (const Mat2c* m : {&pt.z_src_dq, &pt.z_load_dq, &pt.z_src_pn, &pt.z_load_pn})
      for (const cplx z : {m->m00, m->m01, m->m10, m->m11})
        os << ',' << mag_of(z) << ',' << deg_of(z);
    os << kCrlf;
  }
  return os.str();
}

// ----------------------------------------------------------------------------
// Stability artifacts
// ----------------------------------------------------------------------------

std::string loci_to_csv(const stability::Loci& loci) {
  std::ostringstream os;
  os << "f_dq,l1_re,l1_im,l2_re,l2_im,l1_dist,l2_dist" << kCrlf;
  for (std::size_t i = 0; i < loci.f_dq.size(); ++i) {
    const cplx c(-1.0, 0.0);
    os << format_double(loci.f_dq[i]) << ',' << format_double(loci.l1[i].real()) << ','
       << format_double(loci.l1[i].imag()) << ',' << format_double(loci.l2[i].real())
       << ',' << format_double(loci.l2[i].imag()) << ','
       << format_double(std::abs(loci.l1[i] - c)) << ','
       << format_double(std::abs(loci.l2[i] - c)) << kCrlf;
  }
  return os.str();
}

std::string gnc_to_json(const GncReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["artifact"] = "gnc_verdict";
  j["tool_version"] = kVersion;
  j["case"] = report.case_name;
  j["domain"] = report.domain;
  j["injection"] = report.injection;
  j["grid"] = {{"n", report.f_dq.size()},
               {"f_dq", report.f_dq}};
  j["settings"] = {{"open_loop_stable_assumed", report.settings.open_loop_stable_assumed},
                   {"max_arg_step", report.settings.max_arg_step},
                   {"marginal_distance", report.settings.marginal_distance}};
  j["result"] = {{"stable", report.result.stable},
                 {"encirclements", report.result.encirclements},
                 {"winding_residual", report.result.winding_residual},
                 {"margin", report.result.margin},
                 {"critical_f", report.result.critical_f},
                 {"marginal", report.result.marginal},
                 {"grid_insufficient", report.result.grid_insufficient},
                 {"max_arg_step_seen", report.result.max_arg_step_seen}};
  return j.dump(2) + "\n";
}

// ----------------------------------------------------------------------------
// Analysis reports
// ----------------------------------------------------------------------------

std::string original_comparison_to_csv(const std::vector<sweep::OriginalComparisonRow>& rows) {
  std::ostringstream os;
  os << "f_dq,f_p,f_n";
  static const char* kCols[] = {"zp_src", "zn_src", "zp_load", "zn_load"};
  for (const char* c : kCols)
    os << ',' << c << "_formula_mag," << c << "_formula_deg," << c << "_direct_mag,"
       << c << "_direct_deg," << c << "_rel_dev";
  os << kCrlf;
  for (const auto& r : rows) {
    os << format_double(r.f_dq) << ',' << format_double(r.f_p) << ','
       << format_double(r.f_n);
    const std::pair<cplx, cplx> pairs[] = {{r.zp_src_formula, r.zp_src_direct},
                                           {r.zn_src_formula, r.zn_src_direct},
                                           {r.zp_load_formula, r.zp_load_direct},
                                           {r.zn_load_formula, r.zn_load_direct}};
    for (const auto& [formula, direct] : pairs) {
      const double scale = std::max(std::abs(direct), 1e-300);
      os << ',' << mag_of(formula) << ',' << deg_of(formula) << ',' << mag_of(direct)
         << ',' << deg_of(direct) << ',' << format_double(std::abs(formula - direct) / scale);
    }
    os << kCrlf;
  }
  return os.str();
}

std::string mfd_report_to_csv(const sweep::SweepResult& res, double rel_tol) {
  std::ostringstream os;
  os << "f_dq,side,domain,is_mfd,residual,zx_mag,zx_deg,zy_mag,zy_deg" << kCrlf;
  for (const auto& pt : res.points) {
    if (!pt.ok()) continue;
    const std::tuple<const char*, const char*, const Mat2c*, impedance::Domain> entries[] = {
        {"src", "dq", &pt.z_src_dq, impedance::Domain::dq},
        {"load", "dq", &pt.z_load_dq, impedance::Domain::dq},
        {"src", "pn", &pt.z_src_pn, impedance::Domain::pn},
        {"load", "pn", &pt.z_load_pn, impedance::Domain::pn},
    };
    for (const auto& [side, domain, z, dom] : entries) {
      const auto chk = impedance::mfd_classify(*z, dom, rel_tol);
      os << format_double(pt.f_dq) << ',' << side << ',' << domain << ','
         << (chk.is_mfd ? 1 : 0) << ',' << format_double(chk.residual) << ','
         << mag_of(chk.zx) << ',' << deg_of(chk.zx) << ',' << mag_of(chk.zy) << ','
         << deg_of(chk.zy) << kCrlf;
    }
  }
  return os.str();
}

std::string timeseries_to_csv(const simcore::SimRecord& rec, int decimate) {
  if (decimate < 1) throw std::invalid_argument("decimation factor must be >= 1");
  std::ostringstream os;
  os << "t,v_a,v_b,v_c,i_s_a,i_s_b,i_s_c,i_l_a,i_l_b,i_l_c";
  for (const auto& [name, _] : rec.aux) os << ',' << name;
  os << kCrlf;
  const std::size_t n = rec.interface_v.size();
  for (std::size_t k = 0; k < n; k += static_cast<std::size_t>(decimate)) {
    os << format_double(rec.interface_v.t0 + static_cast<double>(k) * rec.dt) << ','
       << format_double(rec.interface_v.a[k]) << ',' << format_double(rec.interface_v.b[k])
       << ',' << format_double(rec.interface_v.c[k]) << ','
       << format_double(rec.source_i.a[k]) << ',' << format_double(rec.source_i.b[k])
       << ',' << format_double(rec.source_i.c[k]) << ','
       << format_double(rec.load_i.a[k]) << ',' << format_double(rec.load_i.b[k]) << ','
       << format_double(rec.load_i.c[k]);
    for (const auto& [_, v] : rec.aux) os << ',' << format_double(v[k]);
    os << kCrlf;
  }
  return os.str();
}

// ----------------------------------------------------------------------------
// Manifest
// ----------------------------------------------------------------------------

std::string manifest_json(const std::string& command,
                          const std::vector<std::string>& output_files) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "mirrorfreq";
  j["version"] = kVersion;
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  j["generated_at"] = stamp;
  j["command"] = command;
  j["outputs"] = ordered_json::array();
  for (const auto& path : output_files) {
    ordered_json o;
    o["path"] = path;
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (!ec) o["bytes"] = bytes;
    j["outputs"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

}  // namespace mirrorfreq::io
