#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mirrorfreq/sweep.hpp"

using namespace mirrorfreq;
using namespace mirrorfreq::sweep;
using simcore::oracle_rl;
using simcore::rl_zdq;
using simcore::rl_zpn;

namespace {

// Element-wise magnitude/phase agreement against a reference matrix.
// Entries far below the matrix scale are compared absolutely instead of by
// phase (the phase of a ~0 entry is noise).
void check_matrix(const Mat2c& got, const Mat2c& ref, double mag_rel_tol,
                  double phase_tol_deg) {
  const double scale = std::max(ref.max_abs(), 1e-12);
  const cplx g[4] = {got.m00, got.m01, got.m10, got.m11};
  const cplx r[4] = {ref.m00, ref.m01, ref.m10, ref.m11};
  for (int k = 0; k < 4; ++k) {
    CAPTURE(k);
    if (std::abs(r[k]) < 1e-2 * scale) {
      CHECK(std::abs(g[k] - r[k]) < mag_rel_tol * scale);
    } else {
      CHECK(std::abs(std::abs(g[k]) - std::abs(r[k])) < mag_rel_tol * std::abs(r[k]));
      const double dphi = std::arg(g[k] / r[k]) * 180.0 / kPi;
      CHECK(std::abs(dphi) < phase_tol_deg);
    }
  }
}

}  // namespace

TEST_CASE("log grid is integer, deduplicated and skips the degenerate spots") {
  const auto g = make_log_grid(2.0, 1000.0, 48, 50.0);
  REQUIRE(!g.empty());
  CHECK(g.front() == doctest::Approx(2.0));
  CHECK(g.back() == doctest::Approx(1000.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g[i] == std::floor(g[i]));
    if (i > 0) CHECK(g[i] > g[i - 1]);
    CHECK(g[i] != 50.0);
    CHECK(g[i] != 100.0);
  }
  const auto d = make_default_grid();
  CHECK(d.size() > 35);
  CHECK(d.size() < 50);
  CHECK(std::none_of(d.begin(), d.end(), [](double f) { return f == 50.0 || f == 100.0; }));
}

TEST_CASE("exclusion reasons cover the degenerate injection frequencies") {
  CHECK(exclusion_reason(120.0, 50.0).empty());
  CHECK(exclusion_reason(2.0, 50.0).empty());
  CHECK_FALSE(exclusion_reason(0.0, 50.0).empty());
  CHECK_FALSE(exclusion_reason(-5.0, 50.0).empty());
  CHECK_FALSE(exclusion_reason(33.5, 50.0).empty());
  CHECK_FALSE(exclusion_reason(50.0, 50.0).empty());
  CHECK_FALSE(exclusion_reason(100.0, 50.0).empty());
  CHECK(exclusion_reason(150.0, 50.0).empty());
}

TEST_CASE("swept RL branch reproduces its closed-form matrices in both frames") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.kind = InjectionKind::shunt;
  // Includes two sub-fundamental spots whose mirrors sit at -45 and -10 Hz.
  plan.f_dq = {5.0, 35.0, 40.0, 115.0, 200.0, 500.0};
  const SweepResult res = run_sweep_serial(plan);
  REQUIRE(res.points.size() == plan.f_dq.size());
  CHECK(res.all_ok());

  const double f1 = plan.cfg.base.f1_hz;
  for (const auto& pt : res.points) {
    CAPTURE(pt.f_dq);
    REQUIRE(pt.ok());
    check_matrix(pt.z_load_dq, rl_zdq(plan.cfg.load.z, pt.f_dq, f1), 0.01, 2.0);
    check_matrix(pt.z_src_dq, rl_zdq(plan.cfg.source.z, pt.f_dq, f1), 0.01, 2.0);
    check_matrix(pt.z_load_pn, rl_zpn(plan.cfg.load.z, pt.f_dq, f1), 0.01, 2.0);
    check_matrix(pt.z_src_pn, rl_zpn(plan.cfg.source.z, pt.f_dq, f1), 0.01, 2.0);
    CHECK(pt.mirror_folded == (pt.f_dq < f1));
    CHECK(pt.cond_load_dq > 0.0);
    CHECK(pt.cond_load_dq < 1e6);
  }

  // The two rotating-frame paths (direct dq demodulation vs sequence
  // extraction mapped back) must agree point-wise: dq vs pn matrices are
  // frame images of each other within the extraction tolerance.
  for (const auto& pt : res.points) {
    const Mat2c mapped = impedance::pn_to_dq(pt.z_load_pn);
    check_matrix(mapped, pt.z_load_dq, 0.01, 2.0);
  }
}

TEST_CASE("single-run identification agrees with the two-run solve on a decoupled branch") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.f_dq = {35.0, 200.0};
  const SweepResult res = run_sweep_serial(plan);
  REQUIRE(res.all_ok());
  for (const auto& pt : res.points) {
    CAPTURE(pt.f_dq);
    // A single-sequence run is circularly polarized in dq (i_q = -+ j i_d),
    // the degenerate excitation for the one-shot identity. Superposing the
    // two runs (linearity) yields one composite non-circular excitation.
    const auto& r0 = pt.runs[0];
    const auto& r1 = pt.runs[1];
    const auto [zx, zy] = impedance::mfd_single_measurement(
        r0.v_l_d + r1.v_l_d, r0.v_l_q + r1.v_l_q, r0.i_l_d + r1.i_l_d,
        r0.i_l_q + r1.i_l_q, pt.f_dq);
    const Mat2c rebuilt{zx, zy, -zy, zx};
    check_matrix(rebuilt, pt.z_load_dq, 0.01, 2.0);

    // And the pure run really is degenerate.
    CHECK_THROWS_AS(impedance::mfd_single_measurement(r0.v_l_d, r0.v_l_q, r0.i_l_d,
                                                      r0.i_l_q, pt.f_dq),
                    DegenerateExcitationError);
  }
}

TEST_CASE("parallel and serial sweep drivers are bit-identical") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.f_dq = {35.0, 120.0, 200.0};
  const SweepResult a = run_sweep(plan, 2);
  const SweepResult b = run_sweep_serial(plan);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    CHECK(pa.status == pb.status);
    const cplx* ma = &pa.z_src_dq.m00;
    const cplx* mb = &pb.z_src_dq.m00;
    for (int k = 0; k < 16; ++k) {  // four contiguous Mat2c = 16 entries
      CHECK(ma[k].real() == mb[k].real());
      CHECK(ma[k].imag() == mb[k].imag());
    }
    CHECK(pa.cond_load_pn == pb.cond_load_pn);
  }

  // Determinism of the full pipeline: same plan, same bits.
  const SweepResult c = run_sweep(plan, 2);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].z_load_pn.m00 == c.points[i].z_load_pn.m00);
    CHECK(a.points[i].z_load_pn.m11 == c.points[i].z_load_pn.m11);
  }
}

TEST_CASE("measured matrices are injection-amplitude invariant (linearity)") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.f_dq = {120.0};
  const SweepResult a = run_sweep_serial(plan);

  plan.cfg.sim.injection_amplitude = 0.01;
  const SweepResult b = run_sweep_serial(plan);
  REQUIRE(a.all_ok());
  REQUIRE(b.all_ok());
  check_matrix(b.points[0].z_load_dq, a.points[0].z_load_dq, 1e-6, 1e-4);
  check_matrix(b.points[0].z_src_pn, a.points[0].z_src_pn, 1e-6, 1e-4);
}

TEST_CASE("excluded frequencies are reported, not simulated") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.f_dq = {50.0, 100.0, 33.5, -2.0, 0.0, 120.0};
  const SweepResult res = run_sweep_serial(plan);
  REQUIRE(res.points.size() == 6);
  CHECK(res.points[0].status == PointStatus::excluded);
  CHECK(res.points[1].status == PointStatus::excluded);
  CHECK(res.points[2].status == PointStatus::excluded);
  CHECK(res.points[3].status == PointStatus::excluded);
  CHECK(res.points[4].status == PointStatus::excluded);
  CHECK(res.points[5].status == PointStatus::ok);
  for (int i = 0; i < 5; ++i) CHECK_FALSE(res.points[i].message.empty());
  CHECK(res.count(PointStatus::excluded) == 5);
  CHECK(res.count(PointStatus::ok) == 1);
  CHECK_FALSE(res.all_ok());
  CHECK(std::string(to_string(PointStatus::excluded)) == "excluded");
  CHECK(std::string(to_string(PointStatus::ok)) == "ok");
}

TEST_CASE("a settle time too short for the transient trips the gate") {
  SweepPlan plan;
  plan.cfg = simcore::case_a1();
  plan.cfg.sim.settle = 0.001;
  plan.cfg.sim.window = 0.04;
  plan.f_dq = {200.0};
  const SweepResult res = run_sweep_serial(plan);
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0].status == PointStatus::gate_failed);
  CHECK_FALSE(res.points[0].message.empty());
}

TEST_CASE("original-definition ratios: decoupled case collapses to the diagonals") {
  SweepPlan plan;
  plan.cfg = oracle_rl();
  plan.f_dq = {35.0, 120.0, 500.0};
  for (const auto kind : {InjectionKind::shunt, InjectionKind::series}) {
    plan.kind = kind;
    const SweepResult res = run_sweep_serial(plan);
    REQUIRE(res.all_ok());
    const auto rows = compare_original(res);
    REQUIRE(rows.size() == 3);
    const double f1 = plan.cfg.base.f1_hz;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      CAPTURE(row.f_dq);
      CHECK(row.f_p == doctest::Approx(row.f_dq + f1));
      CHECK(row.f_n == doctest::Approx(row.f_dq - f1));
      const Mat2c zl = rl_zpn(plan.cfg.load.z, row.f_dq, f1);
      const Mat2c zs = rl_zpn(plan.cfg.source.z, row.f_dq, f1);
      // formula == measured diagonal; direct == same physical quantity.
      for (auto [got, ref] : {std::pair{row.zp_load_formula, zl.m00},
                              std::pair{row.zn_load_formula, zl.m11},
                              std::pair{row.zp_src_formula, zs.m00},
                              std::pair{row.zn_src_formula, zs.m11}}) {
        CHECK(std::abs(got - ref) < 0.02 * std::max(1e-3, std::abs(ref)));
      }
      for (auto [direct, formula] : {std::pair{row.zp_load_direct, row.zp_load_formula},
                                     std::pair{row.zn_load_direct, row.zn_load_formula},
                                     std::pair{row.zp_src_direct, row.zp_src_formula},
                                     std::pair{row.zn_src_direct, row.zn_src_formula}}) {
        CHECK(std::abs(direct - formula) < 0.02 * std::max(1e-3, std::abs(formula)));
      }
    }
  }
}
