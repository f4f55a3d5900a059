#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mirrorfreq/impedance.hpp"

using namespace mirrorfreq;
using namespace mirrorfreq::impedance;

namespace {

std::mt19937 rng(7321);

cplx rand_cplx(double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

Mat2c rand_mat() { return {rand_cplx(), rand_cplx(), rand_cplx(), rand_cplx()}; }

Mat2c rand_mfd_dq() {
  const cplx zx = rand_cplx();
  const cplx zy = rand_cplx();
  return {zx, zy, -zy, zx};
}

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Solves the 2x2 complex system [[a,b],[c,d]] (x,y) = (r0,r1).
bool solve22(cplx a, cplx b, cplx c, cplx d, cplx r0, cplx r1, cplx& x, cplx& y) {
  const cplx det = a * d - b * c;
  if (std::abs(det) < 1e-3) return false;
  x = (r0 * d - b * r1) / det;
  y = (a * r1 - r0 * c) / det;
  return true;
}

// Brute-force network solve of the coupled two-subsystem interconnection with
// a pure single-sequence perturbation, as an independent oracle for the
// closed-form conversion. Currents are taken into each subsystem.
struct BruteOriginals {
  cplx zp_src, zp_load, zn_src, zn_load;
  bool valid;
};

BruteOriginals brute_shunt(const Mat2c& s, const Mat2c& l) {
  BruteOriginals out{};
  // Positive-sequence injected current = 1: Il = (i, m), Is = (1 - i, -m).
  cplx i, m;
  if (!solve22(l.m00 + s.m00, l.m01 + s.m01, l.m10 + s.m10, l.m11 + s.m11,
               s.m00, s.m10, i, m))
    return out;
  cplx vp = l.m00 * i + l.m01 * m;
  if (std::abs(i) < 1e-3 || std::abs(1.0 - i) < 1e-3) return out;
  out.zp_load = vp / i;
  out.zp_src = vp / (1.0 - i);
  // Negative-sequence injected current = 1: Il = (i, m), Is = (-i, 1 - m).
  if (!solve22(l.m00 + s.m00, l.m01 + s.m01, l.m10 + s.m10, l.m11 + s.m11,
               s.m01, s.m11, i, m))
    return out;
  const cplx vn = l.m10 * i + l.m11 * m;
  if (std::abs(m) < 1e-3 || std::abs(1.0 - m) < 1e-3) return out;
  out.zn_load = vn / m;
  out.zn_src = vn / (1.0 - m);
  out.valid = true;
  return out;
}

BruteOriginals brute_series(const Mat2c& s, const Mat2c& l) {
  BruteOriginals out{};
  // Loop current (i, m) into the load; into the source it is (-i, -m).
  // Series voltage constraint: Vs - Vl = E with E purely one sequence.
  const cplx a = -(s.m00 + l.m00), b = -(s.m01 + l.m01);
  const cplx c = -(s.m10 + l.m10), d = -(s.m11 + l.m11);
  cplx i, m;
  if (!solve22(a, b, c, d, cplx(1.0), cplx(0.0), i, m)) return out;
  if (std::abs(i) < 1e-3) return out;
  out.zp_load = (l.m00 * i + l.m01 * m) / i;
  out.zp_src = -(s.m00 * i + s.m01 * m) / (-i);
  if (!solve22(a, b, c, d, cplx(0.0), cplx(1.0), i, m)) return out;
  if (std::abs(m) < 1e-3) return out;
  out.zn_load = (l.m10 * i + l.m11 * m) / m;
  out.zn_src = -(s.m10 * i + s.m11 * m) / (-m);
  out.valid = true;
  return out;
}

}  // namespace

TEST_CASE("frame map is unitary with determinant -j") {
  const Mat2c a = az();
  const Mat2c inv = az_inverse();
  const Mat2c prod = a * inv;
  CHECK((prod - Mat2c::identity()).max_abs() < 1e-15);
  CHECK((inv - a.adjoint()).max_abs() < 1e-15);
  CHECK(std::abs(a.det() - cplx(0.0, -1.0)) < 1e-15);
}

TEST_CASE("balanced RL branch pins the sequence diagonal without any halving") {
  // r = 0.02, X = 0.25 pu at 50 Hz, evaluated at f_dq = 50 Hz. The rotating
  // frame matrix is [[r + j w l, -X],[X, r + j w l]] with w l = 0.25.
  const cplx diag(0.02, 0.25);
  const Mat2c zdq{diag, cplx(-0.25, 0.0), cplx(0.25, 0.0), diag};
  const ImpedancePn pn = zdq_to_zpn(ImpedanceDq{zdq, 50.0}, 50.0);

  CHECK(pn.f_p() == doctest::Approx(100.0));
  CHECK(pn.f_n() == doctest::Approx(0.0));
  CHECK_FALSE(pn.sub_fundamental());
  // A physical series RL at 100 Hz must show exactly twice the 50 Hz
  // reactance, and at 0 Hz only the resistance: that pins Zpp = Zx - j Zy
  // (no factor 1/2) and Znn = Zx + j Zy.
  CHECK(std::abs(pn.z.m00 - cplx(0.02, 0.5)) < 1e-14);
  CHECK(std::abs(pn.z.m11 - cplx(0.02, 0.0)) < 1e-14);
  CHECK(std::abs(pn.z.m01) < 1e-14);
  CHECK(std::abs(pn.z.m10) < 1e-14);

  const ImpedanceDq back = zpn_to_zdq(pn);
  CHECK((back.z - zdq).max_abs() < 1e-14);
  CHECK(back.f_dq == doctest::Approx(50.0));

  // Sub-fundamental bookkeeping: f_dq = 20 Hz has its mirror at -30 Hz.
  const ImpedancePn low = zdq_to_zpn(ImpedanceDq{zdq, 20.0}, 50.0);
  CHECK(low.f_n() == doctest::Approx(-30.0));
  CHECK(low.sub_fundamental());
}

TEST_CASE("frame similarity preserves everything it must, 1e4 random draws") {
  for (int trial = 0; trial < 10000; ++trial) {
    const Mat2c zdq = rand_mat();
    const Mat2c zpn = dq_to_pn(zdq);
    const Mat2c back = pn_to_dq(zpn);
    CHECK((back - zdq).max_abs() < 1e-14);
    CHECK(std::abs(zpn.det() - zdq.det()) < 1e-13);
    const auto e1 = zdq.eigenvalues();
    const auto e2 = zpn.eigenvalues();
    const double direct = std::abs(e1[0] - e2[0]) + std::abs(e1[1] - e2[1]);
    const double crossed = std::abs(e1[0] - e2[1]) + std::abs(e1[1] - e2[0]);
    CHECK(std::min(direct, crossed) < 1e-12);
  }
}

TEST_CASE("decoupled structure maps between domains in both directions") {
  int n_checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    // Symmetric rotating-frame structure => diagonal sequence matrix.
    const Mat2c zdq = rand_mfd_dq();
    const Mat2c zpn = dq_to_pn(zdq);
    const double scale = std::max(zdq.max_abs(), 1e-12);
    CHECK(std::abs(zpn.m01) / scale < 1e-13);
    CHECK(std::abs(zpn.m10) / scale < 1e-13);
    CHECK(std::abs(zpn.m00 - (zdq.m00 - cplx(0, 1) * zdq.m01)) / scale < 1e-13);
    CHECK(std::abs(zpn.m11 - (zdq.m00 + cplx(0, 1) * zdq.m01)) / scale < 1e-13);

    // Diagonal sequence matrix => symmetric rotating-frame structure.
    const Mat2c diag = Mat2c::diag(rand_cplx(), rand_cplx());
    const Mat2c zdq2 = pn_to_dq(diag);
    const double scale2 = std::max(diag.max_abs(), 1e-12);
    CHECK(std::abs(zdq2.m00 - zdq2.m11) / scale2 < 1e-13);
    CHECK(std::abs(zdq2.m01 + zdq2.m10) / scale2 < 1e-13);
    ++n_checked;
  }
  CHECK(n_checked == 10000);
}

TEST_CASE("decoupling classifier accepts and rejects correctly in both domains") {
  for (int trial = 0; trial < 2000; ++trial) {
    const cplx zx = rand_cplx();
    const cplx zy = rand_cplx();
    const Mat2c zdq{zx, zy, -zy, zx};
    const auto cd = mfd_classify(zdq, Domain::dq);
    CHECK(cd.is_mfd);
    CHECK(cd.residual < 1e-13);
    CHECK(std::abs(cd.zx - zx) < 1e-12);
    CHECK(std::abs(cd.zy - zy) < 1e-12);

    const auto cp = mfd_classify(dq_to_pn(zdq), Domain::pn);
    CHECK(cp.is_mfd);
    CHECK(std::abs(cp.zx - zx) < 1e-12);
    CHECK(std::abs(cp.zy - zy) < 1e-12);
  }
  // A 10% diagonal asymmetry must fail the default 5% gate but pass 15%.
  const Mat2c bad{cplx(1.0, 0.0), cplx(0.5, 0.0), cplx(-0.5, 0.0), cplx(1.1, 0.0)};
  CHECK_FALSE(mfd_classify(bad, Domain::dq).is_mfd);
  CHECK(mfd_classify(bad, Domain::dq, 0.15).is_mfd);
  // Same idea in the sequence domain: 20% coupling fails 5%, passes 25%.
  const Mat2c bad_pn{cplx(1.0, 0.0), cplx(0.2, 0.0), cplx(0.2, 0.0), cplx(1.0, 0.0)};
  CHECK_FALSE(mfd_classify(bad_pn, Domain::pn).is_mfd);
  CHECK(mfd_classify(bad_pn, Domain::pn, 0.25).is_mfd);
}

TEST_CASE("single-run identification works iff the excitation is non-circular") {
  for (int trial = 0; trial < 2000; ++trial) {
    const cplx zx = rand_cplx();
    const cplx zy = rand_cplx();
    const cplx id = rand_cplx();
    const cplx iq = rand_cplx();
    // Stay clearly above the degeneracy floor of the identification routine.
    if (std::abs(id * id + iq * iq) < 0.1 * (std::norm(id) + std::norm(iq))) continue;
    const cplx vd = zx * id + zy * iq;
    const cplx vq = -zy * id + zx * iq;
    const auto [gx, gy] = mfd_single_measurement(vd, vq, id, iq);
    CHECK(std::abs(gx - zx) < 1e-11);
    CHECK(std::abs(gy - zy) < 1e-11);
  }
  // Circularly polarized excitation: iq = +-j id nulls the denominator.
  const cplx id(0.3, -0.7);
  const cplx iq = cplx(0.0, 1.0) * id;
  CHECK_THROWS_AS(mfd_single_measurement(cplx(1, 0), cplx(0, 1), id, iq, 42.0),
                  DegenerateExcitationError);
}

TEST_CASE("closed-form original impedances match a brute-force network solve") {
  int n_shunt = 0, n_series = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Mat2c s = rand_mat();
    const Mat2c l = rand_mat();

    const auto bs = brute_shunt(s, l);
    if (bs.valid) {
      const auto f = original_from_modified(s, l, InjectionKind::shunt);
      CHECK(rel_diff(f.zp_src, bs.zp_src) < 1e-10);
      CHECK(rel_diff(f.zp_load, bs.zp_load) < 1e-10);
      CHECK(rel_diff(f.zn_src, bs.zn_src) < 1e-10);
      CHECK(rel_diff(f.zn_load, bs.zn_load) < 1e-10);
      ++n_shunt;
    }
    const auto bv = brute_series(s, l);
    if (bv.valid) {
      const auto f = original_from_modified(s, l, InjectionKind::series);
      CHECK(rel_diff(f.zp_src, bv.zp_src) < 1e-10);
      CHECK(rel_diff(f.zp_load, bv.zp_load) < 1e-10);
      CHECK(rel_diff(f.zn_src, bv.zn_src) < 1e-10);
      CHECK(rel_diff(f.zn_load, bv.zn_load) < 1e-10);
      ++n_series;
    }
  }
  // Nearly-singular interconnections are skipped; they must stay rare.
  CHECK(n_shunt > 9000);
  CHECK(n_series > 9000);
}

TEST_CASE("one decoupled subsystem removes the injection-type dependence") {
  for (int trial = 0; trial < 2000; ++trial) {
    const Mat2c s = dq_to_pn(rand_mfd_dq());  // decoupled source
    const Mat2c l = rand_mat();
    const auto sh = original_from_modified(s, l, InjectionKind::shunt);
    const auto se = original_from_modified(s, l, InjectionKind::series);
    // Load originals coincide across injection kinds.
    CHECK(rel_diff(sh.zp_load, se.zp_load) < 1e-12);
    CHECK(rel_diff(sh.zn_load, se.zn_load) < 1e-12);
    // Source originals collapse to the source diagonal.
    CHECK(rel_diff(sh.zp_src, s.m00) < 1e-12);
    CHECK(rel_diff(se.zp_src, s.m00) < 1e-12);
    CHECK(rel_diff(sh.zn_src, s.m11) < 1e-12);
    CHECK(rel_diff(se.zn_src, s.m11) < 1e-12);
    // Closed form of the load reduction.
    const cplx zp_red = l.m00 - l.m01 * l.m10 / (s.m11 + l.m11);
    const cplx zn_red = l.m11 - l.m10 * l.m01 / (s.m00 + l.m00);
    CHECK(rel_diff(sh.zp_load, zp_red) < 1e-12);
    CHECK(rel_diff(sh.zn_load, zn_red) < 1e-12);
  }
}

TEST_CASE("two decoupled subsystems make original equal modified") {
  for (int trial = 0; trial < 2000; ++trial) {
    const Mat2c s = dq_to_pn(rand_mfd_dq());
    const Mat2c l = dq_to_pn(rand_mfd_dq());
    for (const auto kind : {InjectionKind::shunt, InjectionKind::series}) {
      const auto o = original_from_modified(s, l, kind);
      CHECK(rel_diff(o.zp_src, s.m00) < 1e-12);
      CHECK(rel_diff(o.zn_src, s.m11) < 1e-12);
      CHECK(rel_diff(o.zp_load, l.m00) < 1e-12);
      CHECK(rel_diff(o.zn_load, l.m11) < 1e-12);
    }
  }
}

TEST_CASE("negative-frequency scalar folding conjugates exactly once") {
  const cplx z(0.4, -1.3);
  const auto f = fold_negative_frequency(-30.0, z);
  CHECK(f.folded);
  CHECK(f.f_hz == doctest::Approx(30.0));
  CHECK(std::abs(f.z - std::conj(z)) < 1e-15);
  const auto g = fold_negative_frequency(30.0, z);
  CHECK_FALSE(g.folded);
  CHECK(std::abs(g.z - z) < 1e-15);
}
