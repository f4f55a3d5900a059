#include "mirrorfreq/stability.hpp"

#include <cmath>
#include <stdexcept>

namespace mirrorfreq::stability {

std::vector<MinorLoopPoint> minor_loop_gain(std::span<const double> f_dq,
                                            std::span<const Mat2c> z_src,
                                            std::span<const Mat2c> z_load) {
  if (f_dq.size() != z_src.size() || f_dq.size() != z_load.size()) {
    throw std::invalid_argument("minor_loop_gain: sample arrays differ in length");
  }
  std::vector<MinorLoopPoint> out;
  out.reserve(f_dq.size());
  for (std::size_t i = 0; i < f_dq.size(); ++i) {
    MinorLoopPoint p;
    p.f_dq = f_dq[i];
    p.loop = z_src[i] * z_load[i].inverse();
    p.eig = p.loop.eigenvalues();
    out.push_back(p);
  }
  return out;
}

Loci build_loci(const std::vector<MinorLoopPoint>& points) {
  Loci loci;
  loci.f_dq.reserve(points.size());
  loci.l1.reserve(points.size());
  loci.l2.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& e = points[i].eig;
    cplx a = e[0], b = e[1];
    if (i > 0) {
      const cplx p1 = loci.l1.back();
      const cplx p2 = loci.l2.back();
      const double keep = std::abs(a - p1) + std::abs(b - p2);
      const double swap = std::abs(b - p1) + std::abs(a - p2);
      // Strict inequality: a tie keeps the previous assignment.
      if (swap < keep) std::swap(a, b);
    }
    loci.f_dq.push_back(points[i].f_dq);
    loci.l1.push_back(a);
    loci.l2.push_back(b);
  }
  return loci;
}

Loci build_loci_pair(std::span<const double> f_dq, std::span<const cplx> e1,
                     std::span<const cplx> e2) {
  if (f_dq.size() != e1.size() || f_dq.size() != e2.size()) {
    throw std::invalid_argument("build_loci_pair: sample arrays differ in length");
  }
  Loci loci;
  loci.f_dq.assign(f_dq.begin(), f_dq.end());
  loci.l1.assign(e1.begin(), e1.end());
  loci.l2.assign(e2.begin(), e2.end());
  return loci;
}

namespace {

// Accumulated winding of one sampled locus around (-1, 0), closed through its
// conjugate mirror. For real-parameter systems the mirrored branch
// contributes the same angle sum as the forward branch, so the total is
//   2 * sum(forward steps) + (step to the mirror start) + (step back home).
// Also tracks the largest single angular step for the grid sentinel.
double locus_winding(const std::vector<cplx>& l, double& max_step, bool& hit_point) {
  const cplx c(-1.0, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < l.size(); ++k) {
    const cplx za = l[k] - c;
    const cplx zb = l[k + 1] - c;
    if (std::abs(za) == 0.0 || std::abs(zb) == 0.0) {
      hit_point = true;
      continue;
    }
    const double step = std::arg(zb / za);
    max_step = std::max(max_step, std::abs(step));
    sum += step;
  }
  double total = 2.0 * sum;
  const cplx zl = l.back() - c;
  const cplx z0 = l.front() - c;
  if (std::abs(zl) == 0.0 || std::abs(z0) == 0.0) {
    hit_point = true;
    return total;
  }
  total += std::arg(std::conj(zl) / zl);   // high-frequency closure to the mirror
  total += std::arg(z0 / std::conj(z0));   // low-frequency closure back home
  return total;
}

}  // namespace

GncResult assess(const Loci& loci, const GncSettings& settings) {
  if (loci.l1.empty() || loci.l1.size() != loci.l2.size() ||
      loci.l1.size() != loci.f_dq.size()) {
    throw std::invalid_argument("gnc assess: empty or inconsistent loci");
  }
  GncResult r;
  r.open_loop_stable_assumed = settings.open_loop_stable_assumed;

  double winding = 0.0;
  bool hit_point = false;
  winding += locus_winding(loci.l1, r.max_arg_step_seen, hit_point);
  winding += locus_winding(loci.l2, r.max_arg_step_seen, hit_point);
  const double turns = winding / kTwoPi;
  r.encirclements = static_cast<int>(std::lround(turns));
  r.winding_residual = std::abs(turns - std::lround(turns));

  r.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < loci.l1.size(); ++k) {
    for (const cplx& z : {loci.l1[k], loci.l2[k]}) {
      const double d = std::abs(z - cplx(-1.0, 0.0));
      if (d < r.margin) {
        r.margin = d;
        r.critical_f = loci.f_dq[k];
      }
    }
  }
  r.marginal = hit_point || r.margin < settings.marginal_distance;
  r.grid_insufficient =
      r.max_arg_step_seen > settings.max_arg_step || r.winding_residual > 0.1;
  r.stable = (r.encirclements == 0) && !r.marginal;
  return r;
}

double loci_set_distance(const Loci& a, const Loci& b) {
  if (a.l1.size() != b.l1.size()) {
    throw std::invalid_argument("loci_set_distance: loci lengths differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.l1.size(); ++k) {
    const double keep = std::abs(a.l1[k] - b.l1[k]) + std::abs(a.l2[k] - b.l2[k]);
    const double swap = std::abs(a.l1[k] - b.l2[k]) + std::abs(a.l2[k] - b.l1[k]);
    const double dist = std::min(keep, swap);
    const double scale = std::max({std::abs(a.l1[k]), std::abs(a.l2[k]), 1e-12});
    worst = std::max(worst, dist / (2.0 * scale));
  }
  return worst;
}

}  // namespace mirrorfreq::stability
