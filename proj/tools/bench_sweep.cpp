// Compares the serial and the OpenMP sweep drivers: wall time per repeat and
// a byte-identity check of the serialized results (the parallel driver must
// not change a single bit of the output).
#include <chrono>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "mirrorfreq/io.hpp"
#include "mirrorfreq/sweep.hpp"

#ifdef MIRRORFREQ_HAVE_OPENMP
#include <omp.h>
#endif

using namespace mirrorfreq;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel sweep benchmark"};
  int points = 8;
  int repeats = 3;
  int threads = 0;
  std::string case_name = "oracle-rl";
  std::string injection = "shunt";
  app.add_option("--points", points, "Grid size")->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "Timed repetitions")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Parallel worker threads (0 = runtime default)");
  app.add_option("--case", case_name, "Case preset or config path");
  app.add_option("--injection", injection, "shunt | series")
      ->check(CLI::IsMember({"shunt", "series"}));
  CLI11_PARSE(app, argc, argv);

  sweep::SweepPlan plan;
  try {
    plan.cfg = io::load_case(case_name);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  plan.kind = injection == "series" ? sweep::InjectionKind::series : sweep::InjectionKind::shunt;
  plan.f_dq = sweep::make_log_grid(2.0, 1000.0, points, plan.cfg.base.f1_hz);

  int max_threads = 1;
#ifdef MIRRORFREQ_HAVE_OPENMP
  max_threads = threads > 0 ? threads : omp_get_max_threads();
#endif
  std::printf("case %s, %zu frequency points, %d parallel thread(s)\n", plan.cfg.name.c_str(),
              plan.f_dq.size(), max_threads);

  double best_serial = 1e300, best_parallel = 1e300;
  bool identical = true;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = sweep::run_sweep_serial(plan);
    const double ts = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = sweep::run_sweep(plan, threads);
    const double tp = seconds_since(t0);

    const bool same = io::sweep_to_json(serial) == io::sweep_to_json(parallel);
    identical = identical && same;
    best_serial = std::min(best_serial, ts);
    best_parallel = std::min(best_parallel, tp);
    std::printf("repeat %d: serial %.3f s, parallel %.3f s, outputs %s\n", r + 1, ts, tp,
                same ? "bit-identical" : "DIFFER");
  }
  std::printf("best: serial %.3f s, parallel %.3f s, speedup x%.2f\n", best_serial,
              best_parallel, best_serial / best_parallel);
  if (!identical) {
    std::fprintf(stderr, "error: serial and parallel results differ\n");
    return 1;
  }
  return 0;
}
