// Serial reference sweep vs OpenMP sweep on the same plan: wall time and
// byte-identity of the (timing-free) CSV.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

#ifdef PQMC_HAVE_OPENMP
#include <omp.h>
#endif

#include "pqmc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel convergence sweep"};
  std::size_t d = 5;
  int m_max = 14;
  std::size_t reps = 50;
  int threads = 0;
  app.add_option("--d", d, "dimension");
  app.add_option("--m-max", m_max, "largest m (sweep starts at 7)");
  app.add_option("--reps", reps, "repetitions");
  app.add_option("--threads", threads, "OpenMP threads (0 = default)");
  CLI11_PARSE(app, argc, argv);

  pqmc::ExperimentPlan plan;
  plan.d = d;
  plan.m_min = 7;
  plan.m_max = m_max;
  plan.reps = reps;
  plan.window = std::pair<int, int>{plan.m_min, m_max};
  plan.timing = false;

  const auto timed = [&](auto&& run) {
    const auto t0 = std::chrono::steady_clock::now();
    const pqmc::ExperimentResult r = run();
    const auto t1 = std::chrono::steady_clock::now();
    std::ostringstream csv;
    pqmc::write_result_csv(csv, r);
    return std::make_pair(csv.str(), std::chrono::duration<double>(t1 - t0).count());
  };

  const auto [serial_csv, serial_s] = timed([&] { return pqmc::run_convergence_reference(plan); });
  const auto [par_csv, par_s] = timed([&] { return pqmc::run_convergence(plan, threads); });

  int nthreads = 1;
#ifdef PQMC_HAVE_OPENMP
  nthreads = threads > 0 ? threads : omp_get_max_threads();
#endif
  std::cout << "d=" << d << " m=7.." << m_max << " reps=" << reps << '\n'
            << "serial   " << serial_s << " s\n"
            << "parallel " << par_s << " s (" << nthreads << " threads, speedup "
            << serial_s / par_s << ")\n"
            << "identical CSV: " << (serial_csv == par_csv ? "yes" : "NO") << '\n';
  return serial_csv == par_csv ? 0 : 1;
}
