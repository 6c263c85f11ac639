// pqmc command-line front end: generate / estimate / convergence / verify / report.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "pqmc/errors.hpp"
#include "pqmc/estimators.hpp"
#include "pqmc/harness.hpp"
#include "pqmc/lowdisc.hpp"
#include "pqmc/oracle.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitAccuracy = 3;

std::pair<int, int> parse_window(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) throw pqmc::ValidationError("window must look like a..b");
  try {
    return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 2))};
  } catch (const std::exception&) {
    throw pqmc::ValidationError("window must look like a..b");
  }
}

// Opens `path` for writing, or returns std::cout for "" / "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw pqmc::ValidationError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected and importance-sampled quasi-Monte Carlo for Gaussian expectations"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "dump Sobol' points as CSV");
  int gen_d = 2;
  int gen_m = 8;
  std::string gen_rand = "none";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--d", gen_d, "dimension")->check(CLI::Range(1, pqmc::kMaxSobolDim));
  gen->add_option("--m", gen_m, "log2 of the number of points")
      ->check(CLI::Range(0, pqmc::kMaxSobolLog2));
  gen->add_option("--randomization", gen_rand, "none | owen-scramble | digital-shift");
  gen->add_option("--seed", gen_seed, "randomization seed");
  gen->add_option("--out", gen_out, "output CSV (stdout if omitted)");

  // estimate
  auto* est = app.add_subcommand("estimate", "single estimator run");
  std::string est_integrand = "paper";
  std::size_t est_d = 2;
  double est_M = 0.2;
  std::string est_method = "is-rqmc";
  int est_m = 10;
  std::string est_proposal = "t:3";
  std::uint64_t est_seed = 1;
  std::optional<double> est_radius;
  std::string est_rand = "owen-scramble";
  est->add_option("--integrand", est_integrand,
                  "paper | constant:<c> | linear | quadratic | exp-linear:<a> | class:<expr>");
  est->add_option("--d", est_d, "dimension");
  est->add_option("--M", est_M, "rate M of the `paper` integrand");
  est->add_option("--method", est_method, "mc | is-mc | qmc | rqmc | pqmc | is-pqmc | is-rqmc");
  est->add_option("--m", est_m, "n = 2^m");
  est->add_option("--proposal", est_proposal, "IS proposal: t:<nu> or normal");
  est->add_option("--seed", est_seed, "seed");
  est->add_option("--radius", est_radius, "fixed projection radius");
  est->add_option("--randomization", est_rand, "none | owen-scramble | digital-shift");

  // convergence
  auto* conv = app.add_subcommand("convergence", "RMSE sweep over m for several methods");
  std::string conv_plan;
  std::string conv_out;
  int conv_threads = 0;
  bool conv_serial = false;
  bool conv_no_timing = false;
  conv->add_option("--plan", conv_plan, "plan file (key = value)")->required();
  conv->add_option("--out", conv_out, "result CSV (overrides the plan's output)");
  conv->add_option("--threads", conv_threads, "worker threads (0 = OpenMP default)");
  conv->add_flag("--serial", conv_serial, "use the serial reference sweep");
  conv->add_flag("--no-timing", conv_no_timing, "write wall_time_ms = 0");

  // verify
  auto* ver = app.add_subcommand("verify", "numerical checks of the error and variation bounds");
  std::string ver_suite = "lemma";
  std::string ver_out;
  ver->add_option("--suite", ver_suite, "lemma | derivative | all")
      ->check(CLI::IsMember({"lemma", "derivative", "all"}));
  ver->add_option("--out", ver_out, "BoundReport CSV (stdout if omitted)");

  // report
  auto* rep = app.add_subcommand("report", "fit per-method RMSE slopes from a result CSV");
  std::string rep_csv;
  std::string rep_window;
  std::string rep_out;
  rep->add_option("--csv", rep_csv, "result CSV")->required();
  rep->add_option("--window", rep_window, "slope window a..b in m");
  rep->add_option("--out", rep_out, "machine-readable summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      pqmc::PointSet p = pqmc::sobol_points(gen_m, gen_d);
      switch (pqmc::parse_randomization(gen_rand)) {
        case pqmc::Randomization::none: break;
        case pqmc::Randomization::owen_scramble: p = pqmc::owen_scramble(p, gen_seed); break;
        case pqmc::Randomization::digital_shift: p = pqmc::digital_shift(p, gen_seed); break;
      }
      Output out(gen_out);
      pqmc::write_csv(out.stream(), p);
      return 0;
    }

    if (*est) {
      pqmc::EstimatorConfig cfg;
      cfg.method = pqmc::parse_method(est_method);
      cfg.integrand = pqmc::make_named_integrand(est_integrand, est_d, est_M);
      if (pqmc::uses_importance_sampling(cfg.method)) {
        cfg.proposal = pqmc::parse_distribution(est_proposal, est_d);
      }
      if (est_radius) cfg.projection = pqmc::ProjectionConfig(*est_radius, 1.0);
      cfg.m = est_m;
      cfg.randomization = pqmc::parse_randomization(est_rand);
      cfg.seed = est_seed;
      const pqmc::Estimate e = pqmc::estimate(cfg);
      std::ostringstream line;
      line.precision(17);
      line << "method=" << pqmc::to_string(e.method) << " n=" << e.n << " value=" << e.value;
      if (e.R_used) line << " R_used=" << *e.R_used;
      line << " seed=" << e.seed;
      if (cfg.integrand.expectation) line << " truth=" << *cfg.integrand.expectation;
      std::cout << line.str() << '\n';
      return 0;
    }

    if (*conv) {
      pqmc::ExperimentPlan plan = pqmc::ExperimentPlan::load(conv_plan);
      if (!conv_out.empty()) plan.output = conv_out;
      if (conv_no_timing) plan.timing = false;
      plan.validate();
      const pqmc::ExperimentResult result = conv_serial
                                                ? pqmc::run_convergence_reference(plan)
                                                : pqmc::run_convergence(plan, conv_threads);
      if (plan.output.empty()) {
        pqmc::write_result_csv(std::cout, result);
        pqmc::write_report_table(std::cerr, pqmc::report(result, plan.slope_window()));
      } else {
        pqmc::save_result(plan.output, plan, result);
        pqmc::write_report_table(std::cout, pqmc::report(result, plan.slope_window()));
      }
      return 0;
    }

    if (*ver) {
      std::vector<pqmc::BoundReport> reports;
      if (ver_suite == "lemma" || ver_suite == "all") {
        reports = pqmc::run_lemma_suite();
      }
      if (ver_suite == "derivative" || ver_suite == "all") {
        const auto t = pqmc::DistributionSpec::student_t(1, 3.0);
        for (double M : {0.1, 0.2, 0.3}) {
          const pqmc::TestIntegrand h = pqmc::make_paper_test_function(M, 1);
          const auto ratio = pqmc::certify_is_ratio(M, h.growth->B, t);
          reports.push_back(pqmc::is_derivative_bound(h, t, ratio));
        }
      }
      Output out(ver_out);
      pqmc::write_bound_reports(out.stream(), reports);
      for (const auto& r : reports) {
        if (!r.pass) return kExitFailed;
      }
      return 0;
    }

    if (*rep) {
      std::ifstream in(rep_csv);
      if (!in) throw pqmc::ValidationError("cannot open '" + rep_csv + "'");
      const pqmc::ExperimentResult result = pqmc::read_result_csv(in);
      if (result.rows.empty()) throw pqmc::ValidationError("result CSV has no rows");
      std::pair<int, int> window;
      if (!rep_window.empty()) {
        window = parse_window(rep_window);
      } else {
        int lo = result.rows.front().m;
        int hi = lo;
        for (const auto& r : result.rows) {
          lo = std::min(lo, r.m);
          hi = std::max(hi, r.m);
        }
        window = {std::max(8, lo + 2), hi};
      }
      const auto slopes = pqmc::report(result, window);
      pqmc::write_report_table(std::cout, slopes);
      if (!rep_out.empty()) {
        Output out(rep_out);
        pqmc::write_report_csv(out.stream(), slopes);
      }
      return 0;
    }
  } catch (const pqmc::AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << '\n';
    return kExitAccuracy;
  } catch (const pqmc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return 0;
}
