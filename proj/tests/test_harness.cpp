#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pqmc/errors.hpp"
#include "pqmc/harness.hpp"

using namespace pqmc;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.d = 2;
  p.methods = {Method::mc, Method::is_mc, Method::rqmc, Method::pqmc, Method::is_rqmc};
  p.m_min = 5;
  p.m_max = 9;
  p.reps = 6;
  p.seed = 3;
  p.window = std::pair<int, int>{5, 9};
  p.timing = false;
  return p;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_result_csv(os, r);
  return os.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("plan parsing") {
    const ExperimentPlan p = ExperimentPlan::parse(
        "# comment\n"
        "integrand = exp-linear:0.5\n"
        "d = 3\n"
        "methods = mc, pqmc,is-rqmc\n"
        "m = 6..12\n"
        "reps = 20\n"
        "proposal = t:5\n"
        "seed = 99\n"
        "window = 8..12\n"
        "radius = 4.5\n"
        "timing = false\n");
    CHECK(p.integrand == "exp-linear:0.5");
    CHECK(p.d == 3);
    CHECK(p.methods == std::vector<Method>{Method::mc, Method::pqmc, Method::is_rqmc});
    CHECK(p.m_min == 6);
    CHECK(p.m_max == 12);
    CHECK(p.reps == 20);
    CHECK(p.seed == 99);
    CHECK(p.window == std::pair<int, int>{8, 12});
    CHECK(p.radius == 4.5);
    CHECK_FALSE(p.timing);
    CHECK(p.slope_window() == std::pair<int, int>{8, 12});
    CHECK_NOTHROW(p.validate());
  }

  TEST_CASE("plan text round trip") {
    ExperimentPlan p = small_plan();
    p.M = 0.3;
    p.output = "out.csv";
    p.radius_scale = 1.5;
    p.window = std::pair<int, int>{5, 9};
    p.randomization = Randomization::digital_shift;
    const ExperimentPlan q = ExperimentPlan::parse(p.to_text());
    CHECK(q.to_text() == p.to_text());
    CHECK(q.methods == p.methods);
    CHECK(q.M == p.M);
    CHECK(q.randomization == Randomization::digital_shift);
    CHECK(ExperimentPlan{}.slope_window() == std::pair<int, int>{9, 16});
  }

  TEST_CASE("plan validation") {
    const auto rejects = [](auto edit) {
      ExperimentPlan p = small_plan();
      edit(p);
      CHECK_THROWS_AS(p.validate(), ValidationError);
    };
    CHECK_NOTHROW(small_plan().validate());
    rejects([](ExperimentPlan& p) { p.methods.clear(); });
    rejects([](ExperimentPlan& p) { p.methods = {Method::mc, Method::mc}; });
    rejects([](ExperimentPlan& p) { p.methods = {Method::qmc}; });
    rejects([](ExperimentPlan& p) { p.m_min = 10; });
    rejects([](ExperimentPlan& p) { p.m_min = 0; });
    rejects([](ExperimentPlan& p) { p.reps = 1; });
    rejects([](ExperimentPlan& p) { p.d = 0; });
    rejects([](ExperimentPlan& p) { p.d = 65; });
    rejects([](ExperimentPlan& p) { p.eps = 0.0; });
    rejects([](ExperimentPlan& p) { p.radius = 0.5; });
    rejects([](ExperimentPlan& p) { p.M = 0.5; });
    rejects([](ExperimentPlan& p) { p.proposal = "t:2"; });
    rejects([](ExperimentPlan& p) { p.proposal = "cauchy"; });
    rejects([](ExperimentPlan& p) { p.integrand = "nope"; });
    rejects([](ExperimentPlan& p) { p.integrand = "class:Ge(0.6,1,2)"; });
    rejects([](ExperimentPlan& p) {
      p.integrand = "class:Gp(1,1,2)";
      p.d = 3;
    });
    rejects([](ExperimentPlan& p) { p.randomization = Randomization::none; });
    rejects([](ExperimentPlan& p) { p.window = std::pair<int, int>{7, 9}; });
    rejects([](ExperimentPlan& p) { p.window = std::pair<int, int>{4, 9}; });
    rejects([](ExperimentPlan& p) { p.window.reset(); });  // default 8..9 is too short

    ExperimentPlan mc_only = small_plan();
    mc_only.methods = {Method::mc};
    mc_only.d = 100;
    CHECK_NOTHROW(mc_only.validate());

    CHECK_THROWS_AS(ExperimentPlan::parse("repetitions = 3\n"), ValidationError);
    CHECK_THROWS_AS(ExperimentPlan::parse("d = two\n"), ValidationError);
    CHECK_THROWS_AS(ExperimentPlan::parse("just text\n"), ValidationError);
    CHECK_THROWS_AS(ExperimentPlan::parse("m = 9\n"), ValidationError);
    CHECK_THROWS_AS(ExperimentPlan::load("/nonexistent/plan"), ValidationError);
  }

  TEST_CASE("named integrands") {
    CHECK(*make_named_integrand("constant:2.5", 2, 0.2).expectation == 2.5);
    CHECK(*make_named_integrand("quadratic", 3, 0.2).expectation == 3.0);
    CHECK(make_named_integrand("class:Gp(1,1,2)", 2, 0.2).growth == GrowthClass::poly(1, 1, 2));
    CHECK_THROWS_AS(make_named_integrand("constant:abc", 2, 0.2), ValidationError);
    CHECK_THROWS_AS(make_named_integrand("paperx", 2, 0.2), ValidationError);
  }

  TEST_CASE("radius resolution") {
    ExperimentPlan p = small_plan();
    // R = sqrt(c ln n) + 1 with c = 3 / (1 - 2M) for is-rqmc.
    CHECK(*resolve_radius(p, Method::is_rqmc, 10) ==
          doctest::Approx(std::sqrt(3.0 / 0.6 * std::log(1024.0)) + 1.0).epsilon(1e-14));
    CHECK(std::fabs(*resolve_radius(p, Method::is_rqmc, 10) - 6.88705) < 1e-5);
    CHECK(*resolve_radius(p, Method::pqmc, 12) ==
          doctest::Approx(std::sqrt(8.0 * std::log(4096.0)) + 1.0).epsilon(1e-14));
    CHECK(*resolve_radius(p, Method::is_pqmc, 12) ==
          doctest::Approx(std::sqrt(2.0 / 0.6 * std::log(4096.0)) + 1.0).epsilon(1e-14));
    CHECK_FALSE(resolve_radius(p, Method::mc, 10).has_value());
    CHECK_FALSE(resolve_radius(p, Method::rqmc, 10).has_value());
    p.radius_scale = 2.0;
    CHECK(*resolve_radius(p, Method::pqmc, 12) ==
          doctest::Approx(std::sqrt(16.0 * std::log(4096.0)) + 1.0).epsilon(1e-14));
    p.radius = 5.0;
    CHECK(*resolve_radius(p, Method::pqmc, 12) == 5.0);
    CHECK(*resolve_radius(p, Method::is_rqmc, 7) == 5.0);
  }

  TEST_CASE("truth") {
    ExperimentPlan p = small_plan();
    CHECK(plan_truth(p) == 1.0);
    p.integrand = "class:Gp(1,1,2)";
    // E[|W|^2 + 1] = d + 1.
    CHECK(plan_truth(p) == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("row seeds") {
    CHECK(row_seed(1, Method::mc, 7) == row_seed(1, Method::mc, 7));
    CHECK(row_seed(1, Method::mc, 7) != row_seed(1, Method::mc, 8));
    CHECK(row_seed(1, Method::mc, 7) != row_seed(1, Method::rqmc, 7));
    CHECK(row_seed(1, Method::mc, 7) != row_seed(2, Method::mc, 7));
  }

  TEST_CASE("constant integrand has zero RMSE") {
    ExperimentPlan p = small_plan();
    p.integrand = "constant:4";
    p.methods = {Method::mc, Method::rqmc, Method::pqmc};
    const ExperimentResult r = run_convergence(p);
    CHECK(r.truth == 4.0);
    for (const auto& row : r.rows) {
      CHECK(row.rmse == 0.0);
      CHECK(row.mean_estimate == 4.0);
    }
    const auto slopes = report(r, {5, 9});
    for (const auto& s : slopes) CHECK(s.exact);
  }

  TEST_CASE("parallel sweep is byte-identical to the serial reference") {
    const ExperimentPlan p = small_plan();
    const std::string ref = csv_of(run_convergence_reference(p));
    for (int threads : {0, 1, 2, 3, 5}) {
      CAPTURE(threads);
      CHECK(csv_of(run_convergence(p, threads)) == ref);
    }
  }

  TEST_CASE("sweep rows") {
    ExperimentPlan p = small_plan();
    p.reps = 40;
    const ExperimentResult r = run_convergence(p);
    REQUIRE(r.rows.size() == p.methods.size() * 5);
    std::size_t i = 0;
    for (Method method : p.methods) {
      std::optional<double> prev_R;
      for (int m = p.m_min; m <= p.m_max; ++m, ++i) {
        const ResultRow& row = r.rows[i];
        CHECK(row.method == method);
        CHECK(row.m == m);
        CHECK(row.n == (std::size_t{1} << m));
        CHECK(row.seed == row_seed(p.seed, method, m));
        CHECK(row.wall_time_ms == 0.0);
        CHECK(row.R_used.has_value() == uses_projection(method));
        if (uses_importance_sampling(method)) {
          CHECK(row.nu == 3.0);
          // Unbiased: mean within 4 standard errors of the truth.
          CHECK(std::fabs(row.mean_estimate - 1.0) <=
                4.0 * row.rmse / std::sqrt(static_cast<double>(p.reps)));
        } else {
          CHECK(std::isinf(row.nu));
        }
        if (row.R_used) {
          if (prev_R) CHECK(*row.R_used > *prev_R);
          prev_R = row.R_used;
        }
      }
    }
  }

  TEST_CASE("result CSV round trip and sidecar") {
    ExperimentPlan p = small_plan();
    const ExperimentResult r = run_convergence(p);
    const std::string text = csv_of(r);
    CHECK(text.rfind(std::string(kResultHeader) + "\n", 0) == 0);
    std::istringstream in(text);
    const ExperimentResult back = read_result_csv(in);
    CHECK(csv_of(back) == text);
    REQUIRE(back.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      CHECK(back.rows[i].rmse == r.rows[i].rmse);
      CHECK(back.rows[i].mean_estimate == r.rows[i].mean_estimate);
      CHECK(back.rows[i].R_used == r.rows[i].R_used);
      CHECK(back.rows[i].seed == r.rows[i].seed);
    }

    const auto j = nlohmann::json::parse(result_metadata_json(p, r));
    CHECK(j.at("schema_version") == kSchemaVersion);
    CHECK(j.contains("git_hash"));
    CHECK(j.at("columns").size() == 12);
    CHECK(j.at("rows") == r.rows.size());
    CHECK(j.at("truth") == 1.0);
    CHECK(j.at("plan").at("methods") == "mc,is-mc,rqmc,pqmc,is-rqmc");

    std::istringstream bad("method,d\nmc,2\n");
    CHECK_THROWS_AS(read_result_csv(bad), ValidationError);
    std::istringstream short_row(std::string(kResultHeader) + "\nmc,2,0.2\n");
    CHECK_THROWS_AS(read_result_csv(short_row), ValidationError);
  }

  TEST_CASE("report recovers exact slopes") {
    std::ifstream in(PQMC_TEST_DATA_DIR "/exact_rates.csv");
    REQUIRE(in);
    const ExperimentResult r = read_result_csv(in);
    const auto slopes = report(r, {8, 16});
    REQUIRE(slopes.size() == 2);
    CHECK(slopes[0].method == Method::mc);
    CHECK(slopes[0].fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(slopes[1].method == Method::is_rqmc);
    CHECK(slopes[1].fit.slope == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(slopes[1].first_m == 8);
    CHECK(slopes[1].last_m == 16);
    CHECK_FALSE(slopes[1].unstable);
    CHECK_THROWS_AS(report(r, {14, 16}), ValidationError);
    CHECK_THROWS_AS(report(ExperimentResult{}, {8, 16}), ValidationError);

    std::ostringstream os;
    write_report_csv(os, slopes);
    CHECK(os.str().rfind("method,first_m,last_m,slope,intercept,residual_rms,points,status\n",
                         0) == 0);
  }

  TEST_CASE("noisy rates are flagged unstable") {
    ExperimentResult r;
    for (int m = 7; m <= 12; ++m) {
      ResultRow row;
      row.method = Method::mc;
      row.m = m;
      row.n = std::size_t{1} << m;
      row.rmse = std::ldexp(1.0, (m % 2 == 0) ? -m / 2 : -m / 2 + 2);
      r.rows.push_back(row);
    }
    CHECK(report(r, {7, 12})[0].unstable);
  }
}
