#include <string>

#include "doctest.h"
#include "lmsa/errors.hpp"
#include "lmsa/harness.hpp"

using namespace lmsa;

namespace {

ExperimentConfig config(ConfigEntries e, std::vector<std::string>* warnings = nullptr) {
  return make_config(e, warnings);
}

}  // namespace

TEST_CASE("empty sweep-dim config gets the default protocol") {
  const auto c = config({{"mode", "sweep-dim"}});
  CHECK(c.h_list == std::vector<double>{0.1});
  CHECK(c.replicas == 10000);
  REQUIRE(c.steps);
  CHECK(*c.steps == 100);
  CHECK(c.d_list == std::vector<std::size_t>{2, 8, 32, 128, 512});
  CHECK(c.window == 10);
}

TEST_CASE("sweep-step defaults") {
  const auto c = config({{"mode", "sweep-step"}, {"potential", "f2"}});
  CHECK(c.d_list == std::vector<std::size_t>{10});
  CHECK(c.h_list.size() == 10);
  CHECK(c.h_list.back() == 1.0);
  REQUIRE(c.time);
  CHECK(*c.time == 20.0);
  CHECK_FALSE(c.steps);
}

TEST_CASE("verify-orders step grid for non-quadratic targets stays below 1/(4 kappa L)") {
  const auto c = config({{"mode", "verify-orders"}, {"potential", "f2(4)"}});
  CHECK(c.h_list.back() == 1.0 / 32);
  CHECK(c.h_list.front() == 1.0 / 512);
  CHECK(c.replicas == 1000000);
}

TEST_CASE("unstable step is rejected") {
  CHECK_THROWS_AS(config({{"mode", "sweep-step"}, {"potential", "quadratic(1,4)"}, {"d", "2"}, {"h", "0.9,0.1"}}),
                  StabilityError);
}

TEST_CASE("unknown keys list the valid keys") {
  try {
    config({{"mode", "sweep-dim"}, {"replica", "10"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("replica") != std::string::npos);
    CHECK(msg.find("replicas") != std::string::npos);
  }
}

TEST_CASE("duplicate keys: last wins with a warning") {
  std::vector<std::string> warnings;
  const auto c = config({{"mode", "sweep-dim"}, {"seed", "3"}, {"seed", "9"}}, &warnings);
  CHECK(c.seed == 9);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("seed") != std::string::npos);
}

TEST_CASE("invalid values name the violated constraint") {
  CHECK_THROWS_AS(config({{"mode", "verify-orders"}, {"h", "0.1"}}), ConfigError);
  CHECK_THROWS_AS(config({{"mode", "sweep-dim"}, {"replicas", "1"}}), ConfigError);
  CHECK_THROWS_AS(config({{"mode", "sweep-dim"}, {"h", "abc"}}), ConfigError);
  CHECK_THROWS_AS(config({{"mode", "sweep-dim"}, {"window", "500"}}), ConfigError);
  CHECK_THROWS_AS(config({{"mode", "lower-bound-check"}, {"potential", "f1"}}), ConfigError);
  CHECK_THROWS_AS(config({{"mode", "fly"}}), ConfigError);
  CHECK_THROWS_AS(config({}), ConfigError);
}

TEST_CASE("config text parsing") {
  const auto e = parse_config_text("# comment\nmode = sweep-dim\n\nseed=4\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0] == std::pair<std::string, std::string>{"mode", "sweep-dim"});
  CHECK_THROWS_AS(parse_config_text("mode sweep-dim\n"), ConfigError);
  // Output files: only header lines count.
  const auto o = parse_config_text("# config: mode=sample\n# note: x\nreplica,x1\n0,1.5\n");
  REQUIRE(o.size() == 1);
  CHECK(o[0].second == "sample");
}

TEST_CASE("header round-trips the effective config") {
  const auto c = config({{"mode", "sweep-step"}, {"potential", "f2"}, {"h", "0.1,0.3"}, {"replicas", "1e3"}});
  const auto again = make_config(parse_config_text(config_header(c)));
  CHECK(config_header(again) == config_header(c));
  CHECK(again.replicas == 1000);
}

TEST_CASE("small sweeps are byte-identical across reruns and worker counts") {
  auto c = config({{"mode", "sweep-dim"}, {"d", "2,4"}, {"replicas", "300"}, {"steps", "20"}});
  c.workers = 1;
  const auto a = run_experiment(c).text;
  c.workers = 3;
  const auto b = run_experiment(c).text;
  CHECK(a == b);
  const auto rerun = make_config(parse_config_text(a));
  CHECK(run_experiment(rerun).text == a);
  CHECK(a.find("axis_value,error_mean,error_std,n_samples,window_lo,window_hi\n") != std::string::npos);
  CHECK(a.find("# fit: slope=") != std::string::npos);
}

TEST_CASE("f1 ground truth from the stationarity identity") {
  const auto c = config({{"mode", "sweep-dim"}});
  const auto mu = target_mean(make_f1(4), c);
  for (double v : mu) CHECK(v == -0.25);
}

TEST_CASE("pilot ground truth is close to the exact mean") {
  auto c = config({{"mode", "sweep-step"},
                   {"potential", "f1"},
                   {"d", "4"},
                   {"ground_truth", "pilot"},
                   {"replicas_gt", "4000"},
                   {"h_gt", "0.02"},
                   {"time_gt", "6"}});
  const auto mu = target_mean(make_f1(4), c);
  for (double v : mu) CHECK(v == doctest::Approx(-0.25).epsilon(0.2));
}

TEST_CASE("symmetric target warns in sweeps") {
  auto c = config({{"mode", "sweep-step"}, {"potential", "quadratic(1)"}, {"d", "3"}, {"h", "0.1,0.2"},
                   {"replicas", "500"}, {"time", "3"}, {"window_time", "1"}});
  const auto text = run_experiment(c).text;
  CHECK(text.find("target is even") != std::string::npos);
}

TEST_CASE("bounds report on the two-block target") {
  const auto c = config({{"mode", "bounds-report"}, {"potential", "quadratic(m=1,L=4,d=16)"}, {"eps", "0.2"}});
  const auto r = run_experiment(c);
  CHECK(r.pass());
  CHECK(r.text.find("h1=0.015625") != std::string::npos);
  CHECK(r.text.find("7.4893306838849") != std::string::npos);
}

TEST_CASE("bounds report for f1 prints h1 = 1/16") {
  const auto c = config({{"mode", "bounds-report"}, {"potential", "f1(10)"}, {"G", "2"}, {"replicas_gt", "500"},
                         {"time_gt", "2"}, {"h_gt", "0.05"}});
  const auto r = run_experiment(c);
  CHECK(r.text.find("h1=0.0625") != std::string::npos);
  CHECK(r.text.find("G=2") != std::string::npos);
}

TEST_CASE("mixing upper bound is 0 when already within eps/2") {
  const auto c = config({{"mode", "bounds-report"}, {"potential", "quadratic(m=1,L=4,d=1)"}, {"eps", "100"}});
  const auto r = run_experiment(c);
  CHECK(r.pass());
  CHECK(r.text.find("\n100,0,0,") != std::string::npos);
}

TEST_CASE("contraction and lower-bound modes pass by default") {
  CHECK(run_experiment(config({{"mode", "verify-contraction"}})).pass());
  CHECK(run_experiment(config({{"mode", "verify-contraction"}, {"potential", "f1(3)"}})).pass());
  CHECK(run_experiment(config({{"mode", "lower-bound-check"}, {"d", "4,16"}})).pass());
}

TEST_CASE("sample mode writes one row per replica") {
  const auto c = config({{"mode", "sample"}, {"potential", "f2(3)"}, {"replicas", "5"}, {"steps", "10"}});
  const auto text = run_experiment(c).text;
  CHECK(text.find("replica,x1,x2,x3\n") != std::string::npos);
  CHECK(text.find("\n4,") != std::string::npos);
}
