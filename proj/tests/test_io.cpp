#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "covhf/io.hpp"

using namespace covhf;
using nlohmann::json;

TEST_CASE("scenario JSON round trip") {
  ScenarioSpec s;
  s.diffusion.rho = -0.3;
  s.diffusion.sigma_x = 0.37;
  s.diffusion.phi_y = 0.1;
  s.noise.mode = NoiseMode::rounding;
  s.noise.gamma_x = 0.01;
  s.noise.gamma_y = 0.02;
  s.sampling.mode = SamplingMode::poisson_changepoint;
  s.sampling.n_scale = 12345;
  s.sampling.p1 = 0.3;
  s.sampling.p2_bar = 2.5;
  s.sampling.tau1 = 0.25;
  s.seed = 0xFFFFFFFFFFFFFFFFULL;
  s.fine_steps = 1000000;
  const json j = to_json(s);
  const ScenarioSpec back = scenario_from_json(json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.seed == s.seed);
  CHECK(back.noise.mode == NoiseMode::rounding);
  CHECK(back.sampling.mode == SamplingMode::poisson_changepoint);
  CHECK(back.diffusion.sigma_x == 0.37);
}

TEST_CASE("estimator JSON round trip") {
  EstimatorConfig c;
  CHECK(to_json(c)["kn_override"].is_null());
  CHECK(to_json(c)["horizon_t"].is_null());
  c.kn_override = 12;
  c.horizon_t = 0.5;
  c.adjusted_psi = false;
  c.theta = 1.3;
  const EstimatorConfig back = estimator_from_json(to_json(c));
  CHECK(back.kn_override == std::optional<std::size_t>(12));
  CHECK(back.horizon_t == std::optional<double>(0.5));
  CHECK_FALSE(back.adjusted_psi);
  CHECK(back.theta == 1.3);
}

TEST_CASE("missing fields keep defaults, unknown fields are rejected") {
  const ScenarioSpec s = scenario_from_json(json::parse(R"({"diffusion": {"rho": 0.5}})"));
  CHECK(s.diffusion.rho == 0.5);
  CHECK(s.sampling.n_scale == SamplingSpec{}.n_scale);
  CHECK_THROWS_AS(scenario_from_json(json::parse(R"({"diffusion": {"rhoo": 0.5}})")), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(json::parse(R"({"sed": 1})")), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(json::parse("[1, 2]")), std::invalid_argument);
  CHECK_THROWS_AS(noise_from_json(json::parse(R"({"mode": "laplace"})")), std::invalid_argument);
  CHECK_THROWS_AS(sampling_from_json(json::parse(R"({"mode": "hawkes"})")), std::invalid_argument);
}

TEST_CASE("mode strings") {
  for (auto m : {NoiseMode::none, NoiseMode::gaussian_iid, NoiseMode::rounding}) {
    CHECK(noise_mode_from_string(to_string(m)) == m);
  }
  for (auto m : {SamplingMode::poisson, SamplingMode::poisson_changepoint, SamplingMode::regular}) {
    CHECK(sampling_mode_from_string(to_string(m)) == m);
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("tick CSV round trip") {
  const TickSeries s({0.0, 1.0 / 3.0, 0.7, 0.9999999999999999}, {100.0, 100.1 / 7.0, -1e-17, 5.0});
  std::stringstream ss;
  write_ticks(ss, s);
  CHECK(ss.str().rfind("time,value\n", 0) == 0);
  const TickSeries back = read_ticks(ss);
  CHECK(std::ranges::equal(back.times(), s.times()));
  CHECK(std::ranges::equal(back.values(), s.values()));

  const auto dir = std::filesystem::temp_directory_path() / "covhf_io_test";
  std::filesystem::remove_all(dir);
  write_ticks(dir / "nested" / "x.csv", s);
  CHECK(std::ranges::equal(read_ticks(dir / "nested" / "x.csv").values(), s.values()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("tick CSV errors") {
  std::stringstream no_header("0,1\n");
  CHECK_THROWS_AS(read_ticks(no_header), std::invalid_argument);
  std::stringstream bad_number("time,value\n0,abc\n");
  CHECK_THROWS_AS(read_ticks(bad_number), std::invalid_argument);
  std::stringstream one_field("time,value\n0\n");
  CHECK_THROWS_AS(read_ticks(one_field), std::invalid_argument);
  std::stringstream unordered("time,value\n1,1\n0,2\n");
  CHECK_THROWS_AS(read_ticks(unordered), std::invalid_argument);
  CHECK_THROWS_AS(read_ticks(std::filesystem::path("/nonexistent/ticks.csv")), std::runtime_error);
}
