#include "covhf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "covhf/baselines.hpp"
#include "covhf/io.hpp"

namespace covhf {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NamedExperiment {
  Experiment e;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::consistency, "consistency"}, {Experiment::rate, "rate"},
    {Experiment::clt_coverage, "clt_coverage"}, {Experiment::epps, "epps"},
    {Experiment::kernel_lemma, "kernel_lemma"}, {Experiment::single_run, "single_run"},
};

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& ne : kExperiments) {
    if (ne.e == e) return ne.name;
  }
  throw std::logic_error("to_string: bad Experiment");
}

Experiment experiment_from_string(const std::string& s) {
  for (const auto& ne : kExperiments) {
    if (s == ne.name) return ne.e;
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  estimator.validate();
  if (replications < 1) throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
  for (auto n : n_grid) {
    if (n == 0) throw std::invalid_argument("ExperimentConfig: n_grid entries must be positive");
  }
  if (experiment == Experiment::rate && n_grid.size() < 2) {
    throw std::invalid_argument("ExperimentConfig: rate needs at least two n_grid entries");
  }
  if (experiment == Experiment::kernel_lemma) {
    if (kn_grid.empty()) throw std::invalid_argument("ExperimentConfig: kn_grid is empty");
    for (auto kn : kn_grid) {
      if (kn < 2) throw std::invalid_argument("ExperimentConfig: kn_grid entries must be >= 2");
    }
  }
  if (experiment == Experiment::epps) {
    if (grid_factors.empty()) throw std::invalid_argument("ExperimentConfig: grid_factors is empty");
    for (double f : grid_factors) {
      if (!(f > 0.0)) throw std::invalid_argument("ExperimentConfig: grid_factors must be positive");
    }
  }
  if (experiment == Experiment::clt_coverage && scenario.sampling.mode == SamplingMode::regular) {
    throw std::invalid_argument("ExperimentConfig: clt_coverage requires Poisson sampling");
  }
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw std::invalid_argument("ExperimentConfig: ci_level must lie in (0, 1)");
}

json to_json(const ExperimentConfig& c) {
  return {{"experiment", to_string(c.experiment)},
          {"scenario", to_json(c.scenario)},
          {"estimator", to_json(c.estimator)},
          {"replications", c.replications},
          {"n_grid", c.n_grid},
          {"kn_grid", c.kn_grid},
          {"grid_factors", c.grid_factors},
          {"ci_level", c.ci_level},
          {"output_dir", c.output_dir},
          {"master_seed", c.master_seed}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown_keys(j,
                      {"experiment", "scenario", "estimator", "replications", "n_grid", "kn_grid",
                       "grid_factors", "ci_level", "output_dir", "master_seed"},
                      "config");
  ExperimentConfig c;
  if (j.contains("experiment")) c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("estimator")) c.estimator = estimator_from_json(j.at("estimator"));
  if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::uint64_t>>();
  if (j.contains("kn_grid")) c.kn_grid = j.at("kn_grid").get<std::vector<std::size_t>>();
  if (j.contains("grid_factors")) c.grid_factors = j.at("grid_factors").get<std::vector<double>>();
  if (j.contains("ci_level")) c.ci_level = j.at("ci_level").get<double>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------- statistics

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: x has no spread");
  return sxy / sxx;
}

namespace {

ColumnStats column_stats(std::vector<double> v, double target) {
  ColumnStats s;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : kNaN;
  s.mc_se = s.sd / std::sqrt(n);
  if (std::isnan(target)) {
    s.bias = kNaN;
    s.rmse = kNaN;
  } else {
    s.bias = s.mean - target;
    double se = 0.0;
    for (double x : v) se += (x - target) * (x - target);
    s.rmse = std::sqrt(se / n);
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

}  // namespace

std::vector<GroupSummary> summarize(const std::vector<std::string>& columns,
                                    const std::vector<ReplicationRow>& rows,
                                    const std::vector<std::pair<std::string, std::vector<double>>>& targets) {
  std::vector<GroupSummary> out;
  auto find_group = [&](const std::string& g) -> GroupSummary* {
    for (auto& s : out) {
      if (s.group == g) return &s;
    }
    return nullptr;
  };
  for (const auto& row : rows) {
    if (!find_group(row.group)) {
      GroupSummary s;
      s.group = row.group;
      s.param = row.param;
      s.targets.assign(columns.size(), kNaN);
      for (const auto& [g, t] : targets) {
        if (g == row.group) s.targets = t;
      }
      if (s.targets.size() != columns.size()) throw std::invalid_argument("summarize: target count mismatch");
      out.push_back(std::move(s));
    }
  }
  for (auto& s : out) {
    std::vector<std::vector<double>> vals(columns.size());
    for (const auto& row : rows) {
      if (row.group != s.group) continue;
      if (!row.ok) {
        ++s.failures;
        continue;
      }
      ++s.n_ok;
      if (row.values.size() != columns.size()) throw std::invalid_argument("summarize: row width mismatch");
      for (std::size_t c = 0; c < columns.size(); ++c) vals[c].push_back(row.values[c]);
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      s.stats.push_back(column_stats(std::move(vals[c]), s.targets[c]));
      if (columns[c] == "covered") s.coverage = s.stats.back().mean;
    }
  }
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("COVHF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- oracle variance

AvarInputs scenario_avar_inputs(const ScenarioSpec& scenario, std::size_t kn, const KernelConstants& k) {
  scenario.validate();
  const auto& d = scenario.diffusion;
  const auto& nz = scenario.noise;
  AvarInputs in;
  in.ic_x = d.sigma_x * d.sigma_x;
  in.ic_y = d.sigma_y * d.sigma_y;
  in.ic_xy = d.rho * d.sigma_x * d.sigma_y;
  switch (nz.mode) {
    case NoiseMode::none:
      break;
    case NoiseMode::gaussian_iid:
      in.psi11 = nz.omega_x * nz.omega_x;
      in.psi22 = nz.omega_y * nz.omega_y;
      break;
    case NoiseMode::rounding:
      in.psi11 = nz.gamma_x * nz.gamma_x / 6.0;
      in.psi22 = nz.gamma_y * nz.gamma_y / 6.0;
      break;
  }
  in.z_x = d.phi_x * d.phi_x * in.ic_x;
  in.z_y = d.phi_y * d.phi_y * in.ic_y;
  in.z_xy = d.phi_x * d.phi_y * in.ic_xy;
  in.z_xY = d.phi_x * in.ic_xy;
  in.z_Xy = d.phi_y * in.ic_xy;
  in.theta = static_cast<double>(kn) / std::sqrt(static_cast<double>(scenario.sampling.n_scale));
  in.constants = k;
  return in;
}

double oracle_variance(const ScenarioSpec& scenario, std::size_t kn, const KernelConstants& k, double t) {
  const auto& s = scenario.sampling;
  if (s.mode == SamplingMode::regular) {
    throw std::invalid_argument("oracle_variance: only Poisson designs have closed-form G and F");
  }
  const AvarInputs base = scenario_avar_inputs(scenario, kn, k);
  const bool change = s.mode == SamplingMode::poisson_changepoint;
  const double inf = std::numeric_limits<double>::infinity();
  const auto segs = poisson_changepoint_segments(base, s.p1, change ? s.p1_bar : s.p1, s.p2,
                                                 change ? s.p2_bar : s.p2, change ? s.tau1 : inf,
                                                 change ? s.tau2 : inf, t);
  return integrated_variance(segs, t, base.has_endogenous());
}

// ---------------------------------------------------------------- experiments

namespace {

struct GroupPlan {
  std::string name;
  double param = 0.0;
  std::vector<double> targets;
  std::function<std::vector<double>(std::uint64_t seed)> fn;
};

struct Plan {
  std::vector<std::string> columns;
  std::vector<GroupPlan> groups;
};

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ScenarioSpec at_scale(const ScenarioSpec& base, std::uint64_t n, std::uint64_t seed) {
  ScenarioSpec s = base;
  if (s.fine_steps != 0 && n != base.sampling.n_scale) {
    const double f = static_cast<double>(n) / static_cast<double>(base.sampling.n_scale);
    s.fine_steps = static_cast<std::uint64_t>(std::ceil(static_cast<double>(s.fine_steps) * f));
  }
  s.sampling.n_scale = n;
  s.seed = seed;
  return s;
}

double eval_horizon(const ExperimentConfig& c) {
  return c.estimator.horizon_t.value_or(c.scenario.sampling.horizon);
}

std::vector<std::uint64_t> n_values(const ExperimentConfig& c) {
  if (!c.n_grid.empty()) return c.n_grid;
  return {c.scenario.sampling.n_scale};
}

Plan plan_estimates(const ExperimentConfig& c, const WeightScheme& scheme) {
  Plan p;
  p.columns = {"estimate", "kn", "n_refresh"};
  const double truth = true_ic(c.scenario.diffusion, eval_horizon(c));
  for (auto n : n_values(c)) {
    p.groups.push_back({"n=" + std::to_string(n), static_cast<double>(n), {truth, kNaN, kNaN},
                        [&c, &scheme, n](std::uint64_t seed) {
                          const auto sim = simulate_scenario(at_scale(c.scenario, n, seed));
                          const auto r = modified_phy(sim.x, sim.y, scheme, c.estimator);
                          return std::vector<double>{r.estimate, static_cast<double>(r.kn),
                                                     static_cast<double>(r.n_refresh)};
                        }});
  }
  return p;
}

Plan plan_clt(const ExperimentConfig& c, const WeightScheme& scheme) {
  Plan p;
  p.columns = {"estimate", "v_t", "lo", "hi", "covered", "z", "kn"};
  const double t = eval_horizon(c);
  const double truth = true_ic(c.scenario.diffusion, t);
  for (auto n : n_values(c)) {
    p.groups.push_back(
        {"n=" + std::to_string(n), static_cast<double>(n), {truth, kNaN, kNaN, kNaN, kNaN, 0.0, kNaN},
         [&c, &scheme, n, t, truth](std::uint64_t seed) {
           const ScenarioSpec spec = at_scale(c.scenario, n, seed);
           const auto sim = simulate_scenario(spec);
           const auto r = modified_phy(sim.x, sim.y, scheme, c.estimator);
           const double v = oracle_variance(spec, r.kn, scheme.constants(), t);
           const double b = 1.0 / static_cast<double>(n);
           const Interval ci = oracle_ci(r.estimate, v, b, c.ci_level);
           const double scale = std::pow(b, 0.25) * std::sqrt(v);
           return std::vector<double>{r.estimate, v, ci.lo, ci.hi, ci.contains(truth) ? 1.0 : 0.0,
                                      (r.estimate - truth) / scale, static_cast<double>(r.kn)};
         }});
  }
  return p;
}

Plan plan_epps(const ExperimentConfig& c, const WeightScheme& scheme) {
  Plan p;
  p.columns = {"modified_phy", "hayashi_yoshida"};
  for (double f : c.grid_factors) p.columns.push_back("rc_" + compact(f));
  const double truth = true_ic(c.scenario.diffusion, eval_horizon(c));
  const std::uint64_t n = c.scenario.sampling.n_scale;
  p.groups.push_back({"n=" + std::to_string(n), static_cast<double>(n),
                      std::vector<double>(p.columns.size(), truth), [&c, &scheme, n](std::uint64_t seed) {
                        const auto sim = simulate_scenario(at_scale(c.scenario, n, seed));
                        const double horizon = c.scenario.sampling.horizon;
                        std::vector<double> out;
                        out.push_back(modified_phy(sim.x, sim.y, scheme, c.estimator).estimate);
                        out.push_back(hayashi_yoshida(sim.x, sim.y));
                        for (double f : c.grid_factors) {
                          const double step = 1.0 / (f * static_cast<double>(n));
                          out.push_back(previous_tick_rc(sim.x, sim.y, step, horizon));
                        }
                        return out;
                      }});
  return p;
}

double max_kernel_deviation(const SamplingSpec& sampling, std::uint64_t seed, std::size_t kn,
                            const WeightScheme& scheme, std::size_t& n_refresh) {
  const auto [s, t] = sample_times(sampling, seed);
  const SyncResult sync = interpolate(s, t);
  n_refresh = sync.refresh.size();
  const OverlapOracle overlap = overlap_matrix(sync, kn, true);
  const auto coeffs = discrete_coeffs(scheme, kn);
  const long k = static_cast<long>(kn);
  // psi_{g,g}(d / kn) for the lags d in [-2kn, 2kn]; c vanishes beyond them, as does psi.
  std::vector<double> psi(static_cast<std::size_t>(4 * k + 1));
  for (long d = -2 * k; d <= 2 * k; ++d) {
    psi[static_cast<std::size_t>(d + 2 * k)] =
        psi_kernel(scheme, WeightFn::g, WeightFn::g, static_cast<double>(d) / static_cast<double>(k));
  }
  double worst = 0.0;
  const long rows = static_cast<long>(overlap.rows());
  const long cols = static_cast<long>(overlap.cols());
  if (rows <= k || cols <= k) throw std::runtime_error("kernel_lemma: design too short for kn");
  for (long pp = k; pp < rows; ++pp) {
    for (long qq = std::max(k, pp - 2 * k); qq <= std::min(cols - 1, pp + 2 * k); ++qq) {
      const double c = discrete_c(coeffs.g, coeffs.g, overlap, static_cast<std::size_t>(pp),
                                  static_cast<std::size_t>(qq));
      worst = std::max(worst, std::abs(c - psi[static_cast<std::size_t>(qq - pp + 2 * k)]));
    }
  }
  return worst;
}

Plan plan_kernel_lemma(const ExperimentConfig& c, const WeightScheme& scheme) {
  Plan p;
  p.columns = {"max_dev", "n_scale", "n_refresh"};
  for (auto kn : c.kn_grid) {
    const double ratio = static_cast<double>(kn) / c.estimator.theta;
    const auto n = static_cast<std::uint64_t>(std::ceil(ratio * ratio));
    p.groups.push_back({"kn=" + std::to_string(kn), static_cast<double>(kn), {0.0, kNaN, kNaN},
                        [&c, &scheme, kn, n](std::uint64_t seed) {
                          SamplingSpec sampling = c.scenario.sampling;
                          sampling.n_scale = n;
                          std::size_t n_refresh = 0;
                          const double dev = max_kernel_deviation(sampling, seed, kn, scheme, n_refresh);
                          return std::vector<double>{dev, static_cast<double>(n),
                                                     static_cast<double>(n_refresh)};
                        }});
  }
  return p;
}

Plan plan_single(const ExperimentConfig& c, const WeightScheme& scheme) {
  Plan p;
  p.columns = {"estimate", "hayashi_yoshida", "kn", "n_refresh", "terms"};
  const double truth = true_ic(c.scenario.diffusion, eval_horizon(c));
  const std::uint64_t n = c.scenario.sampling.n_scale;
  p.groups.push_back({"single", static_cast<double>(n), {truth, truth, kNaN, kNaN, kNaN},
                      [&c, &scheme, n](std::uint64_t seed) {
                        const auto sim = simulate_scenario(at_scale(c.scenario, n, seed));
                        const auto r = modified_phy(sim.x, sim.y, scheme, c.estimator);
                        return std::vector<double>{r.estimate, hayashi_yoshida(sim.x, sim.y),
                                                   static_cast<double>(r.kn),
                                                   static_cast<double>(r.n_refresh),
                                                   static_cast<double>(r.terms)};
                      }});
  return p;
}

Plan make_plan(const ExperimentConfig& c, const WeightScheme& scheme) {
  switch (c.experiment) {
    case Experiment::consistency:
    case Experiment::rate:
      return plan_estimates(c, scheme);
    case Experiment::clt_coverage:
      return plan_clt(c, scheme);
    case Experiment::epps:
      return plan_epps(c, scheme);
    case Experiment::kernel_lemma:
      return plan_kernel_lemma(c, scheme);
    case Experiment::single_run:
      return plan_single(c, scheme);
  }
  throw std::logic_error("make_plan: bad Experiment");
}

std::string scenario_hash(const ExperimentConfig& c) {
  const std::string doc = json{{"scenario", to_json(c.scenario)}, {"estimator", to_json(c.estimator)}}.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ResultRecord run(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const WeightScheme scheme = WeightScheme::triangular();
  (void)scheme.constants();  // fill the cache before the workers share it

  const Plan plan = make_plan(config, scheme);
  const std::size_t reps = config.replications;
  const std::size_t total = plan.groups.size() * reps;

  ResultRecord rec;
  rec.experiment = to_string(config.experiment);
  rec.scenario_hash = scenario_hash(config);
  rec.master_seed = config.master_seed;
  rec.replications = reps;
  rec.columns = plan.columns;
  rec.rows.resize(total);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const GroupPlan& g = plan.groups[task / reps];
      ReplicationRow& row = rec.rows[task];
      row.group = g.name;
      row.param = g.param;
      row.rep = task % reps;
      row.seed = replication_seed(config.master_seed, row.rep);
      try {
        row.values = g.fn(row.seed);
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.values.assign(plan.columns.size(), kNaN);
      }
    }
  };
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(total, 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::vector<std::pair<std::string, std::vector<double>>> targets;
  for (const auto& g : plan.groups) targets.emplace_back(g.name, g.targets);
  rec.summaries = summarize(rec.columns, rec.rows, targets);

  if (config.experiment == Experiment::rate) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& s : rec.summaries) {
      if (s.n_ok == 0 || !(s.stats[0].rmse > 0.0)) continue;
      lx.push_back(std::log(s.param));
      ly.push_back(std::log(s.stats[0].rmse));
    }
    if (lx.size() >= 2) rec.slope = ols_slope(lx, ly);
  }
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

// ---------------------------------------------------------------- persistence

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json stats_json(const ColumnStats& s) {
  return {{"mean", num(s.mean)}, {"sd", num(s.sd)},     {"mc_se", num(s.mc_se)},
          {"bias", num(s.bias)}, {"rmse", num(s.rmse)}, {"median", num(s.median)}};
}

ColumnStats stats_from(const json& j) {
  return {num_from(j.at("mean")), num_from(j.at("sd")),   num_from(j.at("mc_se")),
          num_from(j.at("bias")), num_from(j.at("rmse")), num_from(j.at("median"))};
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums_from(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(num_from(x));
  return v;
}

}  // namespace

json to_json(const ResultRecord& r, bool include_timing) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = {{"group", row.group}, {"param", row.param}, {"rep", row.rep},
               {"seed", row.seed},   {"ok", row.ok},       {"values", nums(row.values)}};
    if (!row.ok) jr["error"] = row.error;
    rows.push_back(std::move(jr));
  }
  json sums = json::array();
  for (const auto& s : r.summaries) {
    json cols = json::object();
    for (std::size_t c = 0; c < r.columns.size() && c < s.stats.size(); ++c) {
      cols[r.columns[c]] = stats_json(s.stats[c]);
    }
    json js = {{"group", s.group},        {"param", s.param}, {"n_ok", s.n_ok},
               {"failures", s.failures},  {"targets", nums(s.targets)}, {"columns", cols}};
    js["coverage"] = s.coverage ? num(*s.coverage) : json(nullptr);
    sums.push_back(std::move(js));
  }
  json j = {{"schema_version", r.schema_version},
            {"experiment", r.experiment},
            {"scenario_hash", r.scenario_hash},
            {"master_seed", r.master_seed},
            {"replications", r.replications},
            {"columns", r.columns},
            {"rows", rows},
            {"summaries", sums}};
  j["slope"] = r.slope ? num(*r.slope) : json(nullptr);
  if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

ResultRecord result_from_json(const json& j) {
  ResultRecord r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kResultSchemaVersion) {
    throw std::invalid_argument("result_from_json: unsupported schema version " + std::to_string(r.schema_version));
  }
  r.experiment = j.at("experiment").get<std::string>();
  r.scenario_hash = j.at("scenario_hash").get<std::string>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.replications = j.at("replications").get<std::size_t>();
  r.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    ReplicationRow row;
    row.group = jr.at("group").get<std::string>();
    row.param = jr.at("param").get<double>();
    row.rep = jr.at("rep").get<std::size_t>();
    row.seed = jr.at("seed").get<std::uint64_t>();
    row.ok = jr.at("ok").get<bool>();
    row.values = nums_from(jr.at("values"));
    if (jr.contains("error")) row.error = jr.at("error").get<std::string>();
    r.rows.push_back(std::move(row));
  }
  for (const auto& js : j.at("summaries")) {
    GroupSummary s;
    s.group = js.at("group").get<std::string>();
    s.param = js.at("param").get<double>();
    s.n_ok = js.at("n_ok").get<std::size_t>();
    s.failures = js.at("failures").get<std::size_t>();
    s.targets = nums_from(js.at("targets"));
    for (const auto& col : r.columns) s.stats.push_back(stats_from(js.at("columns").at(col)));
    if (!js.at("coverage").is_null()) s.coverage = js.at("coverage").get<double>();
    r.summaries.push_back(std::move(s));
  }
  if (!j.at("slope").is_null()) r.slope = j.at("slope").get<double>();
  if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return r;
}

std::string to_csv(const ResultRecord& r) {
  std::ostringstream os;
  os << "group,param,rep,seed,ok";
  for (const auto& c : r.columns) os << ',' << c;
  os << '\n';
  for (const auto& row : r.rows) {
    os << row.group << ',' << format_double(row.param) << ',' << row.rep << ',' << row.seed << ','
       << (row.ok ? 1 : 0);
    for (double v : row.values) os << ',' << format_double(v);
    os << '\n';
  }
  for (const auto& s : r.summaries) {
    os << s.group << ',' << format_double(s.param) << ",summary,," << s.n_ok;
    for (const auto& st : s.stats) os << ',' << format_double(st.mean);
    os << '\n';
  }
  return os.str();
}

std::filesystem::path export_record(const ResultRecord& r, const std::filesystem::path& dir,
                                    ExportFormat format) {
  if (format == ExportFormat::csv) {
    const auto path = dir / (r.experiment + ".csv");
    write_text_file(path, to_csv(r));
    return path;
  }
  const auto path = dir / (r.experiment + ".json");
  write_text_file(path, to_json(r).dump(2) + "\n");
  write_text_file(dir / (r.experiment + ".timing.json"),
                  json{{"wall_clock_seconds", r.wall_clock_seconds}}.dump(2) + "\n");
  return path;
}

// ---------------------------------------------------------------- self-test

namespace {

std::size_t column_index(const ResultRecord& r, const std::string& name) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), name);
  if (it == r.columns.end()) throw std::invalid_argument("self_test: missing column " + name);
  return static_cast<std::size_t>(it - r.columns.begin());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<const GroupSummary*> by_param(const ResultRecord& r) {
  std::vector<const GroupSummary*> out;
  for (const auto& s : r.summaries) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->param < b->param; });
  return out;
}

}  // namespace

std::vector<ThresholdCheck> self_test(const ExperimentConfig& config, const ResultRecord& r) {
  std::vector<ThresholdCheck> out;
  std::size_t failures = 0;
  for (const auto& s : r.summaries) failures += s.failures;
  out.push_back({"no failed replications", failures == 0, fmt("%g failures", static_cast<double>(failures))});

  switch (config.experiment) {
    case Experiment::consistency: {
      const auto sorted = by_param(r);
      for (const auto* s : sorted) {
        const auto& st = s->stats[0];
        const bool ok = std::abs(st.bias) <= 3.0 * st.mc_se;
        out.push_back({s->group + " mean within 3 MC SE", ok,
                       fmt("mean %.6g, target %.6g, MC SE %.3g", st.mean, s->targets[0], st.mc_se)});
      }
      bool dec = true;
      std::string trail;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        trail += (k ? " > " : "") + fmt("%.4g", sorted[k]->stats[0].rmse);
        if (k > 0 && !(sorted[k]->stats[0].rmse < sorted[k - 1]->stats[0].rmse)) dec = false;
      }
      out.push_back({"RMSE strictly decreasing in n", dec, trail});
      break;
    }
    case Experiment::rate: {
      const bool ok = r.slope && *r.slope >= -0.35 && *r.slope <= -0.15;
      out.push_back({"log-RMSE slope in [-0.35, -0.15]", ok, r.slope ? fmt("slope %.4f", *r.slope) : "no slope"});
      break;
    }
    case Experiment::clt_coverage: {
      const double lo = config.ci_level - 0.04;
      const double hi = config.ci_level + 0.03;
      for (const auto& s : r.summaries) {
        const bool ok = s.coverage && *s.coverage >= lo && *s.coverage <= hi;
        out.push_back({s.group + " coverage in band", ok,
                       fmt("coverage %.4f, band [%.2f, %.2f]", s.coverage.value_or(kNaN), lo, hi)});
      }
      break;
    }
    case Experiment::epps: {
      const auto& s = r.summaries.at(0);
      const double truth = s.targets[0];
      std::size_t finest = 0;
      for (std::size_t k = 1; k < config.grid_factors.size(); ++k) {
        if (config.grid_factors[k] > config.grid_factors[finest]) finest = k;
      }
      const std::size_t rc = column_index(r, "rc_" + compact(config.grid_factors[finest]));
      const double rc_mean = s.stats[rc].mean;
      out.push_back({"finest previous-tick RC mean < 0.6 truth", rc_mean < 0.6 * truth,
                     fmt("mean %.5g vs 0.6 x %.5g", rc_mean, truth)});
      const std::size_t phy = column_index(r, "modified_phy");
      const double pm = s.stats[phy].mean;
      out.push_back({"modified PHY mean within 15% of truth", std::abs(pm - truth) <= 0.15 * std::abs(truth),
                     fmt("mean %.5g vs truth %.5g", pm, truth)});
      break;
    }
    case Experiment::kernel_lemma: {
      const auto sorted = by_param(r);
      bool dec = true;
      std::string trail;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        trail += (k ? " > " : "") + fmt("%.4g", sorted[k]->stats[0].median);
        if (k > 0 && !(sorted[k]->stats[0].median < sorted[k - 1]->stats[0].median)) dec = false;
      }
      out.push_back({"median max deviation strictly decreasing in kn", dec, trail});
      break;
    }
    case Experiment::single_run:
      break;
  }
  return out;
}

}  // namespace covhf
