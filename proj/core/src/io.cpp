#include "covhf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace covhf {

using nlohmann::json;

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void require_object(const json& j, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected a JSON object");
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(std::string(where) + ": unknown field '" + key + "'");
  }
}

std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::gaussian_iid: return "gaussian_iid";
    case NoiseMode::rounding: return "rounding";
  }
  throw std::logic_error("to_string: bad NoiseMode");
}

std::string to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::poisson: return "poisson";
    case SamplingMode::poisson_changepoint: return "poisson_changepoint";
    case SamplingMode::regular: return "regular";
  }
  throw std::logic_error("to_string: bad SamplingMode");
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "none") return NoiseMode::none;
  if (s == "gaussian_iid") return NoiseMode::gaussian_iid;
  if (s == "rounding") return NoiseMode::rounding;
  throw std::invalid_argument("unknown noise mode '" + s + "'");
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "poisson") return SamplingMode::poisson;
  if (s == "poisson_changepoint") return SamplingMode::poisson_changepoint;
  if (s == "regular") return SamplingMode::regular;
  throw std::invalid_argument("unknown sampling mode '" + s + "'");
}

json to_json(const DiffusionSpec& d) {
  return {{"sigma_x", d.sigma_x}, {"sigma_y", d.sigma_y}, {"rho", d.rho}, {"mu_x", d.mu_x},
          {"mu_y", d.mu_y},       {"phi_x", d.phi_x},     {"phi_y", d.phi_y}};
}

json to_json(const NoiseSpec& n) {
  return {{"mode", to_string(n.mode)}, {"omega_x", n.omega_x}, {"omega_y", n.omega_y},
          {"gamma_x", n.gamma_x},      {"gamma_y", n.gamma_y}};
}

json to_json(const SamplingSpec& s) {
  return {{"mode", to_string(s.mode)}, {"n_scale", s.n_scale}, {"p1", s.p1},
          {"p2", s.p2},                {"p1_bar", s.p1_bar},   {"p2_bar", s.p2_bar},
          {"tau1", s.tau1},            {"tau2", s.tau2},       {"horizon", s.horizon},
          {"offset", s.offset}};
}

json to_json(const ScenarioSpec& s) {
  return {{"diffusion", to_json(s.diffusion)},
          {"noise", to_json(s.noise)},
          {"sampling", to_json(s.sampling)},
          {"seed", s.seed},
          {"fine_steps", s.fine_steps}};
}

json to_json(const EstimatorConfig& c) {
  json j = {{"theta", c.theta}, {"adjusted_psi", c.adjusted_psi}};
  j["kn_override"] = c.kn_override ? json(*c.kn_override) : json(nullptr);
  j["horizon_t"] = c.horizon_t ? json(*c.horizon_t) : json(nullptr);
  return j;
}

DiffusionSpec diffusion_from_json(const json& j) {
  require_object(j, "diffusion");
  reject_unknown_keys(j, {"sigma_x", "sigma_y", "rho", "mu_x", "mu_y", "phi_x", "phi_y"}, "diffusion");
  DiffusionSpec d;
  get_if(j, "sigma_x", d.sigma_x);
  get_if(j, "sigma_y", d.sigma_y);
  get_if(j, "rho", d.rho);
  get_if(j, "mu_x", d.mu_x);
  get_if(j, "mu_y", d.mu_y);
  get_if(j, "phi_x", d.phi_x);
  get_if(j, "phi_y", d.phi_y);
  d.validate();
  return d;
}

NoiseSpec noise_from_json(const json& j) {
  require_object(j, "noise");
  reject_unknown_keys(j, {"mode", "omega_x", "omega_y", "gamma_x", "gamma_y"}, "noise");
  NoiseSpec n;
  if (j.contains("mode")) n.mode = noise_mode_from_string(j.at("mode").get<std::string>());
  get_if(j, "omega_x", n.omega_x);
  get_if(j, "omega_y", n.omega_y);
  get_if(j, "gamma_x", n.gamma_x);
  get_if(j, "gamma_y", n.gamma_y);
  n.validate();
  return n;
}

SamplingSpec sampling_from_json(const json& j) {
  require_object(j, "sampling");
  reject_unknown_keys(j, {"mode", "n_scale", "p1", "p2", "p1_bar", "p2_bar", "tau1", "tau2", "horizon", "offset"},
                      "sampling");
  SamplingSpec s;
  if (j.contains("mode")) s.mode = sampling_mode_from_string(j.at("mode").get<std::string>());
  get_if(j, "n_scale", s.n_scale);
  get_if(j, "p1", s.p1);
  get_if(j, "p2", s.p2);
  get_if(j, "p1_bar", s.p1_bar);
  get_if(j, "p2_bar", s.p2_bar);
  get_if(j, "tau1", s.tau1);
  get_if(j, "tau2", s.tau2);
  get_if(j, "horizon", s.horizon);
  get_if(j, "offset", s.offset);
  s.validate();
  return s;
}

ScenarioSpec scenario_from_json(const json& j) {
  require_object(j, "scenario");
  reject_unknown_keys(j, {"diffusion", "noise", "sampling", "seed", "fine_steps"}, "scenario");
  ScenarioSpec s;
  if (j.contains("diffusion")) s.diffusion = diffusion_from_json(j.at("diffusion"));
  if (j.contains("noise")) s.noise = noise_from_json(j.at("noise"));
  if (j.contains("sampling")) s.sampling = sampling_from_json(j.at("sampling"));
  get_if(j, "seed", s.seed);
  get_if(j, "fine_steps", s.fine_steps);
  s.validate();
  return s;
}

EstimatorConfig estimator_from_json(const json& j) {
  require_object(j, "estimator");
  reject_unknown_keys(j, {"theta", "kn_override", "adjusted_psi", "horizon_t"}, "estimator");
  EstimatorConfig c;
  get_if(j, "theta", c.theta);
  get_if(j, "adjusted_psi", c.adjusted_psi);
  if (auto it = j.find("kn_override"); it != j.end() && !it->is_null()) c.kn_override = it->get<std::size_t>();
  if (auto it = j.find("horizon_t"); it != j.end() && !it->is_null()) c.horizon_t = it->get<double>();
  c.validate();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_ticks(std::ostream& out, const TickSeries& series) {
  out << "time,value\n";
  const auto t = series.times();
  const auto v = series.values();
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << format_double(t[k]) << ',' << format_double(v[k]) << '\n';
  }
}

void write_ticks(const std::filesystem::path& path, const TickSeries& series) {
  std::ostringstream os;
  write_ticks(os, series);
  write_text_file(path, os.str());
}

namespace {

double parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument("ticks CSV line " + std::to_string(line) + ": bad number '" +
                                std::string(field) + "'");
  }
  return v;
}

}  // namespace

TickSeries read_ticks(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("ticks CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time,value") throw std::invalid_argument("ticks CSV: header must be 'time,value'");
  std::vector<double> times;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("ticks CSV line " + std::to_string(lineno) + ": expected two fields");
    }
    const std::string_view sv(line);
    times.push_back(parse_number(sv.substr(0, comma), lineno));
    values.push_back(parse_number(sv.substr(comma + 1), lineno));
  }
  return TickSeries(std::move(times), std::move(values));
}

TickSeries read_ticks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ticks(in);
}

}  // namespace covhf
