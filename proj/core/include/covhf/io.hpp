#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "covhf/preavg.hpp"
#include "covhf/simulate.hpp"

namespace covhf {

// JSON documents mirror the structs field for field. Missing fields keep their
// defaults; unknown fields are rejected so that typos do not pass silently.

nlohmann::json to_json(const DiffusionSpec& d);
nlohmann::json to_json(const NoiseSpec& n);
nlohmann::json to_json(const SamplingSpec& s);
nlohmann::json to_json(const ScenarioSpec& s);
nlohmann::json to_json(const EstimatorConfig& c);

DiffusionSpec diffusion_from_json(const nlohmann::json& j);
NoiseSpec noise_from_json(const nlohmann::json& j);
SamplingSpec sampling_from_json(const nlohmann::json& j);
ScenarioSpec scenario_from_json(const nlohmann::json& j);
EstimatorConfig estimator_from_json(const nlohmann::json& j);

std::string to_string(NoiseMode m);
std::string to_string(SamplingMode m);
NoiseMode noise_mode_from_string(const std::string& s);
SamplingMode sampling_mode_from_string(const std::string& s);

/// Throws std::invalid_argument naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* where);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// `time,value` CSV with a header line.
void write_ticks(std::ostream& out, const TickSeries& series);
void write_ticks(const std::filesystem::path& path, const TickSeries& series);
TickSeries read_ticks(std::istream& in);
TickSeries read_ticks(const std::filesystem::path& path);

}  // namespace covhf
