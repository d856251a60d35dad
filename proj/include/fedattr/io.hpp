#pragma once

#include <string>

#include "json.hpp"

#include "fedattr/attribution.hpp"
#include "fedattr/estimator.hpp"
#include "fedattr/experiment.hpp"
#include "fedattr/privacy.hpp"

namespace fedattr {

using Json = nlohmann::ordered_json;

// 17 significant digits, enough to round-trip any double.
std::string format_real(double x);

// Version string compiled into the library.
const char* version_string();

Json to_json(const ProtocolConfig& cfg);
Json to_json(const ExperimentConfig& cfg);
Json to_json(const QueryDesign& design);
Json to_json(const AttributionReport& report);
Json to_json(const LeakageAssessment& leakage);

// Missing keys keep their defaults; unknown keys and wrong types throw
// ConfigError. The result is not validated (see resolve_config).
ProtocolConfig protocol_from_json(const Json& j);
ExperimentConfig experiment_from_json(const Json& j);

// Reads and parses a config file. Throws ConfigError for unreadable files and
// malformed JSON.
ExperimentConfig load_experiment_config(const std::string& path);

// Creates parent directories as needed. Throws Error on I/O failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fedattr
