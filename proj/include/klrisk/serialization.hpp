#pragma once

// JSON forms of the library's values.
//
//   Distribution  {"space": [labels], "logp": [float | null]}   (null = zero mass)
//   Family        {"support": [labels], "base_logp": [floats], "T": [[d floats] per point]}
//   Estimator     {"n": n, "space": [labels], "key": "outcome" | "statistic",
//                  "values": {"<key>": Distribution, ...}}
//
// Floats are written with 17 significant digits; non-finite floats are
// written as the strings "inf", "-inf" and "nan".

#include <string>

#include <json.hpp>

#include "klrisk/estimation.hpp"
#include "klrisk/estimator.hpp"
#include "klrisk/expfam.hpp"
#include "klrisk/measure.hpp"

namespace klrisk {

using Json = nlohmann::ordered_json;

std::string dump_json(const Json& value, int indent = 2);

Json to_json(const Distribution& r);
/// Builds a fresh space from the labels.
Distribution distribution_from_json(const Json& j);
/// Requires the labels to match `space` exactly.
Distribution distribution_from_json(const Json& j, const SpacePtr& space);

Json family_to_json(const ExponentialFamily& fam);
/// Validates normalization, full support and minimality; throws LoadError.
ExponentialFamily family_from_json(const Json& j);

/// Keyed by outcome index.
Json estimator_to_json(const DistributionEstimator& est);
/// Keyed by the canonical sum of `fam`; requires the estimator to be
/// constant on its level sets.
Json estimator_to_json_by_statistic(const DistributionEstimator& est, const ExponentialFamily& fam);
DistributionEstimator estimator_from_json(const Json& j, const ExponentialFamily& fam);

Json risk_report_to_json(const RiskReport& report);

/// Reads and parses a JSON file; throws LoadError.
Json read_json_file(const std::string& path);

}  // namespace klrisk
