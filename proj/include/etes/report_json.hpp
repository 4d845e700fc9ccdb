#pragma once

#include <json.hpp>

#include "etes/analysis.hpp"

namespace etes {

/// Non-finite numbers serialize as JSON null.
nlohmann::json finite_or_null(double value);

nlohmann::json to_json(const DwellReport& report);
nlohmann::json to_json(const ClosenessReport& report);
nlohmann::json to_json(const EnvelopeReport& report);
nlohmann::json to_json(const TriggerStats& stats);
nlohmann::json to_json(const VDecreaseReport& report);
nlohmann::json to_json(const MomentReport& report);
nlohmann::json to_json(const GradientCheck& report);
nlohmann::json to_json(const AttractorSpec& spec);

}  // namespace etes
