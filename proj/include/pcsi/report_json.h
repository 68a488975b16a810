#pragma once

// JSON renderings of transcripts and audit reports for the CLI.

#include <string>
#include <vector>

#include "json.hpp"
#include "pcsi/audit.h"
#include "pcsi/protocol.h"

namespace pcsi {

std::string rational_string(const Rational& r);

nlohmann::ordered_json params_json(const ProtocolParams& params);
nlohmann::ordered_json transcript_json(const Transcript& transcript);
nlohmann::ordered_json privacy_json(const PrivacyReport& report);
nlohmann::ordered_json recoverability_json(const RecoverabilityReport& report);
nlohmann::ordered_json rate_grid_json(const std::vector<RateCell>& cells);

}  // namespace pcsi
