#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "racediag/analyzers.hpp"
#include "racediag/diagnosis.hpp"
#include "racediag/trace.hpp"

namespace racediag {

inline constexpr const char* kToolName = "racediag";
inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

Json meta_json(const TraceMeta& m);
Json race_json(const Trace& t, const RacePair& p);
/// {"total", "write-write", "write-read", "read-write"}
Json race_counts_json(const std::vector<RacePair>& races);
Json fasttrack_json(const Trace& t, const FastTrackReport& r);
Json classification_json(const Trace& t, const Classification& c);

struct OracleCheck {
  std::size_t checked = 0;
  std::size_t agree = 0;
  std::vector<std::pair<Classification, Verdict>> disagreements;

  double agreement() const { return checked ? static_cast<double>(agree) / checked : 1.0; }
};

/// Verdict summary in the "races/guaranteed" form, e.g. "3/2".
std::string xg_string(const DiagnosisReport& r);

Json diagnosis_json(const Trace& t, const DiagnosisReport& r,
                    const std::optional<OracleCheck>& oracle = std::nullopt);

/// Document skeleton with tool, version, command and trace metadata.
Json document(const std::string& command, const Trace& t);

std::string race_line(const Trace& t, const RacePair& p);

}  // namespace racediag
