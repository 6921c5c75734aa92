#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppbound/mc.hpp"
#include "ppbound/theory.hpp"
#include "ppbound/weights.hpp"

namespace ppbound::cli {

/// One pass/fail line of a run's acceptance block.
struct AcceptanceCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
};

nlohmann::json to_json(const AcceptanceCheck& check);

/// Keyed by assumption name ("H1" .. "H6"), each with its proxy value,
/// tolerance and flag, followed by the per-probe details and sigma_hat.
nlohmann::json to_json(const AssumptionReport& report);
nlohmann::json to_json(const ArrayDiagnostics& diag);
/// Summary only; per-replicate series go to CSV.
nlohmann::json to_json(const McReport& report);
nlohmann::json to_json(const OracleResult& result);

/// Shortest decimal that round-trips, "nan" / "inf" for non-finite values.
std::string format_number(double v);

}  // namespace ppbound::cli
