#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace evroute::cli {

/// Process exit statuses of `run`.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        // unexpected internal error
  kUsage = 2,          // bad flags or arguments
  kInvalidInput = 3,   // instance cannot be read, parsed or validated
  kInfeasible = 4,     // no feasible plan, or a negative cycle
  kNotConverged = 5,   // iteration limit reached
  kLimitExceeded = 6,  // enumeration cap hit
};

/// Machine-readable summary of one solver invocation.
struct RunRecord {
  std::string command;
  std::string instance;
  std::map<std::string, std::string> parameters;
  nlohmann::json result;
  double wall_time = 0.0;  // seconds

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);

/// Serializes records as a JSON array, and reads them back.
std::string dump_records(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_records(const std::string& text);

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class TableFormat { Text, Csv };

/// Renders a table. Floating cells use four decimals; infinities print as
/// "inf". CSV quotes cells containing commas, quotes or line breaks.
std::string emit_table(const Table& table, TableFormat format);

/// Four-decimal rendering used by every report.
std::string format_number(double v);

/// Entry point of the command-line tool. Reports go to `out`, diagnostics to
/// `err`; the return value is one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evroute::cli
