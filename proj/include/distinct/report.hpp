#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "distinct/audit.hpp"
#include "distinct/kernel.hpp"
#include "distinct/permutation_test.hpp"
#include "distinct/power_analysis.hpp"
#include "distinct/robustness.hpp"

namespace distinct {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

Json to_json(const KernelSpec& spec);
// Statistical parameters only; `workers` and the Gram budget never change
// results and are left out so reports stay byte-stable across machines.
Json to_json(const TestConfig& cfg);
Json to_json(const TestResult& r);
Json to_json(const PowerCurve& c);
Json to_json(const MmdMatrix& m);
Json to_json(const BootstrapCi& ci);
Json to_json(const StabilityReport& s);
Json to_json(const AblationReport& a);
Json to_json(const AuditReport& a);

// Flat table rendered as the CSV body of a report.
struct ReportTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
};

struct Report {
    std::string command;
    Json config = Json::object();
    Json results = Json::object();
    ReportTable table;
    double runtime_ms = 0.0;
};

// {schema_version, command, config, results, runtime_ms}
std::string render_json(const Report& report);

// Comment header lines (`# key=value`, config as compact JSON), then the
// table. Numbers use the same shortest round-trip text as the JSON output.
std::string render_csv(const Report& report);

// Formats a scalar cell exactly as the JSON renderer would.
std::string format_cell(const Json& value);

}  // namespace distinct
