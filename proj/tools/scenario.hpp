// Copyright 2026 The qcomp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario runner behind the qcomp command-line tool.
//
// A scenario is a JSON object
//
//   {
//     "schema":  "qcomp.scenario/1",
//     "command": "build" | "eval" | "seesaw" | "rigidity" | "spectra" | "pipeline" | "compose",
//     "target":  command-specific name, e.g. "stabilizer-honest",
//     "inputs":  {"verifier": "path/to/file.qv", ...},
//     "params":  {"n": 2, "k": 2, ...},
//     "seed":    1,
//     "tol":     1e-9,
//     "format":  "json" | "csv"
//   }
//
// Only "command" is required. Relative input paths are resolved against the
// scenario file's directory.

#ifndef QCOMP_TOOLS_SCENARIO_HPP
#define QCOMP_TOOLS_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qcomp::cli {

inline constexpr const char *kScenarioSchema = "qcomp.scenario/1";
inline constexpr const char *kReportSchema = "qcomp.report/1";

/// Usage or guard error; maps to exit status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::string command;
    std::string target;
    std::map<std::string, std::string> inputs;  // resolved paths
    nlohmann::json params = nlohmann::json::object();
    uint64_t seed = 1;
    double tol = 1e-9;
    std::string format = "json";
};

/// Parses and validates a scenario object. `base_dir` resolves relative inputs.
Scenario parse_scenario(const nlohmann::json &j, const std::string &base_dir = "");
Scenario load_scenario(const std::string &path);
nlohmann::json scenario_json(const Scenario &s);

struct ResultEntry {
    std::string name;
    double value = 0;
    double tol = 0;  // 0 for exact quantities
};

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    nlohmann::json scenario;
    std::vector<std::pair<std::string, std::string>> hashes;  // input name, git blob SHA-1
    std::vector<ResultEntry> results;
    std::vector<Assertion> assertions;
    std::vector<std::string> flags;
    std::vector<std::pair<std::string, double>> timings;  // seconds
    std::string table_header;                             // optional sweep table
    std::vector<std::vector<double>> table;

    bool pass() const;
};

RunReport run_scenario(const Scenario &s);

/// Report body: JSON (schema qcomp.report/1) or CSV. Timings are excluded so
/// that the body is byte-stable; see timings_json.
std::string emit_report(const RunReport &r, const std::string &format);
std::string timings_json(const RunReport &r);
/// Writes report.<format> and timings.json into dir (created if missing).
void write_report(const RunReport &r, const std::string &format, const std::string &dir);

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_sha1(const std::string &content);

}  // namespace qcomp::cli

#endif
