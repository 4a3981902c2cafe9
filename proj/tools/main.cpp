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

// qcomp: run a scenario and emit its report.
//
//   qcomp --scenario FILE [--out DIR] [--seed N] [--format json|csv] [--tol X]
//   qcomp COMMAND [TARGET] [key=value ...] [same flags]
//
// Exit status: 0 all assertions pass, 1 an assertion failed, 2 usage or guard error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenario.hpp"

using nlohmann::json;
using namespace qcomp::cli;

namespace {

json parse_value(const std::string &text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return text;
    return v;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qcomp: scenario runner for the compression pipeline"};
    std::string scenario_path, out_dir, format, verifier;
    uint64_t seed = 1;
    double tol = 1e-9;
    std::vector<std::string> positional;
    app.add_option("--scenario", scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory for report and timings.json (default: stdout)");
    CLI::Option *seed_opt = app.add_option("--seed", seed, "Master seed");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    CLI::Option *tol_opt = app.add_option("--tol", tol, "Tolerance for value assertions");
    app.add_option("--verifier", verifier, "Verifier circuit file")->check(CLI::ExistingFile);
    app.add_option("args", positional, "COMMAND [TARGET] [key=value ...]");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        json j = json::object();
        if (!scenario_path.empty()) {
            Scenario s = load_scenario(scenario_path);
            j = scenario_json(s);
            j["inputs"] = json::object();
            for (const auto &[name, path] : s.inputs) j["inputs"][name] = path;
        }
        size_t next = 0;
        if (!positional.empty() && positional[0].find('=') == std::string::npos) j["command"] = positional[next++];
        if (next < positional.size() && positional[next].find('=') == std::string::npos) j["target"] = positional[next++];
        for (; next < positional.size(); ++next) {
            const std::string &kv = positional[next];
            size_t eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
            j["params"][kv.substr(0, eq)] = parse_value(kv.substr(eq + 1));
        }
        if (!verifier.empty()) j["inputs"]["verifier"] = verifier;
        if (seed_opt->count()) j["seed"] = seed;
        if (tol_opt->count()) j["tol"] = tol;
        if (!format.empty()) j["format"] = format;
        if (!j.contains("command")) throw UsageError("no command given (use --scenario FILE or COMMAND ...)");

        Scenario s = parse_scenario(j);
        RunReport r = run_scenario(s);
        if (out_dir.empty()) {
            std::cout << emit_report(r, s.format);
        } else {
            write_report(r, s.format, out_dir);
        }
        for (const auto &a : r.assertions) {
            if (!a.pass) std::cerr << "assertion failed: " << a.name << " (" << a.detail << ")\n";
        }
        return r.pass() ? 0 : 1;
    } catch (const UsageError &e) {
        std::cerr << "qcomp: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "qcomp: error: " << e.what() << "\n";
        return 2;
    }
}
