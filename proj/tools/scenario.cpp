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

#include "scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "qcomp/compression.hpp"
#include "qcomp/rigidity.hpp"

namespace qcomp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kCommands = {"build", "eval", "seesaw", "rigidity", "spectra", "pipeline", "compose"};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Runner {
   public:
    explicit Runner(const Scenario &s) : s_(s) {
        rep_.scenario = scenario_json(s);
        for (const auto &[name, path] : s.inputs) rep_.hashes.push_back({name, git_blob_sha1(read_file(path))});
    }

    RunReport run() {
        auto t0 = std::chrono::steady_clock::now();
        const std::string &c = s_.command;
        if (c == "build") build();
        else if (c == "eval") eval();
        else if (c == "seesaw") seesaw_cmd();
        else if (c == "rigidity") rigidity();
        else if (c == "spectra") spectra();
        else if (c == "pipeline") pipeline();
        else compose();
        rep_.timings.push_back({"total", seconds_since(t0)});
        std::sort(rep_.flags.begin(), rep_.flags.end());
        rep_.flags.erase(std::unique(rep_.flags.begin(), rep_.flags.end()), rep_.flags.end());
        return rep_;
    }

   private:
    const Scenario &s_;
    RunReport rep_;

    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    template <class F>
    auto timed(const std::string &stage, F &&f) {
        auto t0 = std::chrono::steady_clock::now();
        auto out = f();
        rep_.timings.push_back({stage, seconds_since(t0)});
        return out;
    }

    [[noreturn]] void unknown_target(const std::vector<std::string> &known) const {
        std::string msg = s_.command + ": unknown target '" + s_.target + "' (known:";
        for (const auto &k : known) msg += " " + k;
        throw UsageError(msg + ")");
    }

    template <class T>
    T param(const std::string &key, T def) const {
        if (!s_.params.contains(key)) return def;
        try {
            return s_.params.at(key).get<T>();
        } catch (const json::exception &) {
            throw UsageError("parameter '" + key + "' has the wrong type");
        }
    }

    void result(const std::string &name, double value, double tol = 0) { rep_.results.push_back({name, value, tol}); }
    void check(const std::string &name, bool pass, const std::string &detail = "") {
        rep_.assertions.push_back({name, pass, detail});
    }
    void expect_near(const std::string &name, double value, double target, double tol) {
        result(name, value, tol);
        char buf[96];
        std::snprintf(buf, sizeof buf, "|%.17g - %.17g| <= %.3g", value, target, tol);
        check(name, std::abs(value - target) <= tol, buf);
    }
    void add_flags(const std::vector<std::string> &flags) {
        rep_.flags.insert(rep_.flags.end(), flags.begin(), flags.end());
    }

    VerifierSpec verifier() const {
        auto it = s_.inputs.find("verifier");
        if (it != s_.inputs.end()) return load_verifier(it->second);
        return load_verifier(fixture_path(param<std::string>("fixture", "perfect")));
    }

    SequencePolicy policy() const {
        SequencePolicy p;
        std::string kind = param<std::string>("policy", "sampled");
        if (kind != "sampled" && kind != "full") throw UsageError("policy must be 'sampled' or 'full'");
        p.sampled = kind == "sampled";
        p.count = param<int>("policy_count", 3);
        p.seed = s_.seed;
        return p;
    }

    ProverSpec prover(const VerifierSpec &v) const {
        std::string kind = param<std::string>("prover", "perfect-fixture");
        if (kind != "perfect-fixture") throw UsageError("prover must be 'perfect-fixture'");
        if (v.r != 1 || v.qm != 1) throw UsageError("perfect-fixture prover needs r = 1 and q_M = 1");
        return perfect_fixture_prover(param<int>("priv", 1));
    }

    void game_summary(const GameSpec &g) {
        result("players", g.players);
        result("points", static_cast<double>(g.points.size()));
        int64_t questions = 0;
        for (const auto &a : g.alphabets) questions += static_cast<int64_t>(a.size());
        result("questions", static_cast<double>(questions));
        result("referee_registers", static_cast<double>(g.referee.size()));
        expect_near("total_probability", g.total_probability(), 1.0, 1e-12);
        add_flags(g.flags);
    }

    void build() {
        const std::vector<std::string> known = {"honest", "extended", "final", "mc", "ms", "stabilizer"};
        const std::string &t = s_.target;
        if (t == "stabilizer") return game_summary(timed("build", [] { return build_stabilizer_game(); }));
        if (t == "ms") {
            int n = param("n", 2), k = param("k", 2);
            return game_summary(timed("build", [&] { return build_ms_game(n, k); }));
        }
        if (t == "mc") {
            int n = param("n", 2), k = param("k", 2);
            MCGameLayout lay = timed("layout", [&] { return build_mc_layout(n, k, policy()); });
            result("N", lay.N());
            result("full_sequence_count", static_cast<double>(lay.full_count));
            return game_summary(timed("build", [&] { return build_mc_game(lay); }));
        }
        VerifierSpec v = verifier();
        if (t == "honest") {
            HonestGameOptions o;
            o.unary_clock = param("unary_clock", true);
            return game_summary(timed("build", [&] { return build_honest_game(v, o); }));
        }
        if (t == "extended") {
            ExtendedGame eg = timed("build", [&] { return build_extended_game(v, 1 + v.qm, param("k", 2), policy()); });
            result("q_S", eg.q_s);
            return game_summary(eg.game);
        }
        if (t == "final") {
            ExtendedGame eg = timed("extended", [&] { return build_extended_game(v, 1 + v.qm, param("k", 2), policy()); });
            FinalGameOptions fo;
            fo.ms_samples = param("ms_samples", 64);
            fo.seed = s_.seed;
            FinalGame fg = timed("final", [&] { return build_final_game(eg, fo); });
            result("n_ref", fg.n_ref);
            result("k_ref", fg.k_ref);
            result("max_question_bits", fg.encoding.max_width);
            result("log2_qubits", fg.encoding.log2_qubits, 1e-12);
            check("question_width", fg.encoding.max_width <= 2.0 * fg.encoding.log2_qubits,
                  "max_width <= 2 log2(total qubits)");
            return game_summary(fg.game);
        }
        unknown_target(known);
    }

    void eval() {
        const std::vector<std::string> known = {"stabilizer-honest", "ms-honest",    "mc-honest", "honest-game",
                                                "extended-honest",   "final-honest", "protocol"};
        const std::string &t = s_.target;
        double tol = s_.tol;
        if (t == "stabilizer-honest") {
            GameSpec g = build_stabilizer_game();
            Strategy st = honest_stabilizer_strategy();
            expect_near("value", timed("eval", [&] { return value(g, st); }), 1.0, tol);
            expect_near("formula_value", stabilizer_value_formula(g, st), 1.0, tol);
            return;
        }
        if (t == "ms-honest") {
            int n = param("n", 2), k = param("k", 2);
            GameSpec g = build_ms_game(n, k);
            Strategy st = honest_ms_strategy(n, k);
            expect_near("value", timed("eval", [&] { return value(g, st); }), 1.0, tol);
            return;
        }
        if (t == "mc-honest") {
            int n = param("n", 2), k = param("k", 2);
            MCGameLayout lay = build_mc_layout(n, k, policy());
            GameSpec g = build_mc_game(lay);
            add_flags(g.flags);
            Rng rng(derive_seed(s_.seed, 0x7073));
            Strategy st = honest_mc_strategy(g, lay, random_state(1 << n, rng));
            expect_near("value", timed("eval", [&] { return value(g, st); }), 1.0, tol);
            ConstraintAnalysis an = timed("analyze", [&] { return analyze_constraints(g, lay.sys, st); });
            expect_near("p0", an.p0, 1.0 / (lay.N() + 1), tol);
            expect_near("max_constraint_deviation", an.max_deviation, 0.0, tol);
            return;
        }
        VerifierSpec v = verifier();
        ProverSpec p = prover(v);
        double expect = param("expect", 1.0);
        if (t == "protocol") {
            expect_near("protocol_value", protocol_value(v, p), expect, tol);
            return;
        }
        if (t == "honest-game") {
            HonestGameOptions o;
            o.unary_clock = param("unary_clock", true);
            GameSpec g = build_honest_game(v, o);
            result("protocol_value", protocol_value(v, p), 1e-12);
            expect_near("value", timed("eval", [&] { return value(g, honest_history_strategy(g, v, p)); }), expect, tol);
            return;
        }
        if (t == "extended-honest" || t == "final-honest") {
            ExtendedGame eg = timed("extended", [&] { return build_extended_game(v, 1 + v.qm, param("k", 2), policy()); });
            add_flags(eg.game.flags);
            Strategy st = honest_extended_strategy(eg, p);
            if (t == "extended-honest") {
                expect_near("value", timed("eval", [&] { return value(eg.game, st); }), expect, tol);
                return;
            }
            FinalGameOptions fo;
            fo.ms_samples = param("ms_samples", 64);
            fo.seed = s_.seed;
            FinalGame fg = timed("final", [&] { return build_final_game(eg, fo); });
            add_flags(fg.game.flags);
            FinalHonestReport fr = timed("eval", [&] { return evaluate_final_honest(fg, eg, st); });
            result("sim_value", fr.sim_value, tol);
            result("ms_value", fr.ms_value, tol);
            expect_near("value", fr.value, expect, tol);
            return;
        }
        unknown_target(known);
    }

    void seesaw_cmd() {
        const std::vector<std::string> known = {"honest-game", "stabilizer", "map"};
        const std::string &t = s_.target;
        SeesawOptions so;
        so.iters = param("iters", 200);
        so.restarts = param("restarts", 8);
        so.seed = derive_seed(s_.seed, 0x7373);
        so.state_restarts = param("state_restarts", so.state_restarts);
        auto finish = [&](const SeesawResult &r) {
            result("value", r.value, 1e-12);
            result("sweeps", r.sweeps);
            check("monotone", r.monotone, "value sequence nondecreasing");
            check("value_at_most_one", r.value <= 1.0 + s_.tol);
            if (s_.params.contains("max_value")) {
                double cap = param("max_value", 1.0);
                check("value_below_cap", r.value <= cap, "value <= " + json(cap).dump());
            }
        };
        if (t == "stabilizer") {
            GameSpec g = build_stabilizer_game();
            finish(timed("seesaw", [&] { return seesaw(g, std::vector<int>(8, param("player_dim", 2)), so); }));
            return;
        }
        VerifierSpec v = verifier();
        if (t == "honest-game") {
            HonestGameOptions o;
            o.unary_clock = param("unary_clock", false);
            GameSpec g = build_honest_game(v, o);
            std::vector<int> dims(g.players, param("player_dim", 8));
            finish(timed("seesaw", [&] { return seesaw(g, dims, so); }));
            return;
        }
        if (t == "map") {
            std::vector<int> priv(v.r, param("priv", 1));
            MapResult r = timed("seesaw", [&] { return map_seesaw(v, priv, so.seed, so.iters, so.restarts); });
            result("value", r.value, 1e-12);
            check("monotone", r.monotone, "value sequence nondecreasing");
            if (s_.params.contains("expect")) {
                double e = param("expect", 1.0);
                expect_near("map_value", r.value, e, s_.tol);
            }
            return;
        }
        unknown_target(known);
    }

    void rigidity() {
        const std::vector<std::string> known = {"sweep", "honest-stabilizer", "honest-ms"};
        const std::string &t = s_.target;
        if (t == "sweep") {
            int n = param("n", 2), k = param("k", 2);
            std::vector<double> deltas = param("deltas", std::vector<double>{0.02, 0.05, 0.1, 0.2});
            std::vector<SweepRow> rows = timed("sweep", [&] { return rigidity_sweep(n, k, deltas); });
            rep_.table_header = "delta,epsilon,dis_max,overlap";
            bool monotone = true;
            double c_fit = 0;
            for (size_t i = 0; i < rows.size(); ++i) {
                const SweepRow &r = rows[i];
                rep_.table.push_back({r.delta, r.epsilon, r.dis_max, r.overlap});
                if (i > 0 && r.dis_max < rows[i - 1].dis_max - 1e-12) monotone = false;
                if (r.epsilon > 0) c_fit = std::max(c_fit, r.dis_max / std::sqrt(r.epsilon));
            }
            check("dis_max_monotone", monotone, "dis_max nondecreasing in delta");
            result("fitted_C", c_fit, 1e-9);
            if (s_.params.contains("C")) {
                double c = param("C", 0.0);
                bool ok = true;
                for (const auto &r : rows) ok &= r.dis_max <= c * std::sqrt(r.epsilon) + s_.tol;
                check("dis_max_le_C_sqrt_eps", ok, "C = " + json(c).dump());
            }
            return;
        }
        GameSpec g;
        Strategy st;
        if (t == "honest-stabilizer") {
            g = build_stabilizer_game();
            st = honest_stabilizer_strategy();
        } else if (t == "honest-ms") {
            int n = param("n", 2), k = param("k", 2);
            g = build_ms_game(n, k);
            st = honest_ms_strategy(n, k);
        } else {
            unknown_target(known);
        }
        RigidityReport rr = timed("rigidity", [&] { return rigidity_report(g, st); });
        expect_near("value", rr.value, 1.0, s_.tol);
        expect_near("dis_max", rr.dis_max, 0.0, s_.tol);
        expect_near("overlap", rr.overlap, 1.0, s_.tol);
    }

    void spectra() {
        const std::vector<std::string> known = {"xi-sum", "hamiltonian", "laplacian"};
        const std::string &t = s_.target;
        if (t == "xi-sum") {
            RVec ev = timed("eigen", [&] {
                std::vector<PauliOp> xi = xz_stabilizer_subset(eight_qubit_code());
                Mat sum = Mat::Zero(256, 256);
                for (const auto &p : xi) sum += p.to_matrix();
                Eigen::SelfAdjointEigenSolver<Mat> es(sum);
                return RVec(es.eigenvalues());
            });
            int top = 0;
            double other_max = -1e300;
            for (int i = 0; i < ev.size(); ++i) {
                if (std::abs(ev(i) - 32.0) <= 1e-9) ++top;
                else other_max = std::max(other_max, ev(i));
            }
            rep_.table_header = "eigenvalue,multiplicity";
            rep_.table.push_back({32.0, static_cast<double>(top)});
            rep_.table.push_back({0.0, static_cast<double>(ev.size() - top)});
            result("multiplicity_32", top);
            result("max_other_eigenvalue", other_max, 1e-9);
            check("multiplicity_32_is_4", top == 4);
            check("others_nonpositive", other_max <= 1e-9, "max other eigenvalue <= 1e-9");
            return;
        }
        if (t == "laplacian") {
            int n_max = param("n_max", 64);
            rep_.table_header = "N,lambda2,bound";
            bool ok = true;
            for (int n = 1; n <= n_max; ++n) {
                LaplacianReport lr =
                    graph_laplacian(PropagationGraph::path(std::vector<EdgeLabel>(n, EdgeLabel::reflect(0)), 1));
                rep_.table.push_back({static_cast<double>(n), lr.lambda2, lr.bound});
                ok &= lr.gap_ok;
            }
            check("lambda2_ge_bound", ok, "lambda2 >= 1/(N+1)^2 for N = 1.." + std::to_string(n_max));
            return;
        }
        if (t == "hamiltonian") {
            static const std::map<std::string, HamiltonianKind> kinds = {{"clock", HamiltonianKind::Clock},
                                                                        {"propv", HamiltonianKind::PropV},
                                                                        {"propp", HamiltonianKind::PropP},
                                                                        {"in", HamiltonianKind::In},
                                                                        {"out", HamiltonianKind::Out}};
            std::string name = param<std::string>("kind", "clock");
            auto it = kinds.find(name);
            if (it == kinds.end()) throw UsageError("kind must be one of clock, propv, propp, in, out");
            VerifierSpec v = verifier();
            ProverSpec p = prover(v);
            HamiltonianOptions o;
            o.legal = param("legal", true);
            for (const auto &w : p.w) o.xp.push_back(prover_reflection(w));
            HamiltonianReport hr = timed("eigen", [&] { return build_hamiltonian(it->second, v, p.priv_dims, o); });
            result("dimension", static_cast<double>(hr.h.rows()));
            result("kernel_dim", hr.kernel_dim);
            result("gap", hr.gap, 1e-9);
            check("psd", hr.eigenvalues.size() == 0 || hr.eigenvalues.minCoeff() >= -1e-9, "min eigenvalue >= -1e-9");
            check("nontrivial_kernel", hr.kernel_dim > 0);
            return;
        }
        unknown_target(known);
    }

    void pipeline() {
        VerifierSpec v = verifier();
        ProverSpec p = prover(v);
        SequencePolicy pol = policy();
        int k = param("k", 2);
        PipelineInstance pi = timed("build", [&] { return build_pipeline(v, k, pol, s_.seed); });
        add_flags(pi.extended.game.flags);
        add_flags(pi.final_game.game.flags);
        result("q_S", pi.q_s);
        result("final_players", pi.final_game.game.players);
        result("final_points", static_cast<double>(pi.final_game.game.points.size()));
        double tol = s_.tol;
        expect_near("honest_value", timed("honest", [&] { return value(pi.honest, honest_history_strategy(pi.honest, v, p)); }),
                    1.0, tol);
        Strategy st = honest_extended_strategy(pi.extended, p);
        expect_near("extended_value", timed("extended", [&] { return value(pi.extended.game, st); }), 1.0, tol);
        FinalHonestReport fr = timed("final", [&] { return evaluate_final_honest(pi.final_game, pi.extended, st); });
        expect_near("final_value", fr.value, 1.0, tol);
    }

    void compose() {
        double p = param("p", 0.5), s = param("s", 0.5), h = param("h", 1.0), kappa = param("kappa", 1.0);
        int64_t grid = param<int64_t>("grid", 1000000);
        if (grid < 2) throw UsageError("grid must be >= 2");
        ComposeResult cr = soundness_compose(p, s, h, kappa);
        double best = timed("grid", [&] {
            double b = -1;
            // Uniform in u = eps^(1/kappa), where f is Lipschitz.
            for (int64_t i = 0; i < grid; ++i) {
                double u = static_cast<double>(i) / static_cast<double>(grid - 1);
                b = std::max(b, (1 - p) * (1 - std::pow(u, kappa)) + p * std::min(1.0, s + h * u));
            }
            return b;
        });
        result("lemma_bound", cr.lemma_bound, 1e-15);
        result("max_value", cr.max_value, 1e-12);
        result("argmax", cr.argmax, 1e-9);
        result("grid_max", best, 1e-6);
        check("closed_form_matches_grid", std::abs(cr.max_value - best) <= 1e-6, "within 1e-6");
        check("max_below_one", cr.max_value < 1.0, "max_value < 1");
    }
};

json double_or_string(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

}  // namespace

Scenario parse_scenario(const json &j, const std::string &base_dir) {
    if (!j.is_object()) throw UsageError("scenario must be a JSON object");
    static const std::set<std::string> keys = {"schema", "command", "target", "inputs", "params", "seed", "tol", "format"};
    for (const auto &[k, v] : j.items()) {
        if (!keys.count(k)) throw UsageError("unknown scenario key '" + k + "'");
    }
    Scenario s;
    try {
        if (j.contains("schema") && j.at("schema").get<std::string>() != kScenarioSchema) {
            throw UsageError("unsupported scenario schema " + j.at("schema").dump());
        }
        if (!j.contains("command")) throw UsageError("scenario has no command");
        s.command = j.at("command").get<std::string>();
        s.target = j.value("target", "");
        if (j.contains("inputs")) {
            for (const auto &[name, path] : j.at("inputs").items()) {
                fs::path pth = path.get<std::string>();
                if (pth.is_relative() && !base_dir.empty()) pth = fs::path(base_dir) / pth;
                s.inputs[name] = pth.lexically_normal().string();
            }
        }
        if (j.contains("params")) {
            s.params = j.at("params");
            if (!s.params.is_object()) throw UsageError("params must be an object");
        }
        s.seed = j.value("seed", uint64_t{1});
        s.tol = j.value("tol", 1e-9);
        s.format = j.value("format", "json");
    } catch (const json::exception &e) {
        throw UsageError(std::string("malformed scenario: ") + e.what());
    }
    if (!kCommands.count(s.command)) throw UsageError("unknown command '" + s.command + "'");
    if (s.format != "json" && s.format != "csv") throw UsageError("format must be json or csv");
    if (!(s.tol > 0)) throw UsageError("tol must be positive");
    for (const auto &[name, path] : s.inputs) {
        if (!fs::is_regular_file(path)) throw UsageError("input '" + name + "' not found: " + path);
    }
    return s;
}

Scenario load_scenario(const std::string &path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error &e) {
        throw UsageError(path + ": " + e.what());
    }
    return parse_scenario(j, fs::path(path).parent_path().string());
}

json scenario_json(const Scenario &s) {
    json j = {{"schema", kScenarioSchema}, {"command", s.command}, {"target", s.target}, {"params", s.params},
              {"seed", s.seed},            {"tol", s.tol},         {"format", s.format}};
    j["inputs"] = json::object();
    for (const auto &[name, path] : s.inputs) j["inputs"][name] = fs::path(path).filename().string();
    return j;
}

bool RunReport::pass() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion &a) { return a.pass; });
}

RunReport run_scenario(const Scenario &s) {
    try {
        return Runner(s).run();
    } catch (const ResourceError &e) {
        throw UsageError(s.command + " " + s.target + ": guard: " + e.what());
    } catch (const InputError &e) {
        throw UsageError(s.command + " " + s.target + ": " + e.what());
    }
}

std::string emit_report(const RunReport &r, const std::string &format) {
    if (format == "csv") {
        std::ostringstream out;
        auto num = [](double x) { return json(x).dump(); };
        if (!r.table_header.empty()) {
            out << r.table_header << "\n";
            for (const auto &row : r.table) {
                for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
                out << "\n";
            }
            return out.str();
        }
        out << "name,value,tol\n";
        for (const auto &e : r.results) out << e.name << "," << num(e.value) << "," << num(e.tol) << "\n";
        for (const auto &a : r.assertions) out << "assert:" << a.name << "," << (a.pass ? 1 : 0) << ",0\n";
        return out.str();
    }
    if (format != "json") throw UsageError("format must be json or csv");
    json j;
    j["schema"] = kReportSchema;
    j["scenario"] = r.scenario;
    j["inputs"] = json::array();
    for (const auto &[name, h] : r.hashes) j["inputs"].push_back({{"name", name}, {"sha1", h}});
    j["results"] = json::array();
    for (const auto &e : r.results) {
        j["results"].push_back({{"name", e.name}, {"value", double_or_string(e.value)}, {"tol", e.tol}});
    }
    j["assertions"] = json::array();
    for (const auto &a : r.assertions) j["assertions"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["flags"] = r.flags;
    if (!r.table_header.empty()) {
        j["table"] = {{"header", r.table_header}, {"rows", r.table}};
    }
    j["pass"] = r.pass();
    return j.dump(2) + "\n";
}

std::string timings_json(const RunReport &r) {
    json j = json::object();
    for (const auto &[stage, sec] : r.timings) j[stage] = sec;
    return j.dump(2) + "\n";
}

void write_report(const RunReport &r, const std::string &format, const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create " + dir + ": " + ec.message());
    auto write = [](const fs::path &p, const std::string &body) {
        std::ofstream out(p, std::ios::binary);
        if (!out || !(out << body)) throw UsageError("cannot write " + p.string());
    };
    write(fs::path(dir) / ("report." + format), emit_report(r, format));
    write(fs::path(dir) / "timings.json", timings_json(r));
}

std::string git_blob_sha1(const std::string &content) {
    std::string header = "blob " + std::to_string(content.size());
    header.push_back('\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
              EVP_DigestUpdate(ctx, header.data(), header.size()) &&
              EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

}  // namespace qcomp::cli
