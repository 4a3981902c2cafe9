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

// Acceptance run: one PASS/FAIL line per criterion. Usage: acceptance [ids...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "lemma_suites.hpp"
#include "qcomp/compression.hpp"
#include "qcomp/rigidity.hpp"

using namespace qcomp;

namespace {

// Regression constants frozen at first build.
constexpr double kSweepConstant = 3.6232870;
constexpr double kSoundnessDelta = 4.0e-4;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string &what) { info += (info.empty() ? "" : ", ") + what; }
    std::string info;
};

std::string fmt(const char *f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Mat permute_qubits(const Mat &u, const std::vector<int> &perm) {
    int n = static_cast<int>(perm.size());
    int64_t d = int64_t{1} << n;
    auto map = [&](int64_t gi) {
        int64_t out = 0;
        for (int i = 0; i < n; ++i) {
            if ((gi >> (n - 1 - i)) & 1) out |= int64_t{1} << (n - 1 - perm[i]);
        }
        return out;
    };
    Mat m(d, d);
    for (int64_t i = 0; i < d; ++i) {
        for (int64_t j = 0; j < d; ++j) m(i, j) = u(map(i), map(j));
    }
    return m;
}

Outcome xi_spectrum() {
    Outcome o;
    std::vector<PauliOp> xi = xz_stabilizer_subset(eight_qubit_code());
    o.require(xi.size() == 32, "|Xi| != 32");
    Mat sum = Mat::Zero(256, 256);
    for (const auto &p : xi) sum += p.to_matrix();
    Eigen::SelfAdjointEigenSolver<Mat> es(sum);
    int top = 0;
    double other = -1e300;
    for (int i = 0; i < 256; ++i) {
        double e = es.eigenvalues()(i);
        if (std::abs(e - 32) <= 1e-9) ++top;
        else other = std::max(other, e);
    }
    o.require(top == 4, "multiplicity of 32 is " + std::to_string(top));
    o.require(other <= 1e-9, "other eigenvalue " + fmt("%.3e", other));
    o.note("mult(32)=" + std::to_string(top) + " max other=" + fmt("%.2e", other));
    return o;
}

Outcome stabilizer_completeness() {
    Outcome o;
    GameSpec g = build_stabilizer_game();
    const Strategy honest = honest_stabilizer_strategy();
    double v = value(g, honest);
    o.require(std::abs(v - 1) <= 1e-9, "honest value " + fmt("%.12f", v));
    Rng rng(20261);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        Strategy s = honest;
        s.state = Ensemble::pure(random_state(256, rng));
        for (auto &row : s.meas) {
            for (auto &m : row) m = Measurement::from_reflection(random_reflection(2, rng, 1));
        }
        worst = std::max(worst, std::abs(stabilizer_value_formula(g, s) - value(g, s)));
    }
    o.require(worst <= 1e-9, "formula mismatch " + fmt("%.3e", worst));
    o.note("value=" + fmt("%.12f", v) + " max |formula-engine|=" + fmt("%.2e", worst));
    return o;
}

Outcome classical_separation() {
    Outcome o;
    GameSpec g = build_stabilizer_game();
    double c = classical_value(g);
    double q = value(g, honest_stabilizer_strategy());
    o.require(c < 1 - 1e-3, "classical value " + fmt("%.6f", c));
    o.require(std::abs(q - 1) <= 1e-9, "nonlocal honest value " + fmt("%.12f", q));
    o.note("classical=" + fmt("%.6f", c) + " nonlocal=" + fmt("%.12f", q));
    return o;
}

Outcome ms_rigidity() {
    Outcome o;
    double v = value(build_ms_game(2, 2), honest_ms_strategy(2, 2));
    o.require(std::abs(v - 1) <= 1e-9, "honest value " + fmt("%.12f", v));
    std::vector<SweepRow> rows = rigidity_sweep(2, 2, {0.02, 0.05, 0.1, 0.2});
    double c_fit = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) o.require(rows[i].dis_max >= rows[i - 1].dis_max, "dis_max not monotone");
        o.require(rows[i].dis_max <= kSweepConstant * std::sqrt(rows[i].epsilon) + 1e-9,
                  "dis_max above C sqrt(eps) at delta " + fmt("%.2f", rows[i].delta));
        c_fit = std::max(c_fit, rows[i].dis_max / std::sqrt(rows[i].epsilon));
    }
    o.note("value=" + fmt("%.12f", v) + " fitted C=" + fmt("%.7f", c_fit));
    return o;
}

Outcome laplacian_identity() {
    Outcome o;
    Rng rng(5050);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + trial % 7;
        std::vector<EdgeLabel> labels;
        for (int i = 0; i < n; ++i) labels.push_back(EdgeLabel::reflect(static_cast<int>(rng.below(3))));
        PropagationGraph g = PropagationGraph::path(labels, 3);
        GameSpec game = build_propagation_game(g, false);
        Strategy s;
        s.player_dims = {2};
        s.state = Ensemble::from_density(random_density((n + 1) * 2, rng, 2));
        s.meas.assign(1, {});
        for (size_t q = 0; q < game.alphabets[0].size(); ++q) {
            s.meas[0].push_back(Measurement::from_reflection(random_reflection(2, rng)));
        }
        ReflectionAssignment a = strategy_reflections(game, g, s);
        double diff = std::abs(1.0 - value(game, s) - laplacian_rejection(g, a, game.layout({2}), s.state));
        worst = std::max(worst, diff);
    }
    o.require(worst <= 1e-9, "identity mismatch " + fmt("%.3e", worst));
    double min_ratio = 1e300;
    for (int n = 1; n <= 64; ++n) {
        LaplacianReport lr = graph_laplacian(PropagationGraph::path(std::vector<EdgeLabel>(n, EdgeLabel::reflect(0)), 1));
        o.require(lr.lambda2 >= 1.0 / ((n + 1.0) * (n + 1.0)), "lambda2 below bound at N=" + std::to_string(n));
        min_ratio = std::min(min_ratio, lr.lambda2 * (n + 1.0) * (n + 1.0));
    }
    o.note("max |engine-laplacian|=" + fmt("%.2e", worst) + " min lambda2 (N+1)^2=" + fmt("%.4f", min_ratio));
    return o;
}

double gate_identity(const Gate &gate, const std::vector<int> &owners, int priv, int states, Rng &rng) {
    GameSpec g = build_gate_check_game(gate, owners);
    std::vector<int> qs = gate.qubits();
    std::vector<int> perm;
    for (int pass : {-1, 0}) {
        for (size_t j = 0; j < qs.size(); ++j) {
            if (owners[j] == pass) perm.push_back(static_cast<int>(j));
        }
    }
    Mat u = permute_qubits(gate.matrix(), perm);
    Mat op = identity(static_cast<int>(2 * u.rows() * priv)) - kron(kron(PauliOp::parse("X").to_matrix(), u), identity(priv));
    int pdim = (1 << g.pauli_qubits[0]) * priv;
    double worst = 0;
    for (int s = 0; s < states; ++s) {
        Mat rho = random_density(static_cast<int>(op.rows()), rng, 2);
        Strategy st = honest_strategy(g, Ensemble::from_density(rho), {pdim});
        double oracle = 0.25 * (rho * op).trace().real();
        worst = std::max(worst, std::abs(1.0 - value(g, st) - oracle));
    }
    return worst;
}

Outcome gate_checks() {
    Outcome o;
    Rng rng(6060);
    Gate h = Gate::hadamard({0, 1});
    Gate t = Gate::toffoli(0, 1, 2);
    double wh = std::max(gate_identity(h, {-1, -1}, 1, 100, rng), gate_identity(h, {0, 0}, 2, 100, rng));
    double wt = std::max(gate_identity(t, {-1, -1, 0}, 2, 100, rng), gate_identity(t, {0, 0, 0}, 1, 100, rng));
    o.require(wh <= 1e-9, "Hadamard mismatch " + fmt("%.3e", wh));
    o.require(wt <= 1e-9, "Toffoli mismatch " + fmt("%.3e", wt));
    o.note("200 states each, max mismatch H=" + fmt("%.2e", wh) + " TOF=" + fmt("%.2e", wt));
    return o;
}

Outcome pipeline_completeness() {
    Outcome o;
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    ProverSpec p = perfect_fixture_prover(1);
    PipelineInstance pi = build_pipeline(v, 2, SequencePolicy{}, 1);
    double hv = value(pi.honest, honest_history_strategy(pi.honest, v, p));
    Strategy es = honest_extended_strategy(pi.extended, p);
    double ev = value(pi.extended.game, es);
    FinalHonestReport fr = evaluate_final_honest(pi.final_game, pi.extended, es);
    o.require(std::abs(hv - 1) <= 1e-9, "honest game " + fmt("%.12f", hv));
    o.require(std::abs(ev - 1) <= 1e-9, "extended game " + fmt("%.12f", ev));
    o.require(std::abs(fr.value - 1) <= 1e-9, "final game " + fmt("%.12f", fr.value));
    o.note("L=" + std::to_string(v.L()) + " honest=" + fmt("%.12f", hv) + " extended=" + fmt("%.12f", ev) +
           " final=" + fmt("%.12f", fr.value) + " (" + std::to_string(pi.final_game.game.players) + " players)");
    return o;
}

Outcome soundness_trend() {
    Outcome o;
    VerifierSpec v = load_verifier(fixture_path("impossible"));
    HonestGameOptions opt;
    opt.unary_clock = false;
    GameSpec g = build_honest_game(v, opt);
    SeesawOptions so;
    so.iters = 500;
    so.restarts = 8;
    so.seed = 1;
    so.state_restarts = 1;
    SeesawResult r = seesaw(g, {8}, so);
    double worst = 0;
    for (double x : r.restart_values) worst = std::max(worst, x);
    o.require(r.monotone, "see-saw not monotone");
    o.require(worst <= 1 - kSoundnessDelta, "value " + fmt("%.12f", worst) + " exceeds 1 - delta");
    o.note("max=" + fmt("%.12f", worst) + " threshold=" + fmt("%.6f", 1 - kSoundnessDelta) + " sweeps=" +
           std::to_string(r.sweeps));
    return o;
}

Outcome mc_constraints() {
    Outcome o;
    MCGameLayout lay = build_mc_layout(2, 2, SequencePolicy{});
    GameSpec game = build_mc_game(lay);
    Rng rng(9090);
    Strategy s = honest_mc_strategy(game, lay, random_state(4, rng));
    double v = value(game, s);
    ConstraintAnalysis an = analyze_constraints(game, lay.sys, s);
    double p0_err = std::abs(an.p0 - 1.0 / (lay.N() + 1));
    o.require(std::abs(v - 1) <= 1e-9, "honest value " + fmt("%.12f", v));
    o.require(an.max_deviation <= 1e-9, "constraint deviation " + fmt("%.3e", an.max_deviation));
    o.require(p0_err <= 1e-9, "p0 error " + fmt("%.3e", p0_err));
    o.note("N=" + std::to_string(lay.N()) + " constraints=" + std::to_string(an.re_c.size()) + " max dev=" +
           fmt("%.2e", an.max_deviation) + " |p0-1/(N+1)|=" + fmt("%.2e", p0_err));
    return o;
}

Outcome lemma_suites() {
    Outcome o;
    using namespace suites;
    const int n = 1200;
    for (const SuiteResult &r : {approx_stab(n, 101), approx_stab_2(n, 102), approx_stab_3(n, 103), gentle(n, 104),
                                 gapped(n, 105), w_twirl(n, 106), derived_roundtrip(n, 107)}) {
        o.require(r.failures == 0, r.name + " failures " + std::to_string(r.failures));
        o.require(r.instances >= 1000, r.name + " instances " + std::to_string(r.instances));
        o.note(r.name + " " + std::to_string(r.instances));
    }
    return o;
}

Outcome compose_grid() {
    Outcome o;
    Rng rng(1111);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double p = 0.05 + 0.9 * rng.uniform();
        double s = 0.05 + 0.9 * rng.uniform();
        double h = 0.1 + 3.0 * rng.uniform();
        double kappa = 1.0 + 3.0 * rng.uniform();
        ComposeResult cr = soundness_compose(p, s, h, kappa);
        double best = 0;
        const int grid = 1000000;
        for (int i = 0; i < grid; ++i) {
            double u = static_cast<double>(i) / (grid - 1);
            best = std::max(best, (1 - p) * (1 - std::pow(u, kappa)) + p * std::min(1.0, s + h * u));
        }
        worst = std::max(worst, std::abs(cr.max_value - best));
        o.require(cr.max_value < 1.0, "max not below 1");
    }
    o.require(worst <= 1e-6, "grid mismatch " + fmt("%.3e", worst));
    o.note("100 draws, max |closed-grid|=" + fmt("%.2e", worst));
    return o;
}

struct Criterion {
    int id;
    const char *name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char **argv) {
    const std::vector<Criterion> all = {
        {1, "eight-qubit code spectrum", 1, xi_spectrum},
        {2, "stabilizer-game completeness", 10, stabilizer_completeness},
        {3, "classical-nonlocal separation", 60, classical_separation},
        {4, "(2,2)-stabilizer game rigidity trend", 300, ms_rigidity},
        {5, "propagation Laplacian identity", 60, laplacian_identity},
        {6, "Hadamard/Toffoli check identities", 60, gate_checks},
        {7, "pipeline completeness", 600, pipeline_completeness},
        {8, "soundness trend", 900, soundness_trend},
        {9, "constraint-satisfaction analyzer", 600, mc_constraints},
        {10, "lemma property suites", 120, lemma_suites},
        {11, "soundness_compose closed form", 10, compose_grid},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto &c : all) {
        if (!pick.empty() && !pick.count(c.id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(sec < c.limit_s, "runtime " + fmt("%.1f", sec) + " s over " + fmt("%.0f", c.limit_s) + " s");
        if (!o.pass) ++failed;
        std::printf("criterion %2d %s: %s (%.2f s) %s%s%s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, sec,
                    o.info.c_str(), o.detail.empty() ? "" : " | ", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
