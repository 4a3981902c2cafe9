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

#include "qcomp/compression.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "qcomp/rigidity.hpp"

using namespace qcomp;

namespace {

VerifierSpec fixture(const std::string &name) { return load_verifier(fixture_path(name)); }

/// Conditional rejection of the points whose tag starts with prefix.
double tag_rejection(const ValueReport &rep, const std::string &prefix) {
    double mass = 0;
    double acc = 0;
    for (const auto &[tag, v] : rep.by_tag) {
        if (tag.rfind(prefix, 0) == 0) {
            mass += v.first;
            acc += v.second;
        }
    }
    return 1.0 - acc / mass;
}

/// Reorders the qubits of u: game qubit i is gate qubit perm[i].
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

void check_gate_identity(const Gate &gate, const std::vector<int> &owners, int priv, int states, uint64_t seed) {
    GameSpec g = build_gate_check_game(gate, owners);
    std::vector<int> qs = gate.qubits();
    std::vector<int> perm;
    for (int pass : {-1, 0}) {
        for (size_t j = 0; j < qs.size(); ++j) {
            if (owners[j] == pass) perm.push_back(static_cast<int>(j));
        }
    }
    Mat u = permute_qubits(gate.matrix(), perm);
    Mat xc = PauliOp::parse("X").to_matrix();
    Mat op = identity(static_cast<int>(2 * u.rows() * priv)) - kron(kron(xc, u), identity(priv));
    int np = g.pauli_qubits[0];
    int pdim = (1 << np) * priv;
    Rng rng(seed);
    for (int s = 0; s < states; ++s) {
        Vec a = random_state(static_cast<int>(op.rows()), rng);
        Vec b = random_state(static_cast<int>(op.rows()), rng);
        Ensemble rho;
        rho.weights = {0.7, 0.3};
        rho.states = {a, b};
        Strategy st = honest_strategy(g, rho, {pdim});
        double engine = 1.0 - value(g, st);
        double oracle = 0.25 * (0.7 * a.dot(op * a) + 0.3 * b.dot(op * b)).real();
        ASSERT_NEAR(engine, oracle, 1e-9) << gate.str() << " state " << s;
    }
}

VerifierSpec synthetic_verifier(int L) {
    VerifierSpec v;
    v.name = "synthetic";
    v.qv = 2;
    v.qm = 1;
    v.r = 1;
    for (int t = 0; t < L; ++t) {
        v.v1.push_back(t % 2 == 0 ? Gate::hadamard({0, 1}) : Gate::toffoli(0, 2, 1));
        v.v2.push_back(t % 2 == 0 ? Gate::toffoli(1, 2, 0) : Gate::hadamard({0, 1}));
    }
    return v;
}

ProverSpec random_prover(const VerifierSpec &v, int priv, Rng &rng) {
    ProverSpec p;
    p.priv_dims = {priv};
    int d = p.prover_dim(0, v.qm);
    p.w = {haar_unitary(d, rng)};
    p.psi = random_state(d, rng);
    return p;
}

}  // namespace

TEST(GateCheck, HadamardIdentity) {
    Gate h = Gate::hadamard({0, 1});
    check_gate_identity(h, {-1, -1}, 1, 70, 11);
    check_gate_identity(h, {0, 0}, 2, 70, 12);
    check_gate_identity(h, {0, 0}, 1, 60, 13);
}

TEST(GateCheck, ToffoliIdentity) {
    Gate t = Gate::toffoli(0, 1, 2);
    check_gate_identity(t, {-1, -1, -1}, 1, 50, 21);
    check_gate_identity(t, {-1, -1, 0}, 2, 50, 22);
    check_gate_identity(t, {0, -1, 0}, 1, 50, 23);
    check_gate_identity(t, {0, 0, 0}, 1, 50, 24);
}

TEST(GateCheck, RejectsOtherGates) {
    EXPECT_THROW(build_gate_check_game(Gate::cnot(0, 1), {-1, -1}), InputError);
    EXPECT_THROW(build_gate_check_game(Gate::hadamard({0, 1}), {-1}), InputError);
    EXPECT_THROW(build_gate_check_game(Gate::hadamard({0, 1}), {-1, 0}), InputError);
}

TEST(HonestGame, Structure) {
    VerifierSpec v = fixture("perfect");
    GameSpec g = build_honest_game(v);
    EXPECT_NEAR(g.total_probability(), 1.0, 1e-12);
    std::map<std::string, double> mass;
    for (const auto &pt : g.points) mass[pt.tag.substr(0, pt.tag.find(':'))] += pt.prob.value();
    for (const char *t : {"clock", "propv", "propp", "init", "output"}) EXPECT_NEAR(mass[t], 0.2, 1e-12) << t;
    int xp = 0;
    for (const auto &q : g.alphabets[0]) xp += q.label == kProverQuestion;
    EXPECT_EQ(xp, 1);
}

TEST(HonestGame, PerfectFixtureValueOne) {
    VerifierSpec v = fixture("perfect");
    for (int priv : {1, 2}) {
        ProverSpec p = perfect_fixture_prover(priv);
        ASSERT_NEAR(protocol_value(v, p), 1.0, 1e-12);
        GameSpec g = build_honest_game(v);
        Strategy s = honest_history_strategy(g, v, p);
        EXPECT_NEAR(value(g, s), 1.0, 1e-9) << "priv " << priv;
    }
}

TEST(HonestGame, QubitClockValueOne) {
    VerifierSpec v = fixture("perfect");
    ProverSpec p = perfect_fixture_prover(1);
    HonestGameOptions opt;
    opt.unary_clock = false;
    GameSpec g = build_honest_game(v, opt);
    EXPECT_NEAR(value(g, honest_history_strategy(g, v, p)), 1.0, 1e-9);
}

TEST(HonestGame, OutputMatchesProtocolValue) {
    Rng rng(5);
    std::vector<std::pair<std::string, VerifierSpec>> vs = {
        {"perfect", fixture("perfect")}, {"impossible", fixture("impossible")}, {"L2", synthetic_verifier(2)}, {"L3", synthetic_verifier(3)}};
    for (const auto &[name, v] : vs) {
        GameSpec g = build_honest_game(v);
        for (int trial = 0; trial < 3; ++trial) {
            ProverSpec p = random_prover(v, 2, rng);
            ValueReport rep = evaluate(g, honest_history_strategy(g, v, p));
            double pv = protocol_value(v, p);
            EXPECT_NEAR(tag_rejection(rep, "output") * (v.T() + 1), 1.0 - pv, 1e-9) << name;
            EXPECT_NEAR(tag_rejection(rep, "init"), 0.0, 1e-12);
            EXPECT_NEAR(tag_rejection(rep, "clock"), 0.0, 1e-12);
            EXPECT_NEAR(tag_rejection(rep, "propv"), 0.0, 1e-12);
            EXPECT_NEAR(tag_rejection(rep, "propp"), 0.0, 1e-12);
        }
    }
}

TEST(HonestGame, ImpossibleFixtureHonestValue) {
    VerifierSpec v = fixture("impossible");
    Rng rng(9);
    ProverSpec p = random_prover(v, 1, rng);
    ASSERT_NEAR(protocol_value(v, p), 0.0, 1e-12);
    GameSpec g = build_honest_game(v);
    double val = value(g, honest_history_strategy(g, v, p));
    EXPECT_NEAR(val, 1.0 - 0.2 / (v.T() + 1), 1e-9);
}

TEST(HonestGame, ProverReflection) {
    Rng rng(3);
    Mat w = haar_unitary(4, rng);
    Mat r = prover_reflection(w);
    EXPECT_TRUE(is_hermitian(r));
    EXPECT_TRUE(is_unitary(r));
    // Lambda(W)(X (x) I)Lambda(W)*.
    Mat lam = Mat::Zero(8, 8);
    lam.block(0, 0, 4, 4) = identity(4);
    lam.block(4, 4, 4, 4) = w;
    Mat x = kron(PauliOp::parse("X").to_matrix(), identity(4));
    EXPECT_LT((lam * x * lam.adjoint() - r).norm(), 1e-12);
    EXPECT_THROW(prover_reflection(Mat::Ones(2, 2)), InputError);
}

TEST(Hamiltonian, TraceEqualsCheckRejection) {
    VerifierSpec v = fixture("perfect");
    HonestGameOptions opt;
    opt.unary_clock = false;
    GameSpec g = build_honest_game(v, opt);
    Rng rng(77);
    Mat xp = random_reflection(4, rng);
    HamiltonianOptions hopt;
    hopt.xp = {xp};
    hopt.spectrum = false;
    std::vector<std::pair<HamiltonianKind, std::string>> kinds = {{HamiltonianKind::Clock, "clock"},
                                                                  {HamiltonianKind::PropV, "propv"},
                                                                  {HamiltonianKind::PropP, "propp"},
                                                                  {HamiltonianKind::In, "init"},
                                                                  {HamiltonianKind::Out, "output"}};
    std::vector<Mat> hs;
    for (const auto &[k, tag] : kinds) hs.push_back(build_hamiltonian(k, v, {1}, hopt).h);
    int64_t dim = hs[0].rows();
    ASSERT_EQ(dim, 128 * 16);
    for (int trial = 0; trial < 3; ++trial) {
        Ensemble rho;
        rho.weights = {0.5, 0.3, 0.2};
        for (int j = 0; j < 3; ++j) rho.states.push_back(random_state(static_cast<int>(dim), rng));
        Strategy s = honest_strategy(g, rho, {4});
        for (size_t q = 0; q < g.alphabets[0].size(); ++q) {
            if (g.alphabets[0][q].label == kProverQuestion) s.meas[0][q] = Measurement::from_reflection(xp);
        }
        ValueReport rep = evaluate(g, s);
        for (size_t k = 0; k < kinds.size(); ++k) {
            double tr = 0;
            for (int j = 0; j < 3; ++j) tr += rho.weights[j] * rho.states[j].dot(hs[k] * rho.states[j]).real();
            EXPECT_NEAR(tr, tag_rejection(rep, kinds[k].second), 1e-9) << kinds[k].second;
        }
    }
}

TEST(Hamiltonian, ClockKernelIsLegalSpan) {
    VerifierSpec v = fixture("perfect");
    HamiltonianReport rep = build_hamiltonian(HamiltonianKind::Clock, v, {1});
    Mat iso = legal_isometry(v, {1});
    EXPECT_EQ(rep.kernel_dim, iso.cols());
    EXPECT_LT((rep.h * iso).norm(), 1e-12);
    EXPECT_LT((iso.adjoint() * iso - identity(static_cast<int>(iso.cols()))).norm(), 1e-12);
    // Commuting projectors: the gap is the smallest single weight.
    int T = v.T();
    EXPECT_NEAR(rep.gap, 1.0 / (2.0 * std::max(T - 1, v.r)), 1e-12);
    EXPECT_GE(rep.gap, 0.5 / std::max(T, v.r));
    Mat pi = iso * iso.adjoint();
    EXPECT_LT(restrict_to(rep.h, pi).norm(), 1e-12);
}

TEST(Hamiltonian, LegalMatchesFullRestriction) {
    VerifierSpec v = fixture("perfect");
    Mat iso = legal_isometry(v, {1});
    Rng rng(8);
    HamiltonianOptions full;
    full.xp = {prover_reflection(haar_unitary(2, rng))};
    full.spectrum = false;
    HamiltonianOptions legal = full;
    legal.legal = true;
    for (auto k : {HamiltonianKind::Clock, HamiltonianKind::PropV, HamiltonianKind::PropP, HamiltonianKind::In,
                   HamiltonianKind::Out}) {
        Mat hf = build_hamiltonian(k, v, {1}, full).h;
        Mat hl = build_hamiltonian(k, v, {1}, legal).h;
        EXPECT_LT((iso.adjoint() * hf * iso - hl).norm(), 1e-12) << hamiltonian_name(k);
    }
}

TEST(Hamiltonian, PropVGapScaling) {
    // gap * T^3 on synthetic verifiers; constant frozen from the first build.
    const double kFrozenC = 7.8;
    std::vector<double> scaled;
    for (int L : {2, 3, 4}) {
        VerifierSpec v = synthetic_verifier(L);
        HamiltonianOptions opt;
        opt.legal = true;
        HamiltonianReport rep = build_hamiltonian(HamiltonianKind::PropV, v, {1}, opt);
        int proto = 4 * 2;
        EXPECT_EQ(rep.kernel_dim, 2 * proto) << "T=" << v.T();
        int T = v.T();
        scaled.push_back(rep.gap * T * T * T);
        std::printf("T=%d gap=%.12f gap*T^3=%.9f\n", T, rep.gap, rep.gap * T * T * T);
    }
    for (double s : scaled) EXPECT_GE(s, kFrozenC);
}

TEST(Hamiltonian, HonestStateInKernels) {
    VerifierSpec v = fixture("perfect");
    ProverSpec p = perfect_fixture_prover(1);
    Vec psi = honest_history_state(v, p, false);
    HamiltonianOptions opt;
    opt.xp = {prover_reflection(p.w[0])};
    opt.spectrum = false;
    for (auto k : {HamiltonianKind::Clock, HamiltonianKind::PropV, HamiltonianKind::PropP, HamiltonianKind::In,
                   HamiltonianKind::Out}) {
        Mat h = build_hamiltonian(k, v, {1}, opt).h;
        EXPECT_NEAR(psi.dot(h * psi).real(), 0.0, 1e-12) << hamiltonian_name(k);
    }
}

TEST(Hamiltonian, GhzStabilization) {
    VerifierSpec v = fixture("perfect");
    for (int priv : {1, 2}) {
        ProverSpec p = perfect_fixture_prover(priv);
        int T = v.T();
        int L = v.L();
        Vec psi = honest_history_state(v, p, false);
        int64_t rest = psi.size() >> T;
        int dmp = 2 * priv;
        // Keep clock states L and L+1.
        Vec cut = Vec::Zero(psi.size());
        for (int t : {L, L + 1}) {
            int64_t c = ((int64_t{1} << t) - 1) << (T - t);
            cut.segment(c * rest, rest) = psi.segment(c * rest, rest);
        }
        cut.normalize();
        // Undo Lambda(W) on the player block.
        Mat lam = identity(2 * dmp);
        lam.block(dmp, dmp, dmp, dmp) = p.w[0];
        Mat undo = kron(identity(static_cast<int>((int64_t{1} << T) * 4)), lam.adjoint());
        Vec phi = undo * cut;
        Mat rho = pure_density(phi);
        Mat xs = kron(kron(PauliOp::single(T, L, 'X').to_matrix(), identity(4)),
                      kron(PauliOp::parse("X").to_matrix(), identity(dmp)));
        Mat zs = kron(kron(PauliOp::single(T, L, 'Z').to_matrix(), identity(4)),
                      kron(PauliOp::parse("Z").to_matrix(), identity(dmp)));
        EXPECT_LT(stabilization_defect(xs, rho), 1e-9);
        EXPECT_LT(stabilization_defect(zs, rho), 1e-9);
    }
}

TEST(HonestGame, SeesawOnFullClockStaysBelowOne) {
    VerifierSpec v = fixture("impossible");
    HonestGameOptions o;
    o.unary_clock = false;
    GameSpec g = build_honest_game(v, o);
    SeesawOptions so;
    so.iters = 15;
    so.restarts = 1;
    so.state_restarts = 1;
    SeesawResult r = seesaw(g, {8}, so);
    EXPECT_TRUE(r.monotone);
    EXPECT_NEAR(value(g, r.strategy), r.value, 1e-9);
    EXPECT_LT(r.value, 1 - 4.0e-4);
    EXPECT_GT(r.value, 1 - 0.2 / 8);
}

TEST(ExtendedGame, HonestValueAndP0) {
    VerifierSpec v = fixture("perfect");
    ExtendedGame eg = build_extended_game(v, 2, 2, SequencePolicy{});
    EXPECT_EQ(eg.q_s, eg.mc.N() + 1);
    EXPECT_NEAR(eg.game.total_probability(), 1.0, 1e-12);
    bool flagged = false;
    for (const auto &f : eg.game.flags) flagged |= f.rfind("deviation:sampled-sequence-policy", 0) == 0;
    EXPECT_TRUE(flagged);
    Strategy s = honest_extended_strategy(eg, perfect_fixture_prover(1));
    Evaluator ev(eg.game);
    EXPECT_NEAR(ev.value(s), 1.0, 1e-9);
    int64_t block = s.state.states[0].size() / eg.game.referee[0].dim();
    double p0 = s.state.states[0].segment(0, block).squaredNorm();
    EXPECT_NEAR(p0, 1.0 / eg.q_s, 1e-9);

    // Bit-flip cheat on the Z-type Pauli answers.
    Strategy cheat = s;
    int flipped = 0;
    for (size_t q = 0; q < eg.game.alphabets[0].size(); ++q) {
        const Question &qu = eg.game.alphabets[0][q];
        if (qu.kind != QuestionKind::Single) continue;
        const PauliOp &p = qu.ops[0];
        bool z_only = true;
        for (int u : p.support()) z_only &= p.letter(u) == 'Z';
        if (!z_only) continue;
        std::swap(cheat.meas[0][q].ops[0], cheat.meas[0][q].ops[1]);
        ++flipped;
    }
    ASSERT_GT(flipped, 0);
    // Every player-dependent check is diluted by 1/N or 1/q_S, so the drop is
    // of order 1/q_S; frozen regression value of this planted cheat.
    const double kFrozenDrop = 3.44463e-05;
    double drop = 1.0 - ev.value(cheat);
    EXPECT_NEAR(drop, kFrozenDrop, 1e-9);
    EXPECT_GE(drop * eg.q_s, 0.1);
}

TEST(ExtendedGame, RejectsUnsupportedShapes) {
    VerifierSpec v = fixture("perfect");
    EXPECT_THROW(build_extended_game(v, 3, 2, SequencePolicy{}), InputError);
    VerifierSpec two = v;
    two.r = 2;
    EXPECT_THROW(build_extended_game(two, 2, 2, SequencePolicy{}), InputError);
}

TEST(FinalGame, HonestValueOne) {
    VerifierSpec v = fixture("perfect");
    ExtendedGame eg = build_extended_game(v, 2, 2, SequencePolicy{});
    FinalGame fg = build_final_game(eg);
    EXPECT_EQ(fg.game.players, 9);
    EXPECT_EQ(fg.n_ref, eg.q_s + 4 + v.T() + v.qv);
    EXPECT_NEAR(fg.game.total_probability(), 1.0, 1e-12);
    Strategy s = honest_extended_strategy(eg, perfect_fixture_prover(1));
    FinalHonestReport rep = evaluate_final_honest(fg, eg, s);
    EXPECT_NEAR(rep.value, 1.0, 1e-9);
    EXPECT_NEAR(rep.ms_value, 1.0, 1e-12);
    EXPECT_NEAR(rep.sim_value, 1.0, 1e-9);
    EXPECT_GT(rep.decoded_blocks, 0);
    EXPECT_EQ(rep.nontrivial_logicals, 0);
    // Extras 7 and 8 never appear in the simulation branch; answers fit in k_ref bits.
    for (size_t i = 0; i < fg.game.points.size(); ++i) {
        const GamePoint &pt = fg.game.points[i];
        for (int x = 0; x < 8; ++x) {
            if (pt.q[fg.r + x] < 0) continue;
            EXPECT_LE(fg.game.alphabets[fg.r + x][pt.q[fg.r + x]].bits(), fg.k_ref);
            if (fg.source[i] >= 0) EXPECT_LT(x, 6);
        }
    }
    // Width bound: tag byte + index bits within 2 log2(total qubits).
    EXPECT_LE(fg.encoding.max_width, 2.0 * fg.encoding.log2_qubits);
}

TEST(FinalGame, Deterministic) {
    VerifierSpec v = fixture("perfect");
    ExtendedGame eg = build_extended_game(v, 2, 2, SequencePolicy{});
    FinalGameOptions opt;
    opt.ms_samples = 8;
    FinalGame a = build_final_game(eg, opt);
    FinalGame b = build_final_game(eg, opt);
    ASSERT_EQ(a.game.points.size(), b.game.points.size());
    for (int i = 0; i < a.game.players; ++i) {
        ASSERT_EQ(a.game.alphabets[i].size(), b.game.alphabets[i].size());
        for (size_t q = 0; q < a.game.alphabets[i].size(); ++q) EXPECT_EQ(a.game.alphabets[i][q].label, b.game.alphabets[i][q].label);
    }
}

TEST(FinalGame, LogicalZXorOnEncodedZero) {
    // Players 1, 2, 5, 6 measure X, Z, X, Z: the logical Z row.
    StabilizerCode code = eight_qubit_code();
    Mat proj = code.projector();
    Mat lz = code.logical_z.to_matrix();
    Mat id = identity(256);
    for (int b = 0; b < 2; ++b) {
        Vec cw = canonical_codeword();
        Vec enc = 0.5 * (id + (b ? -1.0 : 1.0) * lz) * proj * cw;
        if (enc.norm() < 1e-9) enc = 0.5 * (id + (b ? -1.0 : 1.0) * lz) * proj * code.logical_x.to_matrix() * cw;
        enc.normalize();
        GameSpec g;
        g.name = "logical-z";
        g.players = 8;
        g.alphabets.assign(8, {});
        g.pauli_qubits.assign(8, 1);
        std::vector<int> q(8, -1);
        std::vector<uint32_t> masks(8, 0);
        const char letters[8] = {'X', 'Z', 'I', 'I', 'X', 'Z', 'I', 'I'};
        for (int i = 0; i < 8; ++i) {
            if (letters[i] == 'I') continue;
            q[i] = g.intern_question(i, Question::single(PauliOp::single(1, 0, letters[i])));
            masks[i] = 1;
        }
        g.points.push_back({q, Rational(1, 1), g.add_predicate(Predicate::make_xor(masks, 0)), "lz"});
        Strategy s = honest_strategy(g, Ensemble::pure(enc), std::vector<int>(8, 2));
        EXPECT_NEAR(value(g, s), b ? 0.0 : 1.0, 1e-12);
    }
}

TEST(FinalGame, RejectsYLetters) {
    ExtendedGame eg;
    GameSpec &g = eg.game;
    g.name = "toy";
    g.players = 1;
    g.alphabets.assign(1, {});
    g.pauli_qubits = {1};
    g.referee = {{"R", RegKind::Qubits, 2}};
    int pred = g.add_predicate(Predicate::make_referee({{0, {PauliOp::parse("YI")}, {}}},
                                                       [](const std::vector<int> &, const std::vector<uint32_t> &) { return 1.0; }));
    g.points.push_back({{-1}, Rational(1, 1), pred, "y"});
    EXPECT_THROW(build_final_game(eg), InputError);
}

TEST(Compose, ClosedFormMatchesGrid) {
    Rng rng(2026);
    for (int trial = 0; trial < 20; ++trial) {
        double p = 0.05 + 0.9 * rng.uniform();
        double s = 0.05 + 0.9 * rng.uniform();
        double h = 0.1 + 3.0 * rng.uniform();
        double kappa = 1.0 + 3.0 * rng.uniform();
        ComposeResult cr = soundness_compose(p, s, h, kappa);
        // Grid uniform in eps^(1/kappa), where f is Lipschitz.
        double best = 0;
        const int n = 1000000;
        for (int i = 0; i <= n; ++i) {
            double u = static_cast<double>(i) / n;
            double e = std::pow(u, kappa);
            best = std::max(best, (1 - p) * (1 - e) + p * std::min(1.0, s + h * u));
        }
        EXPECT_GE(cr.max_value, best - 1e-12);
        EXPECT_NEAR(cr.max_value, best, 1e-6);
        EXPECT_LT(cr.max_value, 1.0);
    }
}

TEST(Compose, HalfHalfExample) {
    ComposeResult cr = soundness_compose(0.5, 0.5, 1.0, 1.0);
    EXPECT_NEAR(cr.lemma_bound, 0.875, 1e-15);
    EXPECT_NEAR(cr.max_value, 0.75, 1e-12);
    EXPECT_LE(cr.max_value, cr.lemma_bound);
    EXPECT_GT(soundness_compose(0.5, 1.0 - 1e-9, 1.0, 1.0).max_value, 1.0 - 1e-8);
    EXPECT_THROW(soundness_compose(0.0, 0.5, 1.0, 1.0), InputError);
    EXPECT_THROW(soundness_compose(0.5, 0.5, 1.0, 0.5), InputError);
}
