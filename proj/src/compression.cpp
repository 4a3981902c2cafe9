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

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "qcomp/rigidity.hpp"

namespace qcomp {

namespace {

constexpr int kExtras = 8;

int letter_rank(char c) { return c == 'X' ? 0 : c == 'Z' ? 1 : 2; }

/// Weight, then support (lexicographic), then letters with X before Z.
bool canonical_less(const PauliOp &a, const PauliOp &b) {
    int wa = a.weight();
    int wb = b.weight();
    if (wa != wb) return wa < wb;
    std::vector<int> sa = a.support();
    std::vector<int> sb = b.support();
    if (sa != sb) return sa < sb;
    for (int q : sa) {
        int la = letter_rank(a.letter(q));
        int lb = letter_rank(b.letter(q));
        if (la != lb) return la < lb;
    }
    return false;
}

uint32_t bit_of(uint32_t value, int pos, int width) { return (value >> (width - 1 - pos)) & 1u; }

// ---------------------------------------------------------------------------
// Routing of logical Paulis over the verifier qubits to their owners.

struct Home {
    int player = -1;  // -1: referee V
    int local = 0;
};

struct Part {
    int meas = -1;    // index into the predicate's measurements, or -1
    int player = -1;  // asked player, or -1
    int pos = 0;
    int width = 0;
};

struct Routed {
    std::optional<RegMeasurement> vmeas;
    std::vector<std::optional<Question>> questions;  // per player
    std::vector<std::vector<Part>> parts;            // per logical
};

struct RouteTarget {
    int v_reg = 1;
    int v_width = 0;
    std::vector<int> player_width;
    std::map<int, Home> homes;
    bool fixed = true;
};

Routed route(const RouteTarget &rt, const std::vector<PauliOp> &logicals, int vmeas_index) {
    int players = static_cast<int>(rt.player_width.size());
    std::vector<PauliOp> vcomps;
    std::vector<std::vector<PauliOp>> pcomps(players);
    // Component of every logical per owner (-1 -> V).
    std::vector<std::map<int, PauliOp>> split(logicals.size());
    for (size_t l = 0; l < logicals.size(); ++l) {
        const PauliOp &p = logicals[l];
        if (p.phase() != 0) throw InputError("routed logical Paulis must be unsigned");
        for (int u : p.support()) {
            const Home &h = rt.homes.at(u);
            int width = h.player < 0 ? rt.v_width : rt.player_width[h.player];
            auto it = split[l].find(h.player);
            if (it == split[l].end()) it = split[l].emplace(h.player, PauliOp(width)).first;
            it->second.set_letter(h.local, p.letter(u));
        }
        for (const auto &[owner, comp] : split[l]) {
            auto &list = owner < 0 ? vcomps : pcomps[owner];
            if (std::none_of(list.begin(), list.end(), [&](const PauliOp &o) { return o.same_word(comp); })) {
                list.push_back(comp);
            }
        }
    }
    Routed out;
    out.questions.resize(players);
    if (!vcomps.empty()) out.vmeas = RegMeasurement{rt.v_reg, vcomps, {}};
    for (int i = 0; i < players; ++i) {
        auto &list = pcomps[i];
        if (list.empty()) continue;
        std::sort(list.begin(), list.end(), canonical_less);
        out.questions[i] = list.size() == 1 ? Question::single(list[0], rt.fixed) : Question::set(list, rt.fixed);
    }
    auto index_in = [](const std::vector<PauliOp> &list, const PauliOp &p) {
        for (size_t j = 0; j < list.size(); ++j) {
            if (list[j].same_word(p)) return static_cast<int>(j);
        }
        throw InputError("routing: component not found");
    };
    out.parts.resize(logicals.size());
    for (size_t l = 0; l < logicals.size(); ++l) {
        for (const auto &[owner, comp] : split[l]) {
            Part pt;
            if (owner < 0) {
                pt.meas = vmeas_index;
                pt.pos = index_in(vcomps, comp);
                pt.width = static_cast<int>(vcomps.size());
            } else {
                pt.player = owner;
                pt.pos = index_in(pcomps[owner], comp);
                pt.width = static_cast<int>(pcomps[owner].size());
            }
            out.parts[l].push_back(pt);
        }
    }
    return out;
}

std::vector<int> logical_bits(const std::vector<std::vector<Part>> &parts, const std::vector<int> &c,
                              const std::vector<uint32_t> &a) {
    std::vector<int> bits(parts.size(), 0);
    for (size_t l = 0; l < parts.size(); ++l) {
        uint32_t b = 0;
        for (const auto &pt : parts[l]) {
            if (pt.meas >= 0) {
                b ^= bit_of(static_cast<uint32_t>(c[pt.meas]), pt.pos, pt.width);
            } else {
                b ^= bit_of(a[pt.player], pt.pos, pt.width);
            }
        }
        bits[l] = static_cast<int>(b);
    }
    return bits;
}

/// Accept probability given the C outcome (0 when C is not measured), the
/// logical bits and the raw answers.
using CheckFn = std::function<double(uint32_t c, const std::vector<int> &bits, const std::vector<uint32_t> &a)>;

struct CheckContext {
    GameSpec &game;
    int c_reg = 0;
    RouteTarget target;

    void add(const Rational &prob, const std::string &tag, const std::vector<PauliOp> &cpaulis,
             const std::vector<PauliOp> &logicals, bool ask_xp, CheckFn f) {
        bool has_c = !cpaulis.empty();
        Routed rt = route(target, logicals, has_c ? 1 : 0);
        std::vector<RegMeasurement> ms;
        if (has_c) ms.push_back({c_reg, cpaulis, {}});
        if (rt.vmeas) ms.push_back(*rt.vmeas);
        std::vector<int> q(game.players, -1);
        for (int i = 0; i < game.players; ++i) {
            if (ask_xp) {
                q[i] = game.intern_question(i, Question::special(kProverQuestion));
            } else if (rt.questions[i]) {
                q[i] = game.intern_question(i, *rt.questions[i]);
            }
        }
        auto parts = std::move(rt.parts);
        AcceptFn acc = [parts, has_c, f](const std::vector<int> &c, const std::vector<uint32_t> &a) {
            uint32_t cv = has_c ? static_cast<uint32_t>(c[0]) : 0;
            return f(cv, logical_bits(parts, c, a), a);
        };
        int pred = game.add_predicate(Predicate::make_referee(std::move(ms), std::move(acc)));
        game.points.push_back({q, prob, pred, tag});
    }
};

/// Flags are the leading C Paulis, the X of the step qubit comes last.
struct FlagSpec {
    std::vector<PauliOp> paulis;
    std::vector<int> want;
};

bool flags_hold(const FlagSpec &fl, uint32_t c, int width) {
    for (size_t j = 0; j < fl.want.size(); ++j) {
        if (static_cast<int>(bit_of(c, static_cast<int>(j), width)) != fl.want[j]) return false;
    }
    return true;
}

PauliOp on_qubits(int n, const std::vector<std::pair<int, char>> &letters) {
    PauliOp p(n);
    for (auto [q, c] : letters) p.set_letter(q, c);
    return p;
}

/// Hadamard and Toffoli sub-checks of one gate at total probability `prob`.
void add_gate_check(CheckContext &ctx, const Rational &prob, const std::string &tag, const FlagSpec &fl,
                    const PauliOp &x_step, const Gate &gate, int nq) {
    std::vector<PauliOp> cp = fl.paulis;
    cp.push_back(x_step);
    int width = static_cast<int>(cp.size());
    Rational half = prob * Rational(1, 2);
    std::vector<int> qs = gate.qubits();
    if (gate.kind == GateKind::Hadamard) {
        if (qs.size() != 2) throw InputError("Hadamard check needs a paired Hadamard");
        int u1 = qs[0];
        int u2 = qs[1];
        const std::array<std::array<std::array<char, 2>, 2>, 2> pairs = {{{{{'X', 'X'}, {'Z', 'Z'}}}, {{{'X', 'Z'}, {'Z', 'X'}}}}};
        for (int j = 0; j < 2; ++j) {
            std::vector<PauliOp> logicals;
            for (int m = 0; m < 2; ++m) logicals.push_back(on_qubits(nq, {{u1, pairs[j][m][0]}, {u2, pairs[j][m][1]}}));
            ctx.add(half, tag + ":hadamard", cp, logicals, false,
                    [fl, width](uint32_t c, const std::vector<int> &b, const std::vector<uint32_t> &) {
                        if (!flags_hold(fl, c, width)) return 1.0;
                        int x = static_cast<int>(c & 1u);
                        return ((x ^ b[0]) == 1 && (x ^ b[1]) == 1) ? 0.0 : 1.0;
                    });
        }
        return;
    }
    if (gate.kind == GateKind::Toffoli) {
        std::vector<PauliOp> logicals = {on_qubits(nq, {{qs[0], 'Z'}}), on_qubits(nq, {{qs[1], 'Z'}}),
                                         on_qubits(nq, {{qs[2], 'X'}})};
        ctx.add(half, tag + ":toffoli", cp, logicals, false,
                [fl, width](uint32_t c, const std::vector<int> &b, const std::vector<uint32_t> &) {
                    if (!flags_hold(fl, c, width)) return 1.0;
                    int x = static_cast<int>(c & 1u);
                    bool both = b[0] == 1 && b[1] == 1;
                    if (both && (x ^ b[2]) == 1) return 0.0;
                    if (!both && x == 1) return 0.0;
                    return 1.0;
                });
        ctx.add(half, tag + ":toffoli", {}, {}, false,
                [](uint32_t, const std::vector<int> &, const std::vector<uint32_t> &) { return 1.0; });
        return;
    }
    throw InputError("gate " + gate.str() + " has no check");
}

RouteTarget verifier_target(const VerifierSpec &v, bool fixed) {
    RouteTarget t;
    t.v_reg = 1;
    t.v_width = v.qv;
    t.player_width.assign(v.r, 1 + v.qm);
    t.fixed = fixed;
    for (int q = 0; q < v.qubits(); ++q) {
        int o = v.owner(q);
        if (o < 0) {
            t.homes[q] = {-1, q};
        } else {
            t.homes[q] = {o, 1 + (q - v.qv - o * v.qm)};
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Index maps between the protocol space and the game's rest (V, players).

struct RestIndex {
    int dv = 1;
    std::vector<int> dmp;
    int64_t proto_dim = 1;
    int64_t rest_dim = 1;

    RestIndex(const VerifierSpec &v, const std::vector<int> &priv) {
        if (static_cast<int>(priv.size()) != v.r) throw InputError("one private dimension per prover required");
        dv = 1 << v.qv;
        proto_dim = dv;
        rest_dim = dv;
        for (int i = 0; i < v.r; ++i) {
            if (priv[i] < 1) throw InputError("private dimension must be positive");
            dmp.push_back((1 << v.qm) * priv[i]);
            proto_dim *= dmp.back();
            rest_dim *= 2 * dmp.back();
        }
    }
    int players() const { return static_cast<int>(dmp.size()); }
    uint32_t all_b(bool delta) const { return delta ? (1u << players()) - 1 : 0u; }
    /// beta bit i is B_i.
    int64_t operator()(int64_t x, uint32_t beta) const {
        int r = players();
        std::vector<int64_t> mp(r);
        for (int i = r - 1; i >= 0; --i) {
            mp[i] = x % dmp[i];
            x /= dmp[i];
        }
        int64_t idx = x;
        for (int i = 0; i < r; ++i) idx = idx * 2 * dmp[i] + ((beta >> i) & 1u) * dmp[i] + mp[i];
        return idx;
    }
};

int64_t unary_index(int t, int T) { return ((int64_t{1} << t) - 1) << (T - t); }

Mat protocol_gate_matrix(const VerifierSpec &v, const std::vector<int> &priv, const Gate &g, int64_t dim) {
    Mat u(dim, dim);
    for (int64_t c = 0; c < dim; ++c) {
        Vec e = Vec::Zero(dim);
        e(c) = 1.0;
        apply_gate(v, priv, g, e);
        u.col(c) = e;
    }
    return u;
}

/// proto (x) per-player 2x2 operators on B_i, reordered into rest order.
Mat rest_op(const RestIndex &ri, const Mat &proto, const std::vector<Mat> &b_ops) {
    int r = ri.players();
    Mat out = Mat::Zero(ri.rest_dim, ri.rest_dim);
    uint32_t nb = 1u << r;
    for (uint32_t beta = 0; beta < nb; ++beta) {
        for (uint32_t gamma = 0; gamma < nb; ++gamma) {
            cd f = 1.0;
            for (int i = 0; i < r && f != 0.0; ++i) {
                int bi = (beta >> i) & 1u;
                int gi = (gamma >> i) & 1u;
                f *= b_ops.empty() || b_ops[i].size() == 0 ? cd(bi == gi ? 1.0 : 0.0) : b_ops[i](bi, gi);
            }
            if (f == 0.0) continue;
            for (int64_t x = 0; x < ri.proto_dim; ++x) {
                int64_t rx = ri(x, beta);
                for (int64_t y = 0; y < ri.proto_dim; ++y) {
                    cd val = proto(x, y);
                    if (val != 0.0) out(rx, ri(y, gamma)) += f * val;
                }
            }
        }
    }
    return out;
}

Mat proj2(int b) {
    Mat m = Mat::Zero(2, 2);
    m(b, b) = 1.0;
    return m;
}

Mat x2() {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

/// Projector onto V qubit j = b on the protocol space.
Mat v_projector(const VerifierSpec &v, const RestIndex &ri, int j, int b) {
    int64_t after = (int64_t{1} << (v.qv - 1 - j)) * (ri.proto_dim / ri.dv);
    return kron(kron(identity(1 << j), proj2(b)), identity(static_cast<int>(after)));
}

struct HTerm {
    double w = 0;
    std::vector<std::pair<int, Mat>> c;  // C qubit (0-based) -> 2x2
    Mat rest;
};

// ---------------------------------------------------------------------------
// Eight-qubit code decoding.

struct CodeBasis {
    std::vector<PauliOp> basis;  // 6 generators, L1X, L1Z, L2X, L2Z
};

const CodeBasis &code_basis() {
    static const CodeBasis cb = [] {
        StabilizerCode code = eight_qubit_code();
        CodeBasis out;
        out.basis = code.generators;
        out.basis.push_back(code.logical_x);
        out.basis.push_back(code.logical_z);
        std::vector<PauliOp> span = out.basis;
        std::optional<PauliOp> l2x;
        std::optional<PauliOp> l2z;
        const char letters[4] = {'I', 'X', 'Y', 'Z'};
        for (int code_word = 1; code_word < (1 << 16) && !l2z; ++code_word) {
            PauliOp p(8);
            for (int q = 0; q < 8; ++q) p.set_letter(q, letters[(code_word >> (2 * (7 - q))) & 3]);
            if (!std::all_of(span.begin(), span.end(), [&](const PauliOp &s) { return s.commutes(p); })) continue;
            if (solve_span(span, p)) continue;
            if (!l2x) {
                l2x = p;
            } else if (!l2x->commutes(p)) {
                l2z = p;
            }
        }
        if (!l2x || !l2z) throw InputError("eight-qubit code: second logical pair not found");
        out.basis.push_back(*l2x);
        out.basis.push_back(*l2z);
        return out;
    }();
    return cb;
}

struct Decoded {
    cd kappa = 1.0;  // word = kappa * product of the selected basis elements
    int a = 0;       // L1X power
    int b = 0;       // L1Z power
    int l2x = 0;
    int l2z = 0;
};

const cd kI[4] = {1.0, cd(0, 1), -1.0, cd(0, -1)};

Decoded decode_column(const PauliOp &word) {
    const CodeBasis &cb = code_basis();
    auto sol = solve_span(cb.basis, word);
    if (!sol) throw InputError("column " + word.str() + " is outside the code's normalizer span");
    PauliOp prod(8);
    for (size_t i = 0; i < cb.basis.size(); ++i) {
        if ((*sol)[i]) prod = prod * cb.basis[i];
    }
    Decoded d;
    d.kappa = kI[((word.phase() - prod.phase()) % 4 + 4) % 4];
    d.a = (*sol)[6];
    d.b = (*sol)[7];
    d.l2x = (*sol)[8];
    d.l2z = (*sol)[9];
    return d;
}

/// Letter of logical L_X (c = 'X') or L_Z (c = 'Z') on extra player e.
char logical_letter(char c, int e) {
    static const PauliOp lx = eight_qubit_code().logical_x;
    static const PauliOp lz = eight_qubit_code().logical_z;
    if (c == 'X') return lx.letter(e);
    if (c == 'Z') return lz.letter(e);
    throw InputError(std::string("referee Pauli letter ") + c + " has no logical simulation");
}

/// Component of a referee Pauli (register offset applied) for extra e.
PauliOp extra_component(const PauliOp &p, int offset, int n_ref, int e) {
    PauliOp out(n_ref);
    for (int u : p.support()) {
        char l = logical_letter(p.letter(u), e);
        if (l != 'I') out.set_letter(offset + u, l);
    }
    return out;
}

int64_t random_below(Rng &rng, int64_t n) { return rng.below(n); }

std::vector<int> random_subset(Rng &rng, int n, int k) {
    std::set<int> s;
    for (int j = n - k; j < n; ++j) {
        int t = static_cast<int>(random_below(rng, j + 1));
        if (!s.insert(t).second) s.insert(j);
    }
    return {s.begin(), s.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Honest-player game.

GameSpec build_honest_game(const VerifierSpec &v, const HonestGameOptions &opt) {
    ValidationReport rep = validate_verifier(v);
    if (!rep.ok) throw InputError("verifier rejected: " + rep.issues.front().message);
    int T = v.T();
    int L = v.L();
    GameSpec g;
    g.name = "honest(" + (v.name.empty() ? std::string("verifier") : v.name) + ")";
    g.players = v.r;
    g.alphabets.assign(v.r, {});
    g.pauli_qubits.assign(v.r, 1 + v.qm);
    g.referee = {{"C", opt.unary_clock ? RegKind::Unary : RegKind::Qubits, T}, {"V", RegKind::Qubits, v.qv}};
    CheckContext ctx{g, 0, verifier_target(v, opt.fixed_paulis)};
    const Rational fifth(1, 5);
    auto zc = [&](int t) { return PauliOp::single(T, t - 1, 'Z'); };
    auto xc = [&](int t) { return PauliOp::single(T, t - 1, 'X'); };
    int nq = v.qubits();

    // Clock Check.
    for (int t = 1; t < T; ++t) {
        ctx.add(fifth * Rational(1, 2) * Rational(1, T - 1), "clock", {zc(t), zc(t + 1)}, {}, false,
                [](uint32_t c, const std::vector<int> &, const std::vector<uint32_t> &) { return c == 1u ? 0.0 : 1.0; });
    }
    for (int i = 0; i < v.r; ++i) {
        Rational pr = fifth * Rational(1, 2) * Rational(1, v.r);
        std::vector<RegMeasurement> ms = {{0, {zc(L + 1)}, {}}};
        std::vector<int> q(v.r, -1);
        q[i] = g.intern_question(i, Question::single(PauliOp::single(1 + v.qm, 0, 'Z'), opt.fixed_paulis));
        int pred = g.add_predicate(Predicate::make_referee(std::move(ms), [i](const std::vector<int> &c, const std::vector<uint32_t> &a) {
            return static_cast<uint32_t>(c[0]) == a[i] ? 1.0 : 0.0;
        }));
        g.points.push_back({q, pr, pred, "clock"});
    }

    // Verifier Propagation Check.
    for (int t = 1; t <= T; ++t) {
        if (t == L + 1) continue;
        FlagSpec fl;
        if (t > 1) {
            fl.paulis.push_back(zc(t - 1));
            fl.want.push_back(1);
        }
        if (t < T) {
            fl.paulis.push_back(zc(t + 1));
            fl.want.push_back(0);
        }
        add_gate_check(ctx, fifth * Rational(1, T - 1), "propv", fl, xc(t), v.step(t), nq);
    }

    // Prover Propagation Check.
    {
        FlagSpec fl{{zc(L), zc(L + 2)}, {1, 0}};
        std::vector<PauliOp> cp = fl.paulis;
        cp.push_back(xc(L + 1));
        int r = v.r;
        ctx.add(fifth, "propp", cp, {}, true, [fl, r](uint32_t c, const std::vector<int> &, const std::vector<uint32_t> &a) {
            if (!flags_hold(fl, c, 3)) return 1.0;
            uint32_t par = 0;
            for (int i = 0; i < r; ++i) par ^= a[i] & 1u;
            return (c & 1u) == par ? 1.0 : 0.0;
        });
    }

    // Initialization Check.
    for (int j = 0; j < v.qv; ++j) {
        ctx.add(fifth * Rational(1, v.qv), "init", {zc(1)}, {PauliOp::single(nq, j, 'Z')}, false,
                [](uint32_t c, const std::vector<int> &b, const std::vector<uint32_t> &) {
                    return (c == 1u || b[0] == 0) ? 1.0 : 0.0;
                });
    }

    // Output Check.
    ctx.add(fifth, "output", {zc(T)}, {PauliOp::single(nq, 0, 'Z')}, false,
            [](uint32_t c, const std::vector<int> &b, const std::vector<uint32_t> &) {
                return (c == 0u || b[0] == 1) ? 1.0 : 0.0;
            });
    g.validate();
    return g;
}

GameSpec build_gate_check_game(const Gate &gate, const std::vector<int> &owners) {
    std::vector<int> qs = gate.qubits();
    if (owners.size() != qs.size()) throw InputError("one owner per gate qubit required");
    RouteTarget t;
    t.v_reg = 1;
    int nv = 0;
    int np = 0;
    int nq = 0;
    for (size_t j = 0; j < qs.size(); ++j) {
        nq = std::max(nq, qs[j] + 1);
        if (owners[j] == -1) {
            t.homes[qs[j]] = {-1, nv++};
        } else if (owners[j] == 0) {
            t.homes[qs[j]] = {0, np++};
        } else {
            throw InputError("gate check owners must be -1 or 0");
        }
    }
    if (gate.kind == GateKind::Hadamard && owners[0] != owners[1]) throw InputError("paired Hadamards on different registers");
    t.v_width = nv;
    t.player_width = {np};
    t.fixed = true;
    GameSpec g;
    g.name = "gate-check(" + gate.str() + ")";
    g.players = 1;
    g.alphabets.assign(1, {});
    g.pauli_qubits = {np};
    g.referee = {{"C", RegKind::Qubits, 1}};
    if (nv > 0) g.referee.push_back({"V", RegKind::Qubits, nv});
    CheckContext ctx{g, 0, t};
    add_gate_check(ctx, Rational(1, 1), "gate", FlagSpec{}, PauliOp::single(1, 0, 'X'), gate, nq);
    g.validate();
    return g;
}

Mat prover_reflection(const Mat &w) {
    if (!is_unitary(w, 1e-8)) throw InputError("prover_reflection: W must be unitary");
    int64_t d = w.rows();
    Mat r = Mat::Zero(2 * d, 2 * d);
    r.block(d, 0, d, d) = w;
    r.block(0, d, d, d) = w.adjoint();
    return r;
}

Vec honest_history_state(const VerifierSpec &v, const ProverSpec &p, bool unary_clock) {
    p.validate(v);
    RestIndex ri(v, p.priv_dims);
    int T = v.T();
    int L = v.L();
    int64_t cdim = unary_clock ? T + 1 : int64_t{1} << T;
    check_dense_dim(cdim * ri.rest_dim, "honest_history_state");
    Vec out = Vec::Zero(cdim * ri.rest_dim);
    Vec phi = protocol_initial(v, p);
    double norm = 1.0 / std::sqrt(static_cast<double>(T + 1));
    for (int t = 0; t <= T; ++t) {
        if (t > 0) {
            if (t == L + 1) {
                apply_provers(v, p, phi);
            } else {
                apply_gate(v, p.priv_dims, v.step(t), phi);
            }
        }
        int64_t c = unary_clock ? t : unary_index(t, T);
        uint32_t beta = ri.all_b(t > L);
        for (int64_t x = 0; x < ri.proto_dim; ++x) {
            if (phi(x) != 0.0) out(c * ri.rest_dim + ri(x, beta)) = norm * phi(x);
        }
    }
    return out;
}

Strategy honest_history_strategy(const GameSpec &game, const VerifierSpec &v, const ProverSpec &p) {
    if (game.referee.size() != 2 || game.players != v.r) throw InputError("game does not match the verifier");
    bool unary = game.referee[0].kind == RegKind::Unary;
    Vec psi = honest_history_state(v, p, unary);
    std::vector<int> dims;
    for (int i = 0; i < v.r; ++i) dims.push_back(2 * p.prover_dim(i, v.qm));
    Strategy s = honest_strategy(game, Ensemble::pure(std::move(psi)), dims);
    for (int i = 0; i < v.r; ++i) {
        for (size_t q = 0; q < game.alphabets[i].size(); ++q) {
            if (game.alphabets[i][q].label == kProverQuestion) {
                s.meas[i][q] = Measurement::from_reflection(prover_reflection(p.w[i]));
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Hamiltonians.

std::string hamiltonian_name(HamiltonianKind kind) {
    switch (kind) {
        case HamiltonianKind::Clock: return "clock";
        case HamiltonianKind::PropV: return "propv";
        case HamiltonianKind::PropP: return "propp";
        case HamiltonianKind::In: return "in";
        case HamiltonianKind::Out: return "out";
    }
    return "?";
}

HamiltonianReport build_hamiltonian(HamiltonianKind kind, const VerifierSpec &v, const std::vector<int> &priv_dims,
                                    const HamiltonianOptions &opt) {
    RestIndex ri(v, priv_dims);
    int T = v.T();
    int L = v.L();
    int r = v.r;
    std::vector<HTerm> terms;
    Mat id_rest = identity(static_cast<int>(ri.rest_dim));
    auto c0 = [](int t) { return t - 1; };
    switch (kind) {
        case HamiltonianKind::Clock: {
            for (int t = 1; t < T; ++t) {
                terms.push_back({1.0 / (2.0 * (T - 1)), {{c0(t), proj2(0)}, {c0(t + 1), proj2(1)}}, id_rest});
            }
            Mat idp = identity(static_cast<int>(ri.proto_dim));
            for (int i = 0; i < r; ++i) {
                for (int b = 0; b < 2; ++b) {
                    std::vector<Mat> bo(r);
                    bo[i] = proj2(1 - b);
                    terms.push_back({1.0 / (2.0 * r), {{c0(L + 1), proj2(b)}}, rest_op(ri, idp, bo)});
                }
            }
            break;
        }
        case HamiltonianKind::PropV: {
            for (int t = 1; t <= T; ++t) {
                if (t == L + 1) continue;
                std::vector<std::pair<int, Mat>> flags;
                if (t > 1) flags.push_back({c0(t - 1), proj2(1)});
                if (t < T) flags.push_back({c0(t + 1), proj2(0)});
                double w = 1.0 / (4.0 * (T - 1));
                terms.push_back({w, flags, id_rest});
                Mat u = rest_op(ri, protocol_gate_matrix(v, priv_dims, v.step(t), ri.proto_dim), {});
                auto fx = flags;
                fx.push_back({c0(t), x2()});
                terms.push_back({-w, fx, u});
            }
            break;
        }
        case HamiltonianKind::PropP: {
            if (static_cast<int>(opt.xp.size()) != r) throw InputError("PropP Hamiltonian needs one xp reflection per player");
            std::vector<Mat> parts = {identity(ri.dv)};
            for (int i = 0; i < r; ++i) {
                if (opt.xp[i].rows() != 2 * ri.dmp[i]) throw InputError("xp reflection has the wrong dimension");
                parts.push_back(opt.xp[i]);
            }
            std::vector<std::pair<int, Mat>> flags = {{c0(L), proj2(1)}, {c0(L + 2), proj2(0)}};
            terms.push_back({0.5, flags, id_rest});
            auto fx = flags;
            fx.push_back({c0(L + 1), x2()});
            terms.push_back({-0.5, fx, kron_all(parts)});
            break;
        }
        case HamiltonianKind::In: {
            for (int j = 0; j < v.qv; ++j) {
                terms.push_back({1.0 / v.qv, {{c0(1), proj2(0)}}, rest_op(ri, v_projector(v, ri, j, 1), {})});
            }
            break;
        }
        case HamiltonianKind::Out: {
            terms.push_back({1.0, {{c0(T), proj2(1)}}, rest_op(ri, v_projector(v, ri, 0, 0), {})});
            break;
        }
    }

    HamiltonianReport rep;
    rep.kind = kind;
    rep.legal = opt.legal;
    if (opt.legal) {
        int64_t dim = (T + 1) * ri.proto_dim;
        check_dense_dim(dim, "build_hamiltonian");
        rep.dims = {T + 1, ri.dv};
        for (int d : ri.dmp) rep.dims.push_back(d);
        rep.h = Mat::Zero(dim, dim);
        for (const auto &term : terms) {
            std::vector<const Mat *> cq(T, nullptr);
            for (const auto &[q, m] : term.c) cq[q] = &m;
            for (int s = 0; s <= T; ++s) {
                for (int t = 0; t <= T; ++t) {
                    cd f = term.w;
                    for (int q = 0; q < T && f != 0.0; ++q) {
                        int bs = q < s;
                        int bt = q < t;
                        f *= cq[q] ? (*cq[q])(bs, bt) : cd(bs == bt ? 1.0 : 0.0);
                    }
                    if (f == 0.0) continue;
                    uint32_t bs = ri.all_b(s > L);
                    uint32_t bt = ri.all_b(t > L);
                    for (int64_t x = 0; x < ri.proto_dim; ++x) {
                        int64_t rx = ri(x, bs);
                        for (int64_t y = 0; y < ri.proto_dim; ++y) {
                            cd val = term.rest(rx, ri(y, bt));
                            if (val != 0.0) rep.h(s * ri.proto_dim + x, t * ri.proto_dim + y) += f * val;
                        }
                    }
                }
            }
        }
    } else {
        int64_t cdim = int64_t{1} << T;
        check_dense_dim(cdim * ri.rest_dim, "build_hamiltonian");
        rep.dims = {static_cast<int>(cdim), ri.dv};
        for (int d : ri.dmp) rep.dims.push_back(2 * d);
        rep.h = Mat::Zero(cdim * ri.rest_dim, cdim * ri.rest_dim);
        for (const auto &term : terms) {
            std::vector<Mat> cs(T, identity(2));
            for (const auto &[q, m] : term.c) cs[q] = m;
            rep.h += term.w * kron(kron_all(cs), term.rest);
        }
    }
    rep.h = 0.5 * (rep.h + rep.h.adjoint()).eval();
    if (!opt.spectrum) return rep;
    Eigen::SelfAdjointEigenSolver<Mat> es(rep.h, Eigen::EigenvaluesOnly);
    rep.eigenvalues = es.eigenvalues();
    rep.gap = 0;
    for (int i = 0; i < rep.eigenvalues.size(); ++i) {
        double e = rep.eigenvalues(i);
        if (std::abs(e) < 1e-9) {
            ++rep.kernel_dim;
        } else if (e > 0 && rep.gap == 0) {
            rep.gap = e;
        }
    }
    return rep;
}

Mat legal_isometry(const VerifierSpec &v, const std::vector<int> &priv_dims) {
    RestIndex ri(v, priv_dims);
    int T = v.T();
    int L = v.L();
    int64_t rows = (int64_t{1} << T) * ri.rest_dim;
    int64_t cols = (T + 1) * ri.proto_dim;
    check_dense_dim(rows, "legal_isometry");
    Mat iso = Mat::Zero(rows, cols);
    for (int t = 0; t <= T; ++t) {
        for (int64_t x = 0; x < ri.proto_dim; ++x) {
            iso(unary_index(t, T) * ri.rest_dim + ri(x, ri.all_b(t > L)), t * ri.proto_dim + x) = 1.0;
        }
    }
    return iso;
}

Mat restrict_to(const Mat &h, const Mat &projector) {
    if (h.rows() != projector.rows() || h.cols() != projector.cols()) throw InputError("restrict_to: shape mismatch");
    return projector * h * projector;
}

// ---------------------------------------------------------------------------
// Extended game.

ExtendedGame build_extended_game(const VerifierSpec &v, int n, int k, const SequencePolicy &policy) {
    if (v.r != 1) throw InputError("extended game supports a single prover");
    if (n != 1 + v.qm) throw InputError("extended game needs n = 1 + qM");
    ExtendedGame eg;
    eg.verifier = v;
    eg.n = n;
    eg.mc = build_mc_layout(n, k, policy);
    eg.q_s = eg.mc.N() + 1;
    int T = v.T();
    GameSpec &g = eg.game;
    g.name = "extended(" + (v.name.empty() ? std::string("verifier") : v.name) + ")";
    g.players = 1;
    g.alphabets.assign(1, {});
    g.pauli_qubits = {n};
    g.referee = {{"S", RegKind::Unary, eg.q_s}, {"X", RegKind::Qubits, 2 * n}, {"C", RegKind::Unary, T}, {"V", RegKind::Qubits, v.qv}};
    const Rational third(1, 3);

    for (int t = 1; t < eg.q_s; ++t) {
        std::vector<RegMeasurement> ms = {{0, {PauliOp::single(eg.q_s, t - 1, 'Z'), PauliOp::single(eg.q_s, t, 'Z')}, {}}};
        int pred = g.add_predicate(Predicate::make_referee(
            std::move(ms), [](const std::vector<int> &c, const std::vector<uint32_t> &) { return c[0] == 1 ? 0.0 : 1.0; }));
        g.points.push_back({{-1}, third * Rational(1, eg.q_s - 1), pred, "s-clock"});
    }

    MCEmbedding emb;
    emb.s_reg = 0;
    emb.x_reg = 1;
    emb.player = 0;
    emb.weight = third;
    emb.fixed = false;
    add_mc_points(g, eg.mc, emb);

    HonestGameOptions hopt;
    hopt.unary_clock = true;
    hopt.fixed_paulis = false;
    GameSpec hg = build_honest_game(v, hopt);
    eg.output_begin = static_cast<int>(g.points.size());
    PauliOp zs = PauliOp::single(eg.q_s, 0, 'Z');
    for (const auto &pt : hg.points) {
        const Predicate &hp = hg.predicates[pt.pred];
        std::vector<RegMeasurement> ms = {{0, {zs}, {}}};
        for (auto m : hp.measurements) {
            m.reg += 2;
            ms.push_back(std::move(m));
        }
        AcceptFn inner = hp.accept;
        int pred = g.add_predicate(Predicate::make_referee(std::move(ms), [inner](const std::vector<int> &c, const std::vector<uint32_t> &a) {
            if (c[0] == 1) return 1.0;
            std::vector<int> rest(c.begin() + 1, c.end());
            return inner(rest, a);
        }));
        std::vector<int> q = {pt.q[0] < 0 ? -1 : g.intern_question(0, hg.alphabets[0][pt.q[0]])};
        g.points.push_back({q, third * pt.prob, pred, "output:" + pt.tag});
    }
    if (policy.sampled) g.flags.push_back("deviation:sampled-sequence-policy " + policy.str());
    g.validate();
    return eg;
}

Strategy honest_extended_strategy(const ExtendedGame &eg, const ProverSpec &p) {
    const VerifierSpec &v = eg.verifier;
    Vec hist = honest_history_state(v, p, true);
    int pdim = 2 * p.prover_dim(0, v.qm);
    int priv = pdim >> eg.n;
    int w = eg.mc.control_width();
    Vec plus = Vec::Constant(int64_t{1} << w, 1.0 / std::sqrt(static_cast<double>(int64_t{1} << w)));
    Vec init = product_state({plus, hist});
    BlockLayout rest({1 << w, v.T() + 1, 1 << v.qv, pdim});
    ReflectionAssignment a = ReflectionAssignment::pauli(eg.mc.sys.paulis, priv);
    Vec state = history_state(eg.mc.graph(), eg.game.referee[0].dim(), rest, 0, 3, a, init);
    Strategy s = honest_strategy(eg.game, Ensemble::pure(std::move(state)), {pdim});
    for (size_t q = 0; q < eg.game.alphabets[0].size(); ++q) {
        if (eg.game.alphabets[0][q].label == kProverQuestion) {
            s.meas[0][q] = Measurement::from_reflection(prover_reflection(p.w[0]));
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Final game.

namespace {

class Interner {
   public:
    explicit Interner(GameSpec &g) : g_(g), maps_(g.players) {}
    int operator()(int player, const Question &q) {
        auto &m = maps_[player];
        auto it = m.find(q.label);
        if (it != m.end()) return it->second;
        int idx = static_cast<int>(g_.alphabets[player].size());
        g_.alphabets[player].push_back(q);
        m.emplace(q.label, idx);
        return idx;
    }

   private:
    GameSpec &g_;
    std::vector<std::unordered_map<std::string, int>> maps_;
};

AcceptFn source_accept(const Predicate &pr, int r) {
    if (pr.kind == Predicate::Kind::Referee) return pr.accept;
    if (pr.kind == Predicate::Kind::Xor) {
        std::vector<uint32_t> masks = pr.masks;
        int sign = pr.sign;
        return [masks, sign, r](const std::vector<int> &, const std::vector<uint32_t> &a) {
            uint32_t par = 0;
            for (int i = 0; i < r; ++i) par ^= static_cast<uint32_t>(popcount64(a[i] & masks[i]) & 1);
            return static_cast<int>(par) == sign ? 1.0 : 0.0;
        };
    }
    throw InputError("table predicates cannot be simulated");
}

struct SimPart {
    int extra = 0;
    int pos = 0;
    int width = 0;
};

}  // namespace

FinalGame build_final_game(const ExtendedGame &eg, const FinalGameOptions &opt) {
    if (opt.ms_samples < 1) throw InputError("ms_samples must be positive");
    const GameSpec &src = eg.game;
    FinalGame fg;
    fg.r = src.players;
    int acc = 0;
    for (const auto &reg : src.referee) {
        if (reg.kind == RegKind::Qudit) throw InputError("qudit referee registers cannot be encoded");
        fg.reg_offset.push_back(acc);
        acc += reg.qubits();
    }
    fg.n_ref = acc;
    int n_ref = fg.n_ref;
    int r = fg.r;
    GameSpec &g = fg.game;
    g.name = "final(" + src.name + ")";
    g.players = r + kExtras;
    g.alphabets.assign(g.players, {});
    g.pauli_qubits = src.pauli_qubits;
    g.pauli_qubits.resize(g.players, n_ref);
    g.flags = src.flags;
    Interner intern(g);
    const Rational half(1, 2);

    // Simulation branch.
    int k_ref = 2;
    for (size_t e = 0; e < src.points.size(); ++e) {
        const GamePoint &pt = src.points[e];
        const Predicate &pr = src.predicates[pt.pred];
        std::vector<int> q(g.players, -1);
        for (int i = 0; i < r; ++i) {
            if (pt.q[i] >= 0) q[i] = intern(i, src.alphabets[i][pt.q[i]]);
        }
        std::vector<std::vector<PauliOp>> comps(kExtras);
        // (measurement, pauli) -> (extra, component)
        std::vector<std::vector<std::vector<std::pair<int, PauliOp>>>> raw(pr.measurements.size());
        std::vector<std::vector<int>> signs(pr.measurements.size());
        for (size_t m = 0; m < pr.measurements.size(); ++m) {
            const RegMeasurement &rm = pr.measurements[m];
            if (rm.paulis.empty()) throw InputError("point " + pt.tag + ": referee measurement is not a Pauli measurement");
            raw[m].resize(rm.paulis.size());
            for (size_t j = 0; j < rm.paulis.size(); ++j) {
                const PauliOp &p = rm.paulis[j];
                if (!p.is_xz_form()) throw InputError("point " + pt.tag + ": referee Pauli " + p.str() + " is not in XZ form");
                signs[m].push_back(p.sign_bit());
                for (int x = 0; x < kExtras; ++x) {
                    PauliOp c = extra_component(p, fg.reg_offset[rm.reg], n_ref, x);
                    if (c.is_identity_word()) continue;
                    raw[m][j].push_back({x, c});
                    auto &list = comps[x];
                    if (std::none_of(list.begin(), list.end(), [&](const PauliOp &o) { return o.same_word(c); })) list.push_back(c);
                }
            }
        }
        for (int x = 0; x < kExtras; ++x) {
            auto &list = comps[x];
            if (list.empty()) continue;
            for (size_t a = 0; a < list.size(); ++a) {
                for (size_t b = a + 1; b < list.size(); ++b) {
                    if (!list[a].commutes(list[b])) {
                        throw InputError("point " + std::to_string(e) + " (" + pt.tag + "): measurement induces non-commuting questions for extra player " +
                                         std::to_string(x + 1));
                    }
                }
            }
            if (list.size() > 32) throw ResourceError("point " + pt.tag + ": induced question exceeds 32 answer bits");
            std::sort(list.begin(), list.end(), canonical_less);
            std::set<int> support;
            int maxw = 0;
            for (const auto &c : list) {
                for (int u : c.support()) support.insert(u);
                maxw = std::max(maxw, c.weight());
            }
            k_ref = std::max({k_ref, static_cast<int>(list.size()), static_cast<int>(support.size()), maxw});
            q[r + x] = intern(r + x, list.size() == 1 ? Question::single(list[0]) : Question::set(list));
        }
        std::vector<std::vector<std::vector<SimPart>>> parts(raw.size());
        std::vector<int> widths(raw.size());
        for (size_t m = 0; m < raw.size(); ++m) {
            parts[m].resize(raw[m].size());
            widths[m] = static_cast<int>(raw[m].size());
            for (size_t j = 0; j < raw[m].size(); ++j) {
                for (const auto &[x, c] : raw[m][j]) {
                    const auto &list = comps[x];
                    int pos = 0;
                    while (!list[pos].same_word(c)) ++pos;
                    parts[m][j].push_back({x, pos, static_cast<int>(list.size())});
                }
            }
        }
        AcceptFn inner = source_accept(pr, r);
        AcceptFn f = [inner, parts, widths, signs, r](const std::vector<int> &, const std::vector<uint32_t> &a) {
            std::vector<int> c(parts.size(), 0);
            for (size_t m = 0; m < parts.size(); ++m) {
                uint32_t cv = 0;
                for (size_t j = 0; j < parts[m].size(); ++j) {
                    uint32_t b = static_cast<uint32_t>(signs[m][j]);
                    for (const auto &sp : parts[m][j]) b ^= bit_of(a[r + sp.extra], sp.pos, sp.width);
                    cv |= b << (widths[m] - 1 - static_cast<int>(j));
                }
                c[m] = static_cast<int>(cv);
            }
            std::vector<uint32_t> orig(a.begin(), a.begin() + r);
            return inner(c, orig);
        };
        int pred = g.add_predicate(Predicate::make_referee({}, std::move(f)));
        g.points.push_back({q, half * pt.prob, pred, "sim:" + pt.tag});
        fg.source.push_back(static_cast<int>(e));
    }
    fg.k_ref = std::min(k_ref, n_ref);
    int k = fg.k_ref;

    // Sampled (n_ref, k_ref)-stabilizer branch.
    std::vector<PauliOp> xi = xz_stabilizer_subset(eight_qubit_code());
    std::vector<std::array<int64_t, 2>> marg(kExtras, {0, 0});
    for (const auto &p : xi) {
        for (int i = 0; i < kExtras; ++i) ++marg[i][p.letter(i) == 'X' ? 0 : 1];
    }
    Rational per(1, 2 * 4 * static_cast<int64_t>(opt.ms_samples));
    auto letter_op = [&](int u, char c) { return PauliOp::single(n_ref, u, c); };
    auto set_question = [&](std::vector<PauliOp> members) {
        std::sort(members.begin(), members.end(), canonical_less);
        return Question::set(std::move(members));
    };
    auto mask_of = [](const Question &qs, const std::vector<PauliOp> &ps) {
        uint32_t mask = 0;
        for (const auto &p : ps) {
            for (size_t j = 0; j < qs.ops.size(); ++j) {
                if (qs.ops[j].same_word(p)) mask |= 1u << (qs.ops.size() - 1 - j);
            }
        }
        return mask;
    };
    std::map<std::pair<std::vector<uint32_t>, int>, int> xor_preds;
    auto xor_pred = [&](const std::vector<uint32_t> &masks, int sign) {
        auto key = std::make_pair(masks, sign);
        auto it = xor_preds.find(key);
        if (it != xor_preds.end()) return it->second;
        int id = g.add_predicate(Predicate::make_xor(masks, sign));
        xor_preds.emplace(key, id);
        return id;
    };
    auto add_ms = [&](const std::vector<int> &qx, const std::vector<uint32_t> &mx, int sign, const std::string &tag) {
        std::vector<int> q(g.players, -1);
        std::vector<uint32_t> masks(g.players, 0);
        for (int i = 0; i < kExtras; ++i) {
            q[r + i] = qx[i];
            masks[r + i] = mx[i];
        }
        g.points.push_back({q, per, xor_pred(masks, sign), tag});
        fg.source.push_back(-1);
    };
    Rng rng(derive_seed(opt.seed, 0x6d73));
    auto pick_letter = [&](int player) {
        return random_below(rng, 32) < marg[player][0] ? 'X' : 'Z';
    };
    // Stabilizer check.
    for (int s = 0; s < opt.ms_samples; ++s) {
        int u = static_cast<int>(random_below(rng, n_ref));
        const PauliOp &p = xi[random_below(rng, static_cast<int64_t>(xi.size()))];
        std::vector<int> qx(kExtras);
        for (int i = 0; i < kExtras; ++i) qx[i] = intern(r + i, Question::single(letter_op(u, p.letter(i))));
        add_ms(qx, std::vector<uint32_t>(kExtras, 1), p.sign_bit(), "ms-stabilizer");
    }
    // Confusion check.
    for (int s = 0; s < opt.ms_samples; ++s) {
        std::vector<int> J = random_subset(rng, n_ref, k);
        int u = J[random_below(rng, k)];
        int t = static_cast<int>(random_below(rng, kExtras));
        const PauliOp &p = xi[random_below(rng, static_cast<int64_t>(xi.size()))];
        std::vector<PauliOp> members;
        for (int w : J) members.push_back(letter_op(w, w == u ? p.letter(t) : pick_letter(t)));
        Question qs = set_question(members);
        std::vector<int> qx(kExtras);
        std::vector<uint32_t> mx(kExtras, 1);
        for (int i = 0; i < kExtras; ++i) {
            if (i == t) {
                qx[i] = intern(r + i, qs);
                mx[i] = mask_of(qs, {letter_op(u, p.letter(t))});
            } else {
                qx[i] = intern(r + i, Question::single(letter_op(u, p.letter(i))));
            }
        }
        add_ms(qx, mx, p.sign_bit(), "ms-confusion");
    }
    // Parity check: p uniform over Pauli_{n_ref,k}.
    std::vector<double> wprob(k + 1, 0.0);
    {
        std::vector<double> logw(k + 1, -1e300);
        double mx = -1e300;
        for (int w = 1; w <= k; ++w) {
            logw[w] = std::lgamma(n_ref + 1.0) - std::lgamma(w + 1.0) - std::lgamma(n_ref - w + 1.0) + w * std::log(2.0);
            mx = std::max(mx, logw[w]);
        }
        for (int w = 1; w <= k; ++w) wprob[w] = std::exp(logw[w] - mx);
    }
    std::discrete_distribution<int> wdist(wprob.begin(), wprob.end());
    for (int s = 0; s < opt.ms_samples; ++s) {
        int w = wdist(rng.engine());
        std::vector<int> J = random_subset(rng, n_ref, w);
        PauliOp p(n_ref);
        std::vector<PauliOp> letters;
        for (int u : J) {
            char c = random_below(rng, 2) ? 'Z' : 'X';
            p.set_letter(u, c);
            letters.push_back(letter_op(u, c));
        }
        std::vector<PauliOp> members = letters;
        std::set<int> used(J.begin(), J.end());
        while (static_cast<int>(members.size()) < k) {
            int v = static_cast<int>(random_below(rng, n_ref));
            if (!used.insert(v).second) continue;
            members.push_back(letter_op(v, random_below(rng, 2) ? 'Z' : 'X'));
        }
        Question qs = set_question(members);
        uint32_t mask = mask_of(qs, letters);
        int t = static_cast<int>(random_below(rng, kExtras));
        std::vector<int> qx(kExtras);
        std::vector<uint32_t> mx(kExtras, mask);
        for (int i = 0; i < kExtras; ++i) {
            if (i == t) {
                qx[i] = intern(r + i, Question::single(p));
                mx[i] = 1;
            } else {
                qx[i] = intern(r + i, qs);
            }
        }
        add_ms(qx, mx, 0, "ms-parity");
    }
    // Pauli check: k single letters on a random J.
    for (int s = 0; s < opt.ms_samples; ++s) {
        std::vector<int> J = random_subset(rng, n_ref, k);
        std::vector<PauliOp> members;
        for (int u : J) members.push_back(letter_op(u, random_below(rng, 2) ? 'Z' : 'X'));
        PauliOp p = members[random_below(rng, k)];
        Question qs = set_question(members);
        int t = static_cast<int>(random_below(rng, kExtras));
        std::vector<int> qx(kExtras);
        std::vector<uint32_t> mx(kExtras, 1);
        for (int i = 0; i < kExtras; ++i) {
            if (i == t) {
                qx[i] = intern(r + i, qs);
                mx[i] = mask_of(qs, {p});
            } else {
                qx[i] = intern(r + i, Question::single(p));
            }
        }
        add_ms(qx, mx, 0, "ms-pauli");
    }
    g.flags.push_back("deviation:sampled-stabilizer-branch samples=" + std::to_string(opt.ms_samples) +
                      " seed=" + std::to_string(opt.seed));
    g.validate();
    int total = kExtras * n_ref;
    for (int i = 0; i < r; ++i) total += g.pauli_qubits[i];
    fg.encoding = question_encoding(g, total);
    return fg;
}

FinalHonestReport evaluate_final_honest(const FinalGame &fg, const ExtendedGame &eg, const Strategy &ext_honest) {
    const GameSpec &g = fg.game;
    const GameSpec &src = eg.game;
    int r = fg.r;
    FinalHonestReport rep;
    Evaluator ev(src);
    ValueReport ext = ev.evaluate(ext_honest);
    BlockLayout layout = src.layout(ext_honest.player_dims);
    std::unordered_map<std::string, Decoded> cache;
    auto decode = [&](const PauliOp &w) -> Decoded {
        std::string key = w.str();
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        Decoded d = decode_column(w);
        cache.emplace(key, d);
        return d;
    };
    // Inventory qubit -> (register, local qubit).
    auto locate = [&](int u) {
        int reg = static_cast<int>(std::upper_bound(fg.reg_offset.begin(), fg.reg_offset.end(), u) - fg.reg_offset.begin()) - 1;
        return std::make_pair(reg, u - fg.reg_offset[reg]);
    };
    double sim_mass = 0;
    double ms_mass = 0;
    double ms_acc = 0;
    for (size_t pi = 0; pi < g.points.size(); ++pi) {
        const GamePoint &pt = g.points[pi];
        for (int x = 6; x < kExtras; ++x) {
            if (fg.source[pi] >= 0 && pt.q[r + x] >= 0) throw InputError("extra player " + std::to_string(x + 1) + " asked in a simulation point");
        }
        if (fg.source[pi] >= 0) {
            const GamePoint &sp = src.points[fg.source[pi]];
            const Predicate &pr = src.predicates[sp.pred];
            for (const auto &rm : pr.measurements) {
                for (const auto &p : rm.paulis) {
                    std::vector<PauliOp> comps(kExtras, PauliOp(fg.n_ref));
                    for (int x = 0; x < kExtras; ++x) {
                        PauliOp c = extra_component(p, fg.reg_offset[rm.reg], fg.n_ref, x);
                        if (c.is_identity_word()) continue;
                        if (pt.q[r + x] < 0) throw InputError("simulation point misses extra player " + std::to_string(x + 1));
                        const Question &q = g.alphabets[r + x][pt.q[r + x]];
                        if (std::none_of(q.ops.begin(), q.ops.end(), [&](const PauliOp &o) { return o.same_word(c); })) {
                            throw InputError("simulation question lacks a logical component");
                        }
                        comps[x] = c;
                    }
                    for (int u : p.support()) {
                        int iu = fg.reg_offset[rm.reg] + u;
                        PauliOp col(kExtras);
                        for (int x = 0; x < kExtras; ++x) col.set_letter(x, comps[x].letter(iu));
                        Decoded d = decode(col);
                        char want = p.letter(u);
                        if (d.kappa != cd(1.0) || d.a != (want == 'X') || d.b != (want == 'Z') || d.l2x) {
                            throw InputError("simulation column " + col.str() + " does not decode to the referee letter");
                        }
                        ++rep.decoded_blocks;
                    }
                }
            }
            sim_mass += pt.prob.value();
            continue;
        }
        // Stabilizer-branch point: decode the product of the masked answers.
        const Predicate &pr = g.predicates[pt.pred];
        std::vector<PauliOp> prods;
        int phase = 0;
        std::set<int> support;
        for (int x = 0; x < kExtras; ++x) {
            PauliOp m(fg.n_ref);
            if (pt.q[r + x] >= 0) {
                const Question &q = g.alphabets[r + x][pt.q[r + x]];
                uint32_t mask = pr.masks[r + x];
                for (size_t j = 0; j < q.ops.size(); ++j) {
                    if (bit_of(mask, static_cast<int>(j), static_cast<int>(q.ops.size()))) m = m * q.ops[j];
                }
            }
            phase += m.phase();
            for (int u : m.support()) support.insert(u);
            prods.push_back(m.unsigned_copy());
        }
        cd e = kI[phase & 3];
        std::map<int, PauliOp> logical;  // register -> referee Pauli
        for (int u : support) {
            PauliOp col(kExtras);
            for (int x = 0; x < kExtras; ++x) col.set_letter(x, prods[x].letter(u));
            Decoded d = decode(col);
            ++rep.decoded_blocks;
            if (d.l2x) throw InputError("stabilizer-branch column " + col.str() + " has a second-logical X part");
            e *= d.kappa;
            if (d.a || d.b) {
                auto [reg, local] = locate(u);
                auto it = logical.find(reg);
                if (it == logical.end()) it = logical.emplace(reg, PauliOp(src.referee[reg].qubits())).first;
                PauliOp lp = PauliOp::single(src.referee[reg].qubits(), local, d.a && d.b ? 'Y' : d.a ? 'X' : 'Z');
                // X Z = -i Y.
                if (d.a && d.b) e *= cd(0, -1);
                it->second = it->second * lp;
            }
        }
        if (!logical.empty()) {
            ++rep.nontrivial_logicals;
            ProductOp op = ProductOp::identity(layout);
            for (auto &[reg, p] : logical) {
                e *= kI[p.phase() & 3];
                p.set_phase(0);
                auto ops = referee_outcome_ops(src.referee[reg], RegMeasurement{reg, {p}, {}});
                if (ops[0].is_identity() || ops[1].is_identity()) throw InputError("degenerate logical observable");
                LocalOp obs = ops[0];
                for (const auto &run : ops[1].runs()) obs.add_run(run.row, run.col, run.len, -run.val);
                op = op.with(reg, obs);
            }
            e *= expectation(layout, op, ext_honest.state);
        }
        if (std::abs(e.imag()) > 1e-9) throw InputError("stabilizer-branch correlator is not real");
        double corr = e.real();
        double accept = 0.5 * (1.0 + (pr.sign ? -1.0 : 1.0) * corr);
        ms_mass += pt.prob.value();
        ms_acc += pt.prob.value() * accept;
    }
    rep.sim_value = ext.value;
    rep.ms_value = ms_mass > 0 ? ms_acc / ms_mass : 1.0;
    rep.value = sim_mass * rep.sim_value + ms_acc;
    return rep;
}

QuestionEncoding question_encoding(const GameSpec &g, int total_qubits) {
    if (total_qubits < 2) throw InputError("question_encoding needs at least two qubits");
    QuestionEncoding enc;
    for (const auto &alpha : g.alphabets) {
        int bits = ceil_log2(std::max<int64_t>(2, static_cast<int64_t>(alpha.size())));
        enc.index_bits.push_back(bits);
        enc.max_width = std::max(enc.max_width, enc.tag_bits + bits);
    }
    enc.log2_qubits = std::log2(static_cast<double>(total_qubits));
    return enc;
}

PipelineInstance build_pipeline(const VerifierSpec &v, int k, const SequencePolicy &policy, uint64_t seed) {
    PipelineInstance pi;
    pi.n = 1 + v.qm;
    pi.k = k;
    pi.policy = policy;
    pi.seed = seed;
    pi.honest = build_honest_game(v);
    pi.extended = build_extended_game(v, pi.n, k, policy);
    pi.q_s = pi.extended.q_s;
    FinalGameOptions fo;
    fo.seed = seed;
    pi.final_game = build_final_game(pi.extended, fo);
    return pi;
}

ComposeResult soundness_compose(double p, double s, double h, double kappa) {
    if (!(p > 0 && p < 1) || !(s > 0 && s < 1) || !(h > 0) || !(kappa >= 1)) {
        throw InputError("soundness_compose: need p, s in (0,1), h > 0, kappa >= 1");
    }
    auto f = [&](double eps) {
        return (1 - p) * (1 - eps) + p * std::min(1.0, s + h * std::pow(eps, 1.0 / kappa));
    };
    // Below eps_cap the min is s + h eps^(1/kappa); above it f decreases.
    double eps_cap = std::min(1.0, std::pow((1 - s) / h, kappa));
    std::vector<double> cand = {0.0, eps_cap};
    if (kappa > 1) {
        double e0 = std::pow(p * h / (kappa * (1 - p)), kappa / (kappa - 1));
        cand.push_back(std::clamp(e0, 0.0, eps_cap));
    }
    ComposeResult out;
    out.max_value = -1;
    for (double e : cand) {
        double val = f(e);
        if (val > out.max_value + 1e-15) {
            out.max_value = val;
            out.argmax = e;
        }
    }
    out.lemma_bound = 1 - p * (1 - s) / 2;
    return out;
}

}  // namespace qcomp
