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

#include "qcomp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qcomp {

namespace {

constexpr int64_t kMcLayoutGuard = 2000000;
// Largest N for an mc game (memory grows as N^2).
constexpr int64_t kMcGameGuardDefault = 40000;

std::string join_symbols(const std::vector<int> &q) {
    std::string s;
    for (size_t i = 0; i < q.size(); ++i) s += (i ? "," : "") + std::to_string(q[i] + 1);
    return s;
}

/// Pi_e outcome decoding for one referee measurement.
struct EdgeDecoder {
    bool unary = false;
    int K = 0;
    bool lo = false;
    bool hi = false;

    int operator()(int c) const {
        if (!unary) return c;
        auto bit = [&](int j) { return (c >> (K - 1 - j)) & 1; };
        int pos = 0;
        if (lo && bit(pos++) != 1) return 2;
        if (hi && bit(pos++) != 0) return 2;
        for (; pos < K - 1; ++pos) {
            if (bit(pos)) return 2;
        }
        return bit(K - 1);
    }
};

/// Referee measurement of Pi_e on register `reg` for clock indices u < v.
std::pair<RegMeasurement, EdgeDecoder> edge_measurement(const RefRegister &reg, int reg_index, int u, int v) {
    RegMeasurement m;
    m.reg = reg_index;
    EdgeDecoder dec;
    if (reg.kind == RegKind::Unary) {
        UnaryEdgePaulis ep = unary_edge_paulis(u, v, reg.size);
        m.paulis = ep.paulis;
        dec.unary = true;
        dec.K = static_cast<int>(ep.paulis.size());
        dec.lo = ep.flag_low;
        dec.hi = ep.flag_high;
    } else if (reg.kind == RegKind::Qudit) {
        m.ops = pi_e_ops(u, v, reg.dim());
    } else {
        throw InputError("Pi_e needs a qudit or unary clock register");
    }
    return {std::move(m), dec};
}

/// Clock index of a vertex: its value on unary registers, its position otherwise.
int clock_index(const RefRegister &reg, const PropagationGraph &g, int vertex) {
    return reg.kind == RegKind::Unary ? vertex : g.position(vertex);
}

struct PropagationEmbedding {
    int s_reg = 0;
    int x_reg = -1;
    int player = 0;
    Rational weight = Rational(1, 1);
    std::string tag = "propagation";
    bool fixed = false;
};

void add_propagation_points(GameSpec &game, const PropagationGraph &g, const PropagationEmbedding &emb) {
    const RefRegister &sreg = game.referee[emb.s_reg];
    Rational per_edge = emb.weight * Rational(1, g.N());
    std::unordered_map<std::string, int> qcache;
    auto intern = [&](Question q) {
        q.fixed = emb.fixed;
        std::string key = std::to_string(static_cast<int>(q.kind)) + q.label;
        auto it = qcache.find(key);
        if (it != qcache.end()) return it->second;
        int id = game.intern_question(emb.player, q);
        qcache.emplace(key, id);
        return id;
    };
    int player = emb.player;
    for (int i = 0; i < g.N(); ++i) {
        const EdgeLabel &e = g.labels[i];
        auto [sm, dec] = edge_measurement(sreg, emb.s_reg, clock_index(sreg, g, g.vertices[i]),
                                          clock_index(sreg, g, g.vertices[i + 1]));
        GamePoint pt;
        pt.q.assign(game.players, -1);
        pt.prob = per_edge;
        pt.tag = emb.tag;
        std::vector<RegMeasurement> ms = {sm};
        AcceptFn f;
        switch (e.kind) {
            case EdgeLabel::Kind::Reflect:
                pt.q[player] = intern(symbol_question(g, e.symbol));
                f = [dec, player](const std::vector<int> &c, const std::vector<uint32_t> &a) {
                    int t = dec(c[0]);
                    return (t == 2 || t == static_cast<int>(a[player] & 1)) ? 1.0 : 0.0;
                };
                break;
            case EdgeLabel::Kind::Confused: {
                pt.q[player] = intern(set_question(g, e.set));
                int shift = static_cast<int>(e.set.size()) - 1 - e.member();
                f = [dec, player, shift](const std::vector<int> &c, const std::vector<uint32_t> &a) {
                    int t = dec(c[0]);
                    return (t == 2 || t == static_cast<int>((a[player] >> shift) & 1)) ? 1.0 : 0.0;
                };
                break;
            }
            case EdgeLabel::Kind::Controlled: {
                if (emb.x_reg < 0) throw InputError("controlled label needs the control register");
                pt.q[player] = intern(symbol_question(g, e.symbol));
                RegMeasurement xm;
                xm.reg = emb.x_reg;
                xm.paulis = {PauliOp::single(game.referee[emb.x_reg].size, e.control, 'Z')};
                ms.push_back(xm);
                f = [dec, player](const std::vector<int> &c, const std::vector<uint32_t> &a) {
                    int t = dec(c[0]);
                    if (t == 2) return 1.0;
                    if (c[1] == 0) return t == 1 ? 0.0 : 1.0;
                    return ((static_cast<int>(a[player] & 1) ^ t) == 1) ? 0.0 : 1.0;
                };
                break;
            }
            case EdgeLabel::Kind::SignedIdentity: {
                int tau = e.tau;
                f = [dec, tau](const std::vector<int> &c, const std::vector<uint32_t> &) {
                    int t = dec(c[0]);
                    return (t == 2 || t == tau) ? 1.0 : 0.0;
                };
                break;
            }
        }
        pt.pred = game.add_predicate(Predicate::make_referee(std::move(ms), std::move(f)));
        game.points.push_back(std::move(pt));
    }
}

void add_constraint_points(GameSpec &game, const PropagationGraph &g, int s_reg, Rational weight, const std::string &tag) {
    if (g.cons.empty()) return;
    const RefRegister &sreg = game.referee[s_reg];
    Rational per = weight * Rational(1, static_cast<int64_t>(g.cons.size()));
    for (const auto &ce : g.cons) {
        auto [sm, dec] = edge_measurement(sreg, s_reg, clock_index(sreg, g, ce.from), clock_index(sreg, g, ce.to));
        int tau = ce.tau;
        GamePoint pt;
        pt.q.assign(game.players, -1);
        pt.prob = per;
        pt.tag = tag;
        pt.pred = game.add_predicate(Predicate::make_referee(
            {sm}, [dec, tau](const std::vector<int> &c, const std::vector<uint32_t> &) {
                int t = dec(c[0]);
                return (t == 2 || t == tau) ? 1.0 : 0.0;
            }));
        game.points.push_back(std::move(pt));
    }
}

int pauli_qubits_of(const PropagationGraph &g) { return g.paulis.empty() ? 0 : g.paulis[0].n(); }

Mat qubit_projector(int qubits, int q, int bit) {
    int64_t d = int64_t{1} << qubits;
    Mat p = Mat::Zero(d, d);
    for (int64_t b = 0; b < d; ++b) {
        if (((b >> (qubits - 1 - q)) & 1) == bit) p(b, b) = 1.0;
    }
    return p;
}

/// Applies one edge unitary to a vector over `rest`.
void apply_edge(const EdgeLabel &e, const ReflectionAssignment &a, const BlockLayout &rest, int x_block, int player_block,
                Vec &cur) {
    switch (e.kind) {
        case EdgeLabel::Kind::Reflect:
            cur = apply_local(rest, player_block, a.r[e.symbol], cur);
            return;
        case EdgeLabel::Kind::Confused:
            cur = apply_local(rest, player_block, a.derived(e.symbol, e.set), cur);
            return;
        case EdgeLabel::Kind::SignedIdentity:
            if (e.tau) cur = -cur;
            return;
        case EdgeLabel::Kind::Controlled: {
            if (x_block < 0) throw InputError("controlled label without a control register");
            int qx = ceil_log2(rest.dim(x_block));
            Vec on = apply_local(rest, x_block, qubit_projector(qx, e.control, 1), cur);
            Vec off = cur - on;
            cur = off + apply_local(rest, player_block, a.r[e.symbol], on);
            return;
        }
    }
}

bool commute(const Mat &a, const Mat &b) { return (a * b - b * a).norm() <= 1e-9 * std::max(1.0, a.norm() * b.norm()); }

/// Weight-1 XZ symbols of the (n,k) system: index of letter c on qubit u.
int letter_symbol(const std::vector<PauliOp> &paulis, int n, int u, char c) {
    PauliOp p = PauliOp::single(n, u, c);
    for (size_t i = 0; i < paulis.size(); ++i) {
        if (paulis[i].same_word(p)) return static_cast<int>(i);
    }
    throw InputError("letter symbol missing from Pauli_{n,k}");
}

int symbol_of(const std::vector<PauliOp> &paulis, const PauliOp &p) {
    for (size_t i = 0; i < paulis.size(); ++i) {
        if (paulis[i].same_word(p)) return static_cast<int>(i);
    }
    throw InputError("Pauli outside Pauli_{n,k}: " + p.str());
}

int64_t ipow(int64_t b, int e) {
    int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

std::vector<int> digits(int64_t idx, int base, int len) {
    std::vector<int> d(len);
    for (int i = len - 1; i >= 0; --i) {
        d[i] = static_cast<int>(idx % base);
        idx /= base;
    }
    return d;
}

}  // namespace

EdgeLabel EdgeLabel::reflect(int j) {
    EdgeLabel e;
    e.kind = Kind::Reflect;
    e.symbol = j;
    return e;
}

EdgeLabel EdgeLabel::controlled(int c, int j) {
    EdgeLabel e;
    e.kind = Kind::Controlled;
    e.control = c;
    e.symbol = j;
    return e;
}

EdgeLabel EdgeLabel::confused(int j, std::vector<int> q) {
    EdgeLabel e;
    e.kind = Kind::Confused;
    e.symbol = j;
    e.set = std::move(q);
    e.member();
    return e;
}

EdgeLabel EdgeLabel::signed_identity(int tau) {
    if (tau != 0 && tau != 1) throw InputError("sign bit must be 0 or 1");
    EdgeLabel e;
    e.kind = Kind::SignedIdentity;
    e.tau = tau;
    return e;
}

int EdgeLabel::member() const {
    auto it = std::find(set.begin(), set.end(), symbol);
    if (it == set.end()) throw InputError("derived symbol not in its set");
    return static_cast<int>(it - set.begin());
}

std::string EdgeLabel::str() const {
    switch (kind) {
        case Kind::Reflect:
            return "R" + std::to_string(symbol + 1);
        case Kind::Controlled:
            return "C" + std::to_string(control + 1) + "(R" + std::to_string(symbol + 1) + ")";
        case Kind::Confused:
            return "R" + std::to_string(symbol + 1) + "|" + join_symbols(set);
        case Kind::SignedIdentity:
            return tau ? "-I" : "+I";
    }
    return "";
}

PropagationGraph PropagationGraph::path(std::vector<EdgeLabel> labels, int symbols, int controls) {
    PropagationGraph g;
    for (int i = 0; i <= static_cast<int>(labels.size()); ++i) g.vertices.push_back(i);
    g.labels = std::move(labels);
    g.symbols = symbols;
    g.controls = controls;
    return g;
}

int PropagationGraph::position(int vertex) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), vertex);
    if (it == vertices.end() || *it != vertex) throw InputError("vertex " + std::to_string(vertex) + " not in graph");
    return static_cast<int>(it - vertices.begin());
}

bool PropagationGraph::needs_extended() const {
    for (const auto &e : labels) {
        if (e.kind == EdgeLabel::Kind::Controlled || e.kind == EdgeLabel::Kind::Confused) return true;
    }
    return false;
}

void PropagationGraph::validate() const {
    if (labels.empty()) throw InputError("propagation graph has no edges");
    if (vertices.size() != labels.size() + 1) throw InputError("propagation edges must form a path over the vertices");
    for (size_t i = 1; i < vertices.size(); ++i) {
        if (vertices[i] <= vertices[i - 1]) throw InputError("vertices must be strictly increasing");
    }
    if (!paulis.empty() && static_cast<int>(paulis.size()) != symbols) {
        throw InputError("Pauli instantiation must give one operator per symbol");
    }
    for (const auto &e : labels) {
        if (e.kind != EdgeLabel::Kind::SignedIdentity && (e.symbol < 0 || e.symbol >= symbols)) {
            throw InputError("edge label " + e.str() + " references an unknown symbol");
        }
        if (e.kind == EdgeLabel::Kind::Controlled && (e.control < 0 || e.control >= controls)) {
            throw InputError("edge label " + e.str() + " references an unknown control qubit");
        }
        if (e.kind == EdgeLabel::Kind::Confused) {
            e.member();
            std::set<int> seen(e.set.begin(), e.set.end());
            if (seen.size() != e.set.size()) throw InputError("repeated symbol in set of " + e.str());
            for (int j : e.set) {
                if (j < 0 || j >= symbols) throw InputError("edge label " + e.str() + " references an unknown symbol");
            }
        }
    }
    for (const auto &c : cons) {
        int a = position(c.from);
        int b = position(c.to);
        if (a >= b) throw InputError("constraint edge endpoints must be increasing");
        if (c.tau != 0 && c.tau != 1) throw InputError("constraint sign must be 0 or 1");
    }
}

Question symbol_question(const PropagationGraph &g, int j) {
    if (!g.paulis.empty()) return Question::single(g.paulis.at(j));
    return Question::special("R" + std::to_string(j + 1));
}

Question set_question(const PropagationGraph &g, const std::vector<int> &q) {
    if (!g.paulis.empty()) {
        std::vector<PauliOp> ops;
        for (int j : q) ops.push_back(g.paulis.at(j));
        return Question::set(std::move(ops));
    }
    return Question::special("{" + join_symbols(q) + "}", static_cast<int>(q.size()));
}

Measurement pi_e_measurement(int u, int v, ClockMode mode, int size) {
    if (u < 0 || u >= v) throw InputError("Pi_e needs clock values 0 <= u < v");
    if (mode == ClockMode::Qudit) {
        if (v >= size) throw InputError("Pi_e edge outside the qudit clock");
        Mat p0 = Mat::Zero(size, size);
        Mat p1 = Mat::Zero(size, size);
        p0(u, u) = p0(v, v) = p0(u, v) = p0(v, u) = 0.5;
        p1(u, u) = p1(v, v) = 0.5;
        p1(u, v) = p1(v, u) = -0.5;
        Mat p2 = Mat::Identity(size, size) - p0 - p1;
        return Measurement::from_ops({p0, p1, p2}, true);
    }
    if (v > size) throw InputError("Pi_e edge outside the unary clock");
    if (size > dense_qubit_limit()) throw ResourceError("unary Pi_e beyond the dense qubit limit");
    int64_t d = int64_t{1} << size;
    auto bit = [&](int64_t b, int t) { return static_cast<int>((b >> (size - t)) & 1); };  // qubit t, 1-based
    auto flagged = [&](int64_t b) { return (u == 0 || bit(b, u) == 1) && (v == size || bit(b, v + 1) == 0); };
    int64_t inner_mask = 0;
    for (int t = u + 1; t <= v; ++t) inner_mask |= int64_t{1} << (size - t);
    std::vector<int64_t> zeros;
    for (int64_t b = 0; b < d; ++b) {
        if (flagged(b) && (b & inner_mask) == 0) zeros.push_back(b);
    }
    Mat p0 = Mat::Zero(d, d);
    Mat p1 = Mat::Zero(d, d);
    for (int64_t b : zeros) {
        int64_t c = b | inner_mask;
        p0(b, b) = p0(c, c) = p0(b, c) = p0(c, b) = 0.5;
        p1(b, b) = p1(c, c) = 0.5;
        p1(b, c) = p1(c, b) = -0.5;
    }
    Mat p2 = Mat::Identity(d, d) - p0 - p1;
    return Measurement::from_ops({p0, p1, p2}, true);
}

std::vector<LocalOp> pi_e_ops(int u, int v, int dim) {
    if (u < 0 || u >= v || v >= dim) throw InputError("Pi_e edge outside the clock");
    LocalOp p0 = LocalOp::zero(dim);
    LocalOp p1 = LocalOp::zero(dim);
    LocalOp p2 = LocalOp::zero(dim);
    p0.add_run(u, u, 1, 0.5);
    p0.add_run(u, v, 1, 0.5);
    p0.add_run(v, u, 1, 0.5);
    p0.add_run(v, v, 1, 0.5);
    p1.add_run(u, u, 1, 0.5);
    p1.add_run(u, v, 1, -0.5);
    p1.add_run(v, u, 1, -0.5);
    p1.add_run(v, v, 1, 0.5);
    if (u > 0) p2.add_run(0, 0, u, 1.0);
    if (v - u > 1) p2.add_run(u + 1, u + 1, v - u - 1, 1.0);
    if (dim - v > 1) p2.add_run(v + 1, v + 1, dim - v - 1, 1.0);
    return {p0, p1, p2};
}

int UnaryEdgePaulis::outcome(int c) const {
    EdgeDecoder dec;
    dec.unary = true;
    dec.K = static_cast<int>(paulis.size());
    dec.lo = flag_low;
    dec.hi = flag_high;
    return dec(c);
}

UnaryEdgePaulis unary_edge_paulis(int u, int v, int q) {
    if (u < 0 || u >= v || v > q) throw InputError("unary edge outside the clock");
    UnaryEdgePaulis out;
    if (u >= 1) {
        out.flag_low = true;
        out.paulis.push_back(PauliOp::single(q, u - 1, 'Z'));
    }
    if (v + 1 <= q) {
        out.flag_high = true;
        out.paulis.push_back(PauliOp::single(q, v, 'Z'));
    }
    for (int t = u + 1; t < v; ++t) {
        PauliOp zz(q);
        zz.set_letter(t - 1, 'Z');
        zz.set_letter(t, 'Z');
        out.paulis.push_back(zz);
    }
    PauliOp x(q);
    for (int t = u + 1; t <= v; ++t) x.set_letter(t - 1, 'X');
    out.paulis.push_back(x);
    return out;
}

GameSpec build_propagation_game(const PropagationGraph &g, bool extended) {
    g.validate();
    if (!extended && g.needs_extended()) throw InputError("controlled or confused labels need the extended game");
    GameSpec game;
    game.name = extended ? "propagation-ext" : "propagation";
    game.players = 1;
    game.alphabets.assign(1, {});
    game.pauli_qubits = {pauli_qubits_of(g)};
    game.referee.push_back({"S", RegKind::Qudit, static_cast<int>(g.vertices.size())});
    PropagationEmbedding emb;
    if (extended) {
        game.referee.push_back({"X", RegKind::Qubits, g.controls});
        emb.x_reg = 1;
    }
    add_propagation_points(game, g, emb);
    game.validate();
    return game;
}

Mat ReflectionAssignment::derived(int j, const std::vector<int> &q) const {
    auto it = sets.find(q);
    if (it == sets.end()) return r.at(j);
    auto pos = std::find(q.begin(), q.end(), j);
    if (pos == q.end()) throw InputError("derived symbol not in its set");
    return it->second.at(pos - q.begin());
}

ReflectionAssignment ReflectionAssignment::pauli(const std::vector<PauliOp> &ps, int priv_dim) {
    ReflectionAssignment a;
    for (const auto &p : ps) {
        Mat m = p.to_matrix();
        a.r.push_back(priv_dim == 1 ? m : kron(m, Mat::Identity(priv_dim, priv_dim)));
    }
    return a;
}

Mat edge_unitary(const EdgeLabel &e, const ReflectionAssignment &a, int controls) {
    int dx = 1 << controls;
    int d = a.dim();
    Mat ix = Mat::Identity(dx, dx);
    switch (e.kind) {
        case EdgeLabel::Kind::Reflect:
            return kron(ix, a.r.at(e.symbol));
        case EdgeLabel::Kind::Confused:
            return kron(ix, a.derived(e.symbol, e.set));
        case EdgeLabel::Kind::SignedIdentity:
            return (e.tau ? -1.0 : 1.0) * Mat::Identity(dx * d, dx * d);
        case EdgeLabel::Kind::Controlled: {
            Mat p1 = qubit_projector(controls, e.control, 1);
            return kron(ix - p1, Mat::Identity(d, d)) + kron(p1, a.r.at(e.symbol));
        }
    }
    return Mat();
}

Vec history_state(const PropagationGraph &g, int clock_dim, const BlockLayout &rest, int x_block, int player_block,
                  const ReflectionAssignment &a, const Vec &init) {
    int n = g.N();
    if (clock_dim < n + 1) throw InputError("clock register smaller than the graph");
    if (init.size() != rest.total()) throw InputError("initial state does not match the register layout");
    int64_t rd = rest.total();
    if (static_cast<double>(clock_dim) * static_cast<double>(rd) > static_cast<double>(int64_t{1} << 28)) {
        throw ResourceError("history state exceeds 2^28 amplitudes");
    }
    Vec out = Vec::Zero(clock_dim * rd);
    double norm = 1.0 / std::sqrt(static_cast<double>(n + 1));
    Vec cur = init;
    for (int i = 0; i <= n; ++i) {
        out.segment(i * rd, rd) = norm * cur;
        if (i < n) apply_edge(g.labels[i], a, rest, x_block, player_block, cur);
    }
    return out;
}

Strategy history_strategy(const GameSpec &game, const PropagationGraph &g, const ReflectionAssignment &a, const Vec &psi) {
    g.validate();
    if (static_cast<int>(a.r.size()) != g.symbols) throw InputError("assignment must give one reflection per symbol");
    int d = a.dim();
    for (const auto &r : a.r) {
        if (r.rows() != d || !is_unitary(r, 1e-9) || !is_hermitian(r, 1e-9)) {
            throw InputError("assignment entries must be reflections of equal dimension");
        }
    }
    bool has_x = game.referee.size() > 1;
    std::vector<int> dims;
    for (size_t r = 1; r < game.referee.size(); ++r) dims.push_back(game.referee[r].dim());
    dims.push_back(d);
    BlockLayout rest(dims);
    Vec state = history_state(g, game.referee[0].dim(), rest, has_x ? 0 : -1, rest.blocks() - 1, a, psi);

    Strategy s;
    s.player_dims = {d};
    s.state = Ensemble::pure(std::move(state));
    std::map<std::string, Measurement> by_label;
    for (int j = 0; j < g.symbols; ++j) by_label.emplace(symbol_question(g, j).label, Measurement::from_reflection(a.r[j]));
    for (const auto &e : g.labels) {
        if (e.kind != EdgeLabel::Kind::Confused) continue;
        std::string label = set_question(g, e.set).label;
        if (by_label.count(label)) continue;
        std::vector<Mat> refl;
        for (int j : e.set) refl.push_back(a.derived(j, e.set));
        for (size_t x = 0; x < refl.size(); ++x) {
            for (size_t y = x + 1; y < refl.size(); ++y) {
                if (!commute(refl[x], refl[y])) throw InputError("non-commuting Confused family for " + e.str());
            }
        }
        by_label.emplace(label, measurement_from_reflections(refl));
    }
    s.meas.assign(1, {});
    for (const auto &q : game.alphabets[0]) {
        auto it = by_label.find(q.label);
        if (it == by_label.end()) throw InputError("question " + q.label + " has no assigned measurement");
        s.meas[0].push_back(it->second);
    }
    return s;
}

ReflectionAssignment strategy_reflections(const GameSpec &game, const PropagationGraph &g, const Strategy &s, int player) {
    std::map<std::string, int> index;
    const auto &alpha = game.alphabets.at(player);
    for (size_t q = 0; q < alpha.size(); ++q) index.emplace(alpha[q].label, static_cast<int>(q));
    int d = s.player_dims.at(player);
    ReflectionAssignment a;
    for (int j = 0; j < g.symbols; ++j) {
        auto it = index.find(symbol_question(g, j).label);
        if (it == index.end()) {
            a.r.push_back(Mat::Identity(d, d));
            continue;
        }
        const Measurement &m = s.meas[player][it->second];
        Mat r = Mat::Zero(d, d);
        for (int o = 0; o < m.outcomes(); ++o) r += ((o & 1) ? -1.0 : 1.0) * m.ops[o];
        a.r.push_back(r);
    }
    for (const auto &e : g.labels) {
        if (e.kind != EdgeLabel::Kind::Confused || a.sets.count(e.set)) continue;
        auto it = index.find(set_question(g, e.set).label);
        if (it == index.end()) continue;
        std::vector<Mat> refl;
        for (const auto &r : derived_reflections(s.meas[player][it->second])) refl.push_back(r.r);
        a.sets.emplace(e.set, std::move(refl));
    }
    return a;
}

LaplacianReport graph_laplacian(const PropagationGraph &g) {
    int n = g.N();
    LaplacianReport rep;
    rep.laplacian = RMat::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        rep.laplacian(i, i) += 1;
        rep.laplacian(i + 1, i + 1) += 1;
        rep.laplacian(i, i + 1) -= 1;
        rep.laplacian(i + 1, i) -= 1;
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(rep.laplacian);
    rep.eigenvalues = es.eigenvalues();
    rep.lambda2 = n >= 1 ? rep.eigenvalues(1) : 0.0;
    rep.bound = 1.0 / static_cast<double>((n + 1) * (n + 1));
    rep.gap_ok = rep.lambda2 >= rep.bound - 1e-12;
    return rep;
}

namespace {

/// Vertex slices of a state over (S, rest) with rest = X (x) R.
std::vector<Vec> clock_slices(const Vec &psi, int vertices, int64_t rd) {
    std::vector<Vec> out;
    for (int v = 0; v < vertices; ++v) out.push_back(psi.segment(v * rd, rd));
    return out;
}

int controls_of(const BlockLayout &layout) { return layout.blocks() == 3 ? ceil_log2(layout.dim(1)) : 0; }

}  // namespace

double laplacian_rejection(const PropagationGraph &g, const ReflectionAssignment &a, const BlockLayout &layout,
                           const Ensemble &rho) {
    int n = g.N();
    int controls = controls_of(layout);
    int64_t rd = layout.total() / layout.dim(0);
    double total = 0;
    for (size_t w = 0; w < rho.states.size(); ++w) {
        std::vector<Vec> sl = clock_slices(rho.states[w], n + 1, rd);
        Mat acc = Mat::Identity(rd, rd);
        std::vector<Vec> phi;
        phi.push_back(sl[0]);
        for (int i = 0; i < n; ++i) {
            acc = edge_unitary(g.labels[i], a, controls) * acc;
            phi.push_back(acc.adjoint() * sl[i + 1]);
        }
        double s = 0;
        for (int i = 0; i < n; ++i) s += (phi[i] - phi[i + 1]).squaredNorm();
        total += rho.weights[w] * s;
    }
    return total / (2.0 * n);
}

double edge_closed_form(const PropagationGraph &g, int edge, const ReflectionAssignment &a, const BlockLayout &layout,
                        const Ensemble &rho) {
    int controls = controls_of(layout);
    int64_t rd = layout.total() / layout.dim(0);
    Mat ue = edge_unitary(g.labels.at(edge), a, controls);
    double total = 0;
    for (size_t w = 0; w < rho.states.size(); ++w) {
        Vec pu = rho.states[w].segment(edge * rd, rd);
        Vec pv = rho.states[w].segment((edge + 1) * rd, rd);
        double val = 0.5 * (pu.squaredNorm() + pv.squaredNorm()) - pv.dot(ue * pu).real();
        total += rho.weights[w] * val;
    }
    return total;
}

std::vector<int> ReflectionConstraintSystem::prefix() const {
    std::vector<int> p = {0};
    for (const auto &c : constraints) p.push_back(p.back() + static_cast<int>(c.word.size()));
    return p;
}

void ReflectionConstraintSystem::validate() const {
    if (n < 1) throw InputError("constraint system needs at least one symbol");
    if (constraints.empty()) throw InputError("constraint system has no constraints");
    if (!paulis.empty() && static_cast<int>(paulis.size()) != n) throw InputError("one Pauli per symbol required");
    for (size_t i = 0; i < constraints.size(); ++i) {
        const auto &c = constraints[i];
        std::string where = "constraint " + std::to_string(i + 1);
        if (c.word.empty()) throw InputError(where + " has an empty word");
        if (c.tau != 0 && c.tau != 1) throw InputError(where + " has a sign other than 0 or 1");
        for (const auto &s : c.word) {
            if (s.j < 0 || s.j >= n) throw InputError(where + " references an unknown symbol");
            if (!s.derived()) continue;
            if (k > 0 && static_cast<int>(s.q.size()) > k) throw InputError(where + " has a derived set larger than k");
            std::set<int> seen(s.q.begin(), s.q.end());
            if (seen.size() != s.q.size()) throw InputError(where + " has a repeated symbol in a derived set");
            if (!seen.count(s.j)) throw InputError(where + ": derived symbol not in its set");
            for (int j : s.q) {
                if (j < 0 || j >= n) throw InputError(where + " has a derived set with an unknown symbol");
            }
        }
    }
}

std::vector<EdgeLabel> ReflectionConstraintSystem::sequence() const {
    std::vector<EdgeLabel> out;
    for (const auto &c : constraints) {
        for (const auto &s : c.word) out.push_back(s.derived() ? EdgeLabel::confused(s.j, s.q) : EdgeLabel::reflect(s.j));
    }
    return out;
}

ReflectionConstraintSystem parse_constraint_system(const std::string &text) {
    ReflectionConstraintSystem sys;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string &msg) {
        throw InputError("constraint system line " + std::to_string(lineno) + ": " + msg);
    };
    auto parse_int = [&](const std::string &s) {
        try {
            size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size()) fail("bad integer '" + s + "'");
            return v;
        } catch (const std::logic_error &) {
            fail("bad integer '" + s + "'");
        }
        return 0;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "symbols" || key == "k") {
            std::string v;
            if (!(ls >> v)) fail("missing value for " + key);
            (key == "symbols" ? sys.n : sys.k) = parse_int(v);
            continue;
        }
        if (key != "C") fail("unknown line kind '" + key + "'");
        std::string tau;
        if (!(ls >> tau)) fail("missing sign");
        Constraint c;
        c.tau = parse_int(tau);
        std::string sym;
        while (ls >> sym) {
            if (sym.size() < 2 || sym[0] != 'R') fail("bad symbol '" + sym + "'");
            SymbolRef s;
            auto bar = sym.find('|');
            s.j = parse_int(sym.substr(1, bar == std::string::npos ? std::string::npos : bar - 1)) - 1;
            if (bar != std::string::npos) {
                std::istringstream qs(sym.substr(bar + 1));
                std::string item;
                while (std::getline(qs, item, ',')) s.q.push_back(parse_int(item) - 1);
                if (s.q.empty()) fail("empty derived set in '" + sym + "'");
            }
            c.word.push_back(std::move(s));
        }
        sys.constraints.push_back(std::move(c));
    }
    sys.validate();
    return sys;
}

std::string constraint_system_text(const ReflectionConstraintSystem &sys) {
    std::ostringstream out;
    out << "symbols " << sys.n << "\n";
    if (sys.k > 0) out << "k " << sys.k << "\n";
    for (const auto &c : sys.constraints) {
        out << "C " << c.tau;
        for (const auto &s : c.word) {
            out << " R" << (s.j + 1);
            if (s.derived()) out << "|" << join_symbols(s.q);
        }
        out << "\n";
    }
    return out.str();
}

PropagationGraph build_constraint_graph(const ReflectionConstraintSystem &sys) {
    sys.validate();
    PropagationGraph g = PropagationGraph::path(sys.sequence(), sys.n);
    g.paulis = sys.paulis;
    std::vector<int> pre = sys.prefix();
    for (int i = 1; i <= sys.m(); ++i) g.cons.push_back({pre[i - 1], pre[i], sys.constraints[i - 1].tau});
    return g;
}

GameSpec build_cons_prop_game(const ReflectionConstraintSystem &sys) {
    PropagationGraph g = build_constraint_graph(sys);
    g.validate();
    GameSpec game;
    game.name = "cons-prop";
    game.players = 1;
    game.alphabets.assign(1, {});
    game.pauli_qubits = {pauli_qubits_of(g)};
    game.referee.push_back({"S", RegKind::Qudit, static_cast<int>(g.vertices.size())});
    PropagationEmbedding emb;
    emb.weight = Rational(1, 2);
    add_propagation_points(game, g, emb);
    add_constraint_points(game, g, 0, Rational(1, 2), "constraint");
    game.validate();
    return game;
}

ConstraintAnalysis analyze_constraints(const GameSpec &game, const ReflectionConstraintSystem &sys, const Strategy &s,
                                       int player) {
    BlockLayout layout = game.layout(s.player_dims);
    int64_t rd = layout.total() / layout.dim(0);
    std::vector<int> rest_dims(layout.dims().begin() + 1, layout.dims().end());
    BlockLayout rest(rest_dims);
    int pblock = game.player_block(player) - 1;
    int d = s.player_dims[player];
    ConstraintAnalysis out;
    Mat rho0 = Mat::Zero(d, d);
    for (size_t w = 0; w < s.state.states.size(); ++w) {
        Vec slice = s.state.states[w].segment(0, rd);
        out.p0 += s.state.weights[w] * slice.squaredNorm();
        rho0 += s.state.weights[w] * reduced_density(rest, pblock, slice);
    }
    if (out.p0 > 1e-300) rho0 /= out.p0;
    PropagationGraph g = build_constraint_graph(sys);
    ReflectionAssignment a = strategy_reflections(game, g, s, player);
    for (const auto &c : sys.constraints) {
        Mat prod = Mat::Identity(d, d);
        for (const auto &sym : c.word) prod = prod * (sym.derived() ? a.derived(sym.j, sym.q) : a.r[sym.j]);
        double re = expect(rho0, prod).real();
        out.re_c.push_back(re);
        out.tau.push_back(c.tau);
        out.max_deviation = std::max(out.max_deviation, std::abs(re - (c.tau ? -1.0 : 1.0)));
    }
    return out;
}

ReflectionConstraintSystem build_nk_constraint_system(int n, int k) {
    if (k < 2 || k > n) throw InputError("(n,k)-constraint system requires 2 <= k <= n");
    if (n > 6) throw ResourceError("(n,k)-constraint system: n > 6 exceeds the size guard");
    ReflectionConstraintSystem sys;
    sys.paulis = enumerate_pauli_nk(n, k);
    sys.n = static_cast<int>(sys.paulis.size());
    sys.k = k;
    const char letters[2] = {'X', 'Z'};
    auto D = [&](int u, char c) { return SymbolRef{letter_symbol(sys.paulis, n, u, c), {}}; };
    auto add = [&](std::vector<SymbolRef> w, int tau) { sys.constraints.push_back({std::move(w), tau}); };
    // Commutation of letters on distinct qubits.
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            for (char cu : letters) {
                for (char cv : letters) add({D(u, cu), D(v, cv), D(u, cu), D(v, cv)}, 0);
            }
        }
    }
    // Anticommutation on one qubit.
    for (int u = 0; u < n; ++u) add({D(u, 'X'), D(u, 'Z'), D(u, 'X'), D(u, 'Z')}, 1);
    // Anticommutation conjugated by a letter on another qubit.
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            for (char cv : letters) add({D(v, cv), D(u, 'X'), D(u, 'Z'), D(u, 'X'), D(u, 'Z'), D(v, cv)}, 1);
        }
    }
    // Products of letters.
    for (size_t p = 0; p < sys.paulis.size(); ++p) {
        std::vector<SymbolRef> w = {SymbolRef{static_cast<int>(p), {}}};
        for (int v : sys.paulis[p].support()) w.push_back(D(v, sys.paulis[p].letter(v)));
        add(std::move(w), 0);
    }
    // Derived reflections agree with their symbols.
    for (const auto &set : enumerate_power_nk(n, k)) {
        std::vector<int> q;
        for (const auto &m : set.members) q.push_back(symbol_of(sys.paulis, m));
        for (int j : q) add({SymbolRef{j, q}, SymbolRef{j, {}}}, 0);
    }
    sys.validate();
    return sys;
}

std::string SequencePolicy::str() const {
    if (!sampled) return "full";
    return "sampled(count=" + std::to_string(count) + ",seed=" + std::to_string(seed) + ")";
}

int MCGameLayout::index(int i, int l, int j) const {
    std::vector<int> pre = sys.prefix();
    return offset.at(l) + q(l) + i * (pre.back() + 1) + pre.at(j);
}

PropagationGraph MCGameLayout::graph() const {
    PropagationGraph g = PropagationGraph::path(U, sys.n, control_width());
    g.paulis = sys.paulis;
    for (int l = 0; l < L(); ++l) {
        for (int i = 0; i < control_width(); ++i) {
            for (int j = 1; j <= sys.m(); ++j) g.cons.push_back({index(i, l, j - 1), index(i, l, j), sys.constraints[j - 1].tau});
        }
    }
    return g;
}

MCGameLayout build_mc_layout(int n, int k, const SequencePolicy &policy) {
    MCGameLayout lay;
    lay.n = n;
    lay.k = k;
    lay.sys = build_nk_constraint_system(n, k);
    lay.policy = policy;
    lay.V = lay.sys.sequence();
    for (int u = 0; u < n; ++u) {
        lay.W.insert(lay.W.end(), lay.V.begin(), lay.V.end());
        lay.W.push_back(EdgeLabel::controlled(2 * u, letter_symbol(lay.sys.paulis, n, u, 'X')));
        lay.W.insert(lay.W.end(), lay.V.begin(), lay.V.end());
        lay.W.push_back(EdgeLabel::controlled(2 * u + 1, letter_symbol(lay.sys.paulis, n, u, 'Z')));
    }

    std::vector<int> letters;
    for (int u = 0; u < n; ++u) {
        letters.push_back(letter_symbol(lay.sys.paulis, n, u, 'X'));
        letters.push_back(letter_symbol(lay.sys.paulis, n, u, 'Z'));
    }
    std::sort(letters.begin(), letters.end());
    std::vector<std::vector<int>> sets;
    for (const auto &set : enumerate_power_nk(n, k)) {
        std::vector<int> q;
        for (const auto &m : set.members) q.push_back(symbol_of(lay.sys.paulis, m));
        sets.push_back(std::move(q));
    }
    int64_t prim_total = 0;
    for (int len = 0; len <= k; ++len) prim_total += ipow(static_cast<int64_t>(letters.size()), len);
    std::vector<int64_t> per_set;
    int64_t der_total = 0;
    for (const auto &q : sets) {
        int64_t c = 0;
        for (int len = 1; len <= k; ++len) c += ipow(static_cast<int64_t>(q.size()), len);
        per_set.push_back(c);
        der_total += c;
    }
    lay.full_count = prim_total + der_total;

    auto decode = [&](int64_t idx) {
        std::vector<EdgeLabel> seq;
        if (idx < prim_total) {
            for (int len = 0; len <= k; ++len) {
                int64_t c = ipow(static_cast<int64_t>(letters.size()), len);
                if (idx < c) {
                    for (int dgt : digits(idx, static_cast<int>(letters.size()), len)) seq.push_back(EdgeLabel::reflect(letters[dgt]));
                    return seq;
                }
                idx -= c;
            }
        }
        idx -= prim_total;
        for (size_t s = 0; s < sets.size(); ++s) {
            if (idx >= per_set[s]) {
                idx -= per_set[s];
                continue;
            }
            int base = static_cast<int>(sets[s].size());
            for (int len = 1; len <= k; ++len) {
                int64_t c = ipow(base, len);
                if (idx < c) {
                    for (int dgt : digits(idx, base, len)) seq.push_back(EdgeLabel::confused(sets[s][dgt], sets[s]));
                    return seq;
                }
                idx -= c;
            }
        }
        throw InputError("sequence index out of range");
    };

    std::vector<int64_t> chosen;
    if (!policy.sampled) {
        for (int64_t i = 0; i < lay.full_count; ++i) chosen.push_back(i);
    } else {
        if (policy.count < 1) throw InputError("sampled policy needs count >= 1");
        int64_t want = std::min<int64_t>(policy.count, lay.full_count);
        std::set<int64_t> pick = {0};
        Rng rng(derive_seed(policy.seed, 0x6d63));
        while (static_cast<int64_t>(pick.size()) < want) pick.insert(1 + rng.below(lay.full_count - 1));
        chosen.assign(pick.begin(), pick.end());
    }
    int64_t est = static_cast<int64_t>(chosen.size()) * 2 * (static_cast<int64_t>(lay.W.size()) + k);
    if (est > kMcLayoutGuard) {
        throw ResourceError(policy.str() + " sequence policy needs about " + std::to_string(est) +
                            " clock vertices (guard " + std::to_string(kMcLayoutGuard) + ")");
    }
    for (int64_t idx : chosen) lay.Q.push_back(decode(idx));

    for (const auto &q : lay.Q) {
        lay.offset.push_back(static_cast<int>(lay.U.size()));
        lay.U.insert(lay.U.end(), q.begin(), q.end());
        lay.U.insert(lay.U.end(), lay.W.begin(), lay.W.end());
        lay.U.insert(lay.U.end(), lay.W.rbegin(), lay.W.rend());
        lay.U.insert(lay.U.end(), q.rbegin(), q.rend());
    }
    return lay;
}

void add_mc_points(GameSpec &game, const MCGameLayout &layout, const MCEmbedding &emb) {
    const RefRegister &sreg = game.referee.at(emb.s_reg);
    const RefRegister &xreg = game.referee.at(emb.x_reg);
    if (sreg.kind != RegKind::Unary || sreg.size != layout.N() + 1) {
        throw InputError("mc clock register must be unary with N+1 qubits");
    }
    int64_t guard = env_guard("QCOMP_MC_VERTICES", kMcGameGuardDefault);
    if (layout.N() > guard) {
        throw ResourceError("mc game with N = " + std::to_string(layout.N()) + " clock edges exceeds guard " +
                            std::to_string(guard) + " (QCOMP_MC_VERTICES)");
    }
    if (xreg.kind != RegKind::Qubits || xreg.size != layout.control_width()) {
        throw InputError("mc control register must have 2n qubits");
    }
    PropagationGraph g = layout.graph();
    Rational third = emb.weight * Rational(1, 3);

    PropagationEmbedding pe;
    pe.s_reg = emb.s_reg;
    pe.x_reg = emb.x_reg;
    pe.player = emb.player;
    pe.weight = third;
    pe.tag = "mc-propagation";
    pe.fixed = emb.fixed;
    add_propagation_points(game, g, pe);

    int w = layout.control_width();
    for (int i = 0; i < w; ++i) {
        RegMeasurement sm;
        sm.reg = emb.s_reg;
        sm.paulis = {PauliOp::single(sreg.size, 0, 'Z')};
        RegMeasurement xm;
        xm.reg = emb.x_reg;
        xm.paulis = {PauliOp::single(w, i, 'X')};
        GamePoint pt;
        pt.q.assign(game.players, -1);
        pt.prob = third * Rational(1, w);
        pt.tag = "mc-initialization";
        pt.pred = game.add_predicate(Predicate::make_referee(
            {sm, xm}, [](const std::vector<int> &c, const std::vector<uint32_t> &) { return (c[0] == 1 || c[1] == 0) ? 1.0 : 0.0; }));
        game.points.push_back(std::move(pt));
    }
    add_constraint_points(game, g, emb.s_reg, third, "mc-constraint");
}

GameSpec build_mc_game(const MCGameLayout &layout) {
    GameSpec game;
    game.name = "mc(" + std::to_string(layout.n) + "," + std::to_string(layout.k) + ")";
    game.players = 1;
    game.alphabets.assign(1, {});
    game.pauli_qubits = {layout.n};
    game.referee.push_back({"S", RegKind::Unary, layout.N() + 1});
    game.referee.push_back({"X", RegKind::Qubits, layout.control_width()});
    if (layout.policy.sampled) game.flags.push_back("deviation:sampled-sequence-policy " + layout.policy.str());
    add_mc_points(game, layout, MCEmbedding{});
    game.validate();
    return game;
}

Strategy honest_mc_strategy(const GameSpec &game, const MCGameLayout &layout, const Vec &psi, int priv_dim) {
    int d = (1 << layout.n) * priv_dim;
    if (psi.size() != d) throw InputError("mc honest state: psi has the wrong dimension");
    ReflectionAssignment a = ReflectionAssignment::pauli(layout.sys.paulis, priv_dim);
    int w = layout.control_width();
    Vec plus = Vec::Constant(int64_t{1} << w, 1.0 / std::sqrt(static_cast<double>(int64_t{1} << w)));
    BlockLayout rest({1 << w, d});
    Vec state = history_state(layout.graph(), game.referee[0].dim(), rest, 0, 1, a, product_state({plus, psi}));
    return honest_strategy(game, Ensemble::pure(std::move(state)), {d});
}

MCDistances mc_distances(const GameSpec &game, const MCGameLayout &layout, const Strategy &s, const Mat &v,
                         int player) {
    BlockLayout full = game.layout(s.player_dims);
    int64_t rd = full.total() / full.dim(0);
    std::vector<int> rest_dims(full.dims().begin() + 1, full.dims().end());
    BlockLayout rest(rest_dims);
    int pblock = game.player_block(player) - 1;
    int d = s.player_dims[player];
    if (v.cols() != d || v.rows() % (int64_t{1} << layout.n) != 0) throw InputError("mc isometry has the wrong shape");
    int priv = static_cast<int>(v.rows() >> layout.n);
    MCDistances out;
    Mat rho0 = Mat::Zero(d, d);
    for (size_t w = 0; w < s.state.states.size(); ++w) {
        Vec slice = s.state.states[w].segment(0, rd);
        out.p0 += s.state.weights[w] * slice.squaredNorm();
        rho0 += s.state.weights[w] * reduced_density(rest, pblock, slice);
    }
    if (out.p0 > 1e-300) rho0 /= out.p0;
    PropagationGraph g = layout.graph();
    ReflectionAssignment a = strategy_reflections(game, g, s, player);
    auto check = [&](const PauliOp &p) { return Mat(v.adjoint() * kron(p.to_matrix(), Mat::Identity(priv, priv)) * v); };
    for (int j = 0; j < layout.sys.n; ++j) {
        out.dis_p.push_back(dis_rho_reflections(a.r[j], check(layout.sys.paulis[j]), rho0));
        out.max_p = std::max(out.max_p, out.dis_p.back());
    }
    for (const auto &set : enumerate_power_nk(layout.n, layout.k)) {
        std::vector<int> q;
        for (const auto &m : set.members) q.push_back(symbol_of(layout.sys.paulis, m));
        double worst = 0;
        for (size_t i = 0; i < q.size(); ++i) {
            worst = std::max(worst, dis_rho_reflections(a.derived(q[i], q), check(set.members[i]), rho0));
        }
        out.dis_q.push_back(worst);
        out.max_q = std::max(out.max_q, worst);
    }
    return out;
}

}  // namespace qcomp
