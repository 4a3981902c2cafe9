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

#include "qcomp/games.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <Eigen/Sparse>

namespace qcomp {

namespace {

constexpr int64_t kComboGuard = int64_t{1} << 20;
constexpr int64_t kClassicalGuard = int64_t{1} << 24;
constexpr int64_t kSeesawDimGuard = int64_t{1} << 22;
constexpr int64_t kDenseStateStep = 256;

int parity(uint64_t x) { return popcount64(x) & 1; }

void check_commuting(const std::vector<PauliOp> &ps) {
    for (size_t i = 0; i < ps.size(); ++i) {
        for (size_t j = i + 1; j < ps.size(); ++j) {
            if (!ps[i].commutes(ps[j])) throw InputError("measured Paulis must commute: " + ps[i].str() + ", " + ps[j].str());
        }
    }
}

/// Products P^y = prod_{j : bit (K-1-j) of y} P_j.
std::vector<PauliOp> subset_products(const std::vector<PauliOp> &ps, int n) {
    size_t k = ps.size();
    std::vector<PauliOp> prod(size_t{1} << k, PauliOp(n));
    for (size_t y = 1; y < prod.size(); ++y) {
        int b = __builtin_ctzll(y);
        prod[y] = prod[y & (y - 1)] * ps[k - 1 - b];
    }
    return prod;
}

/// In-place Walsh-Hadamard transform scaled by 2^-K.
void scaled_wht(std::vector<cd> &v) {
    size_t n = v.size();
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += 2 * h) {
            for (size_t j = i; j < i + h; ++j) {
                cd a = v[j];
                cd b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
    for (auto &x : v) x /= static_cast<double>(n);
}

std::vector<LocalOp> unary_outcome_ops(int q, const std::vector<PauliOp> &paulis) {
    int k = static_cast<int>(paulis.size());
    std::set<int> qs;
    for (const auto &p : paulis) {
        for (int s : p.support()) qs.insert(s);
    }
    std::vector<int> Q(qs.begin(), qs.end());
    int m = static_cast<int>(Q.size());
    if (m > 62) throw ResourceError("unary register measurement touches more than 62 qubits");
    std::vector<PauliOp> restricted;
    for (const auto &p : paulis) restricted.push_back(p.restrict(Q));
    std::vector<PauliOp> prod = subset_products(restricted, m);

    auto pattern = [&](int c) {
        uint64_t b = 0;
        for (int i = 0; i < c; ++i) b |= uint64_t{1} << (m - 1 - i);
        return b;
    };
    auto lo = [&](int c) { return c == 0 ? 0 : Q[c - 1] + 1; };
    auto hi = [&](int c) { return c == m ? q : Q[c]; };
    auto contiguous = [&](int a, int b) {
        for (int j = a; j + 1 < b; ++j) {
            if (Q[j + 1] != Q[j] + 1) return false;
        }
        return true;
    };

    std::vector<LocalOp> out(size_t{1} << k, LocalOp::zero(q + 1));
    for (int c = 0; c <= m; ++c) {
        std::map<int, std::vector<cd>> g;
        uint64_t src = pattern(c);
        for (size_t y = 0; y < prod.size(); ++y) {
            auto [coef, dst] = prod[y].apply_basis(src);
            int c2 = popcount64(dst);
            if (pattern(c2) != dst) continue;
            if (c2 > c && !contiguous(c, c2)) continue;
            if (c2 < c && !contiguous(c2, c)) continue;
            auto &v = g[c2];
            if (v.empty()) v.assign(prod.size(), 0.0);
            v[y] += coef;
        }
        for (auto &[c2, v] : g) {
            scaled_wht(v);
            for (size_t cc = 0; cc < v.size(); ++cc) {
                if (std::abs(v[cc]) < 1e-15) continue;
                if (c2 == c) {
                    out[cc].add_run(lo(c), lo(c), hi(c) - lo(c) + 1, v[cc]);
                } else if (c2 > c) {
                    out[cc].add_run(lo(c2), hi(c), 1, v[cc]);
                } else {
                    out[cc].add_run(hi(c2), lo(c), 1, v[cc]);
                }
            }
        }
    }
    return out;
}

std::vector<LocalOp> qubit_outcome_ops(int q, const std::vector<PauliOp> &paulis) {
    if (q > 14) throw ResourceError("qubit referee register too large for explicit outcome operators");
    int64_t d = int64_t{1} << q;
    std::vector<PauliOp> prod = subset_products(paulis, q);
    size_t nc = prod.size();
    std::vector<Mat> acc(nc, Mat::Zero(d, d));
    for (size_t y = 0; y < nc; ++y) {
        for (int64_t b = 0; b < d; ++b) {
            auto [coef, dst] = prod[y].apply_basis(static_cast<uint64_t>(b));
            for (size_t cc = 0; cc < nc; ++cc) {
                acc[cc](static_cast<int64_t>(dst), b) += parity(y & cc) ? -coef : coef;
            }
        }
    }
    std::vector<LocalOp> out;
    for (auto &m : acc) out.push_back(LocalOp::from_dense(m / static_cast<double>(nc), 1e-15));
    return out;
}

double predicate_accept(const Predicate &p, const GameSpec &g, const GamePoint &pt, const std::vector<int> &c,
                        const std::vector<uint32_t> &a) {
    switch (p.kind) {
        case Predicate::Kind::Xor: {
            int par = 0;
            for (int i = 0; i < g.players; ++i) {
                if (pt.q[i] >= 0) par ^= parity(a[i] & p.masks[i]);
            }
            return par == p.sign ? 1.0 : 0.0;
        }
        case Predicate::Kind::Table: {
            size_t idx = 0;
            for (int i = 0; i < g.players; ++i) {
                if (pt.q[i] < 0) continue;
                idx = (idx << g.alphabets[i][pt.q[i]].bits()) | a[i];
            }
            return p.table[idx];
        }
        case Predicate::Kind::Referee:
            return p.accept(c, a);
    }
    return 0.0;
}

using PlayerOps = Evaluator::PlayerOps;

PlayerOps player_ops_impl(const GameSpec &g, const Strategy &s) {
    PlayerOps ops(g.players);
    for (int i = 0; i < g.players; ++i) {
        if (s.meas.size() != static_cast<size_t>(g.players) || s.meas[i].size() != g.alphabets[i].size()) {
            throw InputError("strategy does not provide a measurement for every question");
        }
        for (size_t q = 0; q < g.alphabets[i].size(); ++q) {
            const Measurement &m = s.meas[i][q];
            int k = 1 << g.alphabets[i][q].bits();
            if (m.outcomes() != k) throw InputError("measurement outcome count does not match answer length");
            if (m.dim() != s.player_dims[i]) throw InputError("measurement dimension does not match player register");
            std::vector<LocalOp> v;
            for (const auto &op : m.ops) v.push_back(LocalOp::from_dense(op, 1e-14));
            ops[i].push_back(std::move(v));
        }
    }
    return ops;
}

struct ComboSpace {
    std::vector<std::vector<int>> ref_choices;   // per measurement: nonzero outcomes
    std::vector<std::vector<int>> ans_choices;   // per player: candidate answers
    int64_t count = 1;
};

double expect_real(const BlockLayout &layout, const ProductOp &op, const Ensemble &st) {
    return expectation(layout, op, st).real();
}

}  // namespace

Question Question::single(PauliOp p, bool fixed) {
    Question q;
    q.kind = QuestionKind::Single;
    q.label = p.sparse_str();
    q.ops = {std::move(p)};
    q.fixed = fixed;
    return q;
}

Question Question::set(std::vector<PauliOp> ops, bool fixed) {
    Question q;
    q.kind = QuestionKind::Set;
    for (size_t i = 0; i < ops.size(); ++i) q.label += (i ? "," : "") + ops[i].sparse_str();
    q.label = "{" + q.label + "}";
    q.ops = std::move(ops);
    q.fixed = fixed;
    return q;
}

Question Question::special(std::string label, int arity) {
    if (arity < 1 || arity > 16) throw InputError("special question arity out of range");
    Question q;
    q.kind = QuestionKind::Special;
    q.label = std::move(label);
    q.arity = arity;
    return q;
}

int Question::bits() const {
    if (kind == QuestionKind::Set) return static_cast<int>(ops.size());
    return kind == QuestionKind::Special ? arity : 1;
}

int RefRegister::dim() const {
    switch (kind) {
        case RegKind::Qubits:
            if (size > 30) throw ResourceError("qubit register too large");
            return 1 << size;
        case RegKind::Unary:
            return size + 1;
        case RegKind::Qudit:
            return size;
    }
    return 0;
}

Predicate Predicate::make_xor(std::vector<uint32_t> masks, int sign) {
    Predicate p;
    p.kind = Kind::Xor;
    p.masks = std::move(masks);
    p.sign = sign & 1;
    return p;
}

Predicate Predicate::make_table(std::vector<double> table) {
    Predicate p;
    p.kind = Kind::Table;
    p.table = std::move(table);
    return p;
}

Predicate Predicate::make_referee(std::vector<RegMeasurement> ms, AcceptFn f) {
    Predicate p;
    p.kind = Kind::Referee;
    p.measurements = std::move(ms);
    p.accept = std::move(f);
    return p;
}

int GameSpec::add_predicate(Predicate p) {
    predicates.push_back(std::move(p));
    return static_cast<int>(predicates.size()) - 1;
}

int GameSpec::intern_question(int player, const Question &q) {
    auto &alpha = alphabets.at(player);
    for (size_t i = 0; i < alpha.size(); ++i) {
        const Question &o = alpha[i];
        if (o.kind == q.kind && o.label == q.label && o.ops == q.ops && o.fixed == q.fixed && o.arity == q.arity) {
            return static_cast<int>(i);
        }
    }
    alpha.push_back(q);
    return static_cast<int>(alpha.size()) - 1;
}

double GameSpec::total_probability() const {
    double s = 0;
    for (const auto &p : points) s += p.prob.value();
    return s;
}

void GameSpec::validate() const {
    if (players < 1) throw InputError(name + ": game needs at least one player");
    if (static_cast<int>(alphabets.size()) != players) throw InputError(name + ": one alphabet per player required");
    if (!pauli_qubits.empty() && static_cast<int>(pauli_qubits.size()) != players) {
        throw InputError(name + ": pauli_qubits must list every player");
    }
    for (int i = 0; i < players; ++i) {
        for (const auto &q : alphabets[i]) {
            if (q.kind == QuestionKind::Special) continue;
            if (q.ops.empty()) throw InputError(name + ": Pauli question without operators");
            if (q.kind == QuestionKind::Single && q.ops.size() != 1) throw InputError(name + ": single question with several operators");
            check_commuting(q.ops);
            if (!pauli_qubits.empty()) {
                for (const auto &p : q.ops) {
                    if (p.n() != pauli_qubits[i]) throw InputError(name + ": question acts on wrong number of qubits");
                }
            }
        }
    }
    for (const auto &r : referee) r.dim();
    for (const auto &pr : predicates) {
        if (pr.kind == Predicate::Kind::Xor && static_cast<int>(pr.masks.size()) != players) {
            throw InputError(name + ": XOR predicate needs one mask per player");
        }
        if (pr.kind == Predicate::Kind::Referee) {
            if (!pr.accept) throw InputError(name + ": referee predicate without acceptance function");
            std::set<int> seen;
            for (const auto &m : pr.measurements) {
                if (m.reg < 0 || m.reg >= static_cast<int>(referee.size())) throw InputError(name + ": bad referee register");
                if (!seen.insert(m.reg).second) throw InputError(name + ": register measured twice in one predicate");
                const RefRegister &reg = referee[m.reg];
                if (!m.paulis.empty()) {
                    if (reg.kind == RegKind::Qudit) throw InputError(name + ": Pauli measurement on qudit register");
                    for (const auto &p : m.paulis) {
                        if (p.n() != reg.qubits()) throw InputError(name + ": referee Pauli has wrong size");
                    }
                    check_commuting(m.paulis);
                } else {
                    if (m.ops.empty()) throw InputError(name + ": referee measurement without outcomes");
                    for (const auto &o : m.ops) {
                        if (o.dim() != reg.dim()) throw InputError(name + ": referee operator has wrong dimension");
                    }
                }
            }
        }
    }
    for (const auto &pt : points) {
        if (static_cast<int>(pt.q.size()) != players) throw InputError(name + ": point must list every player");
        if (pt.pred < 0 || pt.pred >= static_cast<int>(predicates.size())) throw InputError(name + ": bad predicate index");
        int tbits = 0;
        for (int i = 0; i < players; ++i) {
            if (pt.q[i] < -1 || pt.q[i] >= static_cast<int>(alphabets[i].size())) throw InputError(name + ": bad question index");
            if (pt.q[i] >= 0) tbits += alphabets[i][pt.q[i]].bits();
        }
        const Predicate &pr = predicates[pt.pred];
        if (pr.kind == Predicate::Kind::Table && pr.table.size() != (size_t{1} << tbits)) {
            throw InputError(name + ": predicate table has wrong size");
        }
        if (pr.kind == Predicate::Kind::Xor) {
            for (int i = 0; i < players; ++i) {
                if (pt.q[i] >= 0 && (pr.masks[i] >> alphabets[i][pt.q[i]].bits()) != 0) {
                    throw InputError(name + ": XOR mask exceeds answer length");
                }
            }
        }
    }
    double total = total_probability();
    if (std::abs(total - 1.0) > 1e-12) {
        throw InputError(name + ": question distribution sums to " + std::to_string(total));
    }
}

BlockLayout GameSpec::layout(const std::vector<int> &player_dims) const {
    if (static_cast<int>(player_dims.size()) != players) throw InputError("one dimension per player required");
    std::vector<int> dims;
    for (const auto &r : referee) dims.push_back(r.dim());
    for (int d : player_dims) dims.push_back(d);
    return BlockLayout(dims);
}

std::vector<LocalOp> referee_outcome_ops(const RefRegister &reg, const RegMeasurement &m) {
    if (m.paulis.empty()) return m.ops;
    check_commuting(m.paulis);
    if (m.paulis.size() > 16) throw ResourceError("too many Paulis in one referee measurement");
    if (reg.kind == RegKind::Unary) return unary_outcome_ops(reg.size, m.paulis);
    if (reg.kind == RegKind::Qubits) return qubit_outcome_ops(reg.size, m.paulis);
    throw InputError("Pauli measurement on qudit register");
}

Measurement pauli_measurement(const std::vector<PauliOp> &ops, int priv_dim) {
    if (ops.empty()) throw InputError("pauli_measurement: no operators");
    check_commuting(ops);
    int n = ops[0].n();
    int64_t d = int64_t{1} << n;
    std::vector<Mat> mats;
    for (const auto &p : ops) mats.push_back(p.to_matrix());
    size_t nc = size_t{1} << ops.size();
    std::vector<Mat> out;
    Mat id = Mat::Identity(d, d);
    for (size_t c = 0; c < nc; ++c) {
        Mat pr = id;
        for (size_t j = 0; j < ops.size(); ++j) {
            int bit = (c >> (ops.size() - 1 - j)) & 1;
            pr = pr * (id + (bit ? -1.0 : 1.0) * mats[j]) * 0.5;
        }
        out.push_back(priv_dim == 1 ? pr : kron(pr, Mat::Identity(priv_dim, priv_dim)));
    }
    return Measurement::from_ops(std::move(out), true);
}

Strategy honest_strategy(const GameSpec &g, Ensemble state, const std::vector<int> &player_dims) {
    Strategy s;
    s.player_dims = player_dims;
    s.state = std::move(state);
    s.meas.resize(g.players);
    for (int i = 0; i < g.players; ++i) {
        int d = player_dims[i];
        for (const auto &q : g.alphabets[i]) {
            if (q.kind == QuestionKind::Special) {
                std::vector<Mat> ops(size_t{1} << q.arity, Mat::Zero(d, d));
                ops[0] = Mat::Identity(d, d);
                s.meas[i].push_back(Measurement::from_ops(std::move(ops), true));
                continue;
            }
            int64_t pd = int64_t{1} << q.ops[0].n();
            if (d % pd != 0) throw InputError("player register too small for its Pauli qubits");
            s.meas[i].push_back(pauli_measurement(q.ops, static_cast<int>(d / pd)));
        }
    }
    return s;
}

Evaluator::Evaluator(const GameSpec &g) : g_(g) {
    g_.validate();
    ref_ops_.resize(g.predicates.size());
    for (size_t p = 0; p < g.predicates.size(); ++p) {
        for (const auto &m : g.predicates[p].measurements) {
            ref_ops_[p].push_back(referee_outcome_ops(g.referee[m.reg], m));
        }
    }
}

namespace {

ComboSpace combo_space(const GameSpec &g, const std::vector<std::vector<LocalOp>> &refs, const PlayerOps &pops,
                       const GamePoint &pt, int free_player) {
    ComboSpace cs;
    for (const auto &ops : refs) {
        std::vector<int> nz;
        for (size_t c = 0; c < ops.size(); ++c) {
            if (!ops[c].is_zero()) nz.push_back(static_cast<int>(c));
        }
        cs.count *= std::max<int64_t>(1, nz.size());
        cs.ref_choices.push_back(std::move(nz));
    }
    for (int i = 0; i < g.players; ++i) {
        std::vector<int> nz;
        if (pt.q[i] < 0) {
            nz.push_back(0);
        } else {
            const auto &ops = pops[i][pt.q[i]];
            for (size_t a = 0; a < ops.size(); ++a) {
                if (i == free_player || !ops[a].is_zero()) nz.push_back(static_cast<int>(a));
            }
        }
        cs.count *= std::max<int64_t>(1, nz.size());
        cs.ans_choices.push_back(std::move(nz));
        if (cs.count > kComboGuard) throw ResourceError("too many outcome combinations at one question point");
    }
    return cs;
}

/// Iterates the mixed-radix product of a ComboSpace.
template <class F>
void for_each_combo(const ComboSpace &cs, F &&f) {
    for (const auto &v : cs.ref_choices) {
        if (v.empty()) return;
    }
    for (const auto &v : cs.ans_choices) {
        if (v.empty()) return;
    }
    size_t nr = cs.ref_choices.size();
    size_t na = cs.ans_choices.size();
    std::vector<size_t> idx(nr + na, 0);
    std::vector<int> c(nr);
    std::vector<uint32_t> a(na);
    while (true) {
        for (size_t j = 0; j < nr; ++j) c[j] = cs.ref_choices[j][idx[j]];
        for (size_t j = 0; j < na; ++j) a[j] = static_cast<uint32_t>(cs.ans_choices[j][idx[nr + j]]);
        f(c, a);
        size_t j = 0;
        for (; j < idx.size(); ++j) {
            size_t lim = j < nr ? cs.ref_choices[j].size() : cs.ans_choices[j - nr].size();
            if (++idx[j] < lim) break;
            idx[j] = 0;
        }
        if (j == idx.size()) return;
    }
}

ProductOp combo_op(const GameSpec &g, const BlockLayout &layout, const Predicate &pr,
                   const std::vector<std::vector<LocalOp>> &refs, const PlayerOps &pops, const GamePoint &pt,
                   const std::vector<int> &c, const std::vector<uint32_t> &a, int free_player) {
    ProductOp op = ProductOp::identity(layout);
    for (size_t j = 0; j < pr.measurements.size(); ++j) op.ops[pr.measurements[j].reg] = refs[j][c[j]];
    for (int i = 0; i < g.players; ++i) {
        if (pt.q[i] < 0 || i == free_player) continue;
        op.ops[g.player_block(i)] = pops[i][pt.q[i]][a[i]];
    }
    return op;
}

/// prod_i O_i with O_i = sum_a (-1)^{a . mask_i} M_i^a, skipping player `skip`.
ProductOp xor_correlator(const GameSpec &g, const BlockLayout &layout, const Predicate &pr, const PlayerOps &pops,
                         const GamePoint &pt, int skip) {
    ProductOp op = ProductOp::identity(layout);
    for (int i = 0; i < g.players; ++i) {
        if (pt.q[i] < 0 || i == skip) continue;
        const auto &ms = pops[i][pt.q[i]];
        Mat acc = Mat::Zero(ms[0].dim(), ms[0].dim());
        for (size_t a = 0; a < ms.size(); ++a) {
            acc += (parity(a & pr.masks[i]) ? -1.0 : 1.0) * ms[a].dense();
        }
        op.ops[g.player_block(i)] = LocalOp::from_dense(acc, 1e-14);
    }
    return op;
}

double xor_rejection(const GameSpec &g, const BlockLayout &layout, const Predicate &pr, const PlayerOps &pops,
                     const GamePoint &pt, const Ensemble &st) {
    ProductOp op = xor_correlator(g, layout, pr, pops, pt, -1);
    double corr = expect_real(layout, op, st);
    return 0.5 - 0.5 * (pr.sign ? -1.0 : 1.0) * corr;
}

}  // namespace

Evaluator::PlayerOps Evaluator::player_ops(const Strategy &s) const { return player_ops_impl(g_, s); }

void Evaluator::for_each_rejecting(const Strategy &s, int point, int player,
                                   const std::function<void(double, const ProductOp &, uint32_t)> &f) const {
    for_each_rejecting(player_ops(s), g_.layout(s.player_dims), point, player, f);
}

void Evaluator::for_each_rejecting(const PlayerOps &pops, const BlockLayout &layout, int point, int player,
                                   const std::function<void(double, const ProductOp &, uint32_t)> &f) const {
    const GamePoint &pt = g_.points[point];
    const Predicate &pr = g_.predicates[pt.pred];
    if (pr.kind == Predicate::Kind::Xor) {
        ProductOp id = ProductOp::identity(layout);
        ProductOp corr = xor_correlator(g_, layout, pr, pops, pt, player);
        double sgn = pr.sign ? -1.0 : 1.0;
        if (player < 0 || pt.q[player] < 0) {
            f(0.5, id, 0);
            f(-0.5 * sgn, corr, 0);
            return;
        }
        uint32_t na = uint32_t{1} << g_.alphabets[player][pt.q[player]].bits();
        for (uint32_t a = 0; a < na; ++a) {
            f(0.5, id, a);
            f(-0.5 * sgn * (parity(a & pr.masks[player]) ? -1.0 : 1.0), corr, a);
        }
        return;
    }
    ComboSpace cs = combo_space(g_, ref_ops_[pt.pred], pops, pt, player);
    for_each_combo(cs, [&](const std::vector<int> &c, const std::vector<uint32_t> &a) {
        double rej = 1.0 - predicate_accept(pr, g_, pt, c, a);
        if (rej <= 0) return;
        ProductOp op = combo_op(g_, layout, pr, ref_ops_[pt.pred], pops, pt, c, a, player);
        f(rej, op, player >= 0 ? a[player] : 0);
    });
}

ValueReport Evaluator::evaluate(const Strategy &s) const {
    PlayerOps pops = player_ops_impl(g_, s);
    BlockLayout layout = g_.layout(s.player_dims);
    if (s.state.dim() != layout.total()) throw InputError("strategy state does not match game layout");
    ValueReport rep;
    double total = 0;
    for (const auto &pt : g_.points) {
        const Predicate &pr = g_.predicates[pt.pred];
        double rej = 0;
        if (pr.kind == Predicate::Kind::Xor) {
            rej = xor_rejection(g_, layout, pr, pops, pt, s.state);
        } else {
            ComboSpace cs = combo_space(g_, ref_ops_[pt.pred], pops, pt, -1);
            for_each_combo(cs, [&](const std::vector<int> &c, const std::vector<uint32_t> &a) {
                double r = 1.0 - predicate_accept(pr, g_, pt, c, a);
                if (r <= 0) return;
                rej += r * expect_real(layout, combo_op(g_, layout, pr, ref_ops_[pt.pred], pops, pt, c, a, -1), s.state);
            });
        }
        double w = pt.prob.value();
        total += w * (1.0 - rej);
        auto &slot = rep.by_tag[pt.tag];
        slot.first += w;
        slot.second += w * (1.0 - rej);
    }
    rep.value = total;
    return rep;
}

double Evaluator::point_rejection(const Strategy &s, int point) const {
    PlayerOps pops = player_ops_impl(g_, s);
    BlockLayout layout = g_.layout(s.player_dims);
    const GamePoint &pt = g_.points[point];
    const Predicate &pr = g_.predicates[pt.pred];
    if (pr.kind == Predicate::Kind::Xor) return xor_rejection(g_, layout, pr, pops, pt, s.state);
    double rej = 0;
    for_each_rejecting(pops, layout, point, -1,
                       [&](double w, const ProductOp &op, uint32_t) { rej += w * expect_real(layout, op, s.state); });
    return rej;
}

std::vector<Evaluator::Outcome> Evaluator::point_distribution(const Strategy &s, int point) const {
    PlayerOps pops = player_ops_impl(g_, s);
    BlockLayout layout = g_.layout(s.player_dims);
    const GamePoint &pt = g_.points[point];
    const Predicate &pr = g_.predicates[pt.pred];
    std::vector<Outcome> out;
    ComboSpace cs = combo_space(g_, ref_ops_[pt.pred], pops, pt, -1);
    for_each_combo(cs, [&](const std::vector<int> &c, const std::vector<uint32_t> &a) {
        Outcome o;
        o.c = c;
        o.a = a;
        o.p = expect_real(layout, combo_op(g_, layout, pr, ref_ops_[pt.pred], pops, pt, c, a, -1), s.state);
        o.f = predicate_accept(pr, g_, pt, c, a);
        out.push_back(std::move(o));
    });
    return out;
}

ValueReport evaluate(const GameSpec &g, const Strategy &s) { return Evaluator(g).evaluate(s); }

double value(const GameSpec &g, const Strategy &s) { return evaluate(g, s).value; }

double classical_value(const GameSpec &g) {
    g.validate();
    if (g.extended()) throw InputError("classical value is defined for games without referee registers");
    std::vector<std::vector<int>> offset(g.players);
    int total_bits = 0;
    for (int i = 0; i < g.players; ++i) {
        for (const auto &q : g.alphabets[i]) {
            offset[i].push_back(total_bits);
            total_bits += q.bits();
        }
    }
    if (total_bits > 62 || (int64_t{1} << total_bits) > kClassicalGuard) {
        throw ResourceError("classical value: " + std::to_string(total_bits) + " answer bits exceed the 2^24 guard");
    }
    double best = 0;
    std::vector<uint32_t> a(g.players);
    std::vector<int> c;
    for (int64_t assign = 0; assign < (int64_t{1} << total_bits); ++assign) {
        double v = 0;
        for (const auto &pt : g.points) {
            for (int i = 0; i < g.players; ++i) {
                if (pt.q[i] < 0) {
                    a[i] = 0;
                    continue;
                }
                int b = g.alphabets[i][pt.q[i]].bits();
                a[i] = static_cast<uint32_t>((assign >> offset[i][pt.q[i]]) & ((int64_t{1} << b) - 1));
            }
            v += pt.prob.value() * predicate_accept(g.predicates[pt.pred], g, pt, c, a);
        }
        best = std::max(best, v);
    }
    return best;
}

std::pair<double, Vec> lowest_eigenpair(const std::function<Vec(const Vec &)> &matvec, int64_t dim, const Vec &warm,
                                        int max_restarts, double tol) {
    Vec v = warm;
    if (v.size() != dim || v.norm() < 1e-300) {
        Rng rng(7);
        v = random_state(static_cast<int>(dim), rng);
    }
    v.normalize();
    int m = static_cast<int>(std::min<int64_t>(dim, 40));
    double theta = 0;
    Vec x = v;
    for (int restart = 0; restart < max_restarts; ++restart) {
        std::vector<Vec> basis{v};
        std::vector<double> alpha;
        std::vector<double> beta;
        for (int j = 0; j < m; ++j) {
            Vec w = matvec(basis[j]);
            alpha.push_back(basis[j].dot(w).real());
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto &b : basis) w -= b.dot(w) * b;
            }
            double bn = w.norm();
            if (j + 1 == m || bn < 1e-12) break;
            beta.push_back(bn);
            basis.push_back(w / bn);
        }
        int k = static_cast<int>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (int j = 0; j < k; ++j) {
            t(j, j) = alpha[j];
            if (j + 1 < k) t(j, j + 1) = t(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues()(0);
        x = Vec::Zero(dim);
        for (int j = 0; j < k; ++j) x += es.eigenvectors()(j, 0) * basis[j];
        x.normalize();
        double res = (matvec(x) - theta * x).norm();
        if (res < tol || k < m) break;
        v = x;
    }
    return {theta, x};
}

namespace {

Measurement random_projective(int d, int outcomes, Rng &rng) {
    Mat u = haar_unitary(d, rng);
    std::vector<Mat> ops(outcomes, Mat::Zero(d, d));
    for (int k = 0; k < d; ++k) ops[k % outcomes] += u.col(k) * u.col(k).adjoint();
    return Measurement::from_ops(std::move(ops), true);
}

Mat herm(const Mat &m) { return (m + m.adjoint()) * 0.5; }

/// Minimizes sum_a tr(M_a E_a) by exact two-outcome splits, sweeping pairs.
Measurement best_response(const std::vector<Mat> &env, const Measurement &cur) {
    int k = static_cast<int>(env.size());
    int d = static_cast<int>(env[0].rows());
    std::vector<Mat> ops = cur.ops;
    auto split = [&](int a, int b) {
        Mat p = ops[a] + ops[b];
        Eigen::SelfAdjointEigenSolver<Mat> ps(herm(p));
        std::vector<int> cols;
        for (int j = 0; j < d; ++j) {
            if (ps.eigenvalues()(j) > 0.5) cols.push_back(j);
        }
        if (cols.empty()) return false;
        Mat u(d, cols.size());
        for (size_t j = 0; j < cols.size(); ++j) u.col(j) = ps.eigenvectors().col(cols[j]);
        Mat diff = herm(u.adjoint() * (env[a] - env[b]) * u);
        Eigen::SelfAdjointEigenSolver<Mat> es(diff);
        Mat na = Mat::Zero(d, d);
        Mat nb = Mat::Zero(d, d);
        for (int j = 0; j < es.eigenvalues().size(); ++j) {
            Vec col = u * es.eigenvectors().col(j);
            if (es.eigenvalues()(j) <= 1e-12) {
                na += col * col.adjoint();
            } else {
                nb += col * col.adjoint();
            }
        }
        double old_cost = (ops[a] * env[a] + ops[b] * env[b]).trace().real();
        double new_cost = (na * env[a] + nb * env[b]).trace().real();
        if (new_cost < old_cost - 1e-13 || k == 2) {
            bool changed = new_cost < old_cost - 1e-13;
            ops[a] = na;
            ops[b] = nb;
            return changed;
        }
        return false;
    };
    for (int pass = 0; pass < 50; ++pass) {
        bool changed = false;
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) changed |= split(a, b);
        }
        if (!changed || k == 2) break;
    }
    Measurement m;
    m.labels = cur.labels;
    m.ops = std::move(ops);
    m.projective = true;
    return m;
}

using SpMat = Eigen::SparseMatrix<cd>;
using Triplets = std::vector<Eigen::Triplet<cd>>;

struct TermSum {
    Triplets trip;
    Mat dense;
    bool use_dense = false;
};

/// Appends the entries of w * op.
void product_triplets(const BlockLayout &layout, const ProductOp &op, cd w, Triplets &out) {
    struct Entry {
        int64_t row;
        int64_t col;
        cd val;
    };
    std::vector<Entry> acc{{0, 0, w * op.coeff}};
    for (int b = 0; b < layout.blocks(); ++b) {
        const LocalOp &o = op.ops[b];
        std::vector<Entry> local;
        if (o.is_identity()) {
            for (int i = 0; i < o.dim(); ++i) local.push_back({i, i, 1.0});
        } else {
            for (const auto &r : o.runs()) {
                for (int j = 0; j < r.len; ++j) local.push_back({r.row + j, r.col + j, r.val});
            }
        }
        std::vector<Entry> next;
        next.reserve(acc.size() * local.size());
        int64_t st = layout.stride(b);
        for (const auto &a : acc) {
            for (const auto &l : local) next.push_back({a.row + l.row * st, a.col + l.col * st, a.val * l.val});
        }
        acc = std::move(next);
    }
    for (const auto &e : acc) out.emplace_back(e.row, e.col, e.val);
}

Mat product_dense(const ProductOp &op) {
    std::vector<Mat> parts;
    for (const auto &o : op.ops) parts.push_back(o.dense());
    return op.coeff * kron_all(parts);
}

}  // namespace

SeesawResult seesaw(const GameSpec &g, const std::vector<int> &player_dims, const SeesawOptions &opt) {
    Evaluator ev(g);
    BlockLayout layout = g.layout(player_dims);
    int64_t dim = layout.total();
    if (dim > kSeesawDimGuard) throw ResourceError("see-saw: joint dimension exceeds 2^22");
    bool dense = dim <= kDenseStateStep;

    std::vector<bool> free_point(g.points.size(), false);
    std::vector<std::vector<bool>> is_free(g.players);
    for (int i = 0; i < g.players; ++i) {
        for (const auto &q : g.alphabets[i]) is_free[i].push_back(!q.fixed);
    }
    for (size_t p = 0; p < g.points.size(); ++p) {
        for (int i = 0; i < g.players; ++i) {
            if (g.points[p].q[i] >= 0 && is_free[i][g.points[p].q[i]]) free_point[p] = true;
        }
    }

    auto collect = [&](const Strategy &s, bool want_free, TermSum &ts) {
        Evaluator::PlayerOps pops = ev.player_ops(s);
        for (size_t p = 0; p < g.points.size(); ++p) {
            if (free_point[p] != want_free) continue;
            double w = g.points[p].prob.value();
            ev.for_each_rejecting(pops, layout, static_cast<int>(p), -1, [&](double r, const ProductOp &op, uint32_t) {
                if (ts.use_dense) {
                    ts.dense += (w * r) * product_dense(op);
                } else {
                    product_triplets(layout, op, w * r, ts.trip);
                }
            });
        }
    };

    SeesawResult best;
    best.value = -1;
    for (int r = 0; r < opt.restarts; ++r) {
        Rng rng(derive_seed(opt.seed, static_cast<uint64_t>(r)));
        Strategy s = honest_strategy(g, opt.init_state ? *opt.init_state : Ensemble::pure(random_state(static_cast<int>(dim), rng)),
                                     player_dims);
        for (int i = 0; i < g.players; ++i) {
            for (size_t q = 0; q < g.alphabets[i].size(); ++q) {
                if (is_free[i][q]) s.meas[i][q] = random_projective(player_dims[i], 1 << g.alphabets[i][q].bits(), rng);
            }
        }
        TermSum fixed;
        fixed.use_dense = dense;
        if (dense) fixed.dense = Mat::Zero(dim, dim);
        collect(s, false, fixed);
        SpMat fixed_sp;
        if (!dense) {
            fixed_sp.resize(dim, dim);
            fixed_sp.setFromTriplets(fixed.trip.begin(), fixed.trip.end());
            fixed.trip = Triplets();
        }

        std::vector<double> hist{ev.value(s)};
        bool monotone = true;
        double top = hist[0];
        int stale = 0;
        for (int it = 0; it < opt.iters; ++it) {
            for (int i = 0; i < g.players; ++i) {
                int nq = static_cast<int>(g.alphabets[i].size());
                bool any = false;
                for (int q = 0; q < nq; ++q) any = any || is_free[i][q];
                if (!any) continue;
                std::vector<std::vector<Vec>> phi(nq);
                for (int q = 0; q < nq; ++q) {
                    if (is_free[i][q]) phi[q].assign(size_t{1} << g.alphabets[i][q].bits(), Vec());
                }
                std::vector<std::vector<Mat>> env(nq);
                for (int q = 0; q < nq; ++q) {
                    env[q].assign(phi[q].size(), Mat::Zero(player_dims[i], player_dims[i]));
                }
                Evaluator::PlayerOps pops = ev.player_ops(s);
                for (size_t k = 0; k < s.state.states.size(); ++k) {
                    const Vec &psi = s.state.states[k];
                    for (int q = 0; q < nq; ++q) {
                        for (auto &v : phi[q]) v = Vec::Zero(dim);
                    }
                    for (size_t p = 0; p < g.points.size(); ++p) {
                        int q = g.points[p].q[i];
                        if (q < 0 || !is_free[i][q]) continue;
                        double w = g.points[p].prob.value();
                        ev.for_each_rejecting(pops, layout, static_cast<int>(p), i, [&](double rr, const ProductOp &op, uint32_t a) {
                            apply_add(layout, op, psi, phi[q][a], w * rr);
                        });
                    }
                    for (int q = 0; q < nq; ++q) {
                        for (size_t a = 0; a < phi[q].size(); ++a) {
                            env[q][a] += s.state.weights[k] * partial_trace_pair(layout, g.player_block(i), phi[q][a], psi);
                        }
                    }
                }
                for (int q = 0; q < nq; ++q) {
                    if (!is_free[i][q]) continue;
                    for (auto &e : env[q]) e = herm(e);
                    s.meas[i][q] = best_response(env[q], s.meas[i][q]);
                }
            }

            TermSum fr;
            fr.use_dense = dense;
            if (dense) fr.dense = fixed.dense;
            collect(s, true, fr);
            Vec warm = s.state.states[0];
            for (size_t k = 1; k < s.state.states.size(); ++k) {
                if (s.state.weights[k] > s.state.weights[0]) warm = s.state.states[k];
            }
            std::function<Vec(const Vec &)> mv;
            SpMat h;
            if (dense) {
                mv = [&](const Vec &x) { return Vec(fr.dense * x); };
            } else {
                SpMat free_sp(dim, dim);
                free_sp.setFromTriplets(fr.trip.begin(), fr.trip.end());
                h = fixed_sp + free_sp;
                mv = [&](const Vec &x) { return Vec(h * x); };
            }
            Vec next;
            if (dense) {
                Eigen::SelfAdjointEigenSolver<Mat> es(herm(fr.dense));
                next = es.eigenvectors().col(0);
            } else {
                next = lowest_eigenpair(mv, dim, warm, opt.state_restarts).second;
            }
            Strategy cand = s;
            cand.state = Ensemble::pure(next);
            double vc = ev.value(cand);
            double vs = ev.value(s);
            if (vc >= vs) s = std::move(cand);
            double v = std::max(vc, vs);
            if (v < hist.back() - 1e-9) monotone = false;
            hist.push_back(v);
            if (v > top + opt.tol) {
                top = v;
                stale = 0;
            } else if (++stale >= opt.patience) {
                break;
            }
            if (v >= 1.0 - 1e-13) break;
        }
        best.restart_values.push_back(hist.back());
        best.sweeps += static_cast<int>(hist.size()) - 1;
        best.monotone = best.monotone && monotone;
        if (hist.back() > best.value) {
            best.value = hist.back();
            best.strategy = s;
            best.history = hist;
        }
    }
    return best;
}

MonteCarloResult monte_carlo_value(const GameSpec &g, const Strategy &s, int64_t samples, uint64_t seed) {
    Evaluator ev(g);
    Rng rng(seed);
    std::vector<double> cum;
    double acc = 0;
    for (const auto &pt : g.points) {
        acc += pt.prob.value();
        cum.push_back(acc);
    }
    std::unordered_map<size_t, std::vector<Evaluator::Outcome>> cache;
    int64_t wins = 0;
    for (int64_t n = 0; n < samples; ++n) {
        double u = rng.uniform() * acc;
        size_t p = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (p >= cum.size()) p = cum.size() - 1;
        auto it = cache.find(p);
        if (it == cache.end()) it = cache.emplace(p, ev.point_distribution(s, static_cast<int>(p))).first;
        const auto &dist = it->second;
        double tot = 0;
        for (const auto &o : dist) tot += std::max(0.0, o.p);
        double v = rng.uniform() * tot;
        double f = 0;
        for (const auto &o : dist) {
            v -= std::max(0.0, o.p);
            f = o.f;
            if (v <= 0) break;
        }
        if (rng.uniform() < f) ++wins;
    }
    MonteCarloResult r;
    r.samples = samples;
    r.estimate = samples ? static_cast<double>(wins) / static_cast<double>(samples) : 0.0;
    r.stderr_ = samples ? std::sqrt(r.estimate * (1 - r.estimate) / static_cast<double>(samples)) : 0.0;
    return r;
}

GameSpec build_chsh() {
    GameSpec g;
    g.name = "chsh";
    g.players = 2;
    g.alphabets.resize(2);
    for (int i = 0; i < 2; ++i) {
        g.alphabets[i].push_back(Question::special("0"));
        g.alphabets[i].push_back(Question::special("1"));
    }
    int p0 = g.add_predicate(Predicate::make_xor({1, 1}, 0));
    int p1 = g.add_predicate(Predicate::make_xor({1, 1}, 1));
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            g.points.push_back({{x, y}, Rational(1, 4), (x & y) ? p1 : p0, "chsh"});
        }
    }
    return g;
}

Strategy chsh_optimal_strategy() {
    Strategy s;
    s.player_dims = {2, 2};
    Vec epr = Vec::Zero(4);
    epr(0) = epr(3) = 1.0 / std::sqrt(2.0);
    s.state = Ensemble::pure(epr);
    Mat z = pauli_letter_matrix('Z');
    Mat x = pauli_letter_matrix('X');
    double h = 1.0 / std::sqrt(2.0);
    s.meas = {{Measurement::from_reflection(z), Measurement::from_reflection(x)},
              {Measurement::from_reflection(h * (z + x)), Measurement::from_reflection(h * (z - x))}};
    return s;
}

}  // namespace qcomp
