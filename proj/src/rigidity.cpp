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

#include "qcomp/rigidity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

namespace qcomp {

namespace {

constexpr int kPlayers = 8;
constexpr int64_t kQuestionGuard = 200000;

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int v = start; v < n; ++v) {
            cur.push_back(v);
            rec(v + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

/// Accumulates points with identical question tuple and predicate.
class PointBuilder {
   public:
    explicit PointBuilder(GameSpec &g) : g_(g) {}

    int xor_pred(const std::vector<uint32_t> &masks, int sign) {
        auto key = std::make_pair(masks, sign);
        auto it = preds_.find(key);
        if (it != preds_.end()) return it->second;
        int id = g_.add_predicate(Predicate::make_xor(masks, sign));
        preds_.emplace(key, id);
        return id;
    }

    void add(const std::vector<int> &q, Rational p, int pred, const std::string &tag) {
        auto key = std::make_tuple(q, pred, tag);
        auto it = index_.find(key);
        if (it != index_.end()) {
            g_.points[it->second].prob = g_.points[it->second].prob + p;
            return;
        }
        index_.emplace(key, g_.points.size());
        g_.points.push_back({q, p, pred, tag});
        if (static_cast<int64_t>(g_.points.size()) > kQuestionGuard) throw ResourceError("question distribution too large");
    }

   private:
    GameSpec &g_;
    std::map<std::pair<std::vector<uint32_t>, int>, int> preds_;
    std::map<std::tuple<std::vector<int>, int, std::string>, size_t> index_;
};

int member_index(const Question &q, const PauliOp &p) {
    for (size_t j = 0; j < q.ops.size(); ++j) {
        if (q.ops[j].same_word(p)) return static_cast<int>(j);
    }
    throw InputError("Pauli not found in set question");
}

uint32_t member_mask(const Question &q, const PauliOp &p) {
    return uint32_t{1} << (q.ops.size() - 1 - member_index(q, p));
}

Mat reflection_of(const Measurement &m) { return m.ops[0] - m.ops[1]; }

/// Coefficient c with p = c * (x)_q sigma_{letter(q)}.
cd pauli_coefficient(const PauliOp &p) {
    auto [coef, dst] = p.apply_basis(0);
    int ny = 0;
    for (int q = 0; q < p.n(); ++q) ny += p.letter(q) == 'Y';
    static const cd ipow[4] = {1.0, cd(0, 1), -1.0, cd(0, -1)};
    return coef / ipow[ny & 3];
}

int find_single(const GameSpec &g, int player, const PauliOp &p) {
    const auto &alpha = g.alphabets[player];
    for (size_t q = 0; q < alpha.size(); ++q) {
        if (alpha[q].kind == QuestionKind::Single && alpha[q].ops[0].same_word(p)) return static_cast<int>(q);
    }
    return -1;
}

}  // namespace

GameSpec build_stabilizer_game() {
    GameSpec g;
    g.name = "stabilizer";
    g.players = kPlayers;
    g.alphabets.assign(kPlayers, {});
    g.pauli_qubits.assign(kPlayers, 1);
    for (int i = 0; i < kPlayers; ++i) {
        g.alphabets[i].push_back(Question::single(PauliOp::parse("X")));
        g.alphabets[i].push_back(Question::single(PauliOp::parse("Z")));
    }
    PointBuilder pb(g);
    std::vector<uint32_t> ones(kPlayers, 1);
    for (const auto &p : xz_stabilizer_subset(eight_qubit_code())) {
        std::vector<int> q(kPlayers);
        for (int i = 0; i < kPlayers; ++i) q[i] = p.letter(i) == 'X' ? 0 : 1;
        pb.add(q, Rational(1, 32), pb.xor_pred(ones, p.sign_bit()), "stabilizer");
    }
    g.validate();
    return g;
}

Vec canonical_codeword() {
    Mat pr = eight_qubit_code().projector();
    for (Eigen::Index c = 0; c < pr.cols(); ++c) {
        if (pr.col(c).norm() > 1e-9) return pr.col(c).normalized();
    }
    throw InputError("code projector is zero");
}

Strategy honest_stabilizer_strategy(int priv_dim) {
    GameSpec g = build_stabilizer_game();
    return honest_strategy(g, Ensemble::pure(ms_honest_state(1, priv_dim)), std::vector<int>(kPlayers, 2 * priv_dim));
}

double stabilizer_value_formula(const GameSpec &g, const Strategy &s) {
    BlockLayout layout = g.layout(s.player_dims);
    std::vector<std::vector<Mat>> refl(kPlayers);
    for (int i = 0; i < kPlayers; ++i) {
        for (char c : {'X', 'Z'}) {
            int q = find_single(g, i, PauliOp::single(1, 0, c));
            if (q < 0) throw InputError("stabilizer game question missing");
            refl[i].push_back(reflection_of(s.meas[i][q]));
        }
    }
    double total = 0;
    for (const auto &p : xz_stabilizer_subset(eight_qubit_code())) {
        ProductOp op = ProductOp::identity(layout);
        for (int i = 0; i < kPlayers; ++i) {
            op.ops[g.player_block(i)] = LocalOp::from_dense(refl[i][p.letter(i) == 'X' ? 0 : 1]);
        }
        double corr = expectation(layout, op, s.state).real();
        total += 0.5 * (1.0 + (p.sign_bit() ? -1.0 : 1.0) * corr);
    }
    return total / 32.0;
}

std::vector<PauliOp> canonical_set(std::vector<PauliOp> ops, int n, int k) {
    std::vector<PauliOp> all = enumerate_pauli_nk(n, k);
    auto rank = [&](const PauliOp &p) {
        for (size_t i = 0; i < all.size(); ++i) {
            if (all[i].same_word(p)) return static_cast<int>(i);
        }
        throw InputError("set member outside Pauli_{n,k}: " + p.str());
    };
    std::sort(ops.begin(), ops.end(), [&](const PauliOp &a, const PauliOp &b) { return rank(a) < rank(b); });
    return ops;
}

GameSpec build_ms_game(int n, int k) {
    if (k < 2 || k > n) throw InputError("(n,k)-stabilizer game requires 2 <= k <= n");
    if (n > 6) throw ResourceError("(n,k)-stabilizer game: n > 6 exceeds the question guard");
    GameSpec g;
    g.name = "ms(" + std::to_string(n) + "," + std::to_string(k) + ")";
    g.players = kPlayers;
    g.alphabets.assign(kPlayers, {});
    g.pauli_qubits.assign(kPlayers, n);
    PointBuilder pb(g);
    std::vector<PauliOp> xi = xz_stabilizer_subset(eight_qubit_code());
    std::vector<PauliOp> paulis = enumerate_pauli_nk(n, k);
    std::vector<PauliSet> power = enumerate_power_nk(n, k);
    const Rational quarter(1, 4);
    const Rational per_player(1, kPlayers);

    // Letter marginals of Xi per player position.
    std::vector<std::array<int64_t, 2>> marg(kPlayers, {0, 0});
    for (const auto &p : xi) {
        for (int i = 0; i < kPlayers; ++i) ++marg[i][p.letter(i) == 'X' ? 0 : 1];
    }
    auto letter_op = [&](int u, char c) { return PauliOp::single(n, u, c); };
    auto single_q = [&](int i, const PauliOp &p) { return g.intern_question(i, Question::single(p)); };

    // Stabilizer check.
    for (int u = 0; u < n; ++u) {
        for (const auto &p : xi) {
            std::vector<int> q(kPlayers);
            for (int i = 0; i < kPlayers; ++i) q[i] = single_q(i, letter_op(u, p.letter(i)));
            pb.add(q, quarter * Rational(1, n) * Rational(1, 32), pb.xor_pred(std::vector<uint32_t>(kPlayers, 1), p.sign_bit()),
                   "stabilizer");
        }
    }

    // Confusion check: only player t's letters on J \ {u} matter besides P_u.
    auto subsets = combinations(n, k);
    for (const auto &J : subsets) {
        for (int ui = 0; ui < k; ++ui) {
            int u = J[ui];
            for (int t = 0; t < kPlayers; ++t) {
                for (const auto &pu : xi) {
                    for (int bits = 0; bits < (1 << (k - 1)); ++bits) {
                        std::vector<PauliOp> members;
                        Rational pr = quarter * Rational(1, static_cast<int64_t>(subsets.size())) * Rational(1, k) * per_player *
                                      Rational(1, 32);
                        int bit = 0;
                        for (int v : J) {
                            char c;
                            if (v == u) {
                                c = pu.letter(t);
                            } else {
                                int choice = (bits >> bit++) & 1;
                                c = choice ? 'Z' : 'X';
                                pr = pr * Rational(marg[t][choice], 32);
                            }
                            members.push_back(letter_op(v, c));
                        }
                        if (pr.num == 0) continue;
                        Question qs = Question::set(canonical_set(members, n, k));
                        std::vector<int> q(kPlayers);
                        std::vector<uint32_t> masks(kPlayers, 1);
                        for (int i = 0; i < kPlayers; ++i) {
                            if (i == t) {
                                q[i] = g.intern_question(i, qs);
                                masks[i] = member_mask(qs, letter_op(u, pu.letter(t)));
                            } else {
                                q[i] = single_q(i, letter_op(u, pu.letter(i)));
                            }
                        }
                        pb.add(q, pr, pb.xor_pred(masks, pu.sign_bit()), "confusion");
                    }
                }
            }
        }
    }

    // Parity check.
    for (const auto &p : paulis) {
        std::vector<int> J = p.support();
        int w = static_cast<int>(J.size());
        std::vector<int> rest;
        for (int v = 0; v < n; ++v) {
            if (std::find(J.begin(), J.end(), v) == J.end()) rest.push_back(v);
        }
        auto pads = combinations(static_cast<int>(rest.size()), k - w);
        for (int t = 0; t < kPlayers; ++t) {
            for (const auto &pad : pads) {
                for (int bits = 0; bits < (1 << (k - w)); ++bits) {
                    std::vector<PauliOp> members;
                    for (int v : J) members.push_back(letter_op(v, p.letter(v)));
                    for (int j = 0; j < k - w; ++j) members.push_back(letter_op(rest[pad[j]], ((bits >> j) & 1) ? 'Z' : 'X'));
                    Question qs = Question::set(canonical_set(members, n, k));
                    uint32_t mask = 0;
                    for (int v : J) mask |= member_mask(qs, letter_op(v, p.letter(v)));
                    std::vector<int> q(kPlayers);
                    std::vector<uint32_t> masks(kPlayers, mask);
                    for (int i = 0; i < kPlayers; ++i) {
                        if (i == t) {
                            q[i] = single_q(i, p);
                            masks[i] = 1;
                        } else {
                            q[i] = g.intern_question(i, qs);
                        }
                    }
                    Rational pr = quarter * Rational(1, static_cast<int64_t>(paulis.size())) * per_player *
                                  Rational(1, static_cast<int64_t>(pads.size())) * Rational(1, int64_t{1} << (k - w));
                    pb.add(q, pr, pb.xor_pred(masks, 0), "parity");
                }
            }
        }
    }

    // Pauli check.
    for (const auto &set : power) {
        Question qs = Question::set(canonical_set(set.members, n, k));
        for (const auto &p : set.members) {
            for (int t = 0; t < kPlayers; ++t) {
                std::vector<int> q(kPlayers);
                std::vector<uint32_t> masks(kPlayers, 1);
                for (int i = 0; i < kPlayers; ++i) {
                    if (i == t) {
                        q[i] = g.intern_question(i, qs);
                        masks[i] = member_mask(qs, p);
                    } else {
                        q[i] = single_q(i, p);
                    }
                }
                Rational pr = quarter * Rational(1, static_cast<int64_t>(power.size())) * Rational(1, k) * per_player;
                pb.add(q, pr, pb.xor_pred(masks, 0), "pauli");
            }
        }
    }
    g.validate();
    return g;
}

Vec ms_honest_state(int n, int priv_dim) {
    if (n < 1 || n > 3) throw ResourceError("honest (n,k) state supports 1 <= n <= 3");
    Vec cw = canonical_codeword();
    std::vector<std::pair<int, cd>> nz;
    for (int b = 0; b < 256; ++b) {
        if (std::abs(cw(b)) > 1e-14) nz.emplace_back(b, cw(b));
    }
    int64_t pd = (int64_t{1} << n) * priv_dim;
    int64_t total = 1;
    for (int i = 0; i < kPlayers; ++i) total *= pd;
    if (total > (int64_t{1} << 26)) throw ResourceError("honest (n,k) state exceeds 2^26 amplitudes");
    Vec psi = Vec::Zero(total);
    std::vector<size_t> pick(n, 0);
    while (true) {
        cd amp = 1.0;
        std::vector<int64_t> local(kPlayers, 0);
        for (int u = 0; u < n; ++u) {
            auto [b, a] = nz[pick[u]];
            amp *= a;
            for (int i = 0; i < kPlayers; ++i) {
                if ((b >> (kPlayers - 1 - i)) & 1) local[i] |= int64_t{1} << (n - 1 - u);
            }
        }
        int64_t idx = 0;
        for (int i = 0; i < kPlayers; ++i) idx = idx * pd + local[i] * priv_dim;
        psi(idx) += amp;
        int u = 0;
        for (; u < n; ++u) {
            if (++pick[u] < nz.size()) break;
            pick[u] = 0;
        }
        if (u == n) break;
    }
    return psi;
}

Strategy honest_ms_strategy(int n, int k, int priv_dim) {
    GameSpec g = build_ms_game(n, k);
    int d = (1 << n) * priv_dim;
    return honest_strategy(g, Ensemble::pure(ms_honest_state(n, priv_dim)), std::vector<int>(kPlayers, d));
}

RigidityReport rigidity_report(const GameSpec &g, const Strategy &s) {
    if (g.extended()) throw InputError("rigidity_report expects a game without referee registers");
    if (g.players != kPlayers || g.pauli_qubits.size() != static_cast<size_t>(kPlayers)) {
        throw InputError("rigidity_report expects an eight-player stabilizer game");
    }
    RigidityReport rep;
    rep.value = value(g, s);
    rep.epsilon = std::max(0.0, 1.0 - rep.value);
    BlockLayout layout = g.layout(s.player_dims);
    int n = g.pauli_qubits[0];
    rep.players.resize(kPlayers);
    std::vector<Mat> rho(kPlayers);
    for (int i = 0; i < kPlayers; ++i) {
        int d = s.player_dims[i];
        rho[i] = Mat::Zero(d, d);
        for (size_t c = 0; c < s.state.states.size(); ++c) {
            rho[i] += s.state.weights[c] * reduced_density(layout, g.player_block(i), s.state.states[c]);
        }
    }
    bool all_ok = true;
    for (int i = 0; i < kPlayers; ++i) {
        PlayerRigidity &pr = rep.players[i];
        try {
            for (int u = 0; u < n; ++u) {
                int qx = find_single(g, i, PauliOp::single(n, u, 'X'));
                int qz = find_single(g, i, PauliOp::single(n, u, 'Z'));
                if (qx < 0 || qz < 0) throw InputError("missing single-qubit X or Z question on qubit " + std::to_string(u));
                pr.blocks.push_back(jordan_extract(reflection_of(s.meas[i][qx]), reflection_of(s.meas[i][qz])));
            }
        } catch (const InputError &e) {
            pr.ok = false;
            pr.error = e.what();
            all_ok = false;
            continue;
        }
        auto check = [&](const PauliOp &p) {
            int d = s.player_dims[i];
            Mat m = Mat::Identity(d, d);
            for (int u : p.support()) m = m * pauli_check(pr.blocks[u].v, p.letter(u));
            return m;
        };
        for (size_t q = 0; q < g.alphabets[i].size(); ++q) {
            const Question &qq = g.alphabets[i][q];
            if (qq.kind == QuestionKind::Single) {
                double d = dis_rho_reflections(reflection_of(s.meas[i][q]), check(qq.ops[0]), rho[i]);
                pr.dis_single.push_back(d);
                rep.dis_p_max = std::max(rep.dis_p_max, d);
            } else if (qq.kind == QuestionKind::Set) {
                auto derived = derived_reflections(s.meas[i][q]);
                double worst = 0;
                for (size_t j = 0; j < qq.ops.size(); ++j) {
                    worst = std::max(worst, dis_rho_reflections(derived[j].r, check(qq.ops[j]), rho[i]));
                }
                pr.dis_set.push_back(worst);
                rep.dis_q_max = std::max(rep.dis_q_max, worst);
            }
        }
    }
    rep.dis_max = std::max(rep.dis_p_max, rep.dis_q_max);
    if (!all_ok) return rep;
    std::vector<PauliOp> group = eight_qubit_code().group();
    double deficit = 0;
    for (int u = 0; u < n; ++u) {
        cd acc = 0;
        for (const auto &gp : group) {
            ProductOp op = ProductOp::identity(layout);
            op.coeff = pauli_coefficient(gp);
            for (int i = 0; i < kPlayers; ++i) {
                char c = gp.letter(i);
                if (c == 'I') continue;
                op.ops[g.player_block(i)] = LocalOp::from_dense(pauli_check(rep.players[i].blocks[u].v, c));
            }
            acc += expectation(layout, op, s.state);
        }
        double ov = std::clamp(acc.real() / static_cast<double>(group.size()), 0.0, 1.0);
        rep.block_overlap.push_back(ov);
        deficit += 1.0 - ov;
    }
    rep.overlap = std::clamp(1.0 - deficit, 0.0, 1.0);
    return rep;
}

Strategy rotate_single(const GameSpec &g, Strategy s, int player, const PauliOp &question, double delta) {
    int q = find_single(g, player, question);
    if (q < 0 || question.weight() != 1) throw InputError("rotate_single: no weight-one single question " + question.str());
    int u = question.support()[0];
    char c = question.letter(u);
    if (c != 'X' && c != 'Z') throw InputError("rotate_single: letter must be X or Z");
    PauliOp other = PauliOp::single(question.n(), u, c == 'X' ? 'Z' : 'X');
    int d = s.player_dims[player];
    int64_t pd = int64_t{1} << question.n();
    Mat priv = Mat::Identity(d / pd, d / pd);
    Mat r = std::cos(delta) * kron(question.to_matrix(), priv) + std::sin(delta) * kron(other.to_matrix(), priv);
    s.meas[player][q] = Measurement::from_reflection(r);
    return s;
}

std::vector<SweepRow> rigidity_sweep(int n, int k, const std::vector<double> &deltas) {
    GameSpec g = build_ms_game(n, k);
    Strategy honest = honest_strategy(g, Ensemble::pure(ms_honest_state(n)), std::vector<int>(kPlayers, 1 << n));
    std::vector<SweepRow> rows;
    for (double delta : deltas) {
        Strategy s = rotate_single(g, honest, 1, PauliOp::single(n, 0, 'X'), delta);
        RigidityReport rep = rigidity_report(g, s);
        rows.push_back({delta, rep.epsilon, rep.dis_max, rep.overlap});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow> &rows) {
    std::ostringstream os;
    os.precision(17);
    os << "delta,epsilon,dis_max,overlap\n";
    for (const auto &r : rows) os << r.delta << ',' << r.epsilon << ',' << r.dis_max << ',' << r.overlap << '\n';
    return os.str();
}

}  // namespace qcomp
