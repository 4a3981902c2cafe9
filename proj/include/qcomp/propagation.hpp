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

// Propagation graphs, constraint systems and the games built on them.
//
// Clock registers come in two encodings. Qudit clocks have one basis state
// per vertex (indexed by vertex position). Unary clocks of q qubits are
// simulated on their legal span, clock value c being |1^c 0^(q-c)>; qubit t
// (1-based) is set iff the clock is at least t.

#ifndef QCOMP_PROPAGATION_HPP
#define QCOMP_PROPAGATION_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qcomp/games.hpp"

namespace qcomp {

struct EdgeLabel {
    enum class Kind { Reflect, Controlled, Confused, SignedIdentity };
    Kind kind = Kind::Reflect;
    int symbol = 0;        // reflection index (0-based)
    int control = 0;       // Controlled: qubit of the control register X (0-based)
    std::vector<int> set;  // Confused: the symbol set q, in question order
    int tau = 0;           // SignedIdentity

    static EdgeLabel reflect(int j);
    static EdgeLabel controlled(int c, int j);
    static EdgeLabel confused(int j, std::vector<int> q);
    static EdgeLabel signed_identity(int tau);
    /// Position of symbol within set (Confused only).
    int member() const;
    std::string str() const;
    bool operator==(const EdgeLabel &o) const {
        return kind == o.kind && symbol == o.symbol && control == o.control && set == o.set && tau == o.tau;
    }
};

/// Edge (from, to) between two vertex values, labeled (-1)^tau I.
struct ConstraintEdge {
    int from = 0;
    int to = 0;
    int tau = 0;
};

struct PropagationGraph {
    std::vector<int> vertices;            // v_0 < v_1 < ... < v_N
    std::vector<EdgeLabel> labels;        // labels[i] on (v_i, v_{i+1})
    std::vector<ConstraintEdge> cons;
    int symbols = 0;
    int controls = 0;                     // width of the control register
    std::vector<PauliOp> paulis;          // optional Pauli instantiation, one per symbol

    /// Path over 0..labels.size().
    static PropagationGraph path(std::vector<EdgeLabel> labels, int symbols, int controls = 0);
    int N() const { return static_cast<int>(labels.size()); }
    int position(int vertex) const;
    bool needs_extended() const;
    void validate() const;
};

/// Question sent for a symbol (Single Pauli or one-bit Special) and for a
/// symbol set (Set of Paulis or |q|-bit Special).
Question symbol_question(const PropagationGraph &g, int j);
Question set_question(const PropagationGraph &g, const std::vector<int> &q);

enum class ClockMode { Qudit, Unary };

/// Pi_e = {Pi^0, Pi^1, Pi^2} for the edge between clock values u < v.
/// Qudit: `size` basis states. Unary: `size` qubits, full 2^size space.
Measurement pi_e_measurement(int u, int v, ClockMode mode, int size);
/// The same operators on a qudit or on the legal span of a unary register
/// (they coincide there), as sparse block operators.
std::vector<LocalOp> pi_e_ops(int u, int v, int dim);

/// Commuting Pauli decomposition of the unary Pi_e for clock values u < v on a
/// q-qubit clock: flags Z_u, Z_(v+1) (when those qubits exist), pairwise
/// Z_t Z_(t+1) on the inner qubits, then X on all inner qubits.
struct UnaryEdgePaulis {
    std::vector<PauliOp> paulis;
    bool flag_low = false;
    bool flag_high = false;
    /// Pi_e outcome (0, 1 or 2) of a joint outcome index.
    int outcome(int c) const;
};
UnaryEdgePaulis unary_edge_paulis(int u, int v, int q);

/// Single-player propagation game; the referee holds S (a qudit over the
/// vertices) and, when extended, the control register X.
GameSpec build_propagation_game(const PropagationGraph &g, bool extended);

struct ReflectionAssignment {
    std::vector<Mat> r;                                // one per symbol
    std::map<std::vector<int>, std::vector<Mat>> sets;  // optional per Confused set

    int dim() const { return r.empty() ? 0 : static_cast<int>(r[0].rows()); }
    Mat derived(int j, const std::vector<int> &q) const;
    /// Pauli matrices tensored with an identity on a private register.
    static ReflectionAssignment pauli(const std::vector<PauliOp> &ps, int priv_dim = 1);
};

/// Û_i for one edge on X (x) R (X has `controls` qubits, MSB first).
Mat edge_unitary(const EdgeLabel &e, const ReflectionAssignment &a, int controls);

/// sum_v |v> (x) U_v ... U_1 init / sqrt(N+1), as a vector over the clock
/// (dimension clock_dim >= N+1, index = vertex position) followed by `rest`.
/// Edge unitaries act on rest's blocks x_block (if >= 0) and player_block.
Vec history_state(const PropagationGraph &g, int clock_dim, const BlockLayout &rest, int x_block, int player_block,
                  const ReflectionAssignment &a, const Vec &init);

/// History strategy for a game built from g: shared state Û(|V> (x) psi) and
/// measurements from the assignment. psi lives on X (x) R (extended) or R.
Strategy history_strategy(const GameSpec &game, const PropagationGraph &g, const ReflectionAssignment &a,
                          const Vec &psi);

/// Reflections a strategy uses for each symbol and each Confused set member.
ReflectionAssignment strategy_reflections(const GameSpec &game, const PropagationGraph &g, const Strategy &s,
                                          int player = 0);

struct LaplacianReport {
    RMat laplacian;
    RVec eigenvalues;  // ascending
    double lambda2 = 0;
    double bound = 0;  // 1/(N+1)^2
    bool gap_ok = false;
};
LaplacianReport graph_laplacian(const PropagationGraph &g);

/// (1/2N) tr_{rho'} L(G) (x) I with rho' = Û* rho Û, for a game built by
/// build_propagation_game (layout S, [X], R).
double laplacian_rejection(const PropagationGraph &g, const ReflectionAssignment &a, const BlockLayout &layout,
                           const Ensemble &rho);

/// Closed-form rejection of a single edge:
/// (1/2) tr_rho[(|v><v| + |u><u|) (x) I - (|v><u| + |u><v|) (x) Û_e].
double edge_closed_form(const PropagationGraph &g, int edge, const ReflectionAssignment &a, const BlockLayout &layout,
                        const Ensemble &rho);

struct SymbolRef {
    int j = 0;
    std::vector<int> q;  // empty for a plain symbol
    bool derived() const { return !q.empty(); }
    bool operator==(const SymbolRef &o) const { return j == o.j && q == o.q; }
};

struct Constraint {
    std::vector<SymbolRef> word;
    int tau = 0;
};

struct ReflectionConstraintSystem {
    int n = 0;  // symbols
    int k = 0;  // maximal derived set size (0: no bound)
    std::vector<Constraint> constraints;
    std::vector<PauliOp> paulis;  // optional instantiation

    int m() const { return static_cast<int>(constraints.size()); }
    int n_i(int i) const { return static_cast<int>(constraints[i].word.size()); }
    /// N_0 = 0, N_i = sum_{j <= i} n_j.
    std::vector<int> prefix() const;
    int size() const { return prefix().back(); }
    void validate() const;
    /// Symbol sequence of all constraints in order.
    std::vector<EdgeLabel> sequence() const;
};

/// Text format, one constraint per line:
///
///   # comment
///   symbols 4
///   k 2
///   C 1 R1 R2 R1 R2
///   C 0 R3|1,3 R3
///
/// "Rj" is symbol j (1-based); "Rj|q1,q2" is the derived symbol of j in the
/// set {q1, q2} (listed in question order, j among them).
ReflectionConstraintSystem parse_constraint_system(const std::string &text);
std::string constraint_system_text(const ReflectionConstraintSystem &sys);

PropagationGraph build_constraint_graph(const ReflectionConstraintSystem &sys);
/// 1/2 propagation over E_prop, 1/2 constraint check over E_cons (qudit S).
GameSpec build_cons_prop_game(const ReflectionConstraintSystem &sys);

struct ConstraintAnalysis {
    double p0 = 0;                // probability of clock 0
    std::vector<double> re_c;     // Re tr_{rho_0} C_i
    std::vector<int> tau;
    double max_deviation = 0;     // max_i |re_c[i] - (-1)^tau_i|
};
/// Post-measurement functionals for clock outcome 0. The clock is block 0 of
/// the game layout; Ĉ_i uses the strategy's reflections on `player`.
ConstraintAnalysis analyze_constraints(const GameSpec &game, const ReflectionConstraintSystem &sys, const Strategy &s,
                                       int player = 0);

/// The (n,k)-constraint system over the symbols Pauli_{n,k} (canonical
/// order); derived sets are the elements of Power_{n,k}.
ReflectionConstraintSystem build_nk_constraint_system(int n, int k);

struct SequencePolicy {
    bool sampled = true;
    int count = 3;
    uint64_t seed = 1;
    std::string str() const;
};

struct MCGameLayout {
    int n = 0;
    int k = 0;
    ReflectionConstraintSystem sys;
    SequencePolicy policy;
    int64_t full_count = 0;                    // size of the unsampled family of Q sequences
    std::vector<EdgeLabel> V;                  // constraint sequence, length N_{n,k}
    std::vector<EdgeLabel> W;                  // length N' = 2n(N_{n,k}+1)
    std::vector<std::vector<EdgeLabel>> Q;     // Q_1 .. Q_L
    std::vector<EdgeLabel> U;                  // U_1 ... U_L concatenated
    std::vector<int> offset;                   // start of U_l in U

    int L() const { return static_cast<int>(Q.size()); }
    int N_prime() const { return static_cast<int>(W.size()); }
    int N() const { return static_cast<int>(U.size()); }
    int q(int l) const { return static_cast<int>(Q[l].size()); }
    int control_width() const { return 2 * n; }
    /// N_j^{i,l} for i in 0..2n-1, l in 0..L-1, j in 0..m.
    int index(int i, int l, int j) const;
    /// Propagation graph over 0..N with the constraint edges E_cons^{i,l}.
    PropagationGraph graph() const;
};

MCGameLayout build_mc_layout(int n, int k, const SequencePolicy &policy);

/// Registers of an mc game inside a larger game.
struct MCEmbedding {
    int s_reg = 0;
    int x_reg = 1;
    int player = 0;
    Rational weight = Rational(1, 1);
    bool fixed = false;
};
/// Adds the three mc checks (propagation, initialization, constraint) with
/// total probability `weight`; S must be a unary register of N+1 qubits.
void add_mc_points(GameSpec &game, const MCGameLayout &layout, const MCEmbedding &emb);

/// Stand-alone mc game: referee S (unary, N+1 qubits) and X (2n qubits).
GameSpec build_mc_game(const MCGameLayout &layout);
/// Honest strategy: sum_v |v>_S U'_v...U'_1 (|+>^{2n} (x) psi), Pauli answers.
Strategy honest_mc_strategy(const GameSpec &game, const MCGameLayout &layout, const Vec &psi, int priv_dim = 1);

struct MCDistances {
    double p0 = 0;
    std::vector<double> dis_p;  // per symbol of Pauli_{n,k}
    std::vector<double> dis_q;  // per element of Power_{n,k}, max over members
    double max_p = 0;
    double max_q = 0;
};
/// dis_{rho_0} between the strategy's reflections and V*(P (x) I)V, where the
/// isometry v maps the player register to B^n (x) R' (v = identity when the
/// player holds exactly n qubits).
MCDistances mc_distances(const GameSpec &game, const MCGameLayout &layout, const Strategy &s, const Mat &v,
                         int player = 0);

}  // namespace qcomp

#endif
