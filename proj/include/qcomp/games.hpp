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

#ifndef QCOMP_GAMES_HPP
#define QCOMP_GAMES_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qcomp/common.hpp"
#include "qcomp/pauli.hpp"
#include "qcomp/qcore.hpp"
#include "qcomp/tensor.hpp"

namespace qcomp {

enum class QuestionKind { Single, Set, Special };

/// A question sent to one player. Single and Set questions name Pauli
/// measurements on the player's Pauli qubits; Special questions carry no
/// operator content. Multi-bit answers are MSB-first: the outcome of ops[j]
/// is bit (k-1-j) of the answer index.
struct Question {
    QuestionKind kind = QuestionKind::Single;
    std::vector<PauliOp> ops;
    std::string label;
    /// Answered honestly by convention; see-saw never updates it.
    bool fixed = false;
    /// Answer bits of a Special question.
    int arity = 1;

    static Question single(PauliOp p, bool fixed = false);
    static Question set(std::vector<PauliOp> ops, bool fixed = false);
    static Question special(std::string label, int arity = 1);
    int bits() const;
};

enum class RegKind { Qubits, Unary, Qudit };

/// Referee register. Unary registers of q qubits are simulated on their legal
/// span |1^t 0^(q-t)>, t = 0..q, so their dimension is q+1.
struct RefRegister {
    std::string name;
    RegKind kind = RegKind::Qubits;
    int size = 1;
    int dim() const;
    int qubits() const { return kind == RegKind::Qudit ? 0 : size; }
};

/// Measurement of one referee register. Either commuting Paulis (outcome bit
/// (K-1-j) for paulis[j]) or explicit outcome operators.
struct RegMeasurement {
    int reg = 0;
    std::vector<PauliOp> paulis;
    std::vector<LocalOp> ops;
    int outcomes() const { return paulis.empty() ? static_cast<int>(ops.size()) : (1 << paulis.size()); }
};

/// Acceptance weight in [0,1] given referee outcomes c (one index per
/// RegMeasurement) and answers a (one index per player, 0 if not asked).
using AcceptFn = std::function<double(const std::vector<int> &c, const std::vector<uint32_t> &a)>;

struct Predicate {
    enum class Kind { Xor, Table, Referee };
    Kind kind = Kind::Xor;
    std::vector<uint32_t> masks;  // Xor: per player
    int sign = 0;                 // Xor: accept iff parity == sign
    std::vector<double> table;    // Table: index = answers concatenated over asked players
    std::vector<RegMeasurement> measurements;
    AcceptFn accept;

    static Predicate make_xor(std::vector<uint32_t> masks, int sign);
    static Predicate make_table(std::vector<double> table);
    static Predicate make_referee(std::vector<RegMeasurement> ms, AcceptFn f);
};

struct GamePoint {
    std::vector<int> q;  // question index per player, -1 if not asked
    Rational prob;
    int pred = 0;
    std::string tag;
};

struct GameSpec {
    std::string name;
    int players = 0;
    std::vector<std::vector<Question>> alphabets;
    std::vector<int> pauli_qubits;  // Pauli qubits at the front of each player register
    std::vector<RefRegister> referee;
    std::vector<Predicate> predicates;
    std::vector<GamePoint> points;
    std::vector<std::string> flags;

    bool extended() const { return !referee.empty(); }
    int add_predicate(Predicate p);
    /// Adds question to player i's alphabet if not present; returns its index.
    int intern_question(int player, const Question &q);
    double total_probability() const;
    void validate() const;
    /// Block dimensions: referee registers then players.
    BlockLayout layout(const std::vector<int> &player_dims) const;
    int player_block(int i) const { return static_cast<int>(referee.size()) + i; }
};

struct Strategy {
    std::vector<int> player_dims;
    Ensemble state;
    std::vector<std::vector<Measurement>> meas;  // [player][question]
};

/// Outcome operators of a referee measurement (empty entries are zero).
std::vector<LocalOp> referee_outcome_ops(const RefRegister &reg, const RegMeasurement &m);
/// Joint projective measurement of commuting Paulis on the first Pauli qubits
/// of a register of dimension 2^n * priv.
Measurement pauli_measurement(const std::vector<PauliOp> &ops, int priv_dim = 1);
/// Honest measurements for all non-Special questions; Special ones default to
/// the trivial measurement {I, 0}.
Strategy honest_strategy(const GameSpec &g, Ensemble state, const std::vector<int> &player_dims);

struct ValueReport {
    double value = 0;
    std::map<std::string, std::pair<double, double>> by_tag;  // tag -> (mass, accepted mass)
};

/// Exact evaluator with referee operators cached per predicate.
class Evaluator {
   public:
    explicit Evaluator(const GameSpec &g);
    const GameSpec &game() const { return g_; }

    ValueReport evaluate(const Strategy &s) const;
    double value(const Strategy &s) const { return evaluate(s).value; }
    /// Rejection probability of one point (conditioned on it being sampled).
    double point_rejection(const Strategy &s, int point) const;
    /// Joint distribution over (referee outcome, answers) combos of one point.
    struct Outcome {
        std::vector<int> c;
        std::vector<uint32_t> a;
        double p = 0;
        double f = 0;
    };
    std::vector<Outcome> point_distribution(const Strategy &s, int point) const;

    const std::vector<std::vector<LocalOp>> &ref_ops(int pred) const { return ref_ops_[pred]; }

    /// Outcome operators of every player measurement, [player][question][answer].
    using PlayerOps = std::vector<std::vector<std::vector<LocalOp>>>;
    PlayerOps player_ops(const Strategy &s) const;

    /// Decomposes the rejection operator of a point as sum_j w_j op_j (x) M^{a_j}
    /// with player `player`'s factor M^{a_j} left out (player < 0: none) and
    /// calls f(w_j, op_j, a_j). XOR points use the correlator form, so weights
    /// may be negative.
    void for_each_rejecting(const Strategy &s, int point, int player,
                            const std::function<void(double, const ProductOp &, uint32_t)> &f) const;
    void for_each_rejecting(const PlayerOps &pops, const BlockLayout &layout, int point, int player,
                            const std::function<void(double, const ProductOp &, uint32_t)> &f) const;

   private:
    const GameSpec &g_;
    std::vector<std::vector<std::vector<LocalOp>>> ref_ops_;
};

ValueReport evaluate(const GameSpec &g, const Strategy &s);
double value(const GameSpec &g, const Strategy &s);

/// Exact maximum over deterministic classical strategies (scalar games).
double classical_value(const GameSpec &g);

struct SeesawOptions {
    int iters = 200;
    int restarts = 8;
    uint64_t seed = 1;
    double tol = 1e-12;
    int patience = 10;          // sweeps without improvement before stopping
    int state_restarts = 30;    // Lanczos restarts per state step (dimension > 256)
    Ensemble *init_state = nullptr;
};

struct SeesawResult {
    Strategy strategy;
    double value = 0;
    std::vector<double> history;          // best restart, value after each sweep
    std::vector<double> restart_values;
    int sweeps = 0;
    bool monotone = true;
};

SeesawResult seesaw(const GameSpec &g, const std::vector<int> &player_dims, const SeesawOptions &opt);

struct MonteCarloResult {
    double estimate = 0;
    double stderr_ = 0;
    int64_t samples = 0;
};
MonteCarloResult monte_carlo_value(const GameSpec &g, const Strategy &s, int64_t samples, uint64_t seed);

/// CHSH as a two-player XOR game on letters {0,1}.
GameSpec build_chsh();
/// EPR pair with the optimal CHSH observables.
Strategy chsh_optimal_strategy();

/// Lowest eigenpair of a Hermitian operator given by a matvec (Lanczos with
/// full reorthogonalization, restarted from the running Ritz vector).
std::pair<double, Vec> lowest_eigenpair(const std::function<Vec(const Vec &)> &matvec, int64_t dim, const Vec &warm,
                                        int max_restarts = 30, double tol = 1e-11);

}  // namespace qcomp

#endif
