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

// From three-turn interactive proofs to nonlocal games: the honest-player
// game, its Hamiltonians, the extended game and the final game.
//
// Register order of the honest-player game is C, V, then one block per
// player holding B_i (x) M_i (x) P_i. B_i and M_i are the player's Pauli
// qubits (B_i first). C has T = 2L+1 qubits and is either unary (legal
// span, T+1 states) or a full qubit register.

#ifndef QCOMP_COMPRESSION_HPP
#define QCOMP_COMPRESSION_HPP

#include <string>
#include <vector>

#include "qcomp/circuits.hpp"
#include "qcomp/games.hpp"
#include "qcomp/propagation.hpp"

namespace qcomp {

struct HonestGameOptions {
    bool unary_clock = true;
    /// Pauli questions are answered honestly by convention.
    bool fixed_paulis = true;
};

/// Label of the special prover question.
inline const std::string kProverQuestion = "xp";

GameSpec build_honest_game(const VerifierSpec &v, const HonestGameOptions &opt = {});

/// Stand-alone Hadamard or Toffoli check: referee C (one qubit) and V (the
/// gate qubits with owner -1); qubits with owner 0 go to a single player as
/// its Pauli qubits. Returns a game whose rejection is (1/4) tr[I - X_C (x) U].
GameSpec build_gate_check_game(const Gate &g, const std::vector<int> &owners);

/// Lambda(W)(X (x) I)Lambda(W)* on B (x) M (x) P, control on B.
Mat prover_reflection(const Mat &w);

/// sum_t |t^> (x) U_t...U_1(|0^qV> |Psi>) / sqrt(T+1) in game order.
Vec honest_history_state(const VerifierSpec &v, const ProverSpec &p, bool unary_clock);
/// History state with honest Pauli answers and xp answered by prover_reflection.
Strategy honest_history_strategy(const GameSpec &game, const VerifierSpec &v, const ProverSpec &p);

enum class HamiltonianKind { Clock, PropV, PropP, In, Out };
std::string hamiltonian_name(HamiltonianKind kind);

struct HamiltonianOptions {
    /// Restrict to the legal clock span (B_i fixed to delta_t).
    bool legal = false;
    /// PropP: per-player reflections answering xp (on B (x) M (x) P).
    std::vector<Mat> xp;
    /// Compute eigenvalues, kernel_dim and gap.
    bool spectrum = true;
};

struct HamiltonianReport {
    HamiltonianKind kind = HamiltonianKind::Clock;
    bool legal = false;
    std::vector<int> dims;  // block dimensions of h
    Mat h;
    RVec eigenvalues;
    int kernel_dim = 0;      // eigenvalues below 1e-9
    double gap = 0;          // smallest eigenvalue above 1e-9
};

/// The check's rejection operator; tr_rho H equals the rejection probability
/// of the matching honest-game check (conditioned on that check).
HamiltonianReport build_hamiltonian(HamiltonianKind kind, const VerifierSpec &v, const std::vector<int> &priv_dims,
                                    const HamiltonianOptions &opt = {});
/// Isometry from the legal span into the full-qubit game space.
Mat legal_isometry(const VerifierSpec &v, const std::vector<int> &priv_dims);
/// Pi H Pi.
Mat restrict_to(const Mat &h, const Mat &projector);

struct ExtendedGame {
    GameSpec game;
    VerifierSpec verifier;
    MCGameLayout mc;
    int n = 0;      // Pauli qubits per player, 1 + qM
    int q_s = 0;    // qubits of S, N + 1
    int output_begin = 0;  // first point of the Output Check
};

/// Registers S (unary, q_S qubits), X (2n qubits), C (unary), V; one player.
ExtendedGame build_extended_game(const VerifierSpec &v, int n, int k, const SequencePolicy &policy);
Strategy honest_extended_strategy(const ExtendedGame &eg, const ProverSpec &p);

struct FinalGameOptions {
    int ms_samples = 64;  // sampled points per stabilizer-game check
    uint64_t seed = 1;
};

struct QuestionEncoding {
    int tag_bits = 8;
    std::vector<int> index_bits;  // per player
    int max_width = 0;
    double log2_qubits = 0;
};

struct FinalGame {
    GameSpec game;
    int r = 0;        // original players come first
    int n_ref = 0;    // referee qubits held by each extra player
    int k_ref = 0;
    std::vector<int> reg_offset;  // first inventory qubit of each extended referee register
    std::vector<int> source;      // per point: extended point, or -1 for stabilizer-game points
    QuestionEncoding encoding;
};

FinalGame build_final_game(const ExtendedGame &eg, const FinalGameOptions &opt = {});

struct FinalHonestReport {
    double value = 0;
    double ms_value = 0;
    double sim_value = 0;
    int decoded_blocks = 0;
    int nontrivial_logicals = 0;
};
/// Value of the honest (r+8)-player strategy: the extended honest strategy
/// with every referee qubit encoded in the eight-qubit code across the extra
/// players. Answers are decoded symbolically; any mismatch throws.
FinalHonestReport evaluate_final_honest(const FinalGame &fg, const ExtendedGame &eg, const Strategy &ext_honest);

QuestionEncoding question_encoding(const GameSpec &g, int total_qubits);

struct PipelineInstance {
    GameSpec honest;
    ExtendedGame extended;
    FinalGame final_game;
    int n = 0;
    int k = 0;
    int q_s = 0;
    SequencePolicy policy;
    uint64_t seed = 1;
};
PipelineInstance build_pipeline(const VerifierSpec &v, int k, const SequencePolicy &policy, uint64_t seed);

struct ComposeResult {
    double max_value = 0;
    double argmax = 0;
    double lemma_bound = 0;  // 1 - p(1-s)/2
};
/// max over eps in [0,1] of (1-p)(1-eps) + p min(1, s + h eps^(1/kappa)).
ComposeResult soundness_compose(double p, double s, double h, double kappa);

}  // namespace qcomp

#endif
