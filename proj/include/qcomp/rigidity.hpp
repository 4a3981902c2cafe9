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

// Eight-qubit stabilizer game, the (n,k)-stabilizer game, honest strategies
// and rigidity reports.

#ifndef QCOMP_RIGIDITY_HPP
#define QCOMP_RIGIDITY_HPP

#include <string>
#include <vector>

#include "qcomp/games.hpp"

namespace qcomp {

/// Eight-player XOR game over the 32 XZ-form stabilizers of the code.
GameSpec build_stabilizer_game();
/// First nonzero column of the code projector, normalized.
Vec canonical_codeword();
Strategy honest_stabilizer_strategy(int priv_dim = 1);
/// (1/32) sum_{P in Xi} tr_rho (I + (-1)^s (x)_i D^(i))/2 from the players'
/// single-letter measurements.
double stabilizer_value_formula(const GameSpec &g, const Strategy &s);

/// Sorts members of a Set question into Pauli_{n,k} enumeration order.
std::vector<PauliOp> canonical_set(std::vector<PauliOp> ops, int n, int k);

/// (n,k)-stabilizer game with its four checks at probability 1/4 each. Points
/// carry tags "stabilizer", "confusion", "parity", "pauli".
GameSpec build_ms_game(int n, int k);
/// n codeword blocks; player i holds qubit i of every block (block u is its
/// u-th Pauli qubit), followed by a private register of dimension priv_dim.
Vec ms_honest_state(int n, int priv_dim = 1);
Strategy honest_ms_strategy(int n, int k, int priv_dim = 1);

struct PlayerRigidity {
    bool ok = true;
    std::string error;
    std::vector<JordanBlocks> blocks;   // one per Pauli qubit u, from (X_u, Z_u)
    std::vector<double> dis_single;     // per Single question, dis(P, V* P V)
    std::vector<double> dis_set;        // per Set question, max over members of derived distances
};

struct RigidityReport {
    double value = 0;
    double epsilon = 0;
    std::vector<PlayerRigidity> players;
    double dis_p_max = 0;
    double dis_q_max = 0;
    double dis_max = 0;
    std::vector<double> block_overlap;  // <Pi (x) I, V_u rho V_u*> per block
    double overlap = 0;                 // 1 - sum_u (1 - block_overlap[u]), clamped to [0,1]
};

/// Rigidity analysis of a strategy for build_stabilizer_game or build_ms_game.
RigidityReport rigidity_report(const GameSpec &g, const Strategy &s);

/// Replaces player's Single-question reflection for `question` by
/// cos(delta) P + sin(delta) P' where P' is the other letter on the same qubit.
Strategy rotate_single(const GameSpec &g, Strategy s, int player, const PauliOp &question, double delta);

struct SweepRow {
    double delta = 0;
    double epsilon = 0;
    double dis_max = 0;
    double overlap = 0;
};
/// Rotates player 2's X on the first qubit by each delta in the (n,k) game.
std::vector<SweepRow> rigidity_sweep(int n, int k, const std::vector<double> &deltas);
std::string sweep_csv(const std::vector<SweepRow> &rows);

}  // namespace qcomp

#endif
