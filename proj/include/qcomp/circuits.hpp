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

// Gate-level verifiers and provers of three-turn interactive proofs.
//
// Qubit numbering is global: verifier qubits 0..qV-1, then the message
// qubits of prover 0, prover 1, and so on. The simulated space is ordered
// V (x) (M_0 (x) P_0) (x) (M_1 (x) P_1) (x) ..., and prover states are given
// on (M_0 P_0)(M_1 P_1)... in that order.

#ifndef QCOMP_CIRCUITS_HPP
#define QCOMP_CIRCUITS_HPP

#include <string>
#include <vector>

#include "qcomp/common.hpp"
#include "qcomp/qcore.hpp"

namespace qcomp {

enum class GateKind { Hadamard, Toffoli, CNOT, Swap, PauliX, PauliY, PauliZ, ControlledU };

struct Gate {
    GateKind kind = GateKind::Hadamard;
    std::vector<int> targets;
    int control = -1;   // ControlledU only
    std::string inner;  // ControlledU only: H, X, Y or Z

    /// One Hadamard per listed qubit (a paired step lists two).
    static Gate hadamard(std::vector<int> qubits);
    static Gate toffoli(int c1, int c2, int target);
    static Gate cnot(int c, int target);
    static Gate swap(int a, int b);
    static Gate pauli(char letter, int q);
    static Gate controlled(const std::string &inner, int c, int target);

    /// Qubits in matrix order: control first for ControlledU, then targets.
    std::vector<int> qubits() const;
    /// Unitary on qubits(), first listed qubit most significant.
    Mat matrix() const;
    std::string str() const;
};

/// Single-qubit unitary by name (H, X, Y, Z, S, T).
Mat named_unitary(const std::string &name);

struct VerifierSpec {
    std::string name;
    int qv = 0;
    int qm = 0;
    int r = 1;
    std::vector<Gate> v1;
    std::vector<Gate> v2;

    int L() const { return static_cast<int>(v1.size()); }
    int T() const { return 2 * L() + 1; }
    int qubits() const { return qv + r * qm; }
    /// -1 for verifier qubits, otherwise the prover owning the message qubit.
    int owner(int qubit) const;
    /// Gate U_t for t in 1..T, t != L+1.
    const Gate &step(int t) const;
};

/// Parses the fixture text format:
///
///   # comment
///   name perfect
///   qV 2
///   qM 1
///   r 1
///   L 3
///   1 H 0 1
///   2 TOF 0 1 2
///
/// Gate lines are "t OP qubits..." with OP one of H (one or two qubits),
/// TOF c1 c2 target, CNOT c target, SWAP a b, X a, Y a, Z a, CU name c target.
/// Steps 1..L form the first circuit and L+2..2L+1 the second; every step
/// appears exactly once.
VerifierSpec parse_verifier(const std::string &text);
VerifierSpec load_verifier(const std::string &path);
std::string verifier_text(const VerifierSpec &v);
/// Path of a bundled fixture ("perfect", "impossible", "half").
std::string fixture_path(const std::string &name);

struct ValidationIssue {
    int step = 0;  // clock step t, 0 for whole-verifier issues
    std::string message;
};
struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;
};
/// Checks the Toffoli/Hadamard gate set, paired Hadamards on one register
/// class and equal circuit lengths.
ValidationReport validate_verifier(const VerifierSpec &v);
/// Adds two dummy verifier qubits and pads the shorter circuit with paired
/// Hadamards on them.
VerifierSpec pad_verifier(VerifierSpec v);

/// Product of gate matrices in order (first gate applied first).
Mat compile_unitary(const std::vector<Gate> &gates, int qubits);
Mat compile_unitary(const std::vector<Gate> &gates, const RegisterLayout &layout);

/// Applies a unitary on the listed blocks (all of dimension 2) of a state
/// over `dims`, first listed block most significant.
void apply_on_blocks(Vec &psi, const std::vector<int> &dims, const std::vector<int> &blocks, const Mat &u);

struct ProverSpec {
    std::vector<int> priv_dims;
    std::vector<Mat> w;  // W^i on M_i (x) P_i
    Vec psi;             // on (M_0 P_0)(M_1 P_1)...

    int prover_dim(int i, int qm) const { return (1 << qm) * priv_dims[i]; }
    void validate(const VerifierSpec &v, double tol = kValidateTol) const;
};

/// Block dimensions of the simulated space V (x) (M_i (x) P_i)_i.
std::vector<int> protocol_dims(const VerifierSpec &v, const std::vector<int> &priv_dims);
/// Block index of a global qubit in protocol_dims.
int protocol_block(const VerifierSpec &v, int qubit);
/// Applies a gate on the protocol space.
void apply_gate(const VerifierSpec &v, const std::vector<int> &priv_dims, const Gate &g, Vec &psi);
/// Applies W^0 (x) W^1 (x) ... on the protocol space.
void apply_provers(const VerifierSpec &v, const ProverSpec &p, Vec &psi);
/// |0^qV> (x) psi on the protocol space.
Vec protocol_initial(const VerifierSpec &v, const ProverSpec &p);

/// ||Pi_acc V2 W V1 (|0> (x) psi)||^2 with Pi_acc = |1><1| on verifier qubit 0.
double protocol_value(const VerifierSpec &v, const ProverSpec &p);
/// Acceptance operator on M (x) P for fixed prover unitaries.
Mat acceptance_operator(const VerifierSpec &v, const std::vector<int> &priv_dims, const std::vector<Mat> &w);

struct MapResult {
    ProverSpec prover;
    double value = 0;
    std::vector<double> history;  // best restart, value after each iteration
    std::vector<double> restart_values;
    bool monotone = true;
};
/// Alternating optimization of the prover state and unitaries.
MapResult map_seesaw(const VerifierSpec &v, const std::vector<int> &priv_dims, uint64_t seed, int iters,
                     int restarts = 8);

/// Honest prover for the bundled "perfect" fixture: |-> on the message
/// qubit, |0> on the private register, W = X on the message qubit.
ProverSpec perfect_fixture_prover(int priv_dim = 4);

}  // namespace qcomp

#endif
