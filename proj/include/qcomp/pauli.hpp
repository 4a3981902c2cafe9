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

#ifndef QCOMP_PAULI_HPP
#define QCOMP_PAULI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcomp/common.hpp"

namespace qcomp {

/// Signed Pauli word in symplectic form.
///
/// The operator is i^phase times the tensor product of factors, where a
/// qubit with only its x bit set is X, only z is Z, and both is Y = iXZ.
/// Qubit 0 is the leftmost tensor factor (most significant basis bit).
class PauliOp {
   public:
    PauliOp() = default;
    explicit PauliOp(int n);

    /// Parses "XZIY", "-XZ", "+iX", "-iYY". One letter per qubit.
    static PauliOp parse(std::string_view text);
    static PauliOp single(int n, int qubit, char letter);

    int n() const { return n_; }
    int phase() const { return phase_; }
    void set_phase(int p) { phase_ = ((p % 4) + 4) % 4; }
    bool xbit(int q) const;
    bool zbit(int q) const;
    char letter(int q) const;
    void set_letter(int q, char c);

    int weight() const;
    std::vector<int> support() const;
    bool is_identity_word() const { return weight() == 0; }
    bool is_xz_form() const;
    /// Sign bit of an XZ-form element (phase/2).
    int sign_bit() const;
    bool is_hermitian() const;
    /// Same word with phase reset to 0.
    PauliOp unsigned_copy() const;

    PauliOp operator*(const PauliOp &o) const;
    bool commutes(const PauliOp &o) const;
    bool same_word(const PauliOp &o) const { return x_ == o.x_ && z_ == o.z_ && n_ == o.n_; }
    bool operator==(const PauliOp &o) const { return same_word(o) && phase_ == o.phase_; }
    bool operator!=(const PauliOp &o) const { return !(*this == o); }
    bool operator<(const PauliOp &o) const;

    /// Dense 2^n x 2^n matrix; guarded by the dense limit.
    Mat to_matrix() const;
    /// Image of computational basis state b: returns (coefficient, image).
    std::pair<cd, uint64_t> apply_basis(uint64_t b) const;

    /// Dense text, e.g. "-XZIIXZII", "+iX".
    std::string str() const;
    /// Sparse text with 1-based indices, e.g. "X1Z3"; "-" prefix for sign.
    std::string sparse_str() const;

    /// Sub-word on the listed qubits, phase kept.
    PauliOp restrict(const std::vector<int> &qubits) const;
    /// Embeds p into n qubits, p's qubit i placed at qubits[i].
    static PauliOp embed(const PauliOp &p, int n, const std::vector<int> &qubits);

    const std::vector<uint64_t> &x_words() const { return x_; }
    const std::vector<uint64_t> &z_words() const { return z_; }
    /// Symplectic vector (x bits then z bits) as packed words of length 2n.
    std::vector<uint64_t> symplectic() const;

   private:
    int n_ = 0;
    int phase_ = 0;
    std::vector<uint64_t> x_;
    std::vector<uint64_t> z_;
};

PauliOp multiply(const PauliOp &a, const PauliOp &b);
bool commutes(const PauliOp &a, const PauliOp &b);
Mat to_matrix(const PauliOp &p);
Mat pauli_letter_matrix(char c);

/// Pauli_{n,k}: positive XZ-form words of weight 1..k in canonical order:
/// by weight, then support combination in lexicographic order, then letter
/// pattern read as a binary number with X=0, Z=1 and the first support qubit
/// most significant.
std::vector<PauliOp> enumerate_pauli_nk(int n, int k);

/// One element of Power_{n,k}.
struct PauliSet {
    std::vector<int> support;     // the fixed size-k qubit set J
    std::vector<PauliOp> members;  // canonical order
};

/// Power_{n,k}. Permissive default: size-k sets of distinct pairwise commuting
/// members of Pauli_{n,k} whose supports lie in a size-k set J and cover it.
/// strict=true keeps only members of weight exactly k.
std::vector<PauliSet> enumerate_power_nk(int n, int k, bool strict = false);
/// Number of elements enumerate_power_nk would return, without materializing.
int64_t count_power_nk(int n, int k, bool strict = false);

struct StabilizerCode {
    int n = 0;
    std::vector<PauliOp> generators;
    PauliOp logical_x;
    PauliOp logical_z;

    /// Throws InputError if the invariants fail.
    void validate() const;
    /// All 2^m group elements; element index bit (m-1-i) selects generator i.
    std::vector<PauliOp> group() const;
    /// Dense code projector.
    Mat projector() const;
};

StabilizerCode eight_qubit_code();
/// XZ-form elements of the stabilizer group, in group() order.
std::vector<PauliOp> xz_stabilizer_subset(const StabilizerCode &code);
std::vector<PauliOp> ghz_stabilizer(int m);
/// Projector onto the joint +1 eigenspace of commuting generators.
Mat joint_projector(const std::vector<PauliOp> &gens);

/// Coefficients c with target's word equal to the GF(2) sum of basis words
/// selected by c, or nullopt if target is outside their span.
std::optional<std::vector<int>> solve_span(const std::vector<PauliOp> &basis, const PauliOp &target);

}  // namespace qcomp

#endif
