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

#include "qcomp/circuits.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace qcomp;

namespace {

const double kHalfMap = (1.0 + 1.0 / std::sqrt(2.0)) / 2.0;

/// Copies the message qubit to the output through a Toffoli whose other
/// control is an ancilla set to 1.
VerifierSpec copy_verifier() {
    VerifierSpec v;
    v.qv = 2;
    v.qm = 1;
    v.r = 1;
    v.v1 = {Gate::pauli('X', 1)};
    v.v2 = {Gate::toffoli(1, 2, 0)};
    return v;
}

ProverSpec message_prover(const Vec &m) {
    ProverSpec p;
    p.priv_dims = {1};
    p.w = {Mat::Identity(2, 2)};
    p.psi = m;
    return p;
}

ProverSpec random_prover(const VerifierSpec &v, int priv, Rng &rng) {
    ProverSpec p;
    int64_t d = 1;
    for (int i = 0; i < v.r; ++i) {
        p.priv_dims.push_back(priv);
        p.w.push_back(haar_unitary(p.prover_dim(i, v.qm), rng));
        d *= p.prover_dim(i, v.qm);
    }
    p.psi = random_state(static_cast<int>(d), rng);
    return p;
}

Mat euler(double a, double b, double c) {
    Mat rz1 = Mat::Zero(2, 2);
    rz1(0, 0) = std::polar(1.0, -a / 2);
    rz1(1, 1) = std::polar(1.0, a / 2);
    Mat ry = Mat::Zero(2, 2);
    ry << std::cos(b / 2), -std::sin(b / 2), std::sin(b / 2), std::cos(b / 2);
    Mat rz2 = Mat::Zero(2, 2);
    rz2(0, 0) = std::polar(1.0, -c / 2);
    rz2(1, 1) = std::polar(1.0, c / 2);
    return rz1 * ry * rz2;
}

/// Max over a grid of single-qubit prover unitaries of the top acceptance
/// eigenvalue (one prover, one message qubit, no private register).
double grid_map(const VerifierSpec &v, int steps) {
    double best = 0;
    for (int i = 0; i < steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            for (int k = 0; k < steps; ++k) {
                Mat w = euler(2 * M_PI * i / steps, M_PI * j / steps, 2 * M_PI * k / steps);
                Mat a = acceptance_operator(v, {1}, {w});
                Eigen::SelfAdjointEigenSolver<Mat> es(a);
                best = std::max(best, es.eigenvalues()(1));
            }
        }
    }
    return best;
}

VerifierSpec random_verifier(Rng &rng, int L) {
    VerifierSpec v;
    v.qv = 3;
    v.qm = 1;
    v.r = 1;
    auto gate = [&]() {
        std::vector<int> q = {0, 1, 2, 3};
        for (int i = 3; i > 0; --i) std::swap(q[i], q[rng.below(i + 1)]);
        if (rng.below(2)) return Gate::toffoli(q[0], q[1], q[2]);
        int a = static_cast<int>(rng.below(3));
        int b = (a + 1 + static_cast<int>(rng.below(2))) % 3;
        return Gate::hadamard({a, b});
    };
    for (int i = 0; i < L; ++i) v.v1.push_back(gate());
    for (int i = 0; i < L; ++i) v.v2.push_back(gate());
    return v;
}

}  // namespace

TEST(circuits, compile_unitary_examples) {
    EXPECT_LT((compile_unitary({}, 3) - Mat::Identity(8, 8)).norm(), 1e-15);
    Mat hh = compile_unitary({Gate::hadamard({1}), Gate::hadamard({1})}, 2);
    EXPECT_LT((hh - Mat::Identity(4, 4)).norm(), 1e-14);
    Mat tof = compile_unitary({Gate::toffoli(0, 1, 2)}, 3);
    EXPECT_NEAR(std::abs(tof(0b111, 0b110)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(tof(0b110, 0b111)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(tof(0b101, 0b101)), 1.0, 1e-15);
    EXPECT_TRUE(is_unitary(compile_unitary({Gate::hadamard({0, 2}), Gate::controlled("H", 1, 0), Gate::swap(0, 2)}, 3)));
    EXPECT_THROW(compile_unitary({Gate::cnot(0, 3)}, 3), InputError);
    EXPECT_THROW(compile_unitary({Gate::cnot(1, 1)}, 3), InputError);
    EXPECT_THROW(compile_unitary({}, dense_qubit_limit() + 1), ResourceError);
    EXPECT_LT((compile_unitary({Gate::cnot(0, 1)}, RegisterLayout({{"A", 2}, {"B", 2}})) -
               compile_unitary({Gate::cnot(0, 1)}, 2))
                  .norm(),
              1e-15);
}

TEST(circuits, validation_reports) {
    VerifierSpec v = copy_verifier();
    v.v1 = {Gate::toffoli(0, 1, 2), Gate::toffoli(0, 2, 1)};
    v.v2 = {Gate::hadamard({2}), Gate::toffoli(1, 2, 0)};
    ValidationReport rep = validate_verifier(v);
    ASSERT_FALSE(rep.ok);
    ASSERT_EQ(rep.issues.size(), 1u);
    EXPECT_EQ(rep.issues[0].step, 4);
    EXPECT_NE(rep.issues[0].message.find("lone Hadamard"), std::string::npos);
    v.v2[0] = Gate::toffoli(0, 1, 2);
    EXPECT_TRUE(validate_verifier(v).ok);
    v.v2[0] = Gate::hadamard({1, 2});
    EXPECT_FALSE(validate_verifier(v).ok);
    EXPECT_TRUE(validate_verifier(load_verifier(fixture_path("perfect"))).ok);
    EXPECT_TRUE(validate_verifier(load_verifier(fixture_path("impossible"))).ok);
    EXPECT_FALSE(validate_verifier(load_verifier(fixture_path("half"))).ok);
}

TEST(circuits, parser_round_trip_and_errors) {
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    EXPECT_EQ(v.L(), 3);
    EXPECT_EQ(v.T(), 7);
    EXPECT_EQ(v.name, "perfect");
    VerifierSpec w = parse_verifier(verifier_text(v));
    EXPECT_EQ(verifier_text(w), verifier_text(v));
    EXPECT_THROW(parse_verifier("qV 2\nqM 1\nr 1\nL 1\n1 TOF 0 1 2\n"), InputError);
    EXPECT_THROW(parse_verifier("qV 2\nqM 1\nr 1\nL 1\n1 TOF 0 1 2\n2 TOF 0 1 2\n3 TOF 0 1 2\n"), InputError);
    EXPECT_THROW(parse_verifier("qV 2\nqM 1\nr 1\nL 1\n1 FOO 0\n3 TOF 0 1 2\n"), InputError);
    EXPECT_THROW(parse_verifier("qV 2\nqM 1\nr 1\nL 1\n1 TOF 0 1 5\n3 TOF 0 1 2\n"), InputError);
    EXPECT_THROW(parse_verifier("qV 2\nqM 1\nr 1\nL 1\n1 TOF 0 1 1\n3 TOF 0 1 2\n"), InputError);
    EXPECT_THROW(load_verifier("/nonexistent/file.qv"), InputError);
}

TEST(circuits, protocol_value_copy_verifier) {
    VerifierSpec v = copy_verifier();
    EXPECT_NEAR(protocol_value(v, message_prover(Vec::Unit(2, 1))), 1.0, 1e-15);
    EXPECT_NEAR(protocol_value(v, message_prover(Vec::Unit(2, 0))), 0.0, 1e-15);
    ProverSpec bad = message_prover(Vec::Unit(4, 0));
    EXPECT_THROW(protocol_value(v, bad), InputError);
}

TEST(circuits, half_fixture_top_eigenvalue) {
    VerifierSpec v = load_verifier(fixture_path("half"));
    Mat a = acceptance_operator(v, {1}, {Mat::Identity(2, 2)});
    Mat plus = Mat::Constant(2, 2, 0.5);
    Mat one = Mat::Zero(2, 2);
    one(1, 1) = 1.0;
    EXPECT_LT((a - (one + plus) / 2.0).norm(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    EXPECT_NEAR(es.eigenvalues()(1), kHalfMap, 1e-14);
    ProverSpec p = message_prover(es.eigenvectors().col(1));
    EXPECT_NEAR(protocol_value(v, p), kHalfMap, 1e-14);
}

TEST(circuits, perfect_fixture_honest_prover) {
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    for (int d : {1, 2, 4}) EXPECT_NEAR(protocol_value(v, perfect_fixture_prover(d)), 1.0, 1e-12);
    ProverSpec p = perfect_fixture_prover(4);
    p.w[0] = Mat::Identity(8, 8);
    EXPECT_NEAR(protocol_value(v, p), 0.0, 1e-12);
}

TEST(circuits, map_seesaw_perfect_converges) {
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    MapResult r = map_seesaw(v, {1}, 7, 50);
    EXPECT_GE(r.value, 1.0 - 1e-7);
    EXPECT_LE(r.history.size(), 51u);
    EXPECT_TRUE(r.monotone);
    for (size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1] - 1e-10);
    EXPECT_NEAR(protocol_value(v, r.prover), r.value, 1e-9);
    MapResult again = map_seesaw(v, {1}, 7, 50);
    EXPECT_EQ(again.value, r.value);
    MapResult priv = map_seesaw(v, {4}, 7, 50, 2);
    EXPECT_TRUE(priv.monotone);
    EXPECT_LE(priv.value, 1.0);
}

TEST(circuits, map_seesaw_impossible_stays_zero) {
    VerifierSpec v = load_verifier(fixture_path("impossible"));
    MapResult r = map_seesaw(v, {4}, 3, 20, 3);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(circuits, canceling_pairs_leave_value_unchanged) {
    Rng rng(5);
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    for (int t = 0; t < 20; ++t) {
        ProverSpec p = random_prover(v, 2, rng);
        double base = protocol_value(v, p);
        VerifierSpec w = v;
        int pos = static_cast<int>(rng.below(static_cast<int64_t>(w.v1.size()) + 1));
        Gate g = rng.below(2) ? Gate::toffoli(0, 2, 1) : Gate::hadamard({0, 1});
        w.v1.insert(w.v1.begin() + pos, {g, g});
        w.v2.insert(w.v2.begin() + static_cast<int>(rng.below(static_cast<int64_t>(w.v2.size()) + 1)),
                    {Gate::hadamard({0, 1}), Gate::hadamard({0, 1})});
        EXPECT_NEAR(protocol_value(w, p), base, 1e-12);
    }
}

TEST(circuits, private_basis_independence) {
    Rng rng(6);
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    for (int t = 0; t < 20; ++t) {
        ProverSpec p = random_prover(v, 3, rng);
        Mat u = kron(Mat::Identity(2, 2), haar_unitary(3, rng));
        ProverSpec q = p;
        q.w[0] = u * p.w[0] * u.adjoint();
        q.psi = u * p.psi;
        EXPECT_NEAR(protocol_value(v, q), protocol_value(v, p), 1e-10);
    }
}

TEST(circuits, map_seesaw_below_grid_bound) {
    Rng rng(8);
    const double kGridTol = 0.02;
    VerifierSpec half = load_verifier(fixture_path("half"));
    double g = grid_map(half, 16);
    MapResult r = map_seesaw(half, {1}, 1, 50);
    EXPECT_LE(r.value, g + 1e-9);
    EXPECT_NEAR(r.value, kHalfMap, 1e-9);
    for (int t = 0; t < 4; ++t) {
        VerifierSpec v = random_verifier(rng, 2);
        double grid = grid_map(v, 16);
        MapResult m = map_seesaw(v, {1}, 2 + t, 40, 4);
        EXPECT_LE(m.value, grid + kGridTol);
        EXPECT_TRUE(m.monotone);
    }
}

TEST(circuits, padding_preserves_value) {
    Rng rng(9);
    VerifierSpec v = load_verifier(fixture_path("perfect"));
    v.v2.pop_back();
    v.v2.pop_back();
    EXPECT_FALSE(validate_verifier(v).ok);
    VerifierSpec padded = pad_verifier(v);
    EXPECT_EQ(padded.v1.size(), padded.v2.size());
    EXPECT_EQ(padded.qv, v.qv + 2);
    EXPECT_TRUE(validate_verifier(padded).ok);
    for (int t = 0; t < 10; ++t) {
        ProverSpec p = random_prover(v, 2, rng);
        EXPECT_NEAR(protocol_value(padded, p), protocol_value(v, p), 1e-12);
    }
}
