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

#include "qcomp/pauli.hpp"

#include <set>

#include "gtest/gtest.h"

using namespace qcomp;

namespace {

PauliOp random_pauli(int n, Rng &rng) {
    PauliOp p(n);
    const char letters[4] = {'I', 'X', 'Y', 'Z'};
    for (int q = 0; q < n; ++q) p.set_letter(q, letters[rng.below(4)]);
    p.set_phase(static_cast<int>(rng.below(4)));
    return p;
}

// Kronecker oracle independent of PauliOp::to_matrix.
Mat kron_oracle(const PauliOp &p) {
    std::vector<Mat> fs;
    for (int q = 0; q < p.n(); ++q) {
        Mat m(2, 2);
        switch (p.letter(q)) {
            case 'I':
                m << 1, 0, 0, 1;
                break;
            case 'X':
                m << 0, 1, 1, 0;
                break;
            case 'Y':
                m << 0, cd(0, -1), cd(0, 1), 0;
                break;
            default:
                m << 1, 0, 0, -1;
        }
        fs.push_back(m);
    }
    const cd ip[4] = {1, cd(0, 1), -1, cd(0, -1)};
    return ip[p.phase()] * kron_all(fs);
}

}  // namespace

TEST(pauli, x_times_z_is_minus_i_y) {
    PauliOp r = PauliOp::parse("X") * PauliOp::parse("Z");
    EXPECT_EQ(r.phase(), 3);
    EXPECT_EQ(r.letter(0), 'Y');
}

TEST(pauli, self_adjoint_squares_to_identity) {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        PauliOp p = random_pauli(5, rng);
        p.set_phase(p.phase() & 2);
        PauliOp sq = p * p;
        EXPECT_TRUE(sq.is_identity_word());
        EXPECT_EQ(sq.phase(), 0);
    }
}

TEST(pauli, product_matches_dense) {
    Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        int n = 1 + static_cast<int>(rng.below(6));
        PauliOp a = random_pauli(n, rng);
        PauliOp b = random_pauli(n, rng);
        PauliOp c = random_pauli(n, rng);
        EXPECT_LT((to_matrix(a * b) - to_matrix(a) * to_matrix(b)).norm(), 1e-12);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_LT((to_matrix(a) - kron_oracle(a)).norm(), 1e-12);
    }
}

TEST(pauli, code_generator_product_dense) {
    auto code = eight_qubit_code();
    PauliOp g12 = code.generators[0] * code.generators[1];
    EXPECT_LT((g12.to_matrix() - code.generators[0].to_matrix() * code.generators[1].to_matrix()).norm(), 1e-10);
    EXPECT_EQ(g12.letter(1), 'Y');
    EXPECT_EQ(g12.letter(0), 'I');
}

TEST(pauli, commutes_matches_dense_commutator) {
    Rng rng(13);
    EXPECT_TRUE(commutes(PauliOp::parse("XX"), PauliOp::parse("ZZ")));
    EXPECT_FALSE(commutes(PauliOp::parse("X"), PauliOp::parse("Z")));
    for (int t = 0; t < 100; ++t) {
        PauliOp a = random_pauli(4, rng);
        PauliOp b = random_pauli(4, rng);
        Mat A = a.to_matrix();
        Mat B = b.to_matrix();
        bool dense = (A * B - B * A).norm() < 1e-9;
        EXPECT_EQ(dense, a.commutes(b));
    }
    EXPECT_THROW(commutes(PauliOp(2), PauliOp(3)), InputError);
}

TEST(pauli, to_matrix_basics) {
    EXPECT_LT((PauliOp(1).to_matrix() - Mat::Identity(2, 2)).norm(), 1e-15);
    Mat z = PauliOp::parse("Z").to_matrix();
    EXPECT_EQ(z(0, 0), cd(1));
    EXPECT_EQ(z(1, 1), cd(-1));
    Mat xz = PauliOp::parse("XZ").to_matrix();
    EXPECT_LT((xz - kron(pauli_letter_matrix('X'), pauli_letter_matrix('Z'))).norm(), 1e-15);
    EXPECT_THROW(PauliOp(40).to_matrix(), ResourceError);
}

TEST(pauli, parse_and_print_roundtrip) {
    EXPECT_EQ(PauliOp::parse("-XZIIXZII").str(), "-XZIIXZII");
    EXPECT_EQ(PauliOp::parse("XZ").str(), "+XZ");
    EXPECT_EQ(PauliOp::parse("-iY").phase(), 3);
    EXPECT_EQ(PauliOp::parse("IXIZ").sparse_str(), "X2Z4");
}

TEST(pauli, enumerate_pauli_nk_sizes_and_order) {
    auto p11 = enumerate_pauli_nk(1, 1);
    ASSERT_EQ(p11.size(), 2u);
    EXPECT_EQ(p11[0].str(), "+X");
    EXPECT_EQ(p11[1].str(), "+Z");
    EXPECT_EQ(enumerate_pauli_nk(2, 2).size(), 8u);
    EXPECT_EQ(enumerate_pauli_nk(3, 2).size(), 18u);
    EXPECT_THROW(enumerate_pauli_nk(2, 3), InputError);
    EXPECT_THROW(enumerate_pauli_nk(2, 0), InputError);

    // Brute-force oracle over all 3^n XZ words.
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}, {4, 2}}) {
        std::set<std::string> oracle;
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (int code = 0; code < total; ++code) {
            PauliOp p(n);
            int c = code;
            for (int q = 0; q < n; ++q) {
                p.set_letter(q, "IXZ"[c % 3]);
                c /= 3;
            }
            if (p.weight() >= 1 && p.weight() <= k) oracle.insert(p.str());
        }
        auto got = enumerate_pauli_nk(n, k);
        std::set<std::string> gs;
        for (const auto &p : got) {
            EXPECT_TRUE(p.is_xz_form());
            EXPECT_EQ(p.sign_bit(), 0);
            gs.insert(p.str());
        }
        EXPECT_EQ(gs.size(), got.size());
        EXPECT_EQ(gs, oracle);
    }
    auto p22 = enumerate_pauli_nk(2, 2);
    std::vector<std::string> expect = {"+XI", "+ZI", "+IX", "+IZ", "+XX", "+XZ", "+ZX", "+ZZ"};
    for (size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(p22[i].str(), expect[i]);
}

TEST(pauli, enumerate_power_nk_strict_and_permissive) {
    auto strict = enumerate_power_nk(2, 2, true);
    ASSERT_EQ(strict.size(), 2u);
    EXPECT_EQ(strict[0].members[0].str(), "+XX");
    EXPECT_EQ(strict[0].members[1].str(), "+ZZ");
    EXPECT_EQ(strict[1].members[0].str(), "+XZ");
    EXPECT_EQ(strict[1].members[1].str(), "+ZX");

    auto perm = enumerate_power_nk(2, 2);
    EXPECT_EQ(perm.size(), 14u);
    for (const auto &s : perm) {
        ASSERT_EQ(s.members.size(), 2u);
        EXPECT_TRUE(s.members[0].commutes(s.members[1]));
    }
    // Exhaustive oracle for (3,2): every pair of distinct members of
    // Pauli_{3,2} that commute and whose supports cover exactly two qubits.
    auto p32 = enumerate_pauli_nk(3, 2);
    int64_t oracle = 0;
    for (size_t i = 0; i < p32.size(); ++i) {
        for (size_t j = i + 1; j < p32.size(); ++j) {
            if (!p32[i].commutes(p32[j])) continue;
            std::set<int> u;
            for (int q : p32[i].support()) u.insert(q);
            for (int q : p32[j].support()) u.insert(q);
            if (u.size() == 2) ++oracle;
        }
    }
    auto perm32 = enumerate_power_nk(3, 2);
    EXPECT_EQ(static_cast<int64_t>(perm32.size()), oracle);
    EXPECT_EQ(perm32.size(), 42u);
    EXPECT_EQ(count_power_nk(3, 2), 42);
}

TEST(pauli, eight_qubit_code_tables) {
    auto code = eight_qubit_code();
    EXPECT_NO_THROW(code.validate());
    EXPECT_EQ(code.generators[2].str(), "+YYIIIIII");
    EXPECT_EQ(code.generators[2].weight(), 2);
    for (size_t i = 0; i < 6; ++i) {
        for (size_t j = 0; j < 6; ++j) EXPECT_TRUE(code.generators[i].commutes(code.generators[j]));
    }
    Mat P = code.projector();
    EXPECT_LT((P * P - P).norm(), 1e-10);
    EXPECT_NEAR(P.trace().real(), 4.0, 1e-10);

    Mat avg = Mat::Zero(256, 256);
    for (const auto &g : code.group()) avg += g.to_matrix();
    EXPECT_LT((avg / 64.0 - P).norm(), 1e-10);
}

TEST(pauli, xi_subset) {
    auto code = eight_qubit_code();
    auto xi = xz_stabilizer_subset(code);
    ASSERT_EQ(xi.size(), 32u);
    std::set<std::string> s;
    for (const auto &p : xi) s.insert(p.str());
    EXPECT_TRUE(s.count("+XXXXXXXX"));
    EXPECT_TRUE(s.count("+ZZZZZZZZ"));
    EXPECT_TRUE(s.count("+XZXZXZXZ"));
    EXPECT_TRUE(s.count("-ZZXXXXXX"));
    PauliOp g2g3 = code.generators[1] * code.generators[2];
    EXPECT_TRUE(g2g3.is_xz_form());
    EXPECT_TRUE(s.count(g2g3.str()));

    // Exactly one of mu1, mu2 set.
    auto grp = code.group();
    int idx = 0;
    for (int mask = 0; mask < 64; ++mask) {
        bool mu1 = (mask >> 5) & 1;
        bool mu2 = (mask >> 4) & 1;
        EXPECT_EQ(grp[mask].is_xz_form() && !grp[mask].is_identity_word(), mu1 != mu2);
        if (mu1 != mu2) EXPECT_EQ(xi[idx++], grp[mask]);
    }
    Mat P = code.projector();
    for (const auto &p : xi) EXPECT_LT((p.to_matrix() * P - P).norm(), 1e-10);
}

TEST(pauli, xi_sum_spectrum) {
    auto xi = xz_stabilizer_subset(eight_qubit_code());
    Mat sum = Mat::Zero(256, 256);
    for (const auto &p : xi) sum += p.to_matrix();
    Eigen::SelfAdjointEigenSolver<Mat> es(sum);
    RVec ev = es.eigenvalues();
    int top = 0;
    for (int i = 0; i < 256; ++i) {
        if (std::abs(ev(i) - 32.0) < 1e-9) {
            ++top;
        } else {
            EXPECT_LE(ev(i), 1e-9);
        }
    }
    EXPECT_EQ(top, 4);
}

TEST(pauli, ghz) {
    auto g = ghz_stabilizer(3);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g[0].str(), "+XXX");
    EXPECT_EQ(g[1].str(), "+ZZI");
    EXPECT_EQ(g[2].str(), "+IZZ");
    Mat P = joint_projector(g);
    EXPECT_NEAR(P.trace().real(), 1.0, 1e-12);
    Vec ghz = Vec::Zero(8);
    ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
    for (const auto &p : g) EXPECT_LT((p.to_matrix() * ghz - ghz).norm(), 1e-12);
    EXPECT_THROW(ghz_stabilizer(1), InputError);
}

TEST(pauli, solve_span) {
    auto code = eight_qubit_code();
    PauliOp g13 = code.generators[0] * code.generators[2];
    auto c = solve_span(code.generators, g13);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ((*c)[0], 1);
    EXPECT_EQ((*c)[2], 1);
    EXPECT_FALSE(solve_span(code.generators, code.logical_x).has_value());
}
