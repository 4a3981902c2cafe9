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

#include "qcomp/qcore.hpp"

#include "gtest/gtest.h"
#include "lemma_suites.hpp"
#include "qcomp/pauli.hpp"

using namespace qcomp;

namespace {

Mat P(const char *s) { return PauliOp::parse(s).to_matrix(); }

Vec ket(std::initializer_list<cd> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (cd x : xs) v(i++) = x;
    return v / v.norm();
}

Vec epr() { return ket({1, 0, 0, 1}); }

RegisterLayout ab() { return RegisterLayout({{"A", 2}, {"B", 2}}); }

}  // namespace

TEST(qcore, layout_guards) {
    EXPECT_THROW(RegisterLayout({{"A", 2}, {"A", 2}}), InputError);
    EXPECT_THROW(RegisterLayout({{"A", 1}}), InputError);
    EXPECT_THROW(RegisterLayout({{"A", 1 << 10}, {"B", 1 << 10}}), ResourceError);
    EXPECT_EQ(ab().total_dim(), 4);
}

TEST(qcore, trace_distance_examples) {
    Mat z0 = pure_density(ket({1, 0}));
    Mat z1 = pure_density(ket({0, 1}));
    Mat plus = pure_density(ket({1, 1}));
    EXPECT_NEAR(trace_distance(z0, z0), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance(z0, z1), 1.0, 1e-12);
    EXPECT_NEAR(trace_distance(z0, plus), 1.0 / std::sqrt(2.0), 1e-12);
    RegisterLayout a({{"A", 2}});
    RegisterLayout b({{"B", 2}});
    EXPECT_THROW(trace_distance(DensityState::pure(a, ket({1, 0})), DensityState::pure(b, ket({1, 0}))), InputError);
}

TEST(qcore, density_validation) {
    RegisterLayout a({{"A", 2}});
    Mat bad = Mat::Identity(2, 2);
    EXPECT_THROW(DensityState::from_matrix(a, bad), InputError);
    Mat neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityState::from_matrix(a, neg), InputError);
}

TEST(qcore, dis_rho_examples) {
    RegisterLayout a({{"A", 2}});
    auto mixed = DensityState::from_matrix(a, Mat::Identity(2, 2) / 2.0);
    auto mx = Measurement::from_reflection(P("X"));
    auto mz = Measurement::from_reflection(P("Z"));
    EXPECT_NEAR(dis_rho(mx, mx, mixed), 0.0, 1e-15);
    EXPECT_NEAR(dis_rho_reflections(P("X"), P("Z"), mixed.rho), 1.0, 1e-12);
    // Projector form sum_a ||M0^a - M1^a||^2 = (1/2)||R0 - R1||^2_rho.
    EXPECT_NEAR(dis_rho(mx, mz, mixed), 1.0, 1e-12);
}

TEST(qcore, dis_rho_bounds_post_measurement_distance) {
    Rng rng(21);
    for (int t = 0; t < 100; ++t) {
        int d = 4;
        Mat rho = random_density(d, rng);
        auto make = [&]() {
            Mat u = haar_unitary(d, rng);
            std::vector<Mat> ops(2, Mat::Zero(d, d));
            for (int i = 0; i < d; ++i) ops[rng.below(2)] += u.col(i) * u.col(i).adjoint();
            Measurement m;
            m.ops = ops;
            m.labels = {"0", "1"};
            m.projective = true;
            return m;
        };
        Measurement m0 = make();
        Measurement m1 = make();
        Mat post0 = Mat::Zero(2 * d, 2 * d);
        Mat post1 = Mat::Zero(2 * d, 2 * d);
        for (int a = 0; a < 2; ++a) {
            Mat e = Mat::Zero(2, 2);
            e(a, a) = 1;
            post0 += kron(m0.ops[a] * rho * m0.ops[a], e);
            post1 += kron(m1.ops[a] * rho * m1.ops[a], e);
        }
        auto rs = DensityState::from_matrix(RegisterLayout({{"R", d}}), rho);
        EXPECT_LE(trace_distance(post0, post1), dis_rho(m0, m1, rs) + 1e-12);
    }
}

TEST(qcore, dis_rho_triangle_and_cauchy_schwarz) {
    Rng rng(22);
    for (int t = 0; t < 100; ++t) {
        int d = 4;
        Mat rho = random_density(d, rng);
        auto rs = DensityState::from_matrix(RegisterLayout({{"R", d}}), rho);
        Mat r0 = random_reflection(d, rng);
        Mat r1 = random_reflection(d, rng);
        Mat r2 = random_reflection(d, rng);
        auto m0 = Measurement::from_reflection(r0);
        auto m1 = Measurement::from_reflection(r1);
        auto m2 = Measurement::from_reflection(r2);
        EXPECT_LE(dis_rho(m0, m2, rs), dis_rho(m0, m1, rs) + dis_rho(m1, m2, rs) + 1e-12);
        Mat a = random_matrix(d, rng);
        Mat b = random_matrix(d, rng);
        double lhs = std::abs((rho * a.adjoint() * b).trace());
        double na = std::sqrt((a * rho * a.adjoint()).trace().real());
        double nb = std::sqrt((b * rho * b.adjoint()).trace().real());
        EXPECT_LE(lhs, na * nb + 1e-12);
    }
}

TEST(qcore, con_rho_examples) {
    auto s = DensityState::pure(ab(), epr());
    EXPECT_NEAR(con_rho_reflections(P("X"), {"A"}, P("X"), {"B"}, s), 1.0, 1e-12);
    EXPECT_NEAR(con_rho_reflections(P("X"), {"A"}, P("Z"), {"B"}, s), 0.5, 1e-12);
    auto mx = Measurement::from_reflection(P("X"));
    auto mz = Measurement::from_reflection(P("Z"));
    EXPECT_NEAR(con_rho(mx, {"A"}, mz, {"B"}, s), 0.5, 1e-12);
    EXPECT_THROW(con_rho(mx, {"A"}, mz, {"A"}, s), InputError);

    Rng rng(23);
    Mat ra = random_density(2, rng);
    Mat rb = random_density(2, rng);
    auto prod = DensityState::from_matrix(ab(), kron(ra, rb));
    Mat r = random_reflection(2, rng);
    auto m = Measurement::from_reflection(r);
    double expect_v = 0;
    for (int a = 0; a < 2; ++a) expect_v += (ra * m.ops[a]).trace().real() * (rb * mz.ops[a]).trace().real();
    EXPECT_NEAR(con_rho(m, {"A"}, mz, {"B"}, prod), expect_v, 1e-12);
}

TEST(qcore, stabilization_defect_examples) {
    Mat z0 = pure_density(ket({1, 0}));
    Mat z1 = pure_density(ket({0, 1}));
    EXPECT_NEAR(stabilization_defect(Mat::Identity(2, 2), z0), 0.0, 1e-15);
    EXPECT_NEAR(stabilization_defect(P("Z"), z0), 0.0, 1e-15);
    EXPECT_NEAR(stabilization_defect(P("Z"), z1), 2.0, 1e-15);
    EXPECT_THROW(stabilization_defect(2.0 * P("Z"), z0), InputError);
}

TEST(qcore, derived_reflections_examples) {
    auto comp = Measurement::computational(2);
    auto r = derived_reflections(comp);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_LT((r[0].r - P("Z")).norm(), 1e-12);

    // Bell measurement with outcome bits (XX, ZZ).
    std::vector<Vec> bell = {ket({1, 0, 0, 1}), ket({0, 1, 1, 0}), ket({1, 0, 0, -1}), ket({0, 1, -1, 0})};
    std::vector<Mat> ops;
    for (const auto &b : bell) ops.push_back(pure_density(b));
    auto m = Measurement::from_ops(ops, true);
    auto rr = derived_reflections(m);
    ASSERT_EQ(rr.size(), 2u);
    EXPECT_LT((rr[0].r - P("XX")).norm(), 1e-12);
    EXPECT_LT((rr[1].r - P("ZZ")).norm(), 1e-12);
    EXPECT_TRUE(rr[0].traceless);
    EXPECT_TRUE(rr[1].traceless);

    Measurement povm;
    povm.ops = {Mat::Identity(2, 2) / 2.0, Mat::Identity(2, 2) / 2.0};
    povm.labels = {"0", "1"};
    EXPECT_THROW(derived_reflections(povm), InputError);
}

TEST(qcore, naimark_trine) {
    std::vector<Mat> ops;
    for (int j = 0; j < 3; ++j) {
        double th = 2.0 * M_PI * j / 3.0;
        Vec v = ket({std::cos(th / 2), std::sin(th / 2)});
        ops.push_back((2.0 / 3.0) * pure_density(v));
    }
    auto povm = Measurement::from_ops(ops, false);
    auto dil = naimark_dilate(povm);
    EXPECT_LT((dil.isometry.adjoint() * dil.isometry - Mat::Identity(2, 2)).norm(), 1e-12);
    Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        Mat rho = random_density(2, rng);
        Mat big = dil.isometry * rho * dil.isometry.adjoint();
        for (int a = 0; a < 3; ++a) {
            EXPECT_NEAR((big * dil.projective.ops[a]).trace().real(), (rho * ops[a]).trace().real(), 1e-9);
            Mat back = dil.isometry.adjoint() * dil.projective.ops[a] * dil.isometry;
            EXPECT_LT((back - ops[a]).norm(), 1e-9);
        }
    }
}

TEST(qcore, naimark_random_rank_one) {
    Rng rng(25);
    for (int t = 0; t < 20; ++t) {
        int d = 2;
        int K = 4;
        std::vector<Vec> vs;
        Mat s = Mat::Zero(d, d);
        for (int a = 0; a < K; ++a) {
            vs.push_back(random_state(d, rng));
            s += pure_density(vs.back());
        }
        Mat is = psd_sqrt(s).inverse();
        std::vector<Mat> ops;
        for (auto &v : vs) ops.push_back(is * pure_density(v) * is);
        auto dil = naimark_dilate(Measurement::from_ops(ops, false));
        EXPECT_LT((dil.isometry.adjoint() * dil.isometry - Mat::Identity(d, d)).norm(), 1e-9);
    }
}

TEST(qcore, jordan_single_block) {
    auto jb = jordan_extract(P("X"), P("Z"));
    ASSERT_EQ(jb.blocks(), 1);
    EXPECT_NEAR(jb.theta[0], M_PI / 2, 1e-12);
    EXPECT_LT((jb.z_check() - P("Z")).norm(), 1e-12);
    Mat rho = Mat::Identity(2, 2) / 2.0;
    auto rep = jordan_report(jb, P("X"), P("Z"), rho);
    EXPECT_NEAR(rep.dis, 0.0, 1e-7);
    EXPECT_NEAR(rep.eps, 0.0, 1e-12);
}

TEST(qcore, jordan_recovers_angle) {
    for (double th : {0.3, 1.1, 2.0}) {
        Mat r0 = kron(std::cos(th) * P("Z") + std::sin(th) * P("X"), Mat::Identity(2, 2));
        Mat r1 = P("ZI");
        auto jb = jordan_extract(r0, r1);
        ASSERT_EQ(jb.blocks(), 2);
        EXPECT_NEAR(jb.theta[0], th, 1e-9);
        EXPECT_NEAR(jb.theta[1], th, 1e-9);
        EXPECT_LT((jb.reconstruct_r0() - r0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((jb.z_check() - r1).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(qcore, jordan_random_reconstruction_and_bound) {
    Rng rng(26);
    for (int t = 0; t < 50; ++t) {
        int d = 2 << rng.below(3);
        Mat r0 = random_reflection(d, rng);
        Mat r1 = random_reflection(d, rng);
        auto jb = jordan_extract(r0, r1);
        EXPECT_TRUE(is_unitary(jb.v, 1e-9));
        EXPECT_LT((jb.reconstruct_r0() - r0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((jb.z_check() - r1).cwiseAbs().maxCoeff(), 1e-9);
        Mat rho = random_density(d, rng);
        auto rep = jordan_report(jb, r0, r1, rho);
        EXPECT_LE(rep.dis, rep.bound + 1e-9);
        for (size_t l = 1; l < jb.theta.size(); ++l) EXPECT_LE(jb.theta[l - 1], jb.theta[l] + 1e-15);
    }
    // Degenerate commuting pair with zero angles.
    Mat r0 = P("ZZ");
    Mat r1 = P("ZI");
    auto jb = jordan_extract(r0, r1);
    EXPECT_LT((jb.reconstruct_r0() - r0).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_THROW(jordan_extract(P("II") * 1.0, P("ZI")), InputError);
    EXPECT_THROW(jordan_extract(Mat::Identity(3, 3), Mat::Identity(3, 3)), InputError);
}

TEST(qcore, twirl_examples) {
    EXPECT_LT(depolarize_twirl(P("X"), P("Z"), P("X")).norm(), 1e-12);
    EXPECT_LT((depolarize_twirl(P("X"), P("Z"), Mat::Identity(2, 2)) - Mat::Identity(2, 2)).norm(), 1e-12);
    EXPECT_LT(anticommutation_defect(P("X"), P("Z")), 1e-12);
}

TEST(qcore, lemma_w_maps_paulis_to_checks) {
    Rng rng(27);
    for (int t = 0; t < 20; ++t) {
        Mat v = haar_unitary(4, rng);
        Mat w = lemma_w_isometry(v);
        for (char c : {'X', 'Z'}) {
            Mat lifted = kron(kron(pauli_letter_matrix(c), Mat::Identity(2, 2)), Mat::Identity(4, 4));
            EXPECT_LT((w.adjoint() * lifted * w - pauli_check(v, c)).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(qcore, lemma_suites_small) {
    using namespace suites;
    for (auto r : {approx_stab(200, 1), approx_stab_2(200, 2), approx_stab_3(200, 3), gentle(200, 4), gapped(200, 5),
                   w_twirl(200, 6), derived_roundtrip(200, 7)}) {
        EXPECT_EQ(r.failures, 0) << r.name << " worst " << r.worst;
        EXPECT_GT(r.instances, 150) << r.name;
    }
}
