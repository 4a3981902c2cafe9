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

#ifndef QCOMP_QCORE_HPP
#define QCOMP_QCORE_HPP

#include <string>
#include <utility>
#include <vector>

#include "qcomp/common.hpp"

namespace qcomp {

class RegisterLayout {
   public:
    RegisterLayout() = default;
    explicit RegisterLayout(std::vector<std::pair<std::string, int>> regs);

    const std::vector<std::pair<std::string, int>> &registers() const { return regs_; }
    int64_t total_dim() const;
    int index(const std::string &name) const;
    int dim(const std::string &name) const;
    bool operator==(const RegisterLayout &o) const { return regs_ == o.regs_; }

   private:
    std::vector<std::pair<std::string, int>> regs_;
};

struct DensityState {
    RegisterLayout layout;
    Mat rho;

    static DensityState from_matrix(RegisterLayout layout, Mat rho);
    static DensityState pure(RegisterLayout layout, const Vec &psi);
    void validate(double tol = kValidateTol) const;
};

/// Measurement with one PSD operator per outcome. Outcome index a carries the
/// k-bit label whose first character is the most significant bit of a.
struct Measurement {
    std::vector<std::string> labels;
    std::vector<Mat> ops;
    bool projective = false;

    static Measurement from_ops(std::vector<Mat> ops, bool projective);
    static Measurement from_reflection(const Mat &r);
    static Measurement computational(int dim);
    int dim() const { return ops.empty() ? 0 : static_cast<int>(ops[0].rows()); }
    int outcomes() const { return static_cast<int>(ops.size()); }
    void validate(double tol = kValidateTol) const;
};

struct Reflection {
    Mat r;
    bool traceless = false;

    static Reflection make(Mat r, double tol = kValidateTol);
    void validate(double tol = kValidateTol) const;
};

/// Lifts op acting on the listed registers (in the listed order) to the full
/// layout, padding with identity elsewhere.
Mat embed_operator(const Mat &op, const RegisterLayout &layout, const std::vector<std::string> &regs);

double trace_distance(const Mat &a, const Mat &b);
double trace_distance(const DensityState &a, const DensityState &b);
/// tr(rho op).
cd expect(const Mat &rho, const Mat &op);

/// [sum_a ||M0^a - M1^a||_rho^2]^{1/2}, with ||A||_rho^2 = tr(A rho A*).
/// POVM outcomes use the sqrt(M^a) representatives. If regs is nonempty the
/// operators act on those registers of rho.
double dis_rho(const Measurement &m0, const Measurement &m1, const DensityState &rho,
               const std::vector<std::string> &regs = {});
/// Reflection form [1 - Re tr_rho(R0 R1)]^{1/2}.
double dis_rho_reflections(const Mat &r0, const Mat &r1, const Mat &rho);

/// sum_a tr_rho(M^a (x) N^a) for measurements on disjoint registers.
double con_rho(const Measurement &m, const std::vector<std::string> &regs_m, const Measurement &n,
               const std::vector<std::string> &regs_n, const DensityState &rho);
/// Reflection form (1 + tr_rho(R (x) S))/2.
double con_rho_reflections(const Mat &r, const std::vector<std::string> &regs_r, const Mat &s,
                           const std::vector<std::string> &regs_s, const DensityState &rho);

/// 1 - Re tr_rho R for a contraction R.
double stabilization_defect(const Mat &r, const Mat &rho);

std::vector<Reflection> derived_reflections(const Measurement &m);
/// Joint projective measurement of commuting reflections, outcome bits in order.
Measurement measurement_from_reflections(const std::vector<Mat> &refl);

struct NaimarkDilation {
    Mat isometry;             // (dim * K) x dim, system then ancilla
    Measurement projective;  // I (x) |a><a|
};
NaimarkDilation naimark_dilate(const Measurement &povm);

struct JordanBlocks {
    Mat v;                       // unitary, rows ordered qubit (x) block index
    std::vector<double> theta;   // block angles in [0, pi], ascending
    int blocks() const { return static_cast<int>(theta.size()); }
    /// V* (sum_l [[cos,sin],[sin,-cos]] (x) |l><l|) V.
    Mat reconstruct_r0() const;
    /// V* (X (x) I) V.
    Mat x_check() const;
    /// V* (Z (x) I) V.
    Mat z_check() const;
};
/// Jordan decomposition of traceless reflections with r1 = V*(Z (x) I)V.
JordanBlocks jordan_extract(const Mat &r0, const Mat &r1);

struct JordanReport {
    double dis = 0;    // dis_rho(r0, V*(X (x) I)V)
    double eps = 0;    // 1 + Re tr_rho(r0 r1 r0 r1)
    double bound = 0;  // sqrt(eps/2)
};
JordanReport jordan_report(const JordanBlocks &jb, const Mat &r0, const Mat &r1, const Mat &rho);

/// (r + xt r xt + zt r zt + xt zt r zt xt)/4.
Mat depolarize_twirl(const Mat &xt, const Mat &zt, const Mat &r);
/// W = (I (x) V*) SWAP_{X,B} (|Phi>_{XY} (x) V) for V: R -> B (x) R' with B a
/// qubit. Output space ordered X (x) Y (x) R; result is (4d) x d.
Mat lemma_w_isometry(const Mat &v);
/// V* (sigma (x) I) V for a unitary V: R -> qubit (x) R'.
Mat pauli_check(const Mat &v, char letter);
/// Anticommutator defect ||xt zt + zt xt||.
double anticommutation_defect(const Mat &xt, const Mat &zt);

/// Pi rho Pi / tr(Pi rho).
Mat post_selected(const Mat &rho, const Mat &pi);
Mat pure_density(const Vec &psi);

}  // namespace qcomp

#endif
