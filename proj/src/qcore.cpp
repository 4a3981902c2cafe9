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

#include "qcomp/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qcomp {

RegisterLayout::RegisterLayout(std::vector<std::pair<std::string, int>> regs) : regs_(std::move(regs)) {
    std::set<std::string> seen;
    for (const auto &[name, d] : regs_) {
        if (!seen.insert(name).second) throw InputError("duplicate register name " + name);
        if (d < 2) throw InputError("register " + name + " has dimension < 2");
    }
    check_dense_dim(total_dim(), "RegisterLayout");
}

int64_t RegisterLayout::total_dim() const {
    int64_t d = 1;
    for (const auto &r : regs_) d *= r.second;
    return d;
}

int RegisterLayout::index(const std::string &name) const {
    for (size_t i = 0; i < regs_.size(); ++i) {
        if (regs_[i].first == name) return static_cast<int>(i);
    }
    throw InputError("unknown register " + name);
}

int RegisterLayout::dim(const std::string &name) const { return regs_[index(name)].second; }

DensityState DensityState::from_matrix(RegisterLayout layout, Mat rho) {
    DensityState s{std::move(layout), std::move(rho)};
    s.validate();
    return s;
}

DensityState DensityState::pure(RegisterLayout layout, const Vec &psi) {
    if (psi.size() != layout.total_dim()) throw InputError("state dimension does not match layout");
    return from_matrix(std::move(layout), pure_density(psi / psi.norm()));
}

void DensityState::validate(double tol) const {
    if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim()) {
        throw InputError("density matrix dimension does not match layout");
    }
    if (!is_hermitian(rho, tol)) throw InputError("density matrix is not Hermitian");
    if (std::abs(rho.trace() - cd(1.0)) > tol) throw InputError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw InputError("density matrix is not PSD");
}

namespace {

std::vector<std::string> bit_labels(int outcomes) {
    int k = ceil_log2(outcomes);
    std::vector<std::string> labels;
    for (int a = 0; a < outcomes; ++a) {
        std::string s;
        for (int i = k - 1; i >= 0; --i) s.push_back(((a >> i) & 1) ? '1' : '0');
        labels.push_back(s);
    }
    return labels;
}

}  // namespace

Measurement Measurement::from_ops(std::vector<Mat> ops, bool projective) {
    Measurement m;
    m.labels = bit_labels(static_cast<int>(ops.size()));
    m.ops = std::move(ops);
    m.projective = projective;
    m.validate();
    return m;
}

Measurement Measurement::from_reflection(const Mat &r) {
    Mat id = Mat::Identity(r.rows(), r.cols());
    return from_ops({(id + r) / 2.0, (id - r) / 2.0}, true);
}

Measurement Measurement::computational(int dim) {
    std::vector<Mat> ops;
    for (int a = 0; a < dim; ++a) {
        Mat p = Mat::Zero(dim, dim);
        p(a, a) = 1.0;
        ops.push_back(p);
    }
    return from_ops(std::move(ops), true);
}

void Measurement::validate(double tol) const {
    if (ops.empty()) throw InputError("measurement has no outcomes");
    if (labels.size() != ops.size()) throw InputError("measurement label count mismatch");
    int d = dim();
    Mat sum = Mat::Zero(d, d);
    for (const auto &m : ops) {
        if (m.rows() != d || m.cols() != d) throw InputError("measurement operator dimension mismatch");
        if (!is_hermitian(m, tol)) throw InputError("measurement operator not Hermitian");
        Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol) throw InputError("measurement operator not PSD");
        sum += m;
    }
    if ((sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > tol) {
        throw InputError("measurement operators do not sum to identity");
    }
    if (projective) {
        for (size_t a = 0; a < ops.size(); ++a) {
            if ((ops[a] * ops[a] - ops[a]).cwiseAbs().maxCoeff() > tol) {
                throw InputError("projective measurement operator not idempotent");
            }
        }
    }
}

Reflection Reflection::make(Mat r, double tol) {
    Reflection out;
    out.r = std::move(r);
    out.traceless = std::abs(out.r.trace()) <= 1e-9;
    out.validate(tol);
    return out;
}

void Reflection::validate(double tol) const {
    if (!is_hermitian(r, tol)) throw InputError("reflection not Hermitian");
    if ((r * r - Mat::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() > tol) {
        throw InputError("reflection does not square to identity");
    }
    if (traceless && std::abs(r.trace()) > 1e-9) throw InputError("reflection flagged traceless has nonzero trace");
}

Mat embed_operator(const Mat &op, const RegisterLayout &layout, const std::vector<std::string> &regs) {
    const auto &all = layout.registers();
    int nr = static_cast<int>(all.size());
    std::vector<int> which;
    int64_t dop = 1;
    for (const auto &name : regs) {
        int idx = layout.index(name);
        if (std::find(which.begin(), which.end(), idx) != which.end()) {
            throw InputError("register " + name + " listed twice");
        }
        which.push_back(idx);
        dop *= all[idx].second;
    }
    if (op.rows() != dop || op.cols() != dop) throw InputError("operator dimension does not match registers");
    int64_t total = layout.total_dim();
    std::vector<int64_t> stride(nr, 1);
    for (int i = nr - 2; i >= 0; --i) stride[i] = stride[i + 1] * all[i + 1].second;
    std::vector<int> rest;
    for (int i = 0; i < nr; ++i) {
        if (std::find(which.begin(), which.end(), i) == which.end()) rest.push_back(i);
    }
    // Offset in the full space of each op index and each rest index.
    std::vector<int64_t> op_off(dop, 0);
    for (int64_t a = 0; a < dop; ++a) {
        int64_t rem = a;
        int64_t off = 0;
        for (int j = static_cast<int>(which.size()) - 1; j >= 0; --j) {
            int d = all[which[j]].second;
            off += (rem % d) * stride[which[j]];
            rem /= d;
        }
        op_off[a] = off;
    }
    int64_t drest = total / dop;
    std::vector<int64_t> rest_off(drest, 0);
    for (int64_t a = 0; a < drest; ++a) {
        int64_t rem = a;
        int64_t off = 0;
        for (int j = static_cast<int>(rest.size()) - 1; j >= 0; --j) {
            int d = all[rest[j]].second;
            off += (rem % d) * stride[rest[j]];
            rem /= d;
        }
        rest_off[a] = off;
    }
    Mat out = Mat::Zero(total, total);
    for (int64_t r = 0; r < drest; ++r) {
        for (int64_t a = 0; a < dop; ++a) {
            for (int64_t b = 0; b < dop; ++b) {
                cd v = op(a, b);
                if (v != cd(0)) out(rest_off[r] + op_off[a], rest_off[r] + op_off[b]) = v;
            }
        }
    }
    return out;
}

double trace_distance(const Mat &a, const Mat &b) {
    Mat d = a - b;
    d = (d + d.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityState &a, const DensityState &b) {
    if (!(a.layout == b.layout)) throw InputError("trace_distance: layout mismatch");
    return trace_distance(a.rho, b.rho);
}

cd expect(const Mat &rho, const Mat &op) { return (rho * op).trace(); }

double dis_rho(const Measurement &m0, const Measurement &m1, const DensityState &rho,
               const std::vector<std::string> &regs) {
    if (m0.outcomes() != m1.outcomes()) throw InputError("dis_rho: outcome mismatch");
    double s = 0;
    for (int a = 0; a < m0.outcomes(); ++a) {
        Mat r0 = m0.projective ? m0.ops[a] : psd_sqrt(m0.ops[a]);
        Mat r1 = m1.projective ? m1.ops[a] : psd_sqrt(m1.ops[a]);
        Mat d = r0 - r1;
        if (!regs.empty()) d = embed_operator(d, rho.layout, regs);
        if (d.rows() != rho.rho.rows()) throw InputError("dis_rho: operator dimension mismatch");
        s += (d * rho.rho * d.adjoint()).trace().real();
    }
    return std::sqrt(std::max(0.0, s));
}

double dis_rho_reflections(const Mat &r0, const Mat &r1, const Mat &rho) {
    Mat diff = r0 - r1;
    return std::sqrt(std::max(0.0, 0.5 * (diff * rho * diff.adjoint()).trace().real()));
}

double con_rho(const Measurement &m, const std::vector<std::string> &regs_m, const Measurement &n,
               const std::vector<std::string> &regs_n, const DensityState &rho) {
    for (const auto &a : regs_m) {
        if (std::find(regs_n.begin(), regs_n.end(), a) != regs_n.end()) {
            throw InputError("con_rho: overlapping register " + a);
        }
    }
    if (m.outcomes() != n.outcomes()) throw InputError("con_rho: outcome mismatch");
    std::vector<std::string> both = regs_m;
    both.insert(both.end(), regs_n.begin(), regs_n.end());
    double s = 0;
    for (int a = 0; a < m.outcomes(); ++a) {
        Mat op = embed_operator(kron(m.ops[a], n.ops[a]), rho.layout, both);
        s += expect(rho.rho, op).real();
    }
    return s;
}

double con_rho_reflections(const Mat &r, const std::vector<std::string> &regs_r, const Mat &s,
                           const std::vector<std::string> &regs_s, const DensityState &rho) {
    for (const auto &a : regs_r) {
        if (std::find(regs_s.begin(), regs_s.end(), a) != regs_s.end()) {
            throw InputError("con_rho: overlapping register " + a);
        }
    }
    std::vector<std::string> both = regs_r;
    both.insert(both.end(), regs_s.begin(), regs_s.end());
    Mat op = embed_operator(kron(r, s), rho.layout, both);
    return 0.5 * (1.0 + expect(rho.rho, op).real());
}

double stabilization_defect(const Mat &r, const Mat &rho) {
    if (operator_norm(r) > 1.0 + 1e-9) throw InputError("stabilization_defect: operator is not a contraction");
    return 1.0 - expect(rho, r).real();
}

std::vector<Reflection> derived_reflections(const Measurement &m) {
    if (!m.projective) throw InputError("derived_reflections requires a projective measurement");
    int k = ceil_log2(m.outcomes());
    if ((1 << k) != m.outcomes()) throw InputError("derived_reflections requires 2^k outcomes");
    std::vector<Reflection> out;
    for (int i = 0; i < k; ++i) {
        Mat r = Mat::Zero(m.dim(), m.dim());
        for (int a = 0; a < m.outcomes(); ++a) {
            int bit = (a >> (k - 1 - i)) & 1;
            r += (bit ? -1.0 : 1.0) * m.ops[a];
        }
        out.push_back(Reflection::make(r, 1e-9));
    }
    return out;
}

Measurement measurement_from_reflections(const std::vector<Mat> &refl) {
    int k = static_cast<int>(refl.size());
    if (k == 0) throw InputError("no reflections");
    int d = static_cast<int>(refl[0].rows());
    std::vector<Mat> ops;
    for (int a = 0; a < (1 << k); ++a) {
        Mat p = Mat::Identity(d, d);
        for (int i = 0; i < k; ++i) {
            int bit = (a >> (k - 1 - i)) & 1;
            p = p * (Mat::Identity(d, d) + (bit ? -1.0 : 1.0) * refl[i]) * 0.5;
        }
        ops.push_back(p);
    }
    Measurement m;
    m.labels = bit_labels(1 << k);
    m.ops = std::move(ops);
    m.projective = true;
    m.validate(1e-9);
    return m;
}

NaimarkDilation naimark_dilate(const Measurement &povm) {
    povm.validate();
    int d = povm.dim();
    int K = povm.outcomes();
    Mat v = Mat::Zero(static_cast<Eigen::Index>(d) * K, d);
    for (int a = 0; a < K; ++a) {
        Mat s = psd_sqrt(povm.ops[a]);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) v(static_cast<Eigen::Index>(i) * K + a, j) = s(i, j);
        }
    }
    std::vector<Mat> proj;
    for (int a = 0; a < K; ++a) {
        Mat e = Mat::Zero(K, K);
        e(a, a) = 1.0;
        proj.push_back(kron(Mat::Identity(d, d), e));
    }
    NaimarkDilation out;
    out.isometry = v;
    out.projective.labels = povm.labels;
    out.projective.ops = std::move(proj);
    out.projective.projective = true;
    return out;
}

Mat JordanBlocks::reconstruct_r0() const {
    int m = blocks();
    Mat mid = Mat::Zero(2 * m, 2 * m);
    for (int l = 0; l < m; ++l) {
        double c = std::cos(theta[l]);
        double s = std::sin(theta[l]);
        mid(l, l) = c;
        mid(l, m + l) = s;
        mid(m + l, l) = s;
        mid(m + l, m + l) = -c;
    }
    return v.adjoint() * mid * v;
}

Mat JordanBlocks::x_check() const {
    int m = blocks();
    Mat x = kron(pauli_letter_matrix('X'), Mat::Identity(m, m));
    return v.adjoint() * x * v;
}

Mat JordanBlocks::z_check() const {
    int m = blocks();
    Mat z = Mat::Identity(2 * m, 2 * m);
    z.bottomRightCorner(m, m) *= -1.0;
    return v.adjoint() * z * v;
}

JordanBlocks jordan_extract(const Mat &r0, const Mat &r1) {
    int d = static_cast<int>(r0.rows());
    if (d % 2 != 0) throw InputError("jordan_extract: odd dimension");
    if (std::abs(r0.trace()) > 1e-8 || std::abs(r1.trace()) > 1e-8) {
        throw InputError("jordan_extract: reflections must be traceless");
    }
    if (r1.rows() != d) throw InputError("jordan_extract: dimension mismatch");
    int m = d / 2;
    Eigen::SelfAdjointEigenSolver<Mat> e1((r1 + r1.adjoint()) * 0.5);
    // Eigenvalues ascending: first m are -1, last m are +1.
    Mat plus = e1.eigenvectors().rightCols(m);
    Mat minus = e1.eigenvectors().leftCols(m);
    Mat a = plus.adjoint() * r0 * plus;
    a = (a + a.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> ea(a);
    std::vector<Vec> es;
    std::vector<double> cs;
    for (int l = 0; l < m; ++l) {
        es.push_back(plus * ea.eigenvectors().col(l));
        cs.push_back(std::clamp(ea.eigenvalues()(l), -1.0, 1.0));
    }
    Mat pminus = minus * minus.adjoint();
    std::vector<Vec> fs(m);
    std::vector<bool> has_f(m, false);
    std::vector<Vec> fixed;
    for (int l = 0; l < m; ++l) {
        Vec f = pminus * (r0 * es[l]);
        double s = f.norm();
        if (s > 1e-9) {
            // Gram-Schmidt against earlier partners for numerical safety.
            for (const auto &g : fixed) f -= g * g.dot(f);
            f /= f.norm();
            fs[l] = f;
            has_f[l] = true;
            fixed.push_back(f);
        }
    }
    // Leftover complement inside the -1 eigenspace of r1, split by r0 sign.
    Mat comp = pminus;
    for (const auto &f : fixed) comp -= f * f.adjoint();
    comp = (comp + comp.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> ec(comp);
    std::vector<Vec> left;
    for (int i = 0; i < d; ++i) {
        if (ec.eigenvalues()(i) > 0.5) left.push_back(ec.eigenvectors().col(i));
    }
    std::vector<Vec> left_plus;
    std::vector<Vec> left_minus;
    if (!left.empty()) {
        Mat lb(d, static_cast<Eigen::Index>(left.size()));
        for (size_t i = 0; i < left.size(); ++i) lb.col(static_cast<Eigen::Index>(i)) = left[i];
        Mat rr = lb.adjoint() * r0 * lb;
        rr = (rr + rr.adjoint()) * 0.5;
        Eigen::SelfAdjointEigenSolver<Mat> er(rr);
        for (Eigen::Index i = 0; i < rr.rows(); ++i) {
            Vec w = lb * er.eigenvectors().col(i);
            (er.eigenvalues()(i) > 0 ? left_plus : left_minus).push_back(w);
        }
    }
    size_t ip = 0;
    size_t im = 0;
    for (int l = 0; l < m; ++l) {
        if (has_f[l]) continue;
        // r0 e = e pairs with r0 f = -f (theta 0); r0 e = -e pairs with r0 f = f (theta pi).
        if (cs[l] > 0) {
            if (im >= left_minus.size()) throw InputError("jordan_extract: reflections must be traceless");
            fs[l] = left_minus[im++];
        } else {
            if (ip >= left_plus.size()) throw InputError("jordan_extract: reflections must be traceless");
            fs[l] = left_plus[ip++];
        }
        cs[l] = cs[l] > 0 ? 1.0 : -1.0;
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> th(m);
    for (int l = 0; l < m; ++l) th[l] = std::acos(cs[l]);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return th[x] < th[y]; });
    JordanBlocks out;
    out.v = Mat::Zero(d, d);
    for (int i = 0; i < m; ++i) {
        int l = order[i];
        out.v.row(i) = es[l].adjoint();
        out.v.row(m + i) = fs[l].adjoint();
        // Angle from the actual matrix elements keeps reconstruction exact.
        double c = (es[l].adjoint() * r0 * es[l])(0, 0).real();
        double s = (fs[l].adjoint() * r0 * es[l])(0, 0).real();
        out.theta.push_back(std::atan2(std::max(s, 0.0), c));
    }
    return out;
}

JordanReport jordan_report(const JordanBlocks &jb, const Mat &r0, const Mat &r1, const Mat &rho) {
    JordanReport rep;
    rep.dis = dis_rho_reflections(r0, jb.x_check(), rho);
    rep.eps = 1.0 + expect(rho, r0 * r1 * r0 * r1).real();
    rep.bound = std::sqrt(std::max(0.0, rep.eps / 2.0));
    return rep;
}

Mat depolarize_twirl(const Mat &xt, const Mat &zt, const Mat &r) {
    Mat xz = xt * zt;
    return (r + xt * r * xt + zt * r * zt + xz * r * xz.adjoint()) * 0.25;
}

Mat lemma_w_isometry(const Mat &v) {
    int d = static_cast<int>(v.cols());
    if (v.rows() != d || d % 2 != 0) throw InputError("lemma_w_isometry: V must be a unitary of even dimension");
    int m = d / 2;
    // Input |j>; V|j> = sum_{b,r} v(b*m+r, j) |b>|r>. EPR on X,Y then swap X with B:
    // sum_{x,b,r} v(b*m+r,j)/sqrt2 |b>_X |x>_Y |x>_B |r>, then V* on (B,R').
    Mat w = Mat::Zero(static_cast<Eigen::Index>(4) * d, d);
    Mat vstar = v.adjoint();
    const double inv = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j) {
        for (int b = 0; b < 2; ++b) {
            for (int x = 0; x < 2; ++x) {
                Vec br = Vec::Zero(d);
                for (int r = 0; r < m; ++r) br(x * m + r) = v(b * m + r, j) * inv;
                Vec out = vstar * br;
                int xy = b * 2 + x;
                w.block(static_cast<Eigen::Index>(xy) * d, j, d, 1) += out;
            }
        }
    }
    return w;
}

Mat pauli_check(const Mat &v, char letter) {
    int m = static_cast<int>(v.rows()) / 2;
    return v.adjoint() * kron(pauli_letter_matrix(letter), Mat::Identity(m, m)) * v;
}

double anticommutation_defect(const Mat &xt, const Mat &zt) { return (xt * zt + zt * xt).norm(); }

Mat post_selected(const Mat &rho, const Mat &pi) {
    Mat out = pi * rho * pi;
    double t = out.trace().real();
    if (t <= 0) throw InputError("post_selected: zero-probability projector");
    return out / t;
}

Mat pure_density(const Vec &psi) { return psi * psi.adjoint(); }

}  // namespace qcomp
