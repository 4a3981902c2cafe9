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

#include "qcomp/tensor.hpp"

#include <algorithm>

namespace qcomp {

LocalOp LocalOp::identity(int dim) {
    LocalOp op;
    op.dim_ = dim;
    op.identity_ = true;
    return op;
}

LocalOp LocalOp::zero(int dim) {
    LocalOp op;
    op.dim_ = dim;
    return op;
}

LocalOp LocalOp::from_dense(const Mat &m, double tol) {
    if (m.rows() != m.cols()) throw InputError("LocalOp::from_dense: matrix not square");
    LocalOp op;
    op.dim_ = static_cast<int>(m.rows());
    for (int r = 0; r < op.dim_; ++r) {
        for (int c = 0; c < op.dim_; ++c) {
            if (std::abs(m(r, c)) > tol) op.runs_.push_back({r, c, 1, m(r, c)});
        }
    }
    return op;
}

LocalOp LocalOp::projector(int dim, int index) {
    LocalOp op = zero(dim);
    op.add_run(index, index, 1, 1.0);
    return op;
}

int64_t LocalOp::nnz() const {
    if (identity_) return dim_;
    int64_t s = 0;
    for (const auto &r : runs_) s += r.len;
    return s;
}

void LocalOp::add_run(int row, int col, int len, cd val) {
    if (len <= 0 || val == cd(0)) return;
    if (row < 0 || col < 0 || row + len > dim_ || col + len > dim_) {
        throw InputError("LocalOp::add_run: run outside operator range");
    }
    if (identity_) {
        identity_ = false;
        runs_.push_back({0, 0, dim_, 1.0});
    }
    runs_.push_back({row, col, len, val});
}

LocalOp LocalOp::scaled(cd s) const {
    LocalOp out = *this;
    if (out.identity_) {
        out.identity_ = false;
        out.runs_ = {{0, 0, dim_, 1.0}};
    }
    if (s == cd(0)) {
        out.runs_.clear();
        return out;
    }
    for (auto &r : out.runs_) r.val *= s;
    return out;
}

LocalOp LocalOp::adjoint() const {
    if (identity_) return *this;
    LocalOp out = zero(dim_);
    for (const auto &r : runs_) out.runs_.push_back({r.col, r.row, r.len, std::conj(r.val)});
    return out;
}

LocalOp LocalOp::operator*(const LocalOp &o) const {
    if (dim_ != o.dim_) throw InputError("LocalOp product: dimension mismatch");
    if (identity_) return o;
    if (o.identity_) return *this;
    LocalOp out = zero(dim_);
    for (const auto &a : runs_) {
        for (const auto &b : o.runs_) {
            int lo = std::max(a.col, b.row);
            int hi = std::min(a.col + a.len, b.row + b.len);
            if (lo >= hi) continue;
            out.runs_.push_back({a.row + (lo - a.col), b.col + (lo - b.row), hi - lo, a.val * b.val});
        }
    }
    return out;
}

Mat LocalOp::dense() const {
    Mat m = Mat::Zero(dim_, dim_);
    if (identity_) return Mat::Identity(dim_, dim_);
    for (const auto &r : runs_) {
        for (int k = 0; k < r.len; ++k) m(r.row + k, r.col + k) += r.val;
    }
    return m;
}

BlockLayout::BlockLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    strides_.assign(dims_.size(), 1);
    total_ = 1;
    for (int b = static_cast<int>(dims_.size()) - 1; b >= 0; --b) {
        if (dims_[b] < 1) throw InputError("BlockLayout: block dimension must be positive");
        strides_[b] = total_;
        total_ *= dims_[b];
        if (total_ > (int64_t{1} << 34)) throw ResourceError("BlockLayout: total dimension too large");
    }
}

ProductOp ProductOp::identity(const BlockLayout &layout) {
    ProductOp p;
    for (int b = 0; b < layout.blocks(); ++b) p.ops.push_back(LocalOp::identity(layout.dim(b)));
    return p;
}

bool ProductOp::is_zero() const {
    if (coeff == cd(0)) return true;
    for (const auto &o : ops) {
        if (o.is_zero()) return true;
    }
    return false;
}

ProductOp ProductOp::with(int block, const LocalOp &op) const {
    ProductOp p = *this;
    p.ops.at(block) = op;
    return p;
}

namespace {

void check_shape(const BlockLayout &layout, const ProductOp &op, int64_t n) {
    if (static_cast<int>(op.ops.size()) != layout.blocks()) throw InputError("ProductOp: block count mismatch");
    for (int b = 0; b < layout.blocks(); ++b) {
        if (op.ops[b].dim() != layout.dim(b)) throw InputError("ProductOp: block dimension mismatch");
    }
    if (n != layout.total()) throw InputError("state dimension does not match layout");
}

int last_nontrivial(const ProductOp &op) {
    for (int b = static_cast<int>(op.ops.size()) - 1; b >= 0; --b) {
        if (!op.ops[b].is_identity()) return b;
    }
    return -1;
}

struct Walker {
    const BlockLayout &layout;
    const ProductOp &op;
    int last;

    template <class Leaf>
    void walk(int b, int64_t in_off, int64_t out_off, cd coef, Leaf &leaf) const {
        const LocalOp &f = op.ops[b];
        int64_t s = layout.stride(b);
        if (b == last) {
            for (const auto &r : f.runs()) {
                leaf(out_off + r.row * s, in_off + r.col * s, r.len * s, coef * r.val);
            }
            return;
        }
        if (f.is_identity()) {
            for (int k = 0; k < f.dim(); ++k) walk(b + 1, in_off + k * s, out_off + k * s, coef, leaf);
            return;
        }
        for (const auto &r : f.runs()) {
            for (int k = 0; k < r.len; ++k) {
                walk(b + 1, in_off + (r.col + k) * s, out_off + (r.row + k) * s, coef * r.val, leaf);
            }
        }
    }
};

/// True when applying the factors one block at a time is cheaper than the
/// run walk (dense factors on many blocks).
bool prefer_blockwise(const BlockLayout &layout, const ProductOp &op, int last) {
    double walk = static_cast<double>(layout.stride(last));
    double local = 0;
    for (int b = 0; b <= last; ++b) {
        const LocalOp &f = op.ops[b];
        walk *= f.is_identity() ? f.dim() : static_cast<double>(f.nnz());
        if (!f.is_identity()) local += static_cast<double>(layout.total()) * f.dim();
    }
    return local < 0.5 * walk;
}

Vec apply_blockwise(const BlockLayout &layout, const ProductOp &op, const Vec &in) {
    Vec v = in;
    for (int b = 0; b < layout.blocks(); ++b) {
        if (!op.ops[b].is_identity()) v = apply_local(layout, b, op.ops[b].dense(), v);
    }
    return v;
}

}  // namespace

cd expectation(const BlockLayout &layout, const ProductOp &op, const Vec &psi) {
    check_shape(layout, op, psi.size());
    if (op.is_zero()) return 0.0;
    int last = last_nontrivial(op);
    if (last < 0) return op.coeff * psi.squaredNorm();
    if (prefer_blockwise(layout, op, last)) return op.coeff * psi.dot(apply_blockwise(layout, op, psi));
    cd acc = 0;
    auto leaf = [&](int64_t out, int64_t in, int64_t len, cd c) {
        acc += c * psi.segment(out, len).dot(psi.segment(in, len));
    };
    Walker{layout, op, last}.walk(0, 0, 0, op.coeff, leaf);
    return acc;
}

void apply_add(const BlockLayout &layout, const ProductOp &op, const Vec &in, Vec &out, cd scale) {
    check_shape(layout, op, in.size());
    if (out.size() != in.size()) throw InputError("apply_add: output size mismatch");
    if (op.is_zero()) return;
    int last = last_nontrivial(op);
    if (last < 0) {
        out += (scale * op.coeff) * in;
        return;
    }
    if (prefer_blockwise(layout, op, last)) {
        out += (scale * op.coeff) * apply_blockwise(layout, op, in);
        return;
    }
    auto leaf = [&](int64_t o, int64_t i, int64_t len, cd c) { out.segment(o, len) += c * in.segment(i, len); };
    Walker{layout, op, last}.walk(0, 0, 0, scale * op.coeff, leaf);
}

Vec apply(const BlockLayout &layout, const ProductOp &op, const Vec &in) {
    Vec out = Vec::Zero(in.size());
    apply_add(layout, op, in, out);
    return out;
}

Vec apply_local(const BlockLayout &layout, int block, const Mat &m, const Vec &in) {
    if (in.size() != layout.total()) throw InputError("apply_local: state dimension mismatch");
    int d = layout.dim(block);
    if (m.rows() != d || m.cols() != d) throw InputError("apply_local: operator dimension mismatch");
    int64_t post = layout.stride(block);
    int64_t pre = layout.total() / (post * d);
    Vec out(in.size());
    using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (int64_t p = 0; p < pre; ++p) {
        Eigen::Map<const RowMat> src(in.data() + p * d * post, d, post);
        Eigen::Map<RowMat> dst(out.data() + p * d * post, d, post);
        dst.noalias() = m * src;
    }
    return out;
}

Mat partial_trace_pair(const BlockLayout &layout, int block, const Vec &phi, const Vec &psi) {
    if (phi.size() != layout.total() || psi.size() != layout.total()) {
        throw InputError("partial_trace_pair: state dimension mismatch");
    }
    int d = layout.dim(block);
    int64_t post = layout.stride(block);
    int64_t pre = layout.total() / (post * d);
    using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Mat e = Mat::Zero(d, d);
    for (int64_t p = 0; p < pre; ++p) {
        Eigen::Map<const RowMat> a(phi.data() + p * d * post, d, post);
        Eigen::Map<const RowMat> b(psi.data() + p * d * post, d, post);
        e.noalias() += a * b.adjoint();
    }
    return e;
}

Mat reduced_density(const BlockLayout &layout, int block, const Vec &psi) {
    return partial_trace_pair(layout, block, psi, psi);
}

Vec product_state(const std::vector<Vec> &parts) {
    Vec out = Vec::Ones(1);
    for (const auto &p : parts) {
        Vec next(out.size() * p.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * p.size(), p.size()) = out(i) * p;
        out = std::move(next);
    }
    return out;
}

Ensemble Ensemble::pure(Vec psi) {
    Ensemble e;
    e.weights = {1.0};
    e.states = {std::move(psi)};
    return e;
}

Ensemble Ensemble::from_density(const Mat &rho, double tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es((rho + rho.adjoint()) * 0.5);
    Ensemble e;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
        double w = es.eigenvalues()(i);
        if (w <= tol) continue;
        e.weights.push_back(w);
        e.states.push_back(es.eigenvectors().col(i));
    }
    return e;
}

Mat Ensemble::density() const {
    int64_t d = dim();
    Mat rho = Mat::Zero(d, d);
    for (size_t i = 0; i < states.size(); ++i) rho += weights[i] * states[i] * states[i].adjoint();
    return rho;
}

cd expectation(const BlockLayout &layout, const ProductOp &op, const Ensemble &rho) {
    cd acc = 0;
    for (size_t i = 0; i < rho.states.size(); ++i) acc += rho.weights[i] * expectation(layout, op, rho.states[i]);
    return acc;
}

}  // namespace qcomp
