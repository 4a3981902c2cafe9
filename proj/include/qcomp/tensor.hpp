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

// Structured operators on block-tensor-product spaces. A state is a dense
// vector over the product of block dimensions (first block most significant);
// operators are tensor products of per-block sparse factors.

#ifndef QCOMP_TENSOR_HPP
#define QCOMP_TENSOR_HPP

#include <vector>

#include "qcomp/common.hpp"

namespace qcomp {

/// val * sum_{k < len} |row + k><col + k|.
struct Run {
    int row = 0;
    int col = 0;
    int len = 1;
    cd val = 1.0;
};

/// Operator on a single block, stored as a sum of diagonal runs.
class LocalOp {
   public:
    LocalOp() = default;
    static LocalOp identity(int dim);
    static LocalOp zero(int dim);
    static LocalOp from_dense(const Mat &m, double tol = 1e-14);
    static LocalOp projector(int dim, int index);

    int dim() const { return dim_; }
    bool is_identity() const { return identity_; }
    bool is_zero() const { return !identity_ && runs_.empty(); }
    const std::vector<Run> &runs() const { return runs_; }
    int64_t nnz() const;

    void add_run(int row, int col, int len, cd val);
    LocalOp scaled(cd s) const;
    LocalOp adjoint() const;
    LocalOp operator*(const LocalOp &o) const;
    Mat dense() const;

   private:
    int dim_ = 0;
    bool identity_ = false;
    std::vector<Run> runs_;
};

class BlockLayout {
   public:
    BlockLayout() = default;
    explicit BlockLayout(std::vector<int> dims);

    int blocks() const { return static_cast<int>(dims_.size()); }
    int dim(int b) const { return dims_[b]; }
    const std::vector<int> &dims() const { return dims_; }
    int64_t stride(int b) const { return strides_[b]; }
    int64_t total() const { return total_; }
    bool operator==(const BlockLayout &o) const { return dims_ == o.dims_; }

   private:
    std::vector<int> dims_;
    std::vector<int64_t> strides_;
    int64_t total_ = 1;
};

/// coeff * (ops[0] (x) ops[1] (x) ...), one factor per block.
struct ProductOp {
    cd coeff = 1.0;
    std::vector<LocalOp> ops;

    static ProductOp identity(const BlockLayout &layout);
    bool is_zero() const;
    ProductOp with(int block, const LocalOp &op) const;
};

cd expectation(const BlockLayout &layout, const ProductOp &op, const Vec &psi);
/// out += scale * op * in.
void apply_add(const BlockLayout &layout, const ProductOp &op, const Vec &in, Vec &out, cd scale = 1.0);
Vec apply(const BlockLayout &layout, const ProductOp &op, const Vec &in);
/// Applies a single-block operator given densely.
Vec apply_local(const BlockLayout &layout, int block, const Mat &m, const Vec &in);
/// Tr_{others}(|phi><psi|) on the given block.
Mat partial_trace_pair(const BlockLayout &layout, int block, const Vec &phi, const Vec &psi);
/// Reduced density matrix of one block.
Mat reduced_density(const BlockLayout &layout, int block, const Vec &psi);
/// Product state of per-block vectors.
Vec product_state(const std::vector<Vec> &parts);

/// Mixture sum_i w_i |psi_i><psi_i|.
struct Ensemble {
    std::vector<double> weights;
    std::vector<Vec> states;

    static Ensemble pure(Vec psi);
    /// Eigen-decomposition of a density matrix (components below tol dropped).
    static Ensemble from_density(const Mat &rho, double tol = 1e-14);
    int64_t dim() const { return states.empty() ? 0 : states[0].size(); }
    Mat density() const;
};

cd expectation(const BlockLayout &layout, const ProductOp &op, const Ensemble &rho);

}  // namespace qcomp

#endif
