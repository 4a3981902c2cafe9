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

#ifndef QCOMP_COMMON_HPP
#define QCOMP_COMMON_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcomp {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Raised for malformed or out-of-contract inputs.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a dense object would exceed the configured size guard.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kValidateTol = 1e-10;
inline constexpr double kIdentityTol = 1e-9;

/// Dense qubit limit. Default 14, overridable with QCOMP_DENSE_QUBITS.
int dense_qubit_limit();
/// Largest dense dimension allowed (2^dense_qubit_limit()).
int64_t dense_dim_limit();
void check_dense_dim(int64_t dim, const std::string &what);
/// Positive integer from environment variable `name`, or `def` if unset or invalid.
int64_t env_guard(const char *name, int64_t def);

/// Exact nonnegative rational used for game probabilities.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d);
    double value() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    Rational operator*(const Rational &o) const;
    Rational operator+(const Rational &o) const;
    bool operator==(const Rational &o) const {
        return num == o.num && den == o.den;
    }
    std::string str() const;
};

/// splitmix64 step.
uint64_t splitmix64(uint64_t &state);
/// Derives an independent stream seed from a master seed and a stream index.
uint64_t derive_seed(uint64_t master, uint64_t stream);

class Rng {
   public:
    explicit Rng(uint64_t seed) : eng_(seed) {}
    double uniform();
    double normal();
    int64_t below(int64_t n);
    cd complex_normal();
    std::mt19937_64 &engine() { return eng_; }

   private:
    std::mt19937_64 eng_;
};

/// Haar-random unitary via QR of a Ginibre matrix with phase fix.
Mat haar_unitary(int d, Rng &rng);
/// Uniformly random unit vector.
Vec random_state(int d, Rng &rng);
/// Random density matrix of given rank (Ginibre ensemble).
Mat random_density(int d, Rng &rng, int rank = -1);
/// Random reflection with a given number of -1 eigenvalues (default d/2).
Mat random_reflection(int d, Rng &rng, int minus = -1);
/// Matrix with iid complex Gaussian entries.
Mat random_matrix(int d, Rng &rng);
/// Random matrix with operator norm <= 1.
Mat random_contraction(int d, Rng &rng);

Mat kron(const Mat &a, const Mat &b);
Mat kron_all(const std::vector<Mat> &ms);
Mat identity(int d);
/// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
Mat psd_sqrt(const Mat &m);
double operator_norm(const Mat &m);
double trace_norm(const Mat &m);
bool is_unitary(const Mat &m, double tol = kValidateTol);
bool is_hermitian(const Mat &m, double tol = kValidateTol);
/// Polar unitary factor U of X = U|X| (maximizes Re tr(U* X)).
Mat polar_unitary(const Mat &x);
/// Partial trace keeping subsystem `keep` of a bipartition with dims (da, db).
Mat partial_trace_b(const Mat &rho, int da, int db);
Mat partial_trace_a(const Mat &rho, int da, int db);

int popcount64(uint64_t x);
int ceil_log2(int64_t x);

}  // namespace qcomp

#endif
