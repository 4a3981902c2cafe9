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

#include "qcomp/common.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace qcomp {

int dense_qubit_limit() {
    static const int limit = [] {
        const char *env = std::getenv("QCOMP_DENSE_QUBITS");
        if (env != nullptr) {
            int v = std::atoi(env);
            if (v > 0 && v < 31) {
                return v;
            }
        }
        return 14;
    }();
    return limit;
}

int64_t env_guard(const char *name, int64_t def) {
    const char *env = std::getenv(name);
    if (env == nullptr) return def;
    char *end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    return (end != env && *end == '\0' && v > 0) ? v : def;
}

int64_t dense_dim_limit() { return int64_t{1} << dense_qubit_limit(); }

void check_dense_dim(int64_t dim, const std::string &what) {
    if (dim > dense_dim_limit()) {
        throw ResourceError(what + ": dimension " + std::to_string(dim) + " exceeds dense limit " +
                            std::to_string(dense_dim_limit()));
    }
}

Rational::Rational(int64_t n, int64_t d) : num(n), den(d) {
    if (d <= 0 || n < 0) {
        throw InputError("Rational requires num >= 0 and den > 0");
    }
    int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Rational::operator*(const Rational &o) const {
    int64_t g1 = std::gcd(num, o.den);
    int64_t g2 = std::gcd(o.num, den);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return Rational((num / g1) * (o.num / g2), (den / g2) * (o.den / g1));
}

Rational Rational::operator+(const Rational &o) const {
    int64_t l = std::lcm(den, o.den);
    return Rational(num * (l / den) + o.num * (l / o.den), l);
}

std::string Rational::str() const { return std::to_string(num) + "/" + std::to_string(den); }

uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (stream * 0xd1b54a32d192ed03ULL);
    splitmix64(s);
    return splitmix64(s);
}

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }

int64_t Rng::below(int64_t n) { return std::uniform_int_distribution<int64_t>(0, n - 1)(eng_); }

cd Rng::complex_normal() {
    double a = normal();
    double b = normal();
    return {a / std::sqrt(2.0), b / std::sqrt(2.0)};
}

Mat haar_unitary(int d, Rng &rng) {
    Mat g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        cd diag = r(j, j);
        double a = std::abs(diag);
        if (a > 0) {
            q.col(j) *= diag / a;
        }
    }
    return q;
}

Vec random_state(int d, Rng &rng) {
    Vec v(d);
    for (int i = 0; i < d; ++i) {
        v(i) = rng.complex_normal();
    }
    return v / v.norm();
}

Mat random_density(int d, Rng &rng, int rank) {
    if (rank <= 0) rank = d;
    Mat g(d, rank);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < rank; ++j) {
            g(i, j) = rng.complex_normal();
        }
    }
    Mat rho = g * g.adjoint();
    return rho / rho.trace().real();
}

Mat random_reflection(int d, Rng &rng, int minus) {
    if (minus < 0) minus = d / 2;
    Mat u = haar_unitary(d, rng);
    Eigen::VectorXcd diag = Eigen::VectorXcd::Ones(d);
    for (int i = 0; i < minus; ++i) {
        diag(i) = -1.0;
    }
    return u * diag.asDiagonal() * u.adjoint();
}

Mat random_matrix(int d, Rng &rng) {
    Mat g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = rng.complex_normal();
        }
    }
    return g;
}

Mat random_contraction(int d, Rng &rng) {
    Mat g = random_matrix(d, rng);
    double n = operator_norm(g);
    return g / (n * (1.0 + rng.uniform()));
}

Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Mat kron_all(const std::vector<Mat> &ms) {
    Mat out = Mat::Identity(1, 1);
    for (const auto &m : ms) {
        out = kron(out, m);
    }
    return out;
}

Mat identity(int d) { return Mat::Identity(d, d); }

Mat psd_sqrt(const Mat &m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

double operator_norm(const Mat &m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double trace_norm(const Mat &m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().sum();
}

bool is_unitary(const Mat &m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m.adjoint() * m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Mat &m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Mat polar_unitary(const Mat &x) {
    Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

Mat partial_trace_b(const Mat &rho, int da, int db) {
    Mat out = Mat::Zero(da, da);
    for (int i = 0; i < da; ++i) {
        for (int j = 0; j < da; ++j) {
            cd s = 0;
            for (int k = 0; k < db; ++k) {
                s += rho(i * db + k, j * db + k);
            }
            out(i, j) = s;
        }
    }
    return out;
}

Mat partial_trace_a(const Mat &rho, int da, int db) {
    Mat out = Mat::Zero(db, db);
    for (int k = 0; k < da; ++k) {
        out += rho.block(k * db, k * db, db, db);
    }
    return out;
}

int popcount64(uint64_t x) { return std::popcount(x); }

int ceil_log2(int64_t x) {
    int b = 0;
    while ((int64_t{1} << b) < x) {
        ++b;
    }
    return b;
}

}  // namespace qcomp
