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

#include <algorithm>
#include <functional>

namespace qcomp {

namespace {

int words_for(int n) { return (n + 63) / 64; }

const cd kIPow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};

int popcount_and(const std::vector<uint64_t> &a, const std::vector<uint64_t> &b) {
    int c = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        c += popcount64(a[i] & b[i]);
    }
    return c;
}

void check_same_n(const PauliOp &a, const PauliOp &b) {
    if (a.n() != b.n()) {
        throw InputError("Pauli qubit count mismatch: " + std::to_string(a.n()) + " vs " + std::to_string(b.n()));
    }
}

// Calls f(combo) for each size-k subset of [0, n) in lexicographic order.
void for_each_combination(int n, int k, const std::function<void(const std::vector<int> &)> &f) {
    if (k > n || k < 0) return;
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    while (true) {
        f(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
}

}  // namespace

PauliOp::PauliOp(int n) : n_(n), x_(words_for(n), 0), z_(words_for(n), 0) {
    if (n < 0) throw InputError("negative qubit count");
}

PauliOp PauliOp::parse(std::string_view text) {
    int phase = 0;
    size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        if (text[pos] == '-') phase = 2;
        ++pos;
    }
    if (pos < text.size() && text[pos] == 'i') {
        phase += 1;
        ++pos;
    }
    std::string_view body = text.substr(pos);
    PauliOp p(static_cast<int>(body.size()));
    for (size_t q = 0; q < body.size(); ++q) {
        p.set_letter(static_cast<int>(q), body[q]);
    }
    p.set_phase(phase);
    return p;
}

PauliOp PauliOp::single(int n, int qubit, char letter) {
    PauliOp p(n);
    p.set_letter(qubit, letter);
    return p;
}

bool PauliOp::xbit(int q) const { return (x_[q >> 6] >> (q & 63)) & 1ULL; }
bool PauliOp::zbit(int q) const { return (z_[q >> 6] >> (q & 63)) & 1ULL; }

char PauliOp::letter(int q) const {
    bool x = xbit(q);
    bool z = zbit(q);
    if (x && z) return 'Y';
    if (x) return 'X';
    if (z) return 'Z';
    return 'I';
}

void PauliOp::set_letter(int q, char c) {
    if (q < 0 || q >= n_) throw InputError("Pauli qubit index out of range");
    uint64_t bit = 1ULL << (q & 63);
    x_[q >> 6] &= ~bit;
    z_[q >> 6] &= ~bit;
    switch (c) {
        case 'I':
        case '_':
            break;
        case 'X':
            x_[q >> 6] |= bit;
            break;
        case 'Z':
            z_[q >> 6] |= bit;
            break;
        case 'Y':
            x_[q >> 6] |= bit;
            z_[q >> 6] |= bit;
            break;
        default:
            throw InputError(std::string("bad Pauli letter '") + c + "'");
    }
}

int PauliOp::weight() const {
    int w = 0;
    for (size_t i = 0; i < x_.size(); ++i) w += popcount64(x_[i] | z_[i]);
    return w;
}

std::vector<int> PauliOp::support() const {
    std::vector<int> s;
    for (size_t i = 0; i < x_.size(); ++i) {
        uint64_t m = x_[i] | z_[i];
        while (m != 0) {
            int b = __builtin_ctzll(m);
            s.push_back(static_cast<int>(i * 64 + b));
            m &= m - 1;
        }
    }
    return s;
}

bool PauliOp::is_xz_form() const { return popcount_and(x_, z_) == 0 && (phase_ % 2) == 0; }

int PauliOp::sign_bit() const {
    if (!is_xz_form()) throw InputError("sign bit requested for non-XZ-form Pauli " + str());
    return phase_ / 2;
}

bool PauliOp::is_hermitian() const { return phase_ % 2 == 0; }

PauliOp PauliOp::unsigned_copy() const {
    PauliOp p = *this;
    p.phase_ = 0;
    return p;
}

PauliOp PauliOp::operator*(const PauliOp &o) const {
    check_same_n(*this, o);
    PauliOp r(n_);
    int e = phase_ + popcount_and(x_, z_) + o.phase_ + popcount_and(o.x_, o.z_) + 2 * popcount_and(z_, o.x_);
    for (size_t i = 0; i < x_.size(); ++i) {
        r.x_[i] = x_[i] ^ o.x_[i];
        r.z_[i] = z_[i] ^ o.z_[i];
    }
    r.set_phase(e - popcount_and(r.x_, r.z_));
    return r;
}

bool PauliOp::commutes(const PauliOp &o) const {
    check_same_n(*this, o);
    return ((popcount_and(x_, o.z_) + popcount_and(z_, o.x_)) & 1) == 0;
}

bool PauliOp::operator<(const PauliOp &o) const {
    if (n_ != o.n_) return n_ < o.n_;
    if (x_ != o.x_) return x_ < o.x_;
    if (z_ != o.z_) return z_ < o.z_;
    return phase_ < o.phase_;
}

std::pair<cd, uint64_t> PauliOp::apply_basis(uint64_t b) const {
    uint64_t xm = 0;
    uint64_t zm = 0;
    for (int q = 0; q < n_; ++q) {
        uint64_t bit = 1ULL << (n_ - 1 - q);
        if (xbit(q)) xm |= bit;
        if (zbit(q)) zm |= bit;
    }
    int e = phase_ + popcount64(xm & zm) + 2 * popcount64(zm & b);
    return {kIPow[e & 3], b ^ xm};
}

Mat PauliOp::to_matrix() const {
    if (n_ > dense_qubit_limit() || n_ > 62) {
        throw ResourceError("to_matrix: " + std::to_string(n_) + " qubits exceeds dense limit");
    }
    int64_t dim = int64_t{1} << n_;
    uint64_t xm = 0;
    uint64_t zm = 0;
    for (int q = 0; q < n_; ++q) {
        uint64_t bit = 1ULL << (n_ - 1 - q);
        if (xbit(q)) xm |= bit;
        if (zbit(q)) zm |= bit;
    }
    int base = phase_ + popcount64(xm & zm);
    Mat m = Mat::Zero(dim, dim);
    for (int64_t b = 0; b < dim; ++b) {
        int e = base + 2 * popcount64(zm & static_cast<uint64_t>(b));
        m(static_cast<Eigen::Index>(b ^ xm), static_cast<Eigen::Index>(b)) = kIPow[e & 3];
    }
    return m;
}

std::string PauliOp::str() const {
    static const char *prefix[4] = {"+", "+i", "-", "-i"};
    std::string s = prefix[phase_];
    for (int q = 0; q < n_; ++q) s.push_back(letter(q));
    return s;
}

std::string PauliOp::sparse_str() const {
    static const char *prefix[4] = {"", "i", "-", "-i"};
    std::string s = prefix[phase_];
    auto sup = support();
    if (sup.empty()) return s + "I";
    for (int q : sup) {
        s.push_back(letter(q));
        s += std::to_string(q + 1);
    }
    return s;
}

PauliOp PauliOp::restrict(const std::vector<int> &qubits) const {
    PauliOp p(static_cast<int>(qubits.size()));
    for (size_t i = 0; i < qubits.size(); ++i) {
        p.set_letter(static_cast<int>(i), letter(qubits[i]));
    }
    p.phase_ = phase_;
    return p;
}

PauliOp PauliOp::embed(const PauliOp &p, int n, const std::vector<int> &qubits) {
    if (static_cast<int>(qubits.size()) != p.n()) throw InputError("embed: qubit list size mismatch");
    PauliOp r(n);
    for (int i = 0; i < p.n(); ++i) {
        r.set_letter(qubits[i], p.letter(i));
    }
    r.phase_ = p.phase_;
    return r;
}

std::vector<uint64_t> PauliOp::symplectic() const {
    std::vector<uint64_t> v(words_for(2 * n_), 0);
    for (int q = 0; q < n_; ++q) {
        if (xbit(q)) v[q >> 6] |= 1ULL << (q & 63);
        if (zbit(q)) v[(q + n_) >> 6] |= 1ULL << ((q + n_) & 63);
    }
    return v;
}

PauliOp multiply(const PauliOp &a, const PauliOp &b) { return a * b; }
bool commutes(const PauliOp &a, const PauliOp &b) { return a.commutes(b); }
Mat to_matrix(const PauliOp &p) { return p.to_matrix(); }

Mat pauli_letter_matrix(char c) { return PauliOp::single(1, 0, c).to_matrix(); }

std::vector<PauliOp> enumerate_pauli_nk(int n, int k) {
    if (k < 1 || k > n) throw InputError("enumerate_pauli_nk requires 1 <= k <= n");
    std::vector<PauliOp> out;
    for (int w = 1; w <= k; ++w) {
        for_each_combination(n, w, [&](const std::vector<int> &c) {
            for (int pat = 0; pat < (1 << w); ++pat) {
                PauliOp p(n);
                for (int i = 0; i < w; ++i) {
                    bool z = (pat >> (w - 1 - i)) & 1;
                    p.set_letter(c[i], z ? 'Z' : 'X');
                }
                out.push_back(p);
            }
        });
    }
    return out;
}

namespace {

// Members of Pauli_{n,k} supported inside J, canonical order.
std::vector<PauliOp> members_on(int n, const std::vector<int> &J, bool strict) {
    int k = static_cast<int>(J.size());
    std::vector<PauliOp> out;
    for (int w = strict ? k : 1; w <= k; ++w) {
        for_each_combination(k, w, [&](const std::vector<int> &c) {
            for (int pat = 0; pat < (1 << w); ++pat) {
                PauliOp p(n);
                for (int i = 0; i < w; ++i) {
                    bool z = (pat >> (w - 1 - i)) & 1;
                    p.set_letter(J[c[i]], z ? 'Z' : 'X');
                }
                out.push_back(p);
            }
        });
    }
    return out;
}

void commuting_sets(const std::vector<PauliOp> &cand, int k, const std::vector<int> &J,
                    const std::function<void(const std::vector<int> &)> &f) {
    std::vector<int> chosen;
    int n = cand.empty() ? 0 : cand[0].n();
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(chosen.size()) == k) {
            PauliOp u(n);
            for (int idx : chosen) {
                for (int q : cand[idx].support()) u.set_letter(q, 'X');
            }
            if (u.support() == J) f(chosen);
            return;
        }
        for (int i = start; i < static_cast<int>(cand.size()); ++i) {
            bool ok = true;
            for (int c : chosen) {
                if (!cand[c].commutes(cand[i])) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            chosen.push_back(i);
            rec(i + 1);
            chosen.pop_back();
        }
    };
    rec(0);
}

}  // namespace

std::vector<PauliSet> enumerate_power_nk(int n, int k, bool strict) {
    if (k < 2 || k > n) throw InputError("enumerate_power_nk requires 2 <= k <= n");
    int64_t total = count_power_nk(n, k, strict);
    if (total > 4000000) throw ResourceError("Power_{n,k} too large to enumerate: " + std::to_string(total));
    std::vector<PauliSet> out;
    for_each_combination(n, k, [&](const std::vector<int> &J) {
        auto cand = members_on(n, J, strict);
        commuting_sets(cand, k, J, [&](const std::vector<int> &idx) {
            PauliSet s;
            s.support = J;
            for (int i : idx) s.members.push_back(cand[i]);
            out.push_back(std::move(s));
        });
    });
    return out;
}

int64_t count_power_nk(int n, int k, bool strict) {
    if (k < 2 || k > n) throw InputError("count_power_nk requires 2 <= k <= n");
    if (k > 4) throw ResourceError("count_power_nk: k > 4 is not enumerable at desk scale");
    std::vector<int> J(k);
    for (int i = 0; i < k; ++i) J[i] = i;
    auto cand = members_on(k, J, strict);
    int64_t per = 0;
    commuting_sets(cand, k, J, [&](const std::vector<int> &) { ++per; });
    int64_t combos = 1;
    for (int i = 0; i < k; ++i) combos = combos * (n - i) / (i + 1);
    return per * combos;
}

void StabilizerCode::validate() const {
    for (const auto &g : generators) {
        if (g.n() != n) throw InputError("generator qubit count mismatch");
    }
    for (size_t i = 0; i < generators.size(); ++i) {
        for (size_t j = i + 1; j < generators.size(); ++j) {
            if (!generators[i].commutes(generators[j])) {
                throw InputError("generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                 " anticommute");
            }
        }
    }
    for (const auto &e : group()) {
        if (e.is_identity_word() && e.phase() != 0) throw InputError("stabilizer group contains a nontrivial scalar");
    }
    for (const auto &g : generators) {
        if (!logical_x.commutes(g) || !logical_z.commutes(g)) {
            throw InputError("logical operator does not commute with generator " + g.str());
        }
    }
    if (logical_x.commutes(logical_z)) throw InputError("logical X and Z commute");
}

std::vector<PauliOp> StabilizerCode::group() const {
    int m = static_cast<int>(generators.size());
    std::vector<PauliOp> out;
    out.reserve(size_t{1} << m);
    for (int mask = 0; mask < (1 << m); ++mask) {
        PauliOp p(n);
        for (int i = 0; i < m; ++i) {
            if ((mask >> (m - 1 - i)) & 1) p = p * generators[i];
        }
        out.push_back(p);
    }
    return out;
}

Mat StabilizerCode::projector() const { return joint_projector(generators); }

StabilizerCode eight_qubit_code() {
    StabilizerCode c;
    c.n = 8;
    for (const char *g : {"XXXXXXXX", "XZXZXZXZ", "YYIIIIII", "IIYYIIII", "IIIIYYII", "IIIIIIYY"}) {
        c.generators.push_back(PauliOp::parse(g));
    }
    c.logical_x = PauliOp::parse("XXXXIIII");
    c.logical_z = PauliOp::parse("XZIIXZII");
    return c;
}

std::vector<PauliOp> xz_stabilizer_subset(const StabilizerCode &code) {
    std::vector<PauliOp> out;
    for (const auto &p : code.group()) {
        if (!p.is_identity_word() && p.is_xz_form()) out.push_back(p);
    }
    return out;
}

std::vector<PauliOp> ghz_stabilizer(int m) {
    if (m < 2) throw InputError("ghz_stabilizer requires m >= 2");
    std::vector<PauliOp> out;
    PauliOp x(m);
    for (int i = 0; i < m; ++i) x.set_letter(i, 'X');
    out.push_back(x);
    for (int i = 0; i + 1 < m; ++i) {
        PauliOp z(m);
        z.set_letter(i, 'Z');
        z.set_letter(i + 1, 'Z');
        out.push_back(z);
    }
    return out;
}

Mat joint_projector(const std::vector<PauliOp> &gens) {
    if (gens.empty()) throw InputError("joint_projector: no generators");
    int n = gens[0].n();
    int64_t dim = int64_t{1} << n;
    check_dense_dim(dim, "joint_projector");
    Mat p = Mat::Identity(dim, dim);
    for (const auto &g : gens) {
        p = p * (Mat::Identity(dim, dim) + g.to_matrix()) * 0.5;
    }
    return p;
}

std::optional<std::vector<int>> solve_span(const std::vector<PauliOp> &basis, const PauliOp &target) {
    int m = static_cast<int>(basis.size());
    if (m > 64) throw InputError("solve_span supports at most 64 basis words");
    struct Row {
        std::vector<uint64_t> v;
        uint64_t track;
    };
    std::vector<Row> rows;
    for (int i = 0; i < m; ++i) {
        check_same_n(basis[i], target);
        rows.push_back({basis[i].symplectic(), 1ULL << i});
    }
    Row t{target.symplectic(), 0};
    int bits = 2 * target.n();
    std::vector<Row> piv;
    std::vector<int> piv_col;
    auto get = [](const std::vector<uint64_t> &v, int b) { return (v[b >> 6] >> (b & 63)) & 1ULL; };
    auto xor_into = [](Row &a, const Row &b) {
        for (size_t i = 0; i < a.v.size(); ++i) a.v[i] ^= b.v[i];
        a.track ^= b.track;
    };
    for (auto r : rows) {
        for (size_t p = 0; p < piv.size(); ++p) {
            if (get(r.v, piv_col[p])) xor_into(r, piv[p]);
        }
        int col = -1;
        for (int b = 0; b < bits; ++b) {
            if (get(r.v, b)) {
                col = b;
                break;
            }
        }
        if (col < 0) continue;
        for (size_t p = 0; p < piv.size(); ++p) {
            if (get(piv[p].v, col)) xor_into(piv[p], r);
        }
        piv.push_back(r);
        piv_col.push_back(col);
    }
    for (size_t p = 0; p < piv.size(); ++p) {
        if (get(t.v, piv_col[p])) xor_into(t, piv[p]);
    }
    for (uint64_t w : t.v) {
        if (w != 0) return std::nullopt;
    }
    std::vector<int> coef(m, 0);
    for (int i = 0; i < m; ++i) coef[i] = (t.track >> i) & 1ULL;
    return coef;
}

}  // namespace qcomp
