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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qcomp/tensor.hpp"

namespace qcomp {

namespace {

Mat controlled_matrix(const Mat &u) {
    int d = static_cast<int>(u.rows());
    Mat m = Mat::Identity(2 * d, 2 * d);
    m.block(d, d, d, d) = u;
    return m;
}

std::string trim(const std::string &s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string &tok, int line) {
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception &) {
        throw InputError("verifier line " + std::to_string(line) + ": expected integer, got '" + tok + "'");
    }
}

/// Merged layout V | (M_0 P_0) | (M_1 P_1) | ...
BlockLayout merged_layout(const VerifierSpec &v, const std::vector<int> &priv_dims) {
    std::vector<int> dims{1 << v.qv};
    for (int i = 0; i < v.r; ++i) dims.push_back((1 << v.qm) * priv_dims[i]);
    return BlockLayout(dims);
}

void apply_gates(const VerifierSpec &v, const std::vector<int> &priv_dims, const std::vector<Gate> &gates, Vec &psi,
                 bool inverse = false) {
    if (!inverse) {
        for (const auto &g : gates) apply_gate(v, priv_dims, g, psi);
        return;
    }
    std::vector<int> dims = protocol_dims(v, priv_dims);
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        std::vector<int> blocks;
        for (int q : it->qubits()) blocks.push_back(protocol_block(v, q));
        apply_on_blocks(psi, dims, blocks, it->matrix().adjoint());
    }
}

void top_eigvec(const Mat &a, double &lam, Vec &vec) {
    Eigen::SelfAdjointEigenSolver<Mat> es((a + a.adjoint()) * 0.5);
    lam = es.eigenvalues()(es.eigenvalues().size() - 1);
    vec = es.eigenvectors().col(es.eigenvalues().size() - 1);
}

}  // namespace

Gate Gate::hadamard(std::vector<int> qubits) {
    Gate g;
    g.kind = GateKind::Hadamard;
    g.targets = std::move(qubits);
    return g;
}

Gate Gate::toffoli(int c1, int c2, int target) {
    Gate g;
    g.kind = GateKind::Toffoli;
    g.targets = {c1, c2, target};
    return g;
}

Gate Gate::cnot(int c, int target) {
    Gate g;
    g.kind = GateKind::CNOT;
    g.targets = {c, target};
    return g;
}

Gate Gate::swap(int a, int b) {
    Gate g;
    g.kind = GateKind::Swap;
    g.targets = {a, b};
    return g;
}

Gate Gate::pauli(char letter, int q) {
    Gate g;
    switch (letter) {
        case 'X': g.kind = GateKind::PauliX; break;
        case 'Y': g.kind = GateKind::PauliY; break;
        case 'Z': g.kind = GateKind::PauliZ; break;
        default: throw InputError(std::string("unknown Pauli gate ") + letter);
    }
    g.targets = {q};
    return g;
}

Gate Gate::controlled(const std::string &inner, int c, int target) {
    Gate g;
    g.kind = GateKind::ControlledU;
    g.control = c;
    g.inner = inner;
    g.targets = {target};
    named_unitary(inner);
    return g;
}

std::vector<int> Gate::qubits() const {
    std::vector<int> out;
    if (kind == GateKind::ControlledU) out.push_back(control);
    out.insert(out.end(), targets.begin(), targets.end());
    return out;
}

Mat Gate::matrix() const {
    switch (kind) {
        case GateKind::Hadamard: {
            std::vector<Mat> hs(targets.size(), named_unitary("H"));
            return kron_all(hs);
        }
        case GateKind::Toffoli: {
            Mat m = Mat::Identity(8, 8);
            m(6, 6) = m(7, 7) = 0.0;
            m(6, 7) = m(7, 6) = 1.0;
            return m;
        }
        case GateKind::CNOT: return controlled_matrix(named_unitary("X"));
        case GateKind::Swap: {
            Mat m = Mat::Zero(4, 4);
            m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1.0;
            return m;
        }
        case GateKind::PauliX: return named_unitary("X");
        case GateKind::PauliY: return named_unitary("Y");
        case GateKind::PauliZ: return named_unitary("Z");
        case GateKind::ControlledU: return controlled_matrix(named_unitary(inner));
    }
    return Mat();
}

std::string Gate::str() const {
    std::ostringstream os;
    switch (kind) {
        case GateKind::Hadamard: os << "H"; break;
        case GateKind::Toffoli: os << "TOF"; break;
        case GateKind::CNOT: os << "CNOT"; break;
        case GateKind::Swap: os << "SWAP"; break;
        case GateKind::PauliX: os << "X"; break;
        case GateKind::PauliY: os << "Y"; break;
        case GateKind::PauliZ: os << "Z"; break;
        case GateKind::ControlledU: os << "CU " << inner; break;
    }
    for (int q : qubits()) os << ' ' << q;
    return os.str();
}

Mat named_unitary(const std::string &name) {
    Mat m = Mat::Zero(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    if (name == "H") {
        m << s, s, s, -s;
    } else if (name == "X") {
        m << 0, 1, 1, 0;
    } else if (name == "Y") {
        m << 0, cd(0, -1), cd(0, 1), 0;
    } else if (name == "Z") {
        m << 1, 0, 0, -1;
    } else if (name == "S") {
        m << 1, 0, 0, cd(0, 1);
    } else if (name == "T") {
        m << 1, 0, 0, std::polar(1.0, M_PI / 4);
    } else {
        throw InputError("unknown unitary '" + name + "'");
    }
    return m;
}

int VerifierSpec::owner(int qubit) const {
    if (qubit < 0 || qubit >= qubits()) throw InputError("qubit " + std::to_string(qubit) + " out of range");
    if (qubit < qv) return -1;
    return (qubit - qv) / qm;
}

const Gate &VerifierSpec::step(int t) const {
    if (t >= 1 && t <= L()) return v1[t - 1];
    if (t >= L() + 2 && t <= T()) return v2[t - L() - 2];
    throw InputError("no verifier gate at step " + std::to_string(t));
}

VerifierSpec parse_verifier(const std::string &text) {
    VerifierSpec v;
    int L = -1;
    std::map<int, Gate> steps;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        const std::string where = "verifier line " + std::to_string(lineno);
        if (tok[0] == "name") {
            if (tok.size() != 2) throw InputError(where + ": name takes one word");
            v.name = tok[1];
            continue;
        }
        if (tok[0] == "qV" || tok[0] == "qM" || tok[0] == "r" || tok[0] == "L") {
            if (tok.size() != 2) throw InputError(where + ": " + tok[0] + " takes one integer");
            int val = parse_int(tok[1], lineno);
            if (val < 0) throw InputError(where + ": negative size");
            if (tok[0] == "qV") v.qv = val;
            if (tok[0] == "qM") v.qm = val;
            if (tok[0] == "r") v.r = val;
            if (tok[0] == "L") L = val;
            continue;
        }
        if (tok.size() < 2) throw InputError(where + ": malformed gate line");
        int t = parse_int(tok[0], lineno);
        const std::string &op = tok[1];
        std::vector<int> qs;
        size_t first = op == "CU" ? 3 : 2;
        if (op == "CU" && tok.size() < 3) throw InputError(where + ": CU needs a unitary name");
        for (size_t i = first; i < tok.size(); ++i) qs.push_back(parse_int(tok[i], lineno));
        auto need = [&](size_t n) {
            if (qs.size() != n) throw InputError(where + ": " + op + " takes " + std::to_string(n) + " qubits");
        };
        Gate g;
        if (op == "H") {
            if (qs.empty() || qs.size() > 2) throw InputError(where + ": H takes one or two qubits");
            g = Gate::hadamard(qs);
        } else if (op == "TOF") {
            need(3);
            g = Gate::toffoli(qs[0], qs[1], qs[2]);
        } else if (op == "CNOT") {
            need(2);
            g = Gate::cnot(qs[0], qs[1]);
        } else if (op == "SWAP") {
            need(2);
            g = Gate::swap(qs[0], qs[1]);
        } else if (op == "X" || op == "Y" || op == "Z") {
            need(1);
            g = Gate::pauli(op[0], qs[0]);
        } else if (op == "CU") {
            need(2);
            g = Gate::controlled(tok[2], qs[0], qs[1]);
        } else {
            throw InputError(where + ": unknown gate '" + op + "'");
        }
        if (steps.count(t)) throw InputError(where + ": step " + std::to_string(t) + " given twice");
        steps.emplace(t, g);
    }
    if (L < 0) throw InputError("verifier: missing L");
    if (v.r < 1) throw InputError("verifier: r must be positive");
    if (v.qv < 1) throw InputError("verifier: qV must be positive");
    for (const auto &[t, g] : steps) {
        if (t < 1 || t > 2 * L + 1 || t == L + 1) throw InputError("verifier: invalid step " + std::to_string(t));
        for (int q : g.qubits()) {
            if (q < 0 || q >= v.qv + v.r * v.qm)
                throw InputError("verifier: step " + std::to_string(t) + " qubit " + std::to_string(q) + " out of range");
        }
        std::vector<int> qs = g.qubits();
        std::set<int> uniq(qs.begin(), qs.end());
        if (uniq.size() != qs.size()) throw InputError("verifier: step " + std::to_string(t) + " repeats a qubit");
    }
    for (int t = 1; t <= 2 * L + 1; ++t) {
        if (t == L + 1) continue;
        auto it = steps.find(t);
        if (it == steps.end()) throw InputError("verifier: missing step " + std::to_string(t));
        (t <= L ? v.v1 : v.v2).push_back(it->second);
    }
    return v;
}

VerifierSpec load_verifier(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open verifier file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_verifier(ss.str());
}

std::string verifier_text(const VerifierSpec &v) {
    std::ostringstream os;
    if (!v.name.empty()) os << "name " << v.name << "\n";
    os << "qV " << v.qv << "\nqM " << v.qm << "\nr " << v.r << "\nL " << v.L() << "\n";
    for (int t = 1; t <= v.T(); ++t) {
        if (t == v.L() + 1) continue;
        os << t << ' ' << v.step(t).str() << "\n";
    }
    return os.str();
}

std::string fixture_path(const std::string &name) { return std::string(QCOMP_FIXTURE_DIR) + "/" + name + ".qv"; }

ValidationReport validate_verifier(const VerifierSpec &v) {
    ValidationReport rep;
    auto fail = [&](int t, const std::string &msg) {
        rep.ok = false;
        rep.issues.push_back({t, msg});
    };
    if (v.v1.size() != v.v2.size()) fail(0, "circuits have different lengths");
    if (v.v1.empty()) fail(0, "empty circuits");
    int L = static_cast<int>(v.v1.size());
    auto check = [&](int t, const Gate &g) {
        for (int q : g.qubits()) {
            if (q < 0 || q >= v.qubits()) {
                fail(t, "qubit " + std::to_string(q) + " out of range");
                return;
            }
        }
        if (g.kind == GateKind::Toffoli) return;
        if (g.kind != GateKind::Hadamard) {
            fail(t, "gate " + g.str() + " outside the Toffoli/Hadamard set");
            return;
        }
        if (g.targets.size() != 2) {
            fail(t, "lone Hadamard");
            return;
        }
        if (g.targets[0] == g.targets[1]) {
            fail(t, "paired Hadamard on a single qubit");
            return;
        }
        if (v.owner(g.targets[0]) != v.owner(g.targets[1])) fail(t, "paired Hadamards on different registers");
    };
    for (int i = 0; i < L; ++i) check(i + 1, v.v1[i]);
    for (size_t i = 0; i < v.v2.size(); ++i) check(L + 2 + static_cast<int>(i), v.v2[i]);
    return rep;
}

VerifierSpec pad_verifier(VerifierSpec v) {
    if (v.v1.size() == v.v2.size()) return v;
    int shift = 2;
    auto remap = [&](Gate &g) {
        for (int &q : g.targets) {
            if (q >= v.qv) q += shift;
        }
        if (g.control >= v.qv) g.control += shift;
    };
    for (auto &g : v.v1) remap(g);
    for (auto &g : v.v2) remap(g);
    int d0 = v.qv;
    int d1 = v.qv + 1;
    v.qv += shift;
    auto &shorter = v.v1.size() < v.v2.size() ? v.v1 : v.v2;
    size_t target = std::max(v.v1.size(), v.v2.size());
    while (shorter.size() < target) shorter.push_back(Gate::hadamard({d0, d1}));
    return v;
}

void apply_on_blocks(Vec &psi, const std::vector<int> &dims, const std::vector<int> &blocks, const Mat &u) {
    const int k = static_cast<int>(blocks.size());
    const int64_t m = int64_t{1} << k;
    if (u.rows() != m || u.cols() != m) throw InputError("apply_on_blocks: gate dimension mismatch");
    std::vector<int64_t> stride(dims.size(), 1);
    for (int b = static_cast<int>(dims.size()) - 2; b >= 0; --b) stride[b] = stride[b + 1] * dims[b + 1];
    int64_t total = dims.empty() ? 1 : stride[0] * dims[0];
    if (psi.size() != total) throw InputError("apply_on_blocks: state dimension mismatch");
    std::vector<int64_t> off(m, 0);
    for (int j = 0; j < k; ++j) {
        if (dims[blocks[j]] != 2) throw InputError("apply_on_blocks: target block is not a qubit");
    }
    for (int64_t a = 0; a < m; ++a) {
        for (int j = 0; j < k; ++j) {
            if ((a >> (k - 1 - j)) & 1) off[a] += stride[blocks[j]];
        }
    }
    Vec in(m);
    for (int64_t base = 0; base < total; ++base) {
        bool zero = true;
        for (int j = 0; j < k && zero; ++j) zero = ((base / stride[blocks[j]]) % 2) == 0;
        if (!zero) continue;
        for (int64_t a = 0; a < m; ++a) in(a) = psi(base + off[a]);
        Vec out = u * in;
        for (int64_t a = 0; a < m; ++a) psi(base + off[a]) = out(a);
    }
}

Mat compile_unitary(const std::vector<Gate> &gates, int qubits) {
    if (qubits < 0) throw InputError("compile_unitary: negative qubit count");
    int64_t dim = int64_t{1} << qubits;
    check_dense_dim(dim, "compile_unitary");
    std::vector<int> dims(qubits, 2);
    for (const auto &g : gates) {
        std::vector<int> qs = g.qubits();
        std::set<int> uniq(qs.begin(), qs.end());
        if (uniq.size() != qs.size()) throw InputError("compile_unitary: gate " + g.str() + " repeats a qubit");
        for (int q : qs) {
            if (q < 0 || q >= qubits) throw InputError("compile_unitary: qubit " + std::to_string(q) + " out of range");
        }
    }
    Mat u = Mat::Identity(dim, dim);
    for (int64_t c = 0; c < dim; ++c) {
        Vec col = u.col(c);
        for (const auto &g : gates) apply_on_blocks(col, dims, g.qubits(), g.matrix());
        u.col(c) = col;
    }
    return u;
}

Mat compile_unitary(const std::vector<Gate> &gates, const RegisterLayout &layout) {
    int64_t d = layout.total_dim();
    int q = 0;
    while ((int64_t{1} << q) < d) ++q;
    if ((int64_t{1} << q) != d) throw InputError("compile_unitary: layout dimension is not a power of two");
    return compile_unitary(gates, q);
}

void ProverSpec::validate(const VerifierSpec &v, double tol) const {
    if (static_cast<int>(priv_dims.size()) != v.r || static_cast<int>(w.size()) != v.r)
        throw InputError("prover: expected " + std::to_string(v.r) + " provers");
    int64_t d = 1;
    for (int i = 0; i < v.r; ++i) {
        if (priv_dims[i] < 1) throw InputError("prover: private dimension must be positive");
        int pd = prover_dim(i, v.qm);
        if (w[i].rows() != pd || w[i].cols() != pd) throw InputError("prover: W dimension mismatch");
        if (!is_unitary(w[i], tol)) throw InputError("prover: W is not unitary");
        d *= pd;
    }
    if (psi.size() != d) throw InputError("prover: state dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > tol) throw InputError("prover: state not normalized");
}

std::vector<int> protocol_dims(const VerifierSpec &v, const std::vector<int> &priv_dims) {
    std::vector<int> dims(v.qv, 2);
    for (int i = 0; i < v.r; ++i) {
        for (int j = 0; j < v.qm; ++j) dims.push_back(2);
        dims.push_back(priv_dims[i]);
    }
    return dims;
}

int protocol_block(const VerifierSpec &v, int qubit) {
    int o = v.owner(qubit);
    if (o < 0) return qubit;
    return v.qv + o * (v.qm + 1) + (qubit - v.qv - o * v.qm);
}

void apply_gate(const VerifierSpec &v, const std::vector<int> &priv_dims, const Gate &g, Vec &psi) {
    std::vector<int> blocks;
    for (int q : g.qubits()) blocks.push_back(protocol_block(v, q));
    apply_on_blocks(psi, protocol_dims(v, priv_dims), blocks, g.matrix());
}

void apply_provers(const VerifierSpec &v, const ProverSpec &p, Vec &psi) {
    BlockLayout layout = merged_layout(v, p.priv_dims);
    for (int i = 0; i < v.r; ++i) psi = apply_local(layout, 1 + i, p.w[i], psi);
}

Vec protocol_initial(const VerifierSpec &v, const ProverSpec &p) {
    Vec full = Vec::Zero((int64_t{1} << v.qv) * p.psi.size());
    full.head(p.psi.size()) = p.psi;
    return full;
}

double protocol_value(const VerifierSpec &v, const ProverSpec &p) {
    p.validate(v);
    Vec psi = protocol_initial(v, p);
    apply_gates(v, p.priv_dims, v.v1, psi);
    apply_provers(v, p, psi);
    apply_gates(v, p.priv_dims, v.v2, psi);
    return std::clamp(psi.tail(psi.size() / 2).squaredNorm(), 0.0, 1.0);
}

Mat acceptance_operator(const VerifierSpec &v, const std::vector<int> &priv_dims, const std::vector<Mat> &w) {
    ProverSpec p;
    p.priv_dims = priv_dims;
    p.w = w;
    int64_t d = 1;
    for (int i = 0; i < v.r; ++i) d *= p.prover_dim(i, v.qm);
    check_dense_dim(d, "acceptance_operator");
    int64_t half = (int64_t{1} << v.qv) * d / 2;
    Mat g(half, d);
    for (int64_t c = 0; c < d; ++c) {
        p.psi = Vec::Unit(d, c);
        Vec psi = protocol_initial(v, p);
        apply_gates(v, priv_dims, v.v1, psi);
        apply_provers(v, p, psi);
        apply_gates(v, priv_dims, v.v2, psi);
        g.col(c) = psi.tail(half);
    }
    return g.adjoint() * g;
}

MapResult map_seesaw(const VerifierSpec &v, const std::vector<int> &priv_dims, uint64_t seed, int iters, int restarts) {
    if (static_cast<int>(priv_dims.size()) != v.r) throw InputError("map_seesaw: one private dimension per prover");
    MapResult best;
    best.value = -1;
    BlockLayout layout = merged_layout(v, priv_dims);
    for (int rs = 0; rs < std::max(1, restarts); ++rs) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(rs)));
        ProverSpec p;
        p.priv_dims = priv_dims;
        for (int i = 0; i < v.r; ++i) p.w.push_back(haar_unitary(p.prover_dim(i, v.qm), rng));
        double val = 0;
        top_eigvec(acceptance_operator(v, priv_dims, p.w), val, p.psi);
        std::vector<double> hist{val};
        bool mono = true;
        int stale = 0;
        for (int it = 0; it < iters && val < 1.0 - 1e-14; ++it) {
            for (int i = 0; i < v.r; ++i) {
                Vec phi = protocol_initial(v, p);
                apply_gates(v, priv_dims, v.v1, phi);
                Vec omega = phi;
                apply_provers(v, p, omega);
                apply_gates(v, priv_dims, v.v2, omega);
                Vec chi = Vec::Zero(omega.size());
                chi.tail(omega.size() / 2) = omega.tail(omega.size() / 2);
                double nrm = chi.norm();
                if (nrm < 1e-300) continue;
                chi /= nrm;
                apply_gates(v, priv_dims, v.v2, chi, true);
                Vec phi_o = phi;
                for (int j = 0; j < v.r; ++j) {
                    if (j != i) phi_o = apply_local(layout, 1 + j, p.w[j], phi_o);
                }
                Mat x = partial_trace_pair(layout, 1 + i, phi_o, chi);
                p.w[i] = polar_unitary(x).adjoint();
            }
            double next = 0;
            top_eigvec(acceptance_operator(v, priv_dims, p.w), next, p.psi);
            if (next < val - 1e-10) mono = false;
            stale = next > val + 1e-14 ? 0 : stale + 1;
            val = std::max(val, next);
            hist.push_back(next);
            if (stale >= 5) break;
        }
        best.restart_values.push_back(val);
        if (val > best.value) {
            best.value = val;
            best.prover = p;
            best.history = hist;
        }
        best.monotone = best.monotone && mono;
    }
    best.value = std::clamp(best.value, 0.0, 1.0);
    return best;
}

ProverSpec perfect_fixture_prover(int priv_dim) {
    ProverSpec p;
    p.priv_dims = {priv_dim};
    p.w = {kron(named_unitary("X"), Mat::Identity(priv_dim, priv_dim))};
    Vec minus(2);
    minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    p.psi = kron(minus, Vec::Unit(priv_dim, 0));
    return p;
}

}  // namespace qcomp
