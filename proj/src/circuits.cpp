#include "qaml/circuits.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qaml {

namespace {

using nlohmann::json;

void check_params(const ParamCircuit& c, const Eigen::VectorXd& params) {
    if (params.size() != c.n_params)
        throw std::invalid_argument("circuit expects " + std::to_string(c.n_params) +
                                    " parameters, got " + std::to_string(params.size()));
}

void check_qubit(const ParamCircuit& c, int q) {
    if (q < 0 || q >= c.n_qubits)
        throw std::invalid_argument("gate qubit out of range");
}

}  // namespace

Eigen::Matrix2cd ry_matrix(double theta) {
    double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    Eigen::Matrix2cd m;
    m << c, -s, s, c;
    return m;
}

Eigen::Matrix2cd rz_matrix(double theta) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::polar(1.0, -0.5 * theta);
    m(1, 1) = std::polar(1.0, +0.5 * theta);
    return m;
}

ParamCircuit build_hw_efficient(int n_qubits, int layers) {
    if (n_qubits < 1 || layers < 0)
        throw std::invalid_argument("build_hw_efficient: bad shape");
    ParamCircuit c;
    c.n_qubits = n_qubits;
    c.n_layers = layers;
    int slot = 0;
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < n_qubits; ++q) {
            c.gates.push_back({GateKind::kRY, q, -1, slot++, {}});
            c.gates.push_back({GateKind::kRZ, q, -1, slot++, {}});
        }
        for (int q = 0; q + 1 < n_qubits; ++q)
            c.gates.push_back({GateKind::kCNOT, q, q + 1, -1, {}});
    }
    c.n_params = slot;
    return c;
}

ParamCircuit build_brickwork(int n_qubits, int layers, RngStream& rng) {
    if (n_qubits < 2 || layers < 0)
        throw std::invalid_argument("build_brickwork: bad shape");
    ParamCircuit c;
    c.n_qubits = n_qubits;
    c.n_layers = layers;
    for (int l = 0; l < layers; ++l) {
        int first = (l % 2 == 0) ? 0 : 1;
        for (int q = first; q + 1 < n_qubits; q += 2) {
            Gate g;
            g.kind = GateKind::kFixed2Q;
            g.q0 = q;
            g.q1 = q + 1;
            g.fixed = haar_unitary(4, rng);
            c.gates.push_back(g);
        }
    }
    return c;
}

void apply_single_qubit(StateVector& psi, int q, const Eigen::Matrix2cd& g) {
    Eigen::Index d = psi.size();
    Eigen::Index bit = Eigen::Index(1) << q;
    for (Eigen::Index base = 0; base < d; ++base) {
        if (base & bit) continue;
        Complex a = psi(base), b = psi(base | bit);
        psi(base) = g(0, 0) * a + g(0, 1) * b;
        psi(base | bit) = g(1, 0) * a + g(1, 1) * b;
    }
}

void apply_cnot(StateVector& psi, int control, int target) {
    Eigen::Index d = psi.size();
    Eigen::Index cbit = Eigen::Index(1) << control;
    Eigen::Index tbit = Eigen::Index(1) << target;
    for (Eigen::Index i = 0; i < d; ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(psi(i), psi(i | tbit));
    }
}

void apply_two_qubit(StateVector& psi, int q0, int q1, const Eigen::Matrix4cd& g) {
    if (q0 == q1) throw std::invalid_argument("apply_two_qubit: equal qubits");
    Eigen::Index d = psi.size();
    Eigen::Index b0 = Eigen::Index(1) << q0;
    Eigen::Index b1 = Eigen::Index(1) << q1;
    for (Eigen::Index base = 0; base < d; ++base) {
        if (base & (b0 | b1)) continue;
        Eigen::Index i0 = base, i1 = base | b0, i2 = base | b1, i3 = base | b0 | b1;
        Eigen::Vector4cd v{psi(i0), psi(i1), psi(i2), psi(i3)};
        Eigen::Vector4cd w = g * v;
        psi(i0) = w(0);
        psi(i1) = w(1);
        psi(i2) = w(2);
        psi(i3) = w(3);
    }
}

StateVector apply_circuit(const ParamCircuit& c, const Eigen::VectorXd& params,
                          StateVector psi) {
    check_params(c, params);
    if (psi.size() != (Eigen::Index(1) << c.n_qubits))
        throw std::invalid_argument("apply_circuit: state dimension mismatch");
    for (const Gate& g : c.gates) {
        check_qubit(c, g.q0);
        switch (g.kind) {
            case GateKind::kRY:
                apply_single_qubit(psi, g.q0, ry_matrix(params(g.param_slot)));
                break;
            case GateKind::kRZ:
                apply_single_qubit(psi, g.q0, rz_matrix(params(g.param_slot)));
                break;
            case GateKind::kCNOT:
                check_qubit(c, g.q1);
                apply_cnot(psi, g.q0, g.q1);
                break;
            case GateKind::kFixed2Q:
                check_qubit(c, g.q1);
                apply_two_qubit(psi, g.q0, g.q1, g.fixed);
                break;
        }
    }
    return psi;
}

DenseOperator compile(const ParamCircuit& c, const Eigen::VectorXd& params) {
    if (c.n_qubits > 12)
        throw std::invalid_argument("compile: dense path capped at 12 qubits");
    check_params(c, params);
    Eigen::Index d = Eigen::Index(1) << c.n_qubits;
    DenseOperator u(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
        StateVector e = basis_state(d, col);
        u.col(col) = apply_circuit(c, params, e);
    }
    return u;
}

std::string circuit_to_text(const ParamCircuit& c) {
    json doc;
    doc["n_qubits"] = c.n_qubits;
    doc["n_params"] = c.n_params;
    doc["n_layers"] = c.n_layers;
    json gates = json::array();
    for (const Gate& g : c.gates) {
        json jg;
        switch (g.kind) {
            case GateKind::kRY: jg["kind"] = "ry"; break;
            case GateKind::kRZ: jg["kind"] = "rz"; break;
            case GateKind::kCNOT: jg["kind"] = "cnot"; break;
            case GateKind::kFixed2Q: jg["kind"] = "fixed2q"; break;
        }
        jg["q0"] = g.q0;
        if (g.q1 >= 0) jg["q1"] = g.q1;
        if (g.param_slot >= 0) jg["param_slot"] = g.param_slot;
        if (g.kind == GateKind::kFixed2Q) {
            json m = json::array();
            for (int r = 0; r < 4; ++r)
                for (int cc = 0; cc < 4; ++cc) {
                    m.push_back(g.fixed(r, cc).real());
                    m.push_back(g.fixed(r, cc).imag());
                }
            jg["matrix"] = m;
        }
        gates.push_back(jg);
    }
    doc["gates"] = gates;
    return doc.dump(2);
}

ParamCircuit circuit_from_text(const std::string& text) {
    json doc = json::parse(text);
    ParamCircuit c;
    c.n_qubits = doc.at("n_qubits").get<int>();
    c.n_params = doc.at("n_params").get<int>();
    c.n_layers = doc.at("n_layers").get<int>();
    for (const json& jg : doc.at("gates")) {
        Gate g;
        std::string kind = jg.at("kind").get<std::string>();
        if (kind == "ry") g.kind = GateKind::kRY;
        else if (kind == "rz") g.kind = GateKind::kRZ;
        else if (kind == "cnot") g.kind = GateKind::kCNOT;
        else if (kind == "fixed2q") g.kind = GateKind::kFixed2Q;
        else throw std::invalid_argument("circuit_from_text: bad gate kind '" + kind + "'");
        g.q0 = jg.at("q0").get<int>();
        g.q1 = jg.value("q1", -1);
        g.param_slot = jg.value("param_slot", -1);
        if (g.kind == GateKind::kFixed2Q) {
            const json& m = jg.at("matrix");
            if (m.size() != 32)
                throw std::invalid_argument("circuit_from_text: fixed gate needs 32 reals");
            int idx = 0;
            for (int r = 0; r < 4; ++r)
                for (int cc = 0; cc < 4; ++cc) {
                    double re = m[idx++].get<double>();
                    double im = m[idx++].get<double>();
                    g.fixed(r, cc) = Complex(re, im);
                }
        }
        c.gates.push_back(g);
    }
    return c;
}

}  // namespace qaml
