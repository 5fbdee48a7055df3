#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

// Trainable gates are half-angle rotations (RY(t) = exp(-i t sigma_y / 2),
// RZ likewise), which is what makes the parameter-shift rule exact for them.
enum class GateKind { kRY, kRZ, kCNOT, kFixed2Q };

struct Gate {
    GateKind kind = GateKind::kRY;
    int q0 = -1;          // target (rotations) or control (CNOT) or low qubit (fixed)
    int q1 = -1;          // CNOT target / fixed-gate high qubit
    int param_slot = -1;  // rotations only
    Eigen::Matrix4cd fixed = Eigen::Matrix4cd::Zero();  // kFixed2Q only
};

struct ParamCircuit {
    int n_qubits = 0;
    int n_params = 0;
    int n_layers = 0;
    std::vector<Gate> gates;
};

Eigen::Matrix2cd ry_matrix(double theta);
Eigen::Matrix2cd rz_matrix(double theta);

// Per layer: RY + RZ on every qubit (2n parameters), then the CNOT chain
// (0,1), (1,2), ..., (n-2, n-1).
ParamCircuit build_hw_efficient(int n_qubits, int layers);

// Alternating brickwork of fixed Haar-random two-qubit gates: even layers
// pair (0,1), (2,3), ...; odd layers pair (1,2), (3,4), .... No parameters.
ParamCircuit build_brickwork(int n_qubits, int layers, RngStream& rng);

// In-place local gate application on a statevector (qubit 0 = low bit; the
// two-qubit local basis index is bit(q0) + 2 bit(q1)).
void apply_single_qubit(StateVector& psi, int q, const Eigen::Matrix2cd& g);
void apply_cnot(StateVector& psi, int control, int target);
void apply_two_qubit(StateVector& psi, int q0, int q1, const Eigen::Matrix4cd& g);

StateVector apply_circuit(const ParamCircuit& c, const Eigen::VectorXd& params,
                          StateVector psi);

// Dense unitary of the whole circuit; guarded to n <= 12 qubits.
DenseOperator compile(const ParamCircuit& c, const Eigen::VectorXd& params);

// Structured-text serialization (JSON); the round trip is bit-exact.
std::string circuit_to_text(const ParamCircuit& c);
ParamCircuit circuit_from_text(const std::string& text);

}  // namespace qaml
