#pragma once

#include <vector>

#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

struct CliffordGate {
    enum Kind { kH, kS, kCX } kind = kH;
    int q0 = 0;
    int q1 = -1;  // CX target
};

// Conjugation tableau of a Clifford circuit C: stores C X_q C^dag and
// C Z_q C^dag as exact-phase Pauli strings (phases stay in {+1, -1} for
// generator images, i.e. phase field in {0, 2}).
struct CliffordTableau {
    int n_qubits = 0;
    std::vector<PauliString> x_images;
    std::vector<PauliString> z_images;

    static CliffordTableau identity(int n_qubits);

    void append(const CliffordGate& g);

    // C P C^dag for arbitrary P, exact phase included.
    PauliString conjugate(const PauliString& p) const;

    // Tableau of C^dag (symplectic inverse plus sign fixing).
    CliffordTableau inverse() const;

    // The generator images preserve the Pauli commutation algebra; this is
    // the symplectic condition M Omega M^T = Omega over GF(2).
    bool is_symplectic() const;
};

// Conjugation action of one H/S/CX gate on a Pauli string (exact phases).
PauliString conjugate_by_gate(const PauliString& p, const CliffordGate& g);

// 5 n^2 uniformly random H/S/CX draws; the resulting walk is close enough to
// uniform over the Clifford group for 2-design moment tests (validated in the
// test suite against the Haar fourth moment).
std::vector<CliffordGate> random_clifford_gates(int n_qubits, RngStream& rng);

CliffordTableau clifford_from_gates(int n_qubits, const std::vector<CliffordGate>& gates);

// Dense unitary of the gate list for cross-checks; capped at 10 qubits.
DenseOperator clifford_dense(int n_qubits, const std::vector<CliffordGate>& gates);

// Universal spoof of a dense-encoded classifier with circuit C and measured
// qubit 0: W = C^dag X_0 C, always a single Pauli string.
PauliString universal_spoof_dense_encoding(const CliffordTableau& t);

struct AngleSpoofResult {
    PauliString p;         // attack from {I, Y}^n, applied before the circuit
    int attempts = 0;      // candidates tested, successful one included
    bool found = false;
};

// First P in {I, Y}^n (Y-support masks in ascending integer order, identity
// skipped) whose forward image C P C^dag anticommutes with the measured
// sigma_z^{k}; equivalently P anticommutes with Z_U = C^dag Z C.
AngleSpoofResult find_angle_encoding_spoof(const CliffordTableau& t, int k_measured);

}  // namespace qaml
