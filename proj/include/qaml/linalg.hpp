#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "qaml/rng.hpp"

namespace qaml {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DenseOperator = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

// Default comparison bands used across the library and its tests:
// exact algebraic identities, unitarity checks, and nothing else.
inline constexpr double kAlgebraicTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-8;

// Dimension must be a power of two for anything indexed by qubits.
int qubit_count(Eigen::Index dim);

DenseOperator identity_op(Eigen::Index dim);
StateVector basis_state(Eigen::Index dim, Eigen::Index index);

// Kronecker product with the high-index factor on the left, so
// kron(A_high, B_low) indexes row bits as (bits of A | bits of B).
DenseOperator kron(const DenseOperator& a, const DenseOperator& b);

// U |psi>; throws on dimension mismatch or non-square U.
StateVector apply_unitary(const DenseOperator& u, const StateVector& psi);

// <psi| op |psi>. The imaginary part must vanish to kAlgebraicTol
// (callers pass Hermitian observables); throws otherwise.
double expectation(const DenseOperator& op, const StateVector& psi);

// ||  |psi><psi| - |phi><phi|  ||_1 = 2 sqrt(1 - |<psi|phi>|^2), in [0, 2].
double trace_distance_pure(const StateVector& psi, const StateVector& phi);

// || rho - sigma ||_1 (unnormalized Schatten-1) for Hermitian inputs.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// Unnormalized Frobenius (Hilbert-Schmidt) distance ||a - b||_2.
double hs_distance(const DenseOperator& a, const DenseOperator& b);

// Largest singular value of a - b (Schatten-infinity distance).
double spectral_distance(const DenseOperator& a, const DenseOperator& b);

bool is_unitary(const DenseOperator& u, double tol = kUnitaryTol);

// (1 - p) rho + p I/d; p in [0, 1].
DensityMatrix depolarize(const DensityMatrix& rho, double p);

// Exact Haar samples: QR of a complex Ginibre matrix with the R-diagonal
// phase fix, and a normalized complex-normal vector respectively.
DenseOperator haar_unitary(Eigen::Index dim, RngStream& rng);
StateVector haar_state(Eigen::Index dim, RngStream& rng);

// n-fold tensor product of independent Haar single-qubit states.
StateVector random_product_state(int n_qubits, RngStream& rng);

// Pauli string on n <= 64 qubits with an exact global phase in {1, i, -1, -i}.
// Qubit q's letter is determined by bit q of the x/z masks:
// (0,0) I, (1,0) X, (0,1) Z, (1,1) Y; the string equals i^phase * (tensor
// product of letters), qubit 0 being the least significant tensor factor.
struct PauliString {
    int n_qubits = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int phase = 0;  // power of i, mod 4

    static PauliString identity(int n_qubits);
    // Label letter 0 acts on qubit 0; accepts I, X, Y, Z.
    static PauliString from_label(const std::string& label, int phase = 0);
    std::string label() const;

    PauliString multiply(const PauliString& other) const;
    bool commutes_with(const PauliString& other) const;
    // Parity of X/Y letters over the masked qubits; odd parity means the
    // string anticommutes with sigma_z supported there.
    bool odd_xy_weight_on(std::uint64_t qubit_mask) const;
    int weight() const;
    bool is_identity_letters() const;  // ignores phase

    DenseOperator materialize() const;
};

}  // namespace qaml
