#include "qaml/linalg.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace qaml {

int qubit_count(Eigen::Index dim) {
    if (dim < 2 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("dimension " + std::to_string(dim) +
                                    " is not a power of two >= 2");
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

DenseOperator identity_op(Eigen::Index dim) {
    return DenseOperator::Identity(dim, dim);
}

StateVector basis_state(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim)
        throw std::invalid_argument("basis index out of range");
    StateVector v = StateVector::Zero(dim);
    v(index) = 1.0;
    return v;
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
    DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

StateVector apply_unitary(const DenseOperator& u, const StateVector& psi) {
    if (u.rows() != u.cols())
        throw std::invalid_argument("apply_unitary: operator is not square");
    if (u.cols() != psi.size())
        throw std::invalid_argument("apply_unitary: dimension mismatch");
    return u * psi;
}

double expectation(const DenseOperator& op, const StateVector& psi) {
    if (op.rows() != op.cols() || op.cols() != psi.size())
        throw std::invalid_argument("expectation: dimension mismatch");
    Complex v = psi.dot(op * psi);
    if (std::abs(v.imag()) > kAlgebraicTol * std::max(1.0, std::abs(v.real())))
        throw std::invalid_argument("expectation: observable is not Hermitian on this state");
    return v.real();
}

double trace_distance_pure(const StateVector& psi, const StateVector& phi) {
    if (psi.size() != phi.size())
        throw std::invalid_argument("trace_distance_pure: dimension mismatch");
    double f = std::norm(psi.dot(phi));
    // Round-off can push the fidelity a hair above 1 for identical rays.
    return 2.0 * std::sqrt(std::max(0.0, 1.0 - f));
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho - sigma,
                                                    Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double hs_distance(const DenseOperator& a, const DenseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("hs_distance: dimension mismatch");
    return (a - b).norm();
}

double spectral_distance(const DenseOperator& a, const DenseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("spectral_distance: dimension mismatch");
    Eigen::JacobiSVD<DenseOperator> svd(a - b);
    return svd.singularValues()(0);
}

bool is_unitary(const DenseOperator& u, double tol) {
    if (u.rows() != u.cols()) return false;
    DenseOperator g = u.adjoint() * u - identity_op(u.rows());
    return g.cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix depolarize(const DensityMatrix& rho, double p) {
    if (rho.rows() != rho.cols())
        throw std::invalid_argument("depolarize: state is not square");
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("depolarize: p outside [0, 1]");
    Eigen::Index d = rho.rows();
    return (1.0 - p) * rho + (p / static_cast<double>(d)) * identity_op(d);
}

DenseOperator haar_unitary(Eigen::Index dim, RngStream& rng) {
    DenseOperator g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            g(i, j) = Complex(rng.normal(), rng.normal());
    Eigen::HouseholderQR<DenseOperator> qr(g);
    DenseOperator q = qr.householderQ() * identity_op(dim);
    DenseOperator r = qr.matrixQR();
    // Fixing the phases of R's diagonal makes the distribution exactly Haar.
    for (Eigen::Index j = 0; j < dim; ++j) {
        Complex rj = r(j, j);
        double m = std::abs(rj);
        q.col(j) *= (m > 0.0) ? rj / m : Complex(1.0, 0.0);
    }
    return q;
}

StateVector haar_state(Eigen::Index dim, RngStream& rng) {
    StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
    v.normalize();
    return v;
}

StateVector random_product_state(int n_qubits, RngStream& rng) {
    if (n_qubits < 1) throw std::invalid_argument("random_product_state: n_qubits < 1");
    StateVector out = StateVector::Ones(1);
    for (int q = 0; q < n_qubits; ++q) {
        StateVector s(2);
        s(0) = Complex(rng.normal(), rng.normal());
        s(1) = Complex(rng.normal(), rng.normal());
        s.normalize();
        StateVector next(out.size() * 2);
        // Qubit q occupies bit q, so the new factor is the high bit so far.
        next.head(out.size()) = s(0) * out;
        next.tail(out.size()) = s(1) * out;
        out.swap(next);
    }
    return out;
}

namespace {

void check_pauli_arity(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 64)
        throw std::invalid_argument("PauliString supports 1..64 qubits");
}

// Phase exponent (power of i) of sigma_a * sigma_b per qubit, indexed by
// (x_a + 2 z_a, x_b + 2 z_b). Letters: 0 I, 1 X, 2 Z, 3 Y.
constexpr int kMulPhase[4][4] = {
    {0, 0, 0, 0},   // I *
    {0, 0, 3, 1},   // X *: XZ = -iY, XY = iZ
    {0, 1, 0, 3},   // Z *: ZX = iY, ZY = -iX
    {0, 3, 1, 0},   // Y *: YX = -iZ, YZ = iX
};

}  // namespace

PauliString PauliString::identity(int n_qubits) {
    check_pauli_arity(n_qubits);
    return {n_qubits, 0, 0, 0};
}

PauliString PauliString::from_label(const std::string& label, int phase) {
    check_pauli_arity(static_cast<int>(label.size()));
    PauliString p{static_cast<int>(label.size()), 0, 0, ((phase % 4) + 4) % 4};
    for (std::size_t q = 0; q < label.size(); ++q) {
        switch (label[q]) {
            case 'I': break;
            case 'X': p.x |= 1ull << q; break;
            case 'Z': p.z |= 1ull << q; break;
            case 'Y': p.x |= 1ull << q; p.z |= 1ull << q; break;
            default:
                throw std::invalid_argument("PauliString: bad letter '" +
                                            std::string(1, label[q]) + "'");
        }
    }
    return p;
}

std::string PauliString::label() const {
    std::string s(static_cast<std::size_t>(n_qubits), 'I');
    for (int q = 0; q < n_qubits; ++q) {
        bool bx = (x >> q) & 1, bz = (z >> q) & 1;
        s[static_cast<std::size_t>(q)] = bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
    }
    return s;
}

PauliString PauliString::multiply(const PauliString& other) const {
    if (n_qubits != other.n_qubits)
        throw std::invalid_argument("PauliString::multiply: arity mismatch");
    PauliString out{n_qubits, x ^ other.x, z ^ other.z, (phase + other.phase) % 4};
    std::uint64_t touched = (x | z) & (other.x | other.z);
    for (int q = 0; q < n_qubits; ++q) {
        if (!((touched >> q) & 1)) continue;
        int a = static_cast<int>((x >> q) & 1) + 2 * static_cast<int>((z >> q) & 1);
        int b = static_cast<int>((other.x >> q) & 1) + 2 * static_cast<int>((other.z >> q) & 1);
        out.phase = (out.phase + kMulPhase[a][b]) % 4;
    }
    return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
    if (n_qubits != other.n_qubits)
        throw std::invalid_argument("PauliString::commutes_with: arity mismatch");
    int s = std::popcount(x & other.z) + std::popcount(z & other.x);
    return (s % 2) == 0;
}

bool PauliString::odd_xy_weight_on(std::uint64_t qubit_mask) const {
    return (std::popcount(x & qubit_mask) % 2) == 1;
}

int PauliString::weight() const { return std::popcount(x | z); }

bool PauliString::is_identity_letters() const { return x == 0 && z == 0; }

DenseOperator PauliString::materialize() const {
    if (n_qubits > 14)
        throw std::invalid_argument("PauliString::materialize: too many qubits");
    Eigen::Index d = Eigen::Index(1) << n_qubits;
    const Complex kI(0.0, 1.0);
    DenseOperator out = DenseOperator::Zero(d, d);
    // Per column c: the X/Y letters flip the addressed bits (row = c ^ x),
    // every letter with a z-bit contributes (-1)^{c_bit}, and every Y
    // contributes one factor of i (Y[r][c] = i (-1)^c delta_{r, c^1}).
    Complex global = 1.0;
    for (int k = 0; k < phase % 4; ++k) global *= kI;
    for (int k = 0; k < std::popcount(x & z); ++k) global *= kI;
    for (Eigen::Index col = 0; col < d; ++col) {
        Eigen::Index row = static_cast<Eigen::Index>(static_cast<std::uint64_t>(col) ^ x);
        Complex v = global;
        if (std::popcount(static_cast<std::uint64_t>(col) & z) % 2) v = -v;
        out(row, col) = v;
    }
    return out;
}

}  // namespace qaml
