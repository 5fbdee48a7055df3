#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qaml/circuits.hpp"
#include "qaml/linalg.hpp"

namespace qaml {

constexpr Eigen::Index kDefaultChiMax = 64;
constexpr double kDefaultSvdCut = 1e-12;  // relative to the largest singular value

// Matrix product state in mixed-canonical form: every site left of `center`
// is left-orthogonal, every site right of it right-orthogonal. Site tensors
// are stored as one chi_left x chi_right matrix per physical basis value.
struct Mps {
    int n_sites = 0;
    std::vector<std::array<Eigen::MatrixXcd, 2>> sites;
    int center = 0;
    double discarded_weight = 0.0;  // cumulative relative truncation weight

    Eigen::Index bond_dim(int cut) const;  // bond between sites cut and cut+1
    double norm() const;                   // Frobenius norm of the center tensor
};

// Product state from per-qubit amplitudes (normalized here; zero vectors are
// rejected). All bonds have dimension 1.
Mps mps_from_product(const std::vector<Eigen::Vector2cd>& locals);

// |0...0>.
Mps mps_zero_state(int n_sites);

// Moves the canonical center by QR sweeps; exact, no truncation.
void move_center(Mps& m, int target);

// Contract the two site tensors with a 4x4 gate (local basis index =
// bit(site s) + 2 bit(site s+1)), then SVD-split: singular values below
// svd_cut * sigma_max or beyond chi_max are dropped, the kept spectrum is
// renormalized, and the discarded relative weight accumulates on the state.
void apply_two_qubit_gate(Mps& m, const Eigen::Matrix4cd& gate, int s,
                          Eigen::Index chi_max = kDefaultChiMax,
                          double svd_cut = kDefaultSvdCut);

// Exact single-site gate (no bond change).
void apply_one_qubit_gate(Mps& m, const Eigen::Matrix2cd& gate, int s);

// Von Neumann entropy -sum lambda^2 log lambda^2 of the Schmidt values at the
// bond between sites cut and cut+1 (natural log).
double entanglement_entropy(Mps& m, int cut);

// Operator as a matrix product: per site, a (left-bond x right-bond) grid of
// 2x2 blocks acting (phys-out x phys-in).
struct Mpo {
    int n_sites = 0;
    std::vector<std::vector<std::vector<Eigen::Matrix2cd>>> sites;  // [site][l][r]
};

// Bond-1 MPO from per-qubit 2x2 factors (e.g. a learned product adversary).
Mpo mpo_from_product(const std::vector<Eigen::Matrix2cd>& locals);

// sigma_z on the first k sites, identity elsewhere; bond 1.
Mpo mpo_measured_z(int n_sites, int k_measured);

// <m|op|m> by transfer-matrix contraction.
Complex mps_expectation_raw(const Mps& m, const Mpo& op);

// Real part of the above; throws if the imaginary part exceeds 1e-8 (the
// observable was not Hermitian).
double mps_expectation(const Mps& m, const Mpo& op);

// Dense statevector (guarded to n <= 14 sites).
StateVector mps_to_statevector(const Mps& m);

// True when off-center tensors satisfy their orthogonality conditions to tol.
bool is_canonical(const Mps& m, double tol = 1e-9);

struct MpsTelemetryRow {
    int layer = 0;
    int cut = 0;
    Eigen::Index bond_dim = 1;
    double entropy = 0.0;
    double discarded_weight = 0.0;  // cumulative at the time of the row
};

struct BrickworkMpsRun {
    ParamCircuit circuit;  // the simulated circuit, for cross-backend checks
    Mps state;
    std::vector<MpsTelemetryRow> rows;  // one row per (layer, cut)
};

// Random brickwork evolution of |0...0> with telemetry after every layer.
BrickworkMpsRun run_brickwork_mps(int n_sites, int layers, Eigen::Index chi_max,
                                  double svd_cut, std::uint64_t seed);

}  // namespace qaml
