#pragma once

#include <vector>

#include "qaml/circuits.hpp"
#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

// Commutator-square expectation (1/d)||[Z_U, W]||_F^2 with Z_U = U^dag Z U,
// evaluated via the closed form 2(1 - Re tr[Z_U W^dag Z_U W] / d). Range
// [0, 4]; 0 iff the operators commute. Requires Z Hermitian, W/U unitary.
double otoc(const DenseOperator& u, const DenseOperator& w, const DenseOperator& z);

struct OtocBoundCheck {
    double empirical_prob;      // Pr{|y - y'| >= delta} over sampled states
    double bound;               // otoc / ((d+1) delta^2)
    double sample_variance;     // unbiased variance of y - y'
    double predicted_variance;  // otoc / (d+1), the Haar-exact value
    double fourth_moment;       // mean (y - y')^4, for variance error bars
    int trials;
};

// Samples Haar states psi, compares y = <psi|Z_U|psi> against the attacked
// y' = <psi|W^dag Z_U W|psi>, and reports the tail probability at delta next
// to the concentration bound it must satisfy.
OtocBoundCheck verify_otoc_bound(const DenseOperator& u, const DenseOperator& w,
                                 const DenseOperator& z, double delta, int trials,
                                 RngStream& rng);

struct CutSpectrum {
    int cut = 0;                  // qubits [0, cut) vs [cut, n)
    std::vector<double> weights;  // normalized squared singular values, descending
    double s2 = 0.0;              // -log sum(weights^2)
    double s_inf = 0.0;           // -log max(weight)
};

// Operator entanglement spectrum across every contiguous prefix cut.
struct LoeSpectrum {
    int n_qubits = 0;
    std::vector<CutSpectrum> cuts;  // cut = 1 .. n-1 in order
    double max_s2 = 0.0;
    double max_s_inf = 0.0;
};

// Operator-Schmidt spectrum of X: per cut, reshape X into a matrix between
// the (row, col) index pairs of the two sides, take singular values, and
// normalize their squares into weights. Natural-log entropies. Throws on a
// zero operator.
LoeSpectrum loe(const DenseOperator& x);

struct DistanceBounds {
    double lower = 0.0;  // 1 - exp(-max_s2 / 2)
    double exact = 0.0;  // 1 - prod over cuts of the top weight
    double upper = 0.0;  // 1 - exp(-n * max_s2)
    // Direct coordinate-ascent estimate of the defining minimization over
    // product unitaries; reported as a cross-check of `exact`, which rests on
    // a closest-product-state factorization argument.
    double alt_estimate = 0.0;
    int ascent_sweeps = 0;  // sweeps used by the best ascent run
};

// Normalized Hilbert-Schmidt distance between the doubled operator
// W (x) W^* and the closest product-unitary counterpart, in [0, 1]:
// 1 - max |tr(W^dag (W_1 (x) ... (x) W_n))|^2 / d^2. Throws if W is not
// unitary.
DistanceBounds product_distance(const DenseOperator& w_univ, RngStream& rng);

enum class CircuitFamily { kHwEfficient, kBrickwork };

struct LoeGrowthRow {
    int layers = 0;
    double mean_s2 = 0.0;  // max-over-cuts S2 of U^dag Z U, averaged over draws
    double std_s2 = 0.0;   // sample standard deviation over draws
};

// Growth of the operator entanglement of U^dag Z U with circuit depth, where
// Z measures the first k qubits. Each layer count is averaged over `samples`
// random circuit draws (fresh parameters or fresh brickwork gates).
std::vector<LoeGrowthRow> loe_growth_curve(CircuitFamily family, int n_qubits, int max_layers,
                                           int samples, int k_measured, RngStream& rng);

}  // namespace qaml
