#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qaml/classifier.hpp"
#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

enum class AttackProvenance { kExactFlipConjugate, kPauliRotatedApprox, kLearnedProduct };

struct UniversalAttack {
    DenseOperator w;
    AttackProvenance provenance = AttackProvenance::kExactFlipConjugate;
    std::optional<double> target_eps;
    // kPauliRotatedApprox only: W = exp(-i t P) W_univ exp(i t P).
    std::optional<PauliString> generator;
    double angle = 0.0;
};

struct AttackReport {
    int trials = 0;          // states sampled
    int ties = 0;            // |clean prediction| < 1e-12, excluded
    int success_count = 0;   // sign(y') == -sign(y) among non-ties
    double success_fraction = 0.0;  // success_count / (trials - ties)
    double mean_abs_dy = 0.0;       // mean |y' - y| over non-ties
    std::string config_echo;
    std::uint64_t seed = 0;
};

// W_univ = U^dag X_0 U: conjugating the encoded state by it flips the sign of
// every prediction of the measured-sigma_z classifier (X_0 anticommutes with
// sigma_z^k for every k >= 1). Throws on non-unitary input.
UniversalAttack build_exact_universal(const DenseOperator& u, int k_measured = 1);

// W = exp(-i t P) W_univ exp(i t P) for a uniformly random non-identity Pauli
// string P, with t root-found on [0, pi/2] so that the Frobenius distance to
// W_univ is eps * sqrt(d) within 1e-6 * sqrt(d). P is resampled (up to 64
// draws) when its rotation cannot reach the target. eps in [0, 2].
UniversalAttack build_approx_universal(const DenseOperator& w_univ, double eps, RngStream& rng);

enum class StateSource { kHaar, kRandomProduct };

// Samples `trials` states from the source and reports the fraction whose
// prediction sign flips under the attack; y is evaluated against the
// Heisenberg observable zu = U^dag Z U. RNG is seeded internally so the seed
// can be echoed in the report.
AttackReport success_fraction(const UniversalAttack& attack, const DenseOperator& zu,
                              StateSource source, int trials, std::uint64_t seed);

// Same statistic on caller-supplied states (e.g. an encoded test set).
AttackReport success_fraction_on_states(const UniversalAttack& attack, const DenseOperator& zu,
                                        const std::vector<StateVector>& states);

struct SuccessCurveRow {
    double eps = 0.0;
    double empirical = 0.0;
    // 1 - (1/pi) arctan(eps ||[P, Z_U]||_2 / sqrt(d)): the first-order law
    // with the rotation angle identified with eps and the one-commutator
    // generator.
    double analytic_one_term = 0.0;
    // Same law with the actually fitted angle t and the full first-order
    // shift generator i([P, Z_U] + W^dag [P, Z_U] W).
    double analytic_two_term = 0.0;
};

// Success fraction of the eps-approximate universal attack over Haar states,
// one attack build per grid point, next to the analytic predictions
// evaluated with the sampled P. Both analytic columns respect the
// 1 - 2 eps / pi lower bound.
std::vector<SuccessCurveRow> haar_success_curve(const DenseOperator& u, int k_measured,
                                                const std::vector<double>& eps_grid, int trials,
                                                std::uint64_t seed);

struct TwoEpsCheck {
    double max_abs_sum = 0.0;  // max over states of |<psi|(Z_U + W^dag Z_U W)|psi>|
    double bound = 0.0;        // 2 ||W_univ - W||_inf
};

// Checks the perturbation lemma: any W within spectral distance eps of an
// exact universal spoof leaves |y'(x) + y(x)| <= 2 eps on every state.
// Throws logic_error if a sampled state violates the bound by more than 1e-9
// (the inequality is exact, so a violation means an internal error).
TwoEpsCheck verify_2eps_spoof(const DenseOperator& zu, const DenseOperator& w_univ,
                              const DenseOperator& w, int trials, RngStream& rng);

struct AdversaryConfig {
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.01;
    int train_states = 1024;  // generated when no training set is supplied
    int test_states = 256;    // generated when no held-out set is supplied
};

struct AdversaryResult {
    Eigen::VectorXd params;  // 3 per qubit: theta, phi, lambda
    std::vector<double> batch_loss;
    UniversalAttack attack;  // compiled product unitary, kLearnedProduct
    AttackReport report;     // success fraction on the held-out states
};

// Per-qubit product adversary A_q = RZ(phi) RY(theta) RZ(lambda), trained
// with ADAM on the flip cross-entropy against the classifier U. When
// train_states is empty, training states are random product states labeled by
// the sign of the clean prediction; when test_states is empty, the held-out
// set is freshly sampled random product states. Gradients use the exact
// parameter-shift rule, evaluated per qubit through the four fixed blocks of
// U^dag Z U so a full gradient costs ~(1 + 2n) dense matvecs per sample.
AdversaryResult train_product_adversary(const DenseOperator& u, int k_measured,
                                        const std::vector<StateVector>& train_states,
                                        const std::vector<int>& train_labels,
                                        const std::vector<StateVector>& test_states,
                                        const AdversaryConfig& config, RngStream& rng);

// Dense 2^n x 2^n product unitary of the learned 3n-parameter adversary.
DenseOperator compile_product_adversary(const Eigen::VectorXd& params);

}  // namespace qaml
