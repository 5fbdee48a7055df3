#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qaml/circuits.hpp"
#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

// <psi| sigma_z^{(0..k-1)} |psi>: parity of the low k bits of each basis index.
double measured_z_expectation(const StateVector& psi, int k_measured);

// tr(rho sigma_z^{(0..k-1)}).
double measured_z_expectation(const DensityMatrix& rho, int k_measured);

// Dense diagonal sigma_z^{(0..k-1)} on n qubits.
DenseOperator measured_z_operator(int n_qubits, int k_measured);

// State after the parameterized circuit.
StateVector predict_state(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                          const StateVector& input);

// Real-valued prediction y in [-1, 1]; its sign is the class decision.
double predict(const ParamCircuit& circuit, const Eigen::VectorXd& params,
               const StateVector& input, int k_measured);

// Same decision function evaluated on a mixed input state.
double predict(const ParamCircuit& circuit, const Eigen::VectorXd& params,
               const DensityMatrix& input, int k_measured);

enum class Loss { kHinge, kCrossEntropyFlip };

// kHinge: -label * y, the classifier-training risk term.
// kCrossEntropyFlip: -log(p_flip) with p_flip = (1 - label * y) / 2 clamped
// to [1e-9, 1 - 1e-9]; minimizing it drives the prediction to the flipped
// class, which is the adversary's objective. Gradient is zero inside the
// clamped regions.
double loss_value(Loss loss, double y, int label);
double loss_grad_y(Loss loss, double y, int label);

// dy/dtheta_i by the exact parameter-shift rule (+-pi/2 per slot). Requires
// every parameterized gate to be a rotation; throws otherwise.
Eigen::VectorXd param_shift_grad(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                                 const StateVector& input, int k_measured);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;

    explicit AdamState(Eigen::Index n)
        : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

// In-place ADAM step (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) with bias
// correction.
void adam_update(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                 double learning_rate);

struct TrainConfig {
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.01;
    Loss loss = Loss::kHinge;
    // Early stop once an epoch's mean loss drops to this value or below.
    std::optional<double> target_risk;
    // When set, writes one JSON checkpoint per epoch into this directory
    // (checkpoint_000.json, ...) with the circuit, params, optimizer moments,
    // RNG cursor, and the epoch's loss/accuracy.
    std::optional<std::string> checkpoint_dir;
};

struct TrainResult {
    Eigen::VectorXd params;
    std::vector<double> batch_loss;      // mean loss of every mini-batch, in order
    std::vector<double> epoch_loss;      // mean loss over the epoch's batches
    std::vector<double> epoch_accuracy;  // training accuracy after the epoch
};

// Mini-batch ADAM training on pre-encoded states with labels in {-1, +1}.
// Batch order is a deterministic reshuffle per epoch driven by rng.
TrainResult train(const ParamCircuit& circuit, const Eigen::VectorXd& initial_params,
                  const std::vector<StateVector>& states, const std::vector<int>& labels,
                  int k_measured, const TrainConfig& config, RngStream& rng);

// Fraction with sign(prediction) == label (y == 0 counts as +1).
double accuracy(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                const std::vector<StateVector>& states, const std::vector<int>& labels,
                int k_measured);

}  // namespace qaml
