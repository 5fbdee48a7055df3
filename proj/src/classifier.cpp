#include "qaml/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace qaml {

namespace {

std::uint64_t measured_mask(Eigen::Index dim, int k_measured) {
    int n = qubit_count(dim);
    if (k_measured < 1 || k_measured > n)
        throw std::invalid_argument("k_measured out of range");
    return (1ull << k_measured) - 1;
}

int check_labels(const std::vector<StateVector>& states, const std::vector<int>& labels) {
    if (states.size() != labels.size() || states.empty())
        throw std::invalid_argument("states/labels size mismatch");
    for (int l : labels)
        if (l != 1 && l != -1) throw std::invalid_argument("labels must be +-1");
    return static_cast<int>(states.size());
}

}  // namespace

double measured_z_expectation(const StateVector& psi, int k_measured) {
    std::uint64_t mask = measured_mask(psi.size(), k_measured);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        double w = std::norm(psi(i));
        acc += (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -w : w;
    }
    return acc;
}

double measured_z_expectation(const DensityMatrix& rho, int k_measured) {
    std::uint64_t mask = measured_mask(rho.rows(), k_measured);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        double w = rho(i, i).real();
        acc += (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -w : w;
    }
    return acc;
}

DenseOperator measured_z_operator(int n_qubits, int k_measured) {
    if (n_qubits < 1 || n_qubits > 20) throw std::invalid_argument("n_qubits out of range");
    Eigen::Index dim = Eigen::Index(1) << n_qubits;
    std::uint64_t mask = measured_mask(dim, k_measured);
    DenseOperator z = DenseOperator::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        z(i, i) = (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -1.0 : 1.0;
    return z;
}

StateVector predict_state(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                          const StateVector& input) {
    return apply_circuit(circuit, params, input);
}

double predict(const ParamCircuit& circuit, const Eigen::VectorXd& params,
               const StateVector& input, int k_measured) {
    return measured_z_expectation(predict_state(circuit, params, input), k_measured);
}

double predict(const ParamCircuit& circuit, const Eigen::VectorXd& params,
               const DensityMatrix& input, int k_measured) {
    DenseOperator u = compile(circuit, params);
    DensityMatrix out = u * input * u.adjoint();
    return measured_z_expectation(out, k_measured);
}

double loss_value(Loss loss, double y, int label) {
    if (label != 1 && label != -1) throw std::invalid_argument("label must be +-1");
    switch (loss) {
        case Loss::kHinge:
            return -label * y;
        case Loss::kCrossEntropyFlip: {
            double p_flip = std::clamp((1.0 - label * y) / 2.0, 1e-9, 1.0 - 1e-9);
            return -std::log(p_flip);
        }
    }
    throw std::logic_error("unreachable");
}

double loss_grad_y(Loss loss, double y, int label) {
    if (label != 1 && label != -1) throw std::invalid_argument("label must be +-1");
    switch (loss) {
        case Loss::kHinge:
            return -static_cast<double>(label);
        case Loss::kCrossEntropyFlip: {
            double p_flip = (1.0 - label * y) / 2.0;
            if (p_flip < 1e-9 || p_flip > 1.0 - 1e-9) return 0.0;
            // d/dy [-log p_flip] with dp_flip/dy = -label/2.
            return label / (2.0 * p_flip);
        }
    }
    throw std::logic_error("unreachable");
}

Eigen::VectorXd param_shift_grad(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                                 const StateVector& input, int k_measured) {
    if (params.size() != circuit.n_params)
        throw std::invalid_argument("param count mismatch");
    for (const auto& g : circuit.gates)
        if (g.param_slot >= 0 && g.kind != GateKind::kRY && g.kind != GateKind::kRZ)
            throw std::invalid_argument("parameter-shift rule needs rotation gates");
    Eigen::VectorXd grad(circuit.n_params);
    Eigen::VectorXd shifted = params;
    for (Eigen::Index i = 0; i < circuit.n_params; ++i) {
        shifted(i) = params(i) + M_PI_2;
        double plus = predict(circuit, shifted, input, k_measured);
        shifted(i) = params(i) - M_PI_2;
        double minus = predict(circuit, shifted, input, k_measured);
        shifted(i) = params(i);
        grad(i) = 0.5 * (plus - minus);
    }
    return grad;
}

void adam_update(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                 double learning_rate) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw std::invalid_argument("adam_update size mismatch");
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++state.step;
    state.m = kBeta1 * state.m + (1.0 - kBeta1) * grad;
    state.v = kBeta2 * state.v + (1.0 - kBeta2) * grad.array().square().matrix();
    double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    params -= (learning_rate * (state.m / c1).array() / ((state.v / c2).array().sqrt() + kEps))
                  .matrix();
}

TrainResult train(const ParamCircuit& circuit, const Eigen::VectorXd& initial_params,
                  const std::vector<StateVector>& states, const std::vector<int>& labels,
                  int k_measured, const TrainConfig& config, RngStream& rng) {
    int n = check_labels(states, labels);
    if (config.epochs < 1 || config.batch_size < 1)
        throw std::invalid_argument("bad train config");

    TrainResult result;
    result.params = initial_params;
    AdamState adam(initial_params.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        long loss_count = 0;
        for (int start = 0; start < n; start += config.batch_size) {
            int stop = std::min(n, start + config.batch_size);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(result.params.size());
            double batch_sum = 0.0;
            for (int b = start; b < stop; ++b) {
                int idx = order[static_cast<std::size_t>(b)];
                const StateVector& psi = states[static_cast<std::size_t>(idx)];
                int label = labels[static_cast<std::size_t>(idx)];
                double y = predict(circuit, result.params, psi, k_measured);
                batch_sum += loss_value(config.loss, y, label);
                double dl_dy = loss_grad_y(config.loss, y, label);
                if (dl_dy != 0.0)
                    grad += dl_dy * param_shift_grad(circuit, result.params, psi, k_measured);
            }
            grad /= static_cast<double>(stop - start);
            adam_update(adam, result.params, grad, config.learning_rate);
            result.batch_loss.push_back(batch_sum / static_cast<double>(stop - start));
            loss_sum += batch_sum;
            loss_count += stop - start;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(loss_count));
        result.epoch_accuracy.push_back(
            accuracy(circuit, result.params, states, labels, k_measured));

        if (config.checkpoint_dir) {
            nlohmann::json j;
            j["epoch"] = epoch;
            j["loss"] = result.epoch_loss.back();
            j["accuracy"] = result.epoch_accuracy.back();
            j["circuit"] = nlohmann::json::parse(circuit_to_text(circuit));
            j["params"] = std::vector<double>(result.params.data(),
                                              result.params.data() + result.params.size());
            j["adam"] = {
                {"step", adam.step},
                {"m", std::vector<double>(adam.m.data(), adam.m.data() + adam.m.size())},
                {"v", std::vector<double>(adam.v.data(), adam.v.data() + adam.v.size())},
            };
            j["rng_cursor"] = rng.cursor_text();
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_%03d.json", epoch);
            std::ofstream out(*config.checkpoint_dir + "/" + name);
            if (!out) throw std::runtime_error("cannot write checkpoint");
            out << j.dump(2) << '\n';
        }

        if (config.target_risk && result.epoch_loss.back() <= *config.target_risk) break;
    }
    return result;
}

double accuracy(const ParamCircuit& circuit, const Eigen::VectorXd& params,
                const std::vector<StateVector>& states, const std::vector<int>& labels,
                int k_measured) {
    int n = check_labels(states, labels);
    int correct = 0;
    for (int i = 0; i < n; ++i) {
        double y = predict(circuit, params, states[static_cast<std::size_t>(i)], k_measured);
        int decided = (y >= 0.0) ? 1 : -1;
        if (decided == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace qaml
