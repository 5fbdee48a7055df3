#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "qaml/classifier.hpp"
#include "qaml/circuits.hpp"
#include "qaml/encodings.hpp"
#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"
#include "test_util.hpp"

using namespace qaml;
using Catch::Matchers::WithinAbs;

namespace {

ParamCircuit single_ry_circuit() {
    ParamCircuit c;
    c.n_qubits = 1;
    c.n_params = 1;
    c.n_layers = 1;
    Gate g;
    g.kind = GateKind::kRY;
    g.q0 = 0;
    g.param_slot = 0;
    c.gates.push_back(g);
    return c;
}

Eigen::VectorXd scalar_param(double theta) {
    Eigen::VectorXd p(1);
    p[0] = theta;
    return p;
}

}  // namespace

TEST_CASE("measured z expectation is the low-bit parity") {
    CHECK_THAT(measured_z_expectation(basis_state(8, 0), 1), WithinAbs(1.0, 0.0));
    CHECK_THAT(measured_z_expectation(basis_state(8, 1), 1), WithinAbs(-1.0, 0.0));
    CHECK_THAT(measured_z_expectation(basis_state(8, 3), 2), WithinAbs(1.0, 0.0));
    CHECK_THAT(measured_z_expectation(basis_state(8, 1), 2), WithinAbs(-1.0, 0.0));

    CHECK((measured_z_operator(3, 2) - testutil::pauli_dense("ZZI")).norm() == 0.0);
    CHECK((measured_z_operator(2, 1) - testutil::pauli_dense("ZI")).norm() == 0.0);

    RngStream rng(70);
    StateVector psi = haar_state(8, rng);
    for (int k : {1, 2, 3}) {
        const double direct = measured_z_expectation(psi, k);
        CHECK_THAT(direct,
                   WithinAbs(expectation(measured_z_operator(3, k), psi), 1e-12));
        DensityMatrix rho = psi * psi.adjoint();
        CHECK_THAT(measured_z_expectation(rho, k), WithinAbs(direct, 1e-12));
    }
}

TEST_CASE("predict frozen values and dense oracle") {
    ParamCircuit id2 = build_hw_efficient(2, 0);
    Eigen::VectorXd no_params(0);

    CHECK_THAT(predict(id2, no_params, encode_angle(Eigen::VectorXd::Zero(2)), 1),
               WithinAbs(1.0, 1e-12));

    Eigen::VectorXd x(2);
    x << M_PI / 2, 0.3;
    CHECK_THAT(predict(id2, no_params, encode_angle(x), 1), WithinAbs(-1.0, 1e-12));

    // Identity circuit, k = 1: y depends only on the measured qubit's angle.
    RngStream rng(71);
    for (int rep = 0; rep < 10; ++rep) {
        x << rng.uniform(0.0, M_PI), rng.uniform(0.0, M_PI);
        CHECK_THAT(predict(id2, no_params, encode_angle(x), 1),
                   WithinAbs(std::cos(2.0 * x[0]), 1e-12));
    }

    ParamCircuit c = build_hw_efficient(4, 2);
    Eigen::VectorXd params(c.n_params);
    for (int i = 0; i < c.n_params; ++i) params[i] = rng.uniform(-M_PI, M_PI);
    for (int k : {1, 2, 4}) {
        StateVector psi = haar_state(16, rng);
        std::string label;
        for (int q = 0; q < 4; ++q) label += q < k ? 'Z' : 'I';
        DenseOperator u = compile(c, params);
        DenseOperator heisenberg = u.adjoint() * testutil::pauli_dense(label) * u;
        const double expected = testutil::naive_expectation(heisenberg, psi).real();
        const double y = predict(c, params, psi, k);
        CHECK_THAT(y, WithinAbs(expected, 1e-10));
        CHECK(std::abs(y) <= 1.0 + 1e-12);

        DensityMatrix rho = psi * psi.adjoint();
        CHECK_THAT(predict(c, params, rho, k), WithinAbs(y, 1e-10));
        CHECK_THAT(predict(c, params, depolarize(rho, 1.0), k), WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("loss frozen values and gradients") {
    CHECK_THAT(loss_value(Loss::kHinge, 1.0, 1), WithinAbs(-1.0, 0.0));
    CHECK_THAT(loss_value(Loss::kHinge, 0.0, -1), WithinAbs(0.0, 0.0));
    RngStream rng(72);
    for (int rep = 0; rep < 5; ++rep) {
        const double y = rng.uniform(-1.0, 1.0);
        const int label = rng.uniform() < 0.5 ? -1 : 1;
        CHECK_THAT(loss_value(Loss::kHinge, y, label), WithinAbs(-label * y, 1e-15));
        CHECK_THAT(loss_grad_y(Loss::kHinge, y, label),
                   WithinAbs(static_cast<double>(-label), 1e-15));
    }

    // Flip objective: minimized when the attacked prediction opposes the label.
    CHECK_THAT(loss_value(Loss::kCrossEntropyFlip, -1.0, 1), WithinAbs(0.0, 1e-8));
    CHECK_THAT(loss_value(Loss::kCrossEntropyFlip, 1.0, 1),
               WithinAbs(-std::log(1e-9), 1e-6));
    CHECK_THAT(loss_value(Loss::kCrossEntropyFlip, 0.0, 1),
               WithinAbs(std::log(2.0), 1e-12));
    CHECK_THAT(loss_value(Loss::kCrossEntropyFlip, 1.0, -1), WithinAbs(0.0, 1e-8));

    for (double y : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
        for (int label : {-1, 1}) {
            const double h = 1e-7;
            const double fd = (loss_value(Loss::kCrossEntropyFlip, y + h, label) -
                               loss_value(Loss::kCrossEntropyFlip, y - h, label)) /
                              (2 * h);
            CHECK_THAT(loss_grad_y(Loss::kCrossEntropyFlip, y, label),
                       WithinAbs(fd, 1e-5));
        }
    }
    // Saturated predictions sit in the clamp, where the gradient is defined
    // as zero.
    CHECK_THAT(loss_grad_y(Loss::kCrossEntropyFlip, 1.0, 1), WithinAbs(0.0, 0.0));
    CHECK_THAT(loss_grad_y(Loss::kCrossEntropyFlip, -1.0, 1), WithinAbs(0.0, 0.0));
}

TEST_CASE("parameter-shift gradient matches closed form and finite differences") {
    ParamCircuit ry = single_ry_circuit();
    StateVector zero = basis_state(2, 0);
    for (int i = 0; i < 20; ++i) {
        const double theta = -M_PI + i * (2 * M_PI / 19.0);
        CHECK_THAT(predict(ry, scalar_param(theta), zero, 1),
                   WithinAbs(std::cos(theta), 1e-12));
        Eigen::VectorXd g = param_shift_grad(ry, scalar_param(theta), zero, 1);
        REQUIRE(g.size() == 1);
        CHECK_THAT(g[0], WithinAbs(-std::sin(theta), 1e-10));
    }

    RngStream rng(73);
    ParamCircuit c = build_hw_efficient(3, 2);
    for (int rep = 0; rep < 3; ++rep) {
        Eigen::VectorXd params(c.n_params);
        for (int i = 0; i < c.n_params; ++i) params[i] = rng.uniform(-M_PI, M_PI);
        StateVector psi = haar_state(8, rng);
        Eigen::VectorXd g = param_shift_grad(c, params, psi, 1);
        const double h = 1e-5;
        for (int i = 0; i < c.n_params; ++i) {
            Eigen::VectorXd up = params, dn = params;
            up[i] += h;
            dn[i] -= h;
            const double fd =
                (predict(c, up, psi, 1) - predict(c, dn, psi, 1)) / (2 * h);
            CHECK_THAT(g[i], WithinAbs(fd, 1e-6));
        }
    }

    ParamCircuit empty = build_hw_efficient(2, 0);
    CHECK(param_shift_grad(empty, Eigen::VectorXd(0), basis_state(4, 0), 1).size() == 0);
}

TEST_CASE("adam update matches the bias-corrected closed form") {
    const double alpha = 0.01;

    AdamState idle(3);
    Eigen::VectorXd params = Eigen::VectorXd::Constant(3, 0.7);
    adam_update(idle, params, Eigen::VectorXd::Zero(3), alpha);
    CHECK((params - Eigen::VectorXd::Constant(3, 0.7)).norm() == 0.0);

    // First step with any constant gradient moves by alpha * sign(g).
    AdamState s(2);
    params = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 3.0, -0.25;
    adam_update(s, params, g, alpha);
    CHECK_THAT(params[0], WithinAbs(-alpha, 1e-6));
    CHECK_THAT(params[1], WithinAbs(alpha, 1e-6));
    CHECK(s.step == 1);

    AdamState a(4), b(4);
    Eigen::VectorXd pa = Eigen::VectorXd::Zero(4), pb = Eigen::VectorXd::Zero(4);
    RngStream rng(74);
    for (int step = 0; step < 100; ++step) {
        Eigen::VectorXd grad(4);
        for (int i = 0; i < 4; ++i) grad[i] = rng.normal();
        Eigen::VectorXd before = pa;
        adam_update(a, pa, grad, alpha);
        adam_update(b, pb, grad, alpha);
        CHECK((pa - pb).norm() == 0.0);
        CHECK((pa - before).norm() <= alpha * std::sqrt(4.0) * 1.001);
    }
}

TEST_CASE("training solves the flipped one-qubit toy task") {
    ParamCircuit c = single_ry_circuit();
    std::vector<StateVector> states = {encode_angle(Eigen::VectorXd::Zero(1)),
                                       encode_angle(scalar_param(M_PI / 2))};
    std::vector<int> labels = {-1, +1};  // forces the optimum to theta = pi

    TrainConfig config;
    config.epochs = 200;
    config.batch_size = 32;
    config.learning_rate = 0.05;
    RngStream rng(75);
    TrainResult r = train(c, scalar_param(0.5), states, labels, 1, config, rng);

    REQUIRE(r.epoch_loss.size() == 200);
    CHECK(r.epoch_loss.back() < -0.9);
    CHECK(r.epoch_accuracy.back() == 1.0);
    for (double v : r.batch_loss) CHECK(std::isfinite(v));
    // Full-batch steps: one batch per epoch.
    CHECK(r.batch_loss.size() == 200);

    // Early stopping cuts the trace short.
    TrainConfig stopper = config;
    stopper.target_risk = -0.5;
    RngStream rng2(75);
    TrainResult early = train(c, scalar_param(0.5), states, labels, 1, stopper, rng2);
    CHECK(early.epoch_loss.size() < 200);
    CHECK(early.epoch_loss.back() <= -0.5);
}

TEST_CASE("training traces stay finite on random circuits") {
    RngStream rng(76);
    for (int rep = 0; rep < 5; ++rep) {
        ParamCircuit c = build_hw_efficient(2, 1);
        std::vector<StateVector> states;
        std::vector<int> labels;
        for (int i = 0; i < 12; ++i) {
            states.push_back(random_product_state(2, rng));
            labels.push_back(rng.uniform() < 0.5 ? -1 : 1);
        }
        Eigen::VectorXd init(c.n_params);
        for (int i = 0; i < c.n_params; ++i) init[i] = rng.uniform(-M_PI, M_PI);
        TrainConfig config;
        config.epochs = 3;
        config.batch_size = 5;
        TrainResult r = train(c, init, states, labels, 1, config, rng);
        REQUIRE(r.batch_loss.size() == 9);  // ceil(12/5) = 3 batches x 3 epochs
        for (double v : r.batch_loss) CHECK(std::isfinite(v));
        for (double v : r.epoch_loss) CHECK(std::isfinite(v));
    }
    CHECK_THROWS(train(build_hw_efficient(2, 1), Eigen::VectorXd::Zero(4), {}, {}, 1,
                       TrainConfig{}, rng));
}

TEST_CASE("checkpoints capture the full training state") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "qaml_ckpt_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    ParamCircuit c = single_ry_circuit();
    std::vector<StateVector> states = {basis_state(2, 0), basis_state(2, 1)};
    std::vector<int> labels = {1, -1};
    TrainConfig config;
    config.epochs = 2;
    config.checkpoint_dir = dir.string();
    RngStream rng(77);
    TrainResult r = train(c, scalar_param(0.3), states, labels, 1, config, rng);

    for (int epoch = 0; epoch < 2; ++epoch) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_%03d.json", epoch);
        std::ifstream in(dir / name);
        REQUIRE(in.good());
        nlohmann::json j = nlohmann::json::parse(in);
        CHECK(j.at("epoch").get<int>() == epoch);
        CHECK(std::isfinite(j.at("loss").get<double>()));
        CHECK(j.at("params").size() == 1);
        CHECK(j.at("adam").at("m").size() == 1);
        CHECK(j.at("adam").at("step").get<long>() > 0);
        CHECK_FALSE(j.at("rng_cursor").get<std::string>().empty());
        ParamCircuit back = circuit_from_text(j.at("circuit").dump());
        CHECK(back.n_params == 1);
    }
    // The last checkpoint's parameters are the returned ones.
    std::ifstream in(dir / "checkpoint_001.json");
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK_THAT(j.at("params")[0].get<double>(), WithinAbs(r.params[0], 0.0));
    fs::remove_all(dir);
}

TEST_CASE("no state inside the confidence ball changes class") {
    // Rejection-sample perturbed states near the |y| trace-distance boundary;
    // everything strictly inside must keep its sign.
    RngStream rng(78);
    int inside_total = 0;
    for (int rep = 0; rep < 3; ++rep) {
        ParamCircuit c = build_hw_efficient(3, 2);
        Eigen::VectorXd params(c.n_params);
        for (int i = 0; i < c.n_params; ++i) params[i] = rng.uniform(-M_PI, M_PI);
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x[j] = rng.uniform(0.0, M_PI);
        StateVector psi = encode_angle(x);
        const double y = predict(c, params, psi, 1);
        if (std::abs(y) < 0.05) continue;

        for (int trial = 0; trial < 400; ++trial) {
            const double eta =
                std::abs(y) * std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
            StateVector chi = haar_state(8, rng);
            StateVector phi = psi + eta * chi;
            phi /= phi.norm();
            if (trace_distance_pure(psi, phi) < std::abs(y)) {
                ++inside_total;
                const double y2 = predict(c, params, phi, 1);
                REQUIRE(y * y2 > 0.0);
            }
        }
    }
    CHECK(inside_total > 100);
}
