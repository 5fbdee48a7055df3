#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qaml/encodings.hpp"
#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"
#include "test_util.hpp"

using namespace qaml;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Independent single-qubit oracle: literal matrix exponential of the rotation
// generators, kron'd high-qubit-first, instead of the closed-form cos/sin used
// by the encoders.
StateVector exp_oracle_angle(const Eigen::VectorXd& x) {
    StateVector psi = StateVector::Ones(1);
    for (int j = static_cast<int>(x.size()) - 1; j >= 0; --j) {
        Eigen::Matrix2cd gen = -kI * x[j] * testutil::pauli_matrix('Y');
        Eigen::Vector2cd q = gen.exp() * Eigen::Vector2cd(1.0, 0.0);
        psi = testutil::naive_kron(psi, q);
    }
    return psi;
}

StateVector exp_oracle_dense(const Eigen::VectorXd& x) {
    StateVector psi = StateVector::Ones(1);
    for (int j = static_cast<int>(x.size()) / 2 - 1; j >= 0; --j) {
        Eigen::Matrix2cd gy = -kI * x[2 * j] * testutil::pauli_matrix('Y');
        Eigen::Matrix2cd gz = -kI * x[2 * j + 1] * testutil::pauli_matrix('Z');
        Eigen::Vector2cd q = gz.exp() * (gy.exp() * Eigen::Vector2cd(1.0, 0.0));
        psi = testutil::naive_kron(psi, q);
    }
    return psi;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.dot(b));
}

// Finite-difference estimate of the leading trace-distance coefficient,
// independent of the fitting code under test.
double fd_coefficient(Encoding e, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& w, double eps = 1e-5) {
    return trace_distance_pure(encode(e, x), encode(e, perturb(x, w, eps))) / eps;
}

// Purity of the one-qubit reduced state of qubit q.
double single_qubit_purity(const StateVector& psi, int q) {
    const int n = qubit_count(psi.size());
    const std::size_t rest = std::size_t{1} << (n - 1);
    auto insert_bit = [q](std::size_t m, std::size_t b) {
        const std::size_t low = m & ((std::size_t{1} << q) - 1);
        return ((m >> q) << (q + 1)) | (b << q) | low;
    };
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    for (std::size_t m = 0; m < rest; ++m)
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b)
                rho(a, b) += psi[insert_bit(m, a)] * std::conj(psi[insert_bit(m, b)]);
    return (rho * rho).trace().real();
}

}  // namespace

TEST_CASE("encoding names round-trip") {
    for (Encoding e : {Encoding::kAmplitude, Encoding::kAngle, Encoding::kDense})
        CHECK(encoding_from_name(encoding_name(e)) == e);
    CHECK_THROWS(encoding_from_name("fourier"));
}

TEST_CASE("qubit counts per encoding") {
    CHECK(qubits_for(Encoding::kAmplitude, 4) == 2);
    CHECK(qubits_for(Encoding::kAmplitude, 5) == 3);
    CHECK(qubits_for(Encoding::kAngle, 7) == 7);
    CHECK(qubits_for(Encoding::kDense, 6) == 3);
    CHECK_THROWS(qubits_for(Encoding::kDense, 5));
}

TEST_CASE("amplitude encoding frozen values") {
    Eigen::VectorXd basis(4);
    basis << 1, 0, 0, 0;
    StateVector psi = encode_amplitude(basis);
    REQUIRE(psi.size() == 4);
    CHECK_THAT(std::abs(psi[0]), WithinAbs(1.0, 1e-15));

    Eigen::VectorXd uniform = Eigen::VectorXd::Ones(4);
    psi = encode_amplitude(uniform);
    for (int i = 0; i < 4; ++i)
        CHECK_THAT(psi[i].real(), WithinAbs(0.5, 1e-15));

    Eigen::VectorXd pythagorean(2);
    pythagorean << 3, 4;
    psi = encode_amplitude(pythagorean);
    REQUIRE(psi.size() == 2);
    CHECK_THAT(psi[0].real(), WithinAbs(0.6, 1e-15));
    CHECK_THAT(psi[1].real(), WithinAbs(0.8, 1e-15));

    Eigen::VectorXd padded(3);
    padded << 1, 1, 1;
    psi = encode_amplitude(padded);
    REQUIRE(psi.size() == 4);
    CHECK_THAT(psi[2].real(), WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
    CHECK_THAT(std::abs(psi[3]), WithinAbs(0.0, 1e-15));

    CHECK_THROWS(encode_amplitude(Eigen::VectorXd::Zero(4)));
}

TEST_CASE("angle encoding frozen values and exponential oracle") {
    const int n = 3;
    StateVector psi = encode_angle(Eigen::VectorXd::Zero(n));
    CHECK_THAT(std::abs(psi[0]), WithinAbs(1.0, 1e-15));

    psi = encode_angle(Eigen::VectorXd::Constant(n, M_PI / 2));
    CHECK_THAT(std::abs(psi[(1 << n) - 1]), WithinAbs(1.0, 1e-12));

    psi = encode_angle(Eigen::VectorXd::Constant(n, M_PI / 4));
    for (int i = 0; i < (1 << n); ++i)
        CHECK_THAT(psi[i].real(), WithinAbs(std::pow(2.0, -n / 2.0), 1e-12));

    // Entry j lands on qubit j (little-endian): exciting entry 0 flips bit 0.
    Eigen::VectorXd ordered = Eigen::VectorXd::Zero(2);
    ordered[0] = M_PI / 2;
    psi = encode_angle(ordered);
    CHECK_THAT(std::abs(psi[1]), WithinAbs(1.0, 1e-12));

    RngStream rng(41);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd x(n);
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(-2.0, 2.0);
        CHECK(fidelity(encode_angle(x), exp_oracle_angle(x)) >= 1.0 - 1e-12);
    }
}

TEST_CASE("dense encoding frozen values and exponential oracle") {
    StateVector psi = encode_dense(Eigen::VectorXd::Zero(4));
    CHECK_THAT(std::abs(psi[0]), WithinAbs(1.0, 1e-15));

    Eigen::VectorXd flip(2);
    flip << M_PI / 2, 0.7;
    psi = encode_dense(flip);
    REQUIRE(psi.size() == 2);
    CHECK_THAT(std::abs(psi[1]), WithinAbs(1.0, 1e-12));

    RngStream rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd x(6);
        for (int j = 0; j < 6; ++j) x[j] = rng.uniform(-2.0, 2.0);
        CHECK(fidelity(encode_dense(x), exp_oracle_dense(x)) >= 1.0 - 1e-12);
    }

    CHECK_THROWS(encode_dense(Eigen::VectorXd::Zero(3)));
}

TEST_CASE("perturb applies eps-scaled direction") {
    Eigen::VectorXd x(4);
    x << 1, 2, 3, 4;

    CHECK(perturb(x, Eigen::VectorXd::Ones(4), 0.0).isApprox(x));

    Eigen::VectorXd support = Eigen::VectorXd::Zero(4);
    support[3] = 1.0;
    Eigen::VectorXd shifted = perturb(x, support, 0.5);
    CHECK_THAT(shifted[3], WithinAbs(4.5, 1e-15));
    for (int j = 0; j < 3; ++j) CHECK_THAT(shifted[j], WithinAbs(x[j], 0.0));

    RngStream rng(7);
    Eigen::VectorXd w(4);
    for (int j = 0; j < 4; ++j) w[j] = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd roundtrip = perturb(perturb(x, w, 0.3), -w, 0.3);
    CHECK((roundtrip - x).cwiseAbs().maxCoeff() <= 1e-14);

    CHECK_THROWS(perturb(x, Eigen::VectorXd::Constant(4, 1.5), 0.1));
    CHECK_THROWS(perturb(x, w, -0.1));
    CHECK_THROWS(perturb(x, Eigen::VectorXd::Ones(3), 0.1));
}

TEST_CASE("encoders emit unit-norm product states") {
    RngStream rng(43);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd x(8);
        for (int j = 0; j < 8; ++j) x[j] = rng.uniform(-3.0, 3.0);

        for (Encoding e : {Encoding::kAmplitude, Encoding::kAngle, Encoding::kDense}) {
            StateVector psi = encode(e, x);
            CHECK_THAT(psi.norm(), WithinAbs(1.0, 1e-10));
        }
        for (Encoding e : {Encoding::kAngle, Encoding::kDense}) {
            StateVector psi = encode(e, x);
            for (int q = 0; q < qubit_count(psi.size()); ++q)
                CHECK_THAT(single_qubit_purity(psi, q), WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("angle shift coefficient is 2 sqrt(N) for unit directions") {
    const int n = 6;
    RngStream rng(44);
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = rng.uniform(0.0, M_PI / 2);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);

    ShiftFit fit = measure_state_shift(Encoding::kAngle, x, w);
    CHECK_THAT(fit.coefficient, WithinRel(2.0 * std::sqrt(double(n)), 0.05));
    CHECK_THAT(angle_shift_coefficient(w), WithinAbs(2.0 * std::sqrt(double(n)), 1e-12));

    for (int rep = 0; rep < 5; ++rep) {
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(-2.0, 2.0);
        for (int j = 0; j < n; ++j) w[j] = rng.uniform(-1.0, 1.0);
        CHECK_THAT(fd_coefficient(Encoding::kAngle, x, w),
                   WithinRel(angle_shift_coefficient(w), 1e-3));
    }
}

TEST_CASE("dense shift coefficient matches finite differences") {
    const int kFeatures = 8;
    RngStream rng(45);
    for (int rep = 0; rep < 8; ++rep) {
        Eigen::VectorXd x(kFeatures), w(kFeatures);
        for (int j = 0; j < kFeatures; ++j) x[j] = rng.uniform(-2.0, 2.0);
        for (int j = 0; j < kFeatures; ++j) w[j] = rng.uniform(-1.0, 1.0);
        const double expected = dense_shift_coefficient(x, w);
        CHECK_THAT(fd_coefficient(Encoding::kDense, x, w), WithinRel(expected, 1e-3));
        ShiftFit fit = measure_state_shift(Encoding::kDense, x, w);
        CHECK_THAT(fit.coefficient, WithinRel(expected, 0.05));
    }
}

TEST_CASE("amplitude shift coefficient is feature-count independent") {
    // Matched geometry across sizes: x = r e0, w = e1, so the orthogonal
    // component of w/||x|| is 1/r at every N.
    const double r = 1.7;
    std::vector<double> fits;
    for (int n_features : {8, 32, 128, 512}) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_features);
        x[0] = r;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n_features);
        w[1] = 1.0;
        ShiftFit fit = measure_state_shift(Encoding::kAmplitude, x, w);
        fits.push_back(fit.coefficient);
        CHECK_THAT(amplitude_shift_coefficient(x, w), WithinAbs(2.0 / r, 1e-12));
        CHECK_THAT(fd_coefficient(Encoding::kAmplitude, x, w),
                   WithinRel(2.0 / r, 1e-3));
    }
    const auto [lo, hi] = std::minmax_element(fits.begin(), fits.end());
    CHECK(*hi / *lo < 1.05);

    // Generic direction: the coefficient only sees the component of w
    // orthogonal to x.
    RngStream rng(46);
    Eigen::VectorXd x(16), w(16);
    for (int j = 0; j < 16; ++j) x[j] = rng.uniform(0.2, 1.0);
    for (int j = 0; j < 16; ++j) w[j] = rng.uniform(-1.0, 1.0);
    CHECK_THAT(fd_coefficient(Encoding::kAmplitude, x, w),
               WithinRel(amplitude_shift_coefficient(x, w), 1e-3));
}

TEST_CASE("shift scaling is first order in eps") {
    RngStream rng(47);
    for (Encoding e : {Encoding::kAmplitude, Encoding::kAngle, Encoding::kDense}) {
        Eigen::VectorXd x(8), w(8);
        for (int j = 0; j < 8; ++j) x[j] = rng.uniform(0.3, 1.5);
        for (int j = 0; j < 8; ++j) w[j] = rng.uniform(-1.0, 1.0);
        ShiftFit fit = measure_state_shift(e, x, w);
        CHECK_THAT(fit.loglog_slope, WithinAbs(1.0, 0.02));
        REQUIRE(fit.eps.size() == kDefaultEpsGrid.size());
        for (std::size_t i = 1; i < fit.shift.size(); ++i)
            CHECK(fit.shift[i] >= fit.shift[i - 1]);
    }
    CHECK_THROWS(measure_state_shift(Encoding::kAngle, Eigen::VectorXd::Ones(2),
                                     Eigen::VectorXd::Ones(2), {}));
}

TEST_CASE("local amplitude attacks scale with the attacked fraction") {
    RngStream rng(48);
    Eigen::VectorXd x(16);
    for (int j = 0; j < 16; ++j) x[j] = rng.uniform(0.5, 1.0);

    CHECK_THAT(local_amplitude_shift(x, 0, rng), WithinAbs(0.0, 1e-15));
    CHECK_THAT(local_amplitude_shift(x, 16, rng, 0, LocalAttackRule::kNegate),
               WithinAbs(2.0, 1e-12));

    // One percent of entries attacked: shift stays small.
    const int kFeatures = 200;
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd big(kFeatures);
        for (int j = 0; j < kFeatures; ++j) big[j] = rng.uniform(0.5, 1.0);
        const int start = static_cast<int>(rng.uniform_index(kFeatures - 2));
        const double shift = local_amplitude_shift(big, 2, rng, start);
        CHECK(shift >= 0.0);
        CHECK(shift <= 0.1);
    }

    CHECK_THROWS(local_amplitude_shift(x, 8, rng, 12));
}
