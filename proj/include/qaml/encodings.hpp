#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qaml/linalg.hpp"
#include "qaml/rng.hpp"

namespace qaml {

enum class Encoding { kAmplitude, kAngle, kDense };

Encoding encoding_from_name(const std::string& name);
std::string encoding_name(Encoding e);

// Qubits used by an encoding of a length-N feature vector:
// amplitude ceil(log2 N) (zero-padded, N >= 1), angle N, dense N/2 (N even).
int qubits_for(Encoding e, int data_dim);

// x_j / ||x|| into computational-basis amplitudes, zero-padded to the next
// power of two. Throws on an all-zero vector.
StateVector encode_amplitude(const Eigen::VectorXd& x);

// Product of e^{-i x_j sigma_y}|0> = (cos x_j, sin x_j), qubit j <- entry j.
StateVector encode_angle(const Eigen::VectorXd& x);

// Two entries per qubit: e^{-i x_{2j+1} sigma_z} e^{-i x_{2j} sigma_y}|0>
// (zero-based pairs), so qubit j carries (e^{-i x_{2j+1}} cos x_{2j},
// e^{+i x_{2j+1}} sin x_{2j}).
StateVector encode_dense(const Eigen::VectorXd& x);

StateVector encode(Encoding e, const Eigen::VectorXd& x);

// x + eps * w; requires matching sizes, eps >= 0, and max_j |w_j| <= 1.
Eigen::VectorXd perturb(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                        double eps);

inline const std::vector<double> kDefaultEpsGrid = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

struct ShiftFit {
    double coefficient = 0.0;   // least-squares Delta/eps on the smallest points
    double loglog_slope = 0.0;  // regression slope over the full grid
    std::vector<double> eps;
    std::vector<double> shift;  // trace distance per grid point
};

// Simulates the encoded-state trace distance over the epsilon grid and fits
// the linear coefficient on the three smallest grid points.
ShiftFit measure_state_shift(Encoding e, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& w,
                             const std::vector<double>& eps_grid = kDefaultEpsGrid);

// First-order closed forms for the fitted coefficient (trace-distance units).
// angle:      2 sqrt(sum_j w_j^2)
// dense:      2 sqrt(sum_j (w_{2j}^2 + sin^2(2 x_{2j}) w_{2j+1}^2)), zero-based
// amplitude:  2 sqrt(||w||^2/||x||^2 - <x,w>^2/||x||^4)   (N-independent)
double angle_shift_coefficient(const Eigen::VectorXd& w);
double dense_shift_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& w);
double amplitude_shift_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& w);

enum class LocalAttackRule {
    kResampleRange,  // overwrite attacked entries with fresh draws in [min, max] of x
    kNegate,         // w = -2x on the attacked entries (sign flip of the data)
};

// Strong attack on l contiguous entries starting at `start` (wrapping is an
// error). Returns the Euclidean shift || psi(x) - psi(x') ||_2 of the
// amplitude-encoded statevector, equal to sqrt(2 (1 - <xhat, xhat'>)); the
// trace distance between the encoded rays is at most twice this value.
double local_amplitude_shift(const Eigen::VectorXd& x, int l, RngStream& rng,
                             int start = 0,
                             LocalAttackRule rule = LocalAttackRule::kResampleRange);

}  // namespace qaml
