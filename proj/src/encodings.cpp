#include "qaml/encodings.hpp"

#include <cmath>
#include <stdexcept>

namespace qaml {

namespace {

constexpr int kMaxEncodedQubits = 24;

void check_qubit_budget(int n) {
    if (n > kMaxEncodedQubits)
        throw std::invalid_argument("encoding would need " + std::to_string(n) +
                                    " qubits; cap is " + std::to_string(kMaxEncodedQubits));
}

}  // namespace

Encoding encoding_from_name(const std::string& name) {
    if (name == "amplitude") return Encoding::kAmplitude;
    if (name == "angle") return Encoding::kAngle;
    if (name == "dense") return Encoding::kDense;
    throw std::invalid_argument("unknown encoding '" + name +
                                "' (expected amplitude|angle|dense)");
}

std::string encoding_name(Encoding e) {
    switch (e) {
        case Encoding::kAmplitude: return "amplitude";
        case Encoding::kAngle: return "angle";
        case Encoding::kDense: return "dense";
    }
    throw std::invalid_argument("bad encoding enum");
}

int qubits_for(Encoding e, int data_dim) {
    if (data_dim < 1) throw std::invalid_argument("empty feature vector");
    switch (e) {
        case Encoding::kAmplitude: {
            int n = 1;
            while ((1 << n) < data_dim) ++n;
            check_qubit_budget(n);
            return n;
        }
        case Encoding::kAngle:
            check_qubit_budget(data_dim);
            return data_dim;
        case Encoding::kDense:
            if (data_dim % 2 != 0)
                throw std::invalid_argument("dense encoding needs an even feature count, got " +
                                            std::to_string(data_dim));
            check_qubit_budget(data_dim / 2);
            return data_dim / 2;
    }
    throw std::invalid_argument("bad encoding enum");
}

StateVector encode_amplitude(const Eigen::VectorXd& x) {
    int n = qubits_for(Encoding::kAmplitude, static_cast<int>(x.size()));
    double norm = x.norm();
    if (norm <= 0.0)
        throw std::invalid_argument("amplitude encoding of the all-zero vector");
    Eigen::Index d = Eigen::Index(1) << n;
    StateVector psi = StateVector::Zero(d);
    for (Eigen::Index j = 0; j < x.size(); ++j) psi(j) = x(j) / norm;
    return psi;
}

StateVector encode_angle(const Eigen::VectorXd& x) {
    int n = qubits_for(Encoding::kAngle, static_cast<int>(x.size()));
    StateVector out = StateVector::Ones(1);
    for (int q = 0; q < n; ++q) {
        double c = std::cos(x(q)), s = std::sin(x(q));
        StateVector next(out.size() * 2);
        next.head(out.size()) = c * out;
        next.tail(out.size()) = s * out;
        out.swap(next);
    }
    return out;
}

StateVector encode_dense(const Eigen::VectorXd& x) {
    int n = qubits_for(Encoding::kDense, static_cast<int>(x.size()));
    StateVector out = StateVector::Ones(1);
    for (int q = 0; q < n; ++q) {
        double a = x(2 * q), b = x(2 * q + 1);
        Complex lo = std::polar(1.0, -b) * std::cos(a);
        Complex hi = std::polar(1.0, +b) * std::sin(a);
        StateVector next(out.size() * 2);
        next.head(out.size()) = lo * out;
        next.tail(out.size()) = hi * out;
        out.swap(next);
    }
    return out;
}

StateVector encode(Encoding e, const Eigen::VectorXd& x) {
    switch (e) {
        case Encoding::kAmplitude: return encode_amplitude(x);
        case Encoding::kAngle: return encode_angle(x);
        case Encoding::kDense: return encode_dense(x);
    }
    throw std::invalid_argument("bad encoding enum");
}

Eigen::VectorXd perturb(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                        double eps) {
    if (x.size() != w.size())
        throw std::invalid_argument("perturb: size mismatch");
    if (eps < 0.0) throw std::invalid_argument("perturb: eps < 0");
    if (w.size() > 0 && w.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("perturb: attack direction entries must satisfy |w_j| <= 1");
    return x + eps * w;
}

ShiftFit measure_state_shift(Encoding e, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& w,
                             const std::vector<double>& eps_grid) {
    if (eps_grid.size() < 3)
        throw std::invalid_argument("measure_state_shift: need at least 3 grid points");
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        if (eps_grid[i] <= eps_grid[i - 1])
            throw std::invalid_argument("measure_state_shift: grid must increase");

    StateVector base = encode(e, x);
    ShiftFit fit;
    for (double eps : eps_grid) {
        StateVector shifted = encode(e, perturb(x, w, eps));
        fit.eps.push_back(eps);
        fit.shift.push_back(trace_distance_pure(base, shifted));
    }

    // Least squares through the origin on the three smallest points.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        num += fit.eps[i] * fit.shift[i];
        den += fit.eps[i] * fit.eps[i];
    }
    fit.coefficient = num / den;

    // Log-log slope over the whole grid.
    double mx = 0.0, my = 0.0;
    std::size_t m = fit.eps.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (fit.shift[i] <= 0.0)
            throw std::invalid_argument("measure_state_shift: zero shift; w has no effect");
        mx += std::log(fit.eps[i]);
        my += std::log(fit.shift[i]);
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double dx = std::log(fit.eps[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.shift[i]) - my);
    }
    fit.loglog_slope = sxy / sxx;
    return fit;
}

double angle_shift_coefficient(const Eigen::VectorXd& w) {
    return 2.0 * w.norm();
}

double dense_shift_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    if (x.size() != w.size() || x.size() % 2 != 0)
        throw std::invalid_argument("dense_shift_coefficient: bad sizes");
    double acc = 0.0;
    for (Eigen::Index j = 0; 2 * j < x.size(); ++j) {
        double wy = w(2 * j), wz = w(2 * j + 1);
        double s = std::sin(2.0 * x(2 * j));
        acc += wy * wy + s * s * wz * wz;
    }
    return 2.0 * std::sqrt(acc);
}

double amplitude_shift_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    if (x.size() != w.size())
        throw std::invalid_argument("amplitude_shift_coefficient: size mismatch");
    double nx2 = x.squaredNorm();
    if (nx2 <= 0.0) throw std::invalid_argument("amplitude_shift_coefficient: zero x");
    double q = w.squaredNorm() / nx2 - (x.dot(w) * x.dot(w)) / (nx2 * nx2);
    return 2.0 * std::sqrt(std::max(0.0, q));
}

double local_amplitude_shift(const Eigen::VectorXd& x, int l, RngStream& rng,
                             int start, LocalAttackRule rule) {
    Eigen::Index n = x.size();
    if (l < 0 || l > n) throw std::invalid_argument("local_amplitude_shift: l out of range");
    if (start < 0 || start + l > n)
        throw std::invalid_argument("local_amplitude_shift: window out of range");
    if (l == 0) return 0.0;

    Eigen::VectorXd xp = x;
    if (rule == LocalAttackRule::kNegate) {
        for (int j = start; j < start + l; ++j) xp(j) = -x(j);
    } else {
        double lo = x.minCoeff(), hi = x.maxCoeff();
        for (int j = start; j < start + l; ++j) xp(j) = rng.uniform(lo, hi);
    }
    StateVector a = encode_amplitude(x);
    StateVector b = encode_amplitude(xp);
    return (a - b).norm();
}

}  // namespace qaml
