#include "qaml/attacks.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "qaml/circuits.hpp"

namespace qaml {

namespace {

int sign_pm(double v) { return v >= 0.0 ? 1 : -1; }

DenseOperator measured_z_dense(int n_qubits, int k_measured) {
    if (k_measured < 1 || k_measured > n_qubits)
        throw std::invalid_argument("k_measured out of range");
    Eigen::Index d = Eigen::Index(1) << n_qubits;
    std::uint64_t mask = (1ull << k_measured) - 1;
    DenseOperator z = DenseOperator::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        z(i, i) = (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -1.0 : 1.0;
    return z;
}

AttackReport evaluate_states(const DenseOperator& w, const DenseOperator& zu,
                             const std::vector<StateVector>& states) {
    AttackReport rep;
    rep.trials = static_cast<int>(states.size());
    double dy_sum = 0.0;
    for (const auto& psi : states) {
        double y = expectation(zu, psi);
        StateVector attacked = w * psi;
        double yp = expectation(zu, attacked);
        if (std::abs(y) < 1e-12) {
            ++rep.ties;
            continue;
        }
        if (sign_pm(yp) == -sign_pm(y)) ++rep.success_count;
        dy_sum += std::abs(yp - y);
    }
    int effective = rep.trials - rep.ties;
    rep.success_fraction =
        effective > 0 ? static_cast<double>(rep.success_count) / effective : 0.0;
    rep.mean_abs_dy = effective > 0 ? dy_sum / effective : 0.0;
    return rep;
}

PauliString random_nonidentity_pauli(int n_qubits, RngStream& rng) {
    std::uint64_t count = (1ull << (2 * n_qubits)) - 1;
    std::uint64_t idx = 1 + rng.uniform_index(count);
    PauliString p = PauliString::identity(n_qubits);
    p.x = idx & ((1ull << n_qubits) - 1);
    p.z = idx >> n_qubits;
    return p;
}

}  // namespace

UniversalAttack build_exact_universal(const DenseOperator& u, int k_measured) {
    if (!is_unitary(u)) throw std::invalid_argument("build_exact_universal: non-unitary");
    int n = qubit_count(u.rows());
    if (k_measured < 1 || k_measured > n)
        throw std::invalid_argument("build_exact_universal: bad k_measured");
    PauliString flip = PauliString::identity(n);
    flip.x = 1;  // X on qubit 0 anticommutes with sigma_z^k for every k >= 1
    UniversalAttack attack;
    attack.w = u.adjoint() * flip.materialize() * u;
    attack.provenance = AttackProvenance::kExactFlipConjugate;
    return attack;
}

UniversalAttack build_approx_universal(const DenseOperator& w_univ, double eps, RngStream& rng) {
    if (!is_unitary(w_univ)) throw std::invalid_argument("build_approx_universal: non-unitary");
    if (eps < 0.0 || eps > 2.0) throw std::invalid_argument("build_approx_universal: eps in [0,2]");
    int n = qubit_count(w_univ.rows());
    double sqrt_d = std::sqrt(static_cast<double>(w_univ.rows()));
    double target = eps * sqrt_d;
    double tol = 1e-6 * sqrt_d;

    constexpr int kMaxDraws = 64;
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
        PauliString p = random_nonidentity_pauli(n, rng);
        DenseOperator pd = p.materialize();
        DenseOperator wp = w_univ * pd;
        DenseOperator pw = pd * w_univ;
        DenseOperator pwp = pw * pd;
        auto rotated = [&](double t) {
            double c = std::cos(t), s = std::sin(t);
            return DenseOperator(c * c * w_univ + s * s * pwp +
                                 Complex(0.0, 1.0) * (c * s) * (wp - pw));
        };
        auto distance = [&](double t) { return (rotated(t) - w_univ).norm(); };

        double t = 0.0;
        if (target > 0.0) {
            // distance(t) rises monotonically from 0 on [0, pi/2]; bisect if
            // the peak reaches the target, otherwise resample P.
            if (distance(M_PI_2) < target - tol) continue;
            double lo = 0.0, hi = M_PI_2;
            while (hi - lo > 1e-12) {
                double mid = 0.5 * (lo + hi);
                (distance(mid) < target ? lo : hi) = mid;
            }
            t = 0.5 * (lo + hi);
            if (std::abs(distance(t) - target) > tol) continue;
        }
        UniversalAttack attack;
        attack.w = rotated(t);
        attack.provenance = AttackProvenance::kPauliRotatedApprox;
        attack.target_eps = eps;
        attack.generator = p;
        attack.angle = t;
        return attack;
    }
    throw std::runtime_error("build_approx_universal: target unreachable after 64 draws");
}

AttackReport success_fraction(const UniversalAttack& attack, const DenseOperator& zu,
                              StateSource source, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("success_fraction: trials < 1");
    if (attack.w.rows() != zu.rows())
        throw std::invalid_argument("success_fraction: dimension mismatch");
    int n = qubit_count(zu.rows());
    RngStream rng(seed);
    std::vector<StateVector> states;
    states.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t)
        states.push_back(source == StateSource::kHaar ? haar_state(zu.rows(), rng)
                                                      : random_product_state(n, rng));
    AttackReport rep = evaluate_states(attack.w, zu, states);
    rep.seed = seed;
    char echo[96];
    std::snprintf(echo, sizeof(echo), "source=%s trials=%d",
                  source == StateSource::kHaar ? "haar" : "product", trials);
    rep.config_echo = echo;
    return rep;
}

AttackReport success_fraction_on_states(const UniversalAttack& attack, const DenseOperator& zu,
                                        const std::vector<StateVector>& states) {
    if (states.empty()) throw std::invalid_argument("success_fraction_on_states: no states");
    AttackReport rep = evaluate_states(attack.w, zu, states);
    rep.config_echo = "source=supplied";
    return rep;
}

std::vector<SuccessCurveRow> haar_success_curve(const DenseOperator& u, int k_measured,
                                                const std::vector<double>& eps_grid, int trials,
                                                std::uint64_t seed) {
    UniversalAttack exact = build_exact_universal(u, k_measured);
    int n = qubit_count(u.rows());
    DenseOperator zu = u.adjoint() * measured_z_dense(n, k_measured) * u;
    double sqrt_d = std::sqrt(static_cast<double>(u.rows()));

    RngStream root(seed);
    std::vector<SuccessCurveRow> rows;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        RngStream builder = root.child(i);
        UniversalAttack attack = build_approx_universal(exact.w, eps_grid[i], builder);
        std::uint64_t eval_seed = root.child(1000 + i).next_u64();
        AttackReport rep = success_fraction(attack, zu, StateSource::kHaar, trials, eval_seed);

        DenseOperator pd = attack.generator->materialize();
        DenseOperator comm = pd * zu - zu * pd;
        double one_arg = eps_grid[i] * comm.norm() / sqrt_d;
        DenseOperator shift = comm + exact.w.adjoint() * comm * exact.w;
        double two_arg = attack.angle * shift.norm() / sqrt_d;

        SuccessCurveRow row;
        row.eps = eps_grid[i];
        row.empirical = rep.success_fraction;
        row.analytic_one_term = 1.0 - std::atan(one_arg) / M_PI;
        row.analytic_two_term = 1.0 - std::atan(two_arg) / M_PI;
        rows.push_back(row);
    }
    return rows;
}

TwoEpsCheck verify_2eps_spoof(const DenseOperator& zu, const DenseOperator& w_univ,
                              const DenseOperator& w, int trials, RngStream& rng) {
    if (zu.rows() != w_univ.rows() || zu.rows() != w.rows())
        throw std::invalid_argument("verify_2eps_spoof: dimension mismatch");
    if (trials < 1) throw std::invalid_argument("verify_2eps_spoof: trials < 1");
    TwoEpsCheck check;
    check.bound = 2.0 * spectral_distance(w_univ, w);
    for (int t = 0; t < trials; ++t) {
        StateVector psi = haar_state(zu.rows(), rng);
        double y = expectation(zu, psi);
        StateVector attacked = w * psi;
        double yp = expectation(zu, attacked);
        check.max_abs_sum = std::max(check.max_abs_sum, std::abs(y + yp));
    }
    if (check.max_abs_sum > check.bound + 1e-9)
        throw std::logic_error("verify_2eps_spoof: exact inequality violated");
    return check;
}

DenseOperator compile_product_adversary(const Eigen::VectorXd& params) {
    if (params.size() == 0 || params.size() % 3 != 0)
        throw std::invalid_argument("compile_product_adversary: need 3 params per qubit");
    int n = static_cast<int>(params.size() / 3);
    DenseOperator w;
    for (int q = 0; q < n; ++q) {
        Eigen::Matrix2cd a = rz_matrix(params(3 * q + 1)) * ry_matrix(params(3 * q)) *
                             rz_matrix(params(3 * q + 2));
        w = (q == 0) ? DenseOperator(a) : kron(a, w);
    }
    return w;
}

namespace {

struct QubitBlocks {
    // zu restricted to (row bit = a, col bit = c) of one qubit.
    std::array<std::array<Eigen::MatrixXcd, 2>, 2> block;
    std::array<std::vector<Eigen::Index>, 2> index;  // basis indices with bit = e
};

std::vector<QubitBlocks> build_blocks(const DenseOperator& zu, int n) {
    std::vector<QubitBlocks> blocks(static_cast<std::size_t>(n));
    Eigen::Index d = zu.rows();
    for (int q = 0; q < n; ++q) {
        auto& b = blocks[static_cast<std::size_t>(q)];
        for (Eigen::Index i = 0; i < d; ++i)
            b.index[(i >> q) & 1].push_back(i);
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c)
                b.block[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] =
                    zu(b.index[static_cast<std::size_t>(a)], b.index[static_cast<std::size_t>(c)]);
    }
    return blocks;
}

Eigen::Matrix2cd adversary_site(const Eigen::VectorXd& params, int q, int shifted_slot,
                                double shift) {
    double theta = params(3 * q) + (shifted_slot == 0 ? shift : 0.0);
    double phi = params(3 * q + 1) + (shifted_slot == 1 ? shift : 0.0);
    double lambda = params(3 * q + 2) + (shifted_slot == 2 ? shift : 0.0);
    return rz_matrix(phi) * ry_matrix(theta) * rz_matrix(lambda);
}

// Quartic form giving <psi'|Z_U|psi'> as a function of one site matrix B with
// every other site folded into the cached T tensor.
struct SiteForm {
    std::array<std::array<std::array<std::array<Complex, 2>, 2>, 2>, 2> t;  // [a][c][b][e]

    double eval(const Eigen::Matrix2cd& b) const {
        Complex acc(0.0, 0.0);
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb)
                for (int c = 0; c < 2; ++c)
                    for (int e = 0; e < 2; ++e)
                        acc += std::conj(b(a, bb)) * b(c, e) * t[static_cast<std::size_t>(a)]
                                   [static_cast<std::size_t>(c)][static_cast<std::size_t>(bb)]
                                   [static_cast<std::size_t>(e)];
        return acc.real();
    }
};

SiteForm site_form(const QubitBlocks& qb, const StateVector& chi) {
    std::array<Eigen::VectorXcd, 2> half;
    for (int e = 0; e < 2; ++e) half[static_cast<std::size_t>(e)] = chi(qb.index[static_cast<std::size_t>(e)]);
    SiteForm form;
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
            for (int e = 0; e < 2; ++e) {
                Eigen::VectorXcd v =
                    qb.block[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] *
                    half[static_cast<std::size_t>(e)];
                for (int b = 0; b < 2; ++b)
                    form.t[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]
                          [static_cast<std::size_t>(b)][static_cast<std::size_t>(e)] =
                        half[static_cast<std::size_t>(b)].dot(v);
            }
        }
    return form;
}

}  // namespace

AdversaryResult train_product_adversary(const DenseOperator& u, int k_measured,
                                        const std::vector<StateVector>& train_states,
                                        const std::vector<int>& train_labels,
                                        const std::vector<StateVector>& test_states,
                                        const AdversaryConfig& config, RngStream& rng) {
    if (!is_unitary(u)) throw std::invalid_argument("train_product_adversary: non-unitary");
    if (config.epochs < 1 || config.batch_size < 1 || config.train_states < 1 ||
        config.test_states < 1)
        throw std::invalid_argument("train_product_adversary: bad config");
    int n = qubit_count(u.rows());
    DenseOperator zu = u.adjoint() * measured_z_dense(n, k_measured) * u;
    std::vector<QubitBlocks> blocks = build_blocks(zu, n);

    std::vector<StateVector> states = train_states;
    std::vector<int> labels = train_labels;
    if (states.empty()) {
        for (int t = 0; t < config.train_states; ++t) {
            StateVector psi = random_product_state(n, rng);
            labels.push_back(sign_pm(expectation(zu, psi)));
            states.push_back(std::move(psi));
        }
    } else if (states.size() != labels.size()) {
        throw std::invalid_argument("train_product_adversary: states/labels size mismatch");
    }

    std::vector<StateVector> held_out = test_states;
    if (held_out.empty())
        for (int t = 0; t < config.test_states; ++t)
            held_out.push_back(random_product_state(n, rng));

    AdversaryResult result;
    result.params.resize(3 * n);
    for (Eigen::Index i = 0; i < result.params.size(); ++i)
        result.params(i) = rng.uniform(-M_PI, M_PI);

    AdamState adam(result.params.size());
    std::vector<int> order(states.size());
    std::iota(order.begin(), order.end(), 0);
    int total = static_cast<int>(states.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < total; start += config.batch_size) {
            int stop = std::min(total, start + config.batch_size);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(result.params.size());
            double batch_sum = 0.0;
            for (int s = start; s < stop; ++s) {
                int idx = order[static_cast<std::size_t>(s)];
                const StateVector& psi = states[static_cast<std::size_t>(idx)];
                int label = labels[static_cast<std::size_t>(idx)];

                StateVector full = psi;
                for (int q = 0; q < n; ++q)
                    apply_single_qubit(full, q, adversary_site(result.params, q, -1, 0.0));
                double y = expectation(zu, full);
                batch_sum += loss_value(Loss::kCrossEntropyFlip, y, label);
                double dl_dy = loss_grad_y(Loss::kCrossEntropyFlip, y, label);
                if (dl_dy == 0.0) continue;

                for (int q = 0; q < n; ++q) {
                    StateVector chi = psi;
                    for (int p = 0; p < n; ++p)
                        if (p != q)
                            apply_single_qubit(chi, p, adversary_site(result.params, p, -1, 0.0));
                    SiteForm form = site_form(blocks[static_cast<std::size_t>(q)], chi);
                    for (int slot = 0; slot < 3; ++slot) {
                        double plus = form.eval(adversary_site(result.params, q, slot, M_PI_2));
                        double minus = form.eval(adversary_site(result.params, q, slot, -M_PI_2));
                        grad(3 * q + slot) += dl_dy * 0.5 * (plus - minus);
                    }
                }
            }
            grad /= static_cast<double>(stop - start);
            adam_update(adam, result.params, grad, config.learning_rate);
            result.batch_loss.push_back(batch_sum / static_cast<double>(stop - start));
        }
    }

    result.attack.w = compile_product_adversary(result.params);
    result.attack.provenance = AttackProvenance::kLearnedProduct;
    result.report = success_fraction_on_states(result.attack, zu, held_out);
    char echo[128];
    std::snprintf(echo, sizeof(echo), "epochs=%d batch=%d lr=%g train=%d test=%d",
                  config.epochs, config.batch_size, config.learning_rate,
                  static_cast<int>(states.size()), static_cast<int>(held_out.size()));
    result.report.config_echo = echo;
    return result;
}

}  // namespace qaml
