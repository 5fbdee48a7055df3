#include "qaml/chaos.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qaml {

namespace {

DenseOperator heisenberg_z(const DenseOperator& u, const DenseOperator& z) {
    if (u.rows() != u.cols() || z.rows() != z.cols() || u.rows() != z.rows())
        throw std::invalid_argument("otoc: dimension mismatch");
    if ((z - z.adjoint()).norm() > kUnitaryTol * static_cast<double>(z.rows()))
        throw std::invalid_argument("otoc: Z must be Hermitian");
    return u.adjoint() * z * u;
}

double otoc_of_zu(const DenseOperator& zu, const DenseOperator& w) {
    if (w.rows() != w.cols() || w.rows() != zu.rows())
        throw std::invalid_argument("otoc: dimension mismatch");
    DenseOperator a = zu * w;
    DenseOperator b = w * zu;
    double overlap = b.conjugate().cwiseProduct(a).sum().real();
    double value = 2.0 * (1.0 - overlap / static_cast<double>(zu.rows()));
    if (value < -1e-9 || value > 4.0 + 1e-9)
        throw std::logic_error("otoc out of range: inputs violate preconditions");
    return std::clamp(value, 0.0, 4.0);
}

}  // namespace

double otoc(const DenseOperator& u, const DenseOperator& w, const DenseOperator& z) {
    return otoc_of_zu(heisenberg_z(u, z), w);
}

OtocBoundCheck verify_otoc_bound(const DenseOperator& u, const DenseOperator& w,
                                 const DenseOperator& z, double delta, int trials,
                                 RngStream& rng) {
    if (delta <= 0.0) throw std::invalid_argument("verify_otoc_bound: delta must be positive");
    if (trials < 2) throw std::invalid_argument("verify_otoc_bound: trials must be >= 2");
    DenseOperator zu = heisenberg_z(u, z);
    double comm_sq = otoc_of_zu(zu, w);
    DenseOperator zu_attacked = w.adjoint() * zu * w;
    Eigen::Index d = zu.rows();

    long hits = 0;
    double sum = 0.0, sum_sq = 0.0, sum_p4 = 0.0;
    for (int t = 0; t < trials; ++t) {
        StateVector psi = haar_state(d, rng);
        double diff = expectation(zu, psi) - expectation(zu_attacked, psi);
        if (std::abs(diff) >= delta) ++hits;
        sum += diff;
        sum_sq += diff * diff;
        sum_p4 += diff * diff * diff * diff;
    }
    double mean = sum / trials;
    OtocBoundCheck out;
    out.empirical_prob = static_cast<double>(hits) / trials;
    out.bound = comm_sq / ((static_cast<double>(d) + 1.0) * delta * delta);
    out.sample_variance = (sum_sq - trials * mean * mean) / (trials - 1);
    out.predicted_variance = comm_sq / (static_cast<double>(d) + 1.0);
    out.fourth_moment = sum_p4 / trials;
    out.trials = trials;
    return out;
}

LoeSpectrum loe(const DenseOperator& x) {
    if (x.rows() != x.cols()) throw std::invalid_argument("loe: operator must be square");
    if (x.norm() == 0.0) throw std::invalid_argument("loe: zero operator");
    int n = qubit_count(x.rows());
    if (n < 2) throw std::invalid_argument("loe: need at least 2 qubits");

    LoeSpectrum spec;
    spec.n_qubits = n;
    for (int cut = 1; cut < n; ++cut) {
        Eigen::Index da = Eigen::Index(1) << cut;
        Eigen::Index db = x.rows() / da;
        // Row group = (row, col) pair on the low `cut` qubits, column group =
        // the same pair on the rest; singular values of this reshuffle are
        // the operator-Schmidt coefficients.
        Eigen::MatrixXcd m(da * da, db * db);
        for (Eigen::Index rb = 0; rb < db; ++rb)
            for (Eigen::Index cb = 0; cb < db; ++cb)
                for (Eigen::Index ra = 0; ra < da; ++ra)
                    for (Eigen::Index ca = 0; ca < da; ++ca)
                        m(ra + da * ca, rb + db * cb) = x(ra + da * rb, ca + da * cb);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
        Eigen::VectorXd sigma = svd.singularValues();
        double total = sigma.squaredNorm();

        CutSpectrum cs;
        cs.cut = cut;
        cs.weights.resize(static_cast<std::size_t>(sigma.size()));
        double purity = 0.0;
        for (Eigen::Index j = 0; j < sigma.size(); ++j) {
            double lam = sigma(j) * sigma(j) / total;
            cs.weights[static_cast<std::size_t>(j)] = lam;
            purity += lam * lam;
        }
        cs.s2 = -std::log(purity);
        cs.s_inf = -std::log(cs.weights.front());
        spec.max_s2 = std::max(spec.max_s2, cs.s2);
        spec.max_s_inf = std::max(spec.max_s_inf, cs.s_inf);
        spec.cuts.push_back(std::move(cs));
    }
    return spec;
}

namespace {

// One coordinate-ascent pass: site q's optimal unitary is the polar factor
// of its 2x2 environment, and the attained objective is that environment's
// nuclear norm.
double ascent_sweep(const DenseOperator& w, std::vector<Eigen::Matrix2cd>& sites) {
    int n = static_cast<int>(sites.size());
    Eigen::Index d = w.rows();
    double objective = 0.0;
    for (int q = 0; q < n; ++q) {
        Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) {
                Complex prod = std::conj(w(r, c));
                if (prod == Complex(0.0, 0.0)) continue;
                for (int p = 0; p < n; ++p) {
                    if (p == q) continue;
                    prod *= sites[static_cast<std::size_t>(p)]((r >> p) & 1, (c >> p) & 1);
                }
                g((r >> q) & 1, (c >> q) & 1) += prod;
            }
        }
        Eigen::Matrix2cd m = g.transpose();
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        sites[static_cast<std::size_t>(q)] = svd.matrixV() * svd.matrixU().adjoint();
        objective = svd.singularValues().sum();  // = |tr(W^dag P)| after update
    }
    return objective;
}

}  // namespace

DistanceBounds product_distance(const DenseOperator& w_univ, RngStream& rng) {
    if (!is_unitary(w_univ)) throw std::invalid_argument("product_distance: input not unitary");
    int n = qubit_count(w_univ.rows());
    double d = static_cast<double>(w_univ.rows());

    LoeSpectrum spec = loe(w_univ);
    DistanceBounds out;
    out.lower = 1.0 - std::exp(-spec.max_s2 / 2.0);
    out.upper = 1.0 - std::exp(-static_cast<double>(n) * spec.max_s2);
    double top_product = 1.0;
    for (const auto& cs : spec.cuts) top_product *= cs.weights.front();
    out.exact = 1.0 - top_product;

    constexpr int kRestarts = 3;
    constexpr int kMaxSweeps = 200;
    double best = 0.0;
    for (int restart = 0; restart < kRestarts; ++restart) {
        std::vector<Eigen::Matrix2cd> sites;
        for (int q = 0; q < n; ++q) sites.push_back(haar_unitary(2, rng));
        double prev = 0.0;
        int sweeps = 0;
        while (sweeps < kMaxSweeps) {
            double cur = ascent_sweep(w_univ, sites);
            ++sweeps;
            if (cur - prev < 1e-12 * d) {
                prev = cur;
                break;
            }
            prev = cur;
        }
        if (prev > best) {
            best = prev;
            out.ascent_sweeps = sweeps;
        }
    }
    out.alt_estimate = 1.0 - (best / d) * (best / d);
    return out;
}

std::vector<LoeGrowthRow> loe_growth_curve(CircuitFamily family, int n_qubits, int max_layers,
                                           int samples, int k_measured, RngStream& rng) {
    if (n_qubits < 2) throw std::invalid_argument("loe_growth_curve: need >= 2 qubits");
    if (max_layers < 0 || samples < 1) throw std::invalid_argument("loe_growth_curve: bad sizes");
    if (k_measured < 1 || k_measured > n_qubits)
        throw std::invalid_argument("loe_growth_curve: bad k_measured");

    Eigen::Index d = Eigen::Index(1) << n_qubits;
    std::uint64_t mask = (1ull << k_measured) - 1;
    DenseOperator z = DenseOperator::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        z(i, i) = (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -1.0 : 1.0;

    std::vector<LoeGrowthRow> rows;
    for (int layers = 0; layers <= max_layers; ++layers) {
        double sum = 0.0, sum_sq = 0.0;
        for (int s = 0; s < samples; ++s) {
            RngStream rs = rng.child(static_cast<std::uint64_t>(layers) *
                                         static_cast<std::uint64_t>(samples) +
                                     static_cast<std::uint64_t>(s));
            DenseOperator u;
            if (family == CircuitFamily::kHwEfficient) {
                ParamCircuit c = build_hw_efficient(n_qubits, layers);
                Eigen::VectorXd theta(c.n_params);
                for (Eigen::Index i = 0; i < theta.size(); ++i)
                    theta(i) = rs.uniform(-M_PI, M_PI);
                u = compile(c, theta);
            } else {
                ParamCircuit c = build_brickwork(n_qubits, layers, rs);
                u = compile(c, Eigen::VectorXd());
            }
            DenseOperator x = u.adjoint() * z * u;
            double s2 = loe(x).max_s2;
            sum += s2;
            sum_sq += s2 * s2;
        }
        LoeGrowthRow row;
        row.layers = layers;
        row.mean_s2 = sum / samples;
        row.std_s2 = (samples > 1)
                         ? std::sqrt(std::max(0.0, (sum_sq - samples * row.mean_s2 * row.mean_s2) /
                                                       (samples - 1)))
                         : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qaml
