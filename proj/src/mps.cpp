#include "qaml/mps.hpp"

#include <cmath>
#include <stdexcept>

#include "qaml/rng.hpp"

namespace qaml {

namespace {

void check_site(const Mps& m, int s) {
    if (s < 0 || s >= m.n_sites) throw std::invalid_argument("mps: site out of range");
}

// Left-orthogonalize site s, pushing the R factor into site s+1.
void push_right(Mps& m, int s) {
    auto& a = m.sites[static_cast<std::size_t>(s)];
    Eigen::Index l = a[0].rows(), r = a[0].cols();
    Eigen::MatrixXcd stacked(2 * l, r);
    stacked.topRows(l) = a[0];
    stacked.bottomRows(l) = a[1];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(stacked);
    Eigen::Index keep = std::min(2 * l, r);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * l, keep);
    Eigen::MatrixXcd rr = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    a[0] = q.topRows(l);
    a[1] = q.bottomRows(l);
    auto& b = m.sites[static_cast<std::size_t>(s) + 1];
    b[0] = rr * b[0];
    b[1] = rr * b[1];
}

// Right-orthogonalize site s, pushing the L factor into site s-1.
void push_left(Mps& m, int s) {
    auto& a = m.sites[static_cast<std::size_t>(s)];
    Eigen::Index l = a[0].rows(), r = a[0].cols();
    Eigen::MatrixXcd wide(l, 2 * r);
    wide.leftCols(r) = a[0];
    wide.rightCols(r) = a[1];
    // LQ via QR of the adjoint: wide = (Q R)^dag = R^dag Q^dag.
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(wide.adjoint());
    Eigen::Index keep = std::min(2 * r, l);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * r, keep);
    Eigen::MatrixXcd rr = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    Eigen::MatrixXcd qd = q.adjoint();  // keep x 2r, rows orthonormal
    a[0] = qd.leftCols(r);
    a[1] = qd.rightCols(r);
    auto& b = m.sites[static_cast<std::size_t>(s) - 1];
    Eigen::MatrixXcd ld = rr.adjoint();  // l x keep
    b[0] = b[0] * ld;
    b[1] = b[1] * ld;
}

}  // namespace

Eigen::Index Mps::bond_dim(int cut) const {
    if (cut < 0 || cut >= n_sites - 1) throw std::invalid_argument("mps: cut out of range");
    return sites[static_cast<std::size_t>(cut)][0].cols();
}

double Mps::norm() const {
    const auto& a = sites[static_cast<std::size_t>(center)];
    return std::sqrt(a[0].squaredNorm() + a[1].squaredNorm());
}

Mps mps_from_product(const std::vector<Eigen::Vector2cd>& locals) {
    if (locals.empty()) throw std::invalid_argument("mps_from_product: no sites");
    Mps m;
    m.n_sites = static_cast<int>(locals.size());
    for (const auto& v : locals) {
        double nrm = v.norm();
        if (nrm == 0.0) throw std::invalid_argument("mps_from_product: zero local state");
        std::array<Eigen::MatrixXcd, 2> site;
        site[0] = Eigen::MatrixXcd::Constant(1, 1, v(0) / nrm);
        site[1] = Eigen::MatrixXcd::Constant(1, 1, v(1) / nrm);
        m.sites.push_back(std::move(site));
    }
    m.center = 0;
    return m;
}

Mps mps_zero_state(int n_sites) {
    std::vector<Eigen::Vector2cd> locals(static_cast<std::size_t>(n_sites),
                                         Eigen::Vector2cd(1.0, 0.0));
    return mps_from_product(locals);
}

void move_center(Mps& m, int target) {
    check_site(m, target);
    while (m.center < target) {
        push_right(m, m.center);
        ++m.center;
    }
    while (m.center > target) {
        push_left(m, m.center);
        --m.center;
    }
}

void apply_one_qubit_gate(Mps& m, const Eigen::Matrix2cd& gate, int s) {
    check_site(m, s);
    move_center(m, s);
    auto& a = m.sites[static_cast<std::size_t>(s)];
    std::array<Eigen::MatrixXcd, 2> next;
    for (int out = 0; out < 2; ++out)
        next[static_cast<std::size_t>(out)] = gate(out, 0) * a[0] + gate(out, 1) * a[1];
    a = std::move(next);
}

void apply_two_qubit_gate(Mps& m, const Eigen::Matrix4cd& gate, int s, Eigen::Index chi_max,
                          double svd_cut) {
    if (s < 0 || s + 1 >= m.n_sites)
        throw std::invalid_argument("apply_two_qubit_gate: needs adjacent sites");
    if (chi_max < 1 || svd_cut < 0.0)
        throw std::invalid_argument("apply_two_qubit_gate: bad truncation settings");
    move_center(m, s);
    const auto& a = m.sites[static_cast<std::size_t>(s)];
    const auto& b = m.sites[static_cast<std::size_t>(s) + 1];
    Eigen::Index l = a[0].rows(), r = b[0].cols();

    // theta[(p0 l), (p1 r)] with the physical pair ordered as bit(s) + 2 bit(s+1).
    std::array<std::array<Eigen::MatrixXcd, 2>, 2> theta;
    for (int p0 = 0; p0 < 2; ++p0)
        for (int p1 = 0; p1 < 2; ++p1) {
            theta[static_cast<std::size_t>(p0)][static_cast<std::size_t>(p1)] =
                Eigen::MatrixXcd::Zero(l, r);
            for (int q0 = 0; q0 < 2; ++q0)
                for (int q1 = 0; q1 < 2; ++q1)
                    theta[static_cast<std::size_t>(p0)][static_cast<std::size_t>(p1)] +=
                        gate(p0 + 2 * p1, q0 + 2 * q1) * a[static_cast<std::size_t>(q0)] *
                        b[static_cast<std::size_t>(q1)];
        }

    Eigen::MatrixXcd block(2 * l, 2 * r);
    for (int p0 = 0; p0 < 2; ++p0)
        for (int p1 = 0; p1 < 2; ++p1)
            block.block(p0 * l, p1 * r, l, r) =
                theta[static_cast<std::size_t>(p0)][static_cast<std::size_t>(p1)];

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    double total = sigma.squaredNorm();
    if (total == 0.0) throw std::runtime_error("apply_two_qubit_gate: zero state");

    Eigen::Index keep = 0;
    double kept_sq = 0.0;
    double floor = svd_cut * sigma(0);
    while (keep < sigma.size() && keep < chi_max && sigma(keep) > floor) {
        kept_sq += sigma(keep) * sigma(keep);
        ++keep;
    }
    if (keep == 0) keep = 1, kept_sq = sigma(0) * sigma(0);
    m.discarded_weight += (total - kept_sq) / total;
    double rescale = std::sqrt(total / kept_sq);

    Eigen::MatrixXcd u = svd.matrixU().leftCols(keep);
    Eigen::MatrixXcd sv = (sigma.head(keep) * rescale).asDiagonal() *
                          svd.matrixV().leftCols(keep).adjoint();

    auto& sa = m.sites[static_cast<std::size_t>(s)];
    sa[0] = u.topRows(l);
    sa[1] = u.bottomRows(l);
    auto& sb = m.sites[static_cast<std::size_t>(s) + 1];
    sb[0] = sv.leftCols(r);
    sb[1] = sv.rightCols(r);
    m.center = s + 1;
}

double entanglement_entropy(Mps& m, int cut) {
    if (cut < 0 || cut >= m.n_sites - 1)
        throw std::invalid_argument("entanglement_entropy: cut out of range");
    move_center(m, cut);
    const auto& a = m.sites[static_cast<std::size_t>(cut)];
    Eigen::MatrixXcd stacked(2 * a[0].rows(), a[0].cols());
    stacked.topRows(a[0].rows()) = a[0];
    stacked.bottomRows(a[0].rows()) = a[1];
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(stacked);
    Eigen::VectorXd sigma = svd.singularValues();
    double total = sigma.squaredNorm();
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        double lam = sigma(i) * sigma(i) / total;
        if (lam > 0.0) entropy -= lam * std::log(lam);
    }
    return entropy;
}

Mpo mpo_from_product(const std::vector<Eigen::Matrix2cd>& locals) {
    if (locals.empty()) throw std::invalid_argument("mpo_from_product: no sites");
    Mpo op;
    op.n_sites = static_cast<int>(locals.size());
    for (const auto& g : locals) op.sites.push_back({{g}});
    return op;
}

Mpo mpo_measured_z(int n_sites, int k_measured) {
    if (k_measured < 1 || k_measured > n_sites)
        throw std::invalid_argument("mpo_measured_z: bad k_measured");
    std::vector<Eigen::Matrix2cd> locals;
    Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    for (int s = 0; s < n_sites; ++s)
        locals.push_back(s < k_measured ? z : Eigen::Matrix2cd::Identity());
    return mpo_from_product(locals);
}

Complex mps_expectation_raw(const Mps& m, const Mpo& op) {
    if (op.n_sites != m.n_sites) throw std::invalid_argument("mps_expectation: arity mismatch");
    // env[w](a_bra, a_ket), starting from the trivial left boundary.
    std::vector<Eigen::MatrixXcd> env{Eigen::MatrixXcd::Ones(1, 1)};
    for (int s = 0; s < m.n_sites; ++s) {
        const auto& site = m.sites[static_cast<std::size_t>(s)];
        const auto& w = op.sites[static_cast<std::size_t>(s)];
        std::size_t wl = w.size(), wr = w[0].size();
        if (wl != env.size()) throw std::invalid_argument("mps_expectation: mpo bond mismatch");
        std::vector<Eigen::MatrixXcd> next(
            wr, Eigen::MatrixXcd::Zero(site[0].cols(), site[0].cols()));
        for (std::size_t a = 0; a < wl; ++a)
            for (std::size_t b = 0; b < wr; ++b)
                for (int pout = 0; pout < 2; ++pout)
                    for (int pin = 0; pin < 2; ++pin) {
                        Complex c = w[a][b](pout, pin);
                        if (c == Complex(0.0, 0.0)) continue;
                        next[b] += c * (site[static_cast<std::size_t>(pout)].adjoint() * env[a] *
                                        site[static_cast<std::size_t>(pin)]);
                    }
        env = std::move(next);
    }
    if (env.size() != 1 || env[0].rows() != 1 || env[0].cols() != 1)
        throw std::invalid_argument("mps_expectation: open mpo boundary");
    return env[0](0, 0);
}

double mps_expectation(const Mps& m, const Mpo& op) {
    Complex v = mps_expectation_raw(m, op);
    if (std::abs(v.imag()) > 1e-8)
        throw std::invalid_argument("mps_expectation: observable not Hermitian");
    return v.real();
}

StateVector mps_to_statevector(const Mps& m) {
    if (m.n_sites > 14) throw std::invalid_argument("mps_to_statevector: too many sites");
    // Partial contraction over a growing prefix; the low site is the low bit.
    Eigen::MatrixXcd partial = Eigen::MatrixXcd::Ones(1, 1);
    for (int s = 0; s < m.n_sites; ++s) {
        const auto& site = m.sites[static_cast<std::size_t>(s)];
        Eigen::MatrixXcd next(2 * partial.rows(), site[0].cols());
        for (Eigen::Index b = 0; b < partial.rows(); ++b)
            for (int p = 0; p < 2; ++p)
                next.row(b + (static_cast<Eigen::Index>(p) << s)) =
                    partial.row(b) * site[static_cast<std::size_t>(p)];
        partial = std::move(next);
    }
    return partial.col(0);
}

bool is_canonical(const Mps& m, double tol) {
    for (int s = 0; s < m.n_sites; ++s) {
        const auto& a = m.sites[static_cast<std::size_t>(s)];
        if (s < m.center) {
            Eigen::MatrixXcd g = a[0].adjoint() * a[0] + a[1].adjoint() * a[1];
            if ((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).norm() > tol) return false;
        } else if (s > m.center) {
            Eigen::MatrixXcd g = a[0] * a[0].adjoint() + a[1] * a[1].adjoint();
            if ((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).norm() > tol) return false;
        }
    }
    return true;
}

BrickworkMpsRun run_brickwork_mps(int n_sites, int layers, Eigen::Index chi_max, double svd_cut,
                                  std::uint64_t seed) {
    if (n_sites < 2) throw std::invalid_argument("run_brickwork_mps: need >= 2 sites");
    if (layers < 0) throw std::invalid_argument("run_brickwork_mps: bad layer count");
    RngStream rng(seed);
    BrickworkMpsRun run;
    run.circuit = build_brickwork(n_sites, layers, rng);
    run.state = mps_zero_state(n_sites);

    std::size_t gate_pos = 0;
    for (int layer = 1; layer <= layers; ++layer) {
        // Even layers pair (0,1),(2,3),...; odd layers pair (1,2),(3,4),...
        int gates_in_layer = (layer % 2 == 1) ? n_sites / 2 : (n_sites - 1) / 2;
        for (int g = 0; g < gates_in_layer; ++g, ++gate_pos) {
            const Gate& gate = run.circuit.gates[gate_pos];
            apply_two_qubit_gate(run.state, gate.fixed, gate.q0, chi_max, svd_cut);
        }
        for (int cut = 0; cut < n_sites - 1; ++cut) {
            MpsTelemetryRow row;
            row.layer = layer;
            row.cut = cut;
            row.bond_dim = run.state.bond_dim(cut);
            row.entropy = entanglement_entropy(run.state, cut);
            row.discarded_weight = run.state.discarded_weight;
            run.rows.push_back(row);
        }
    }
    return run;
}

}  // namespace qaml
