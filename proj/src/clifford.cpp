#include "qaml/clifford.hpp"

#include <bit>
#include <stdexcept>

#include "qaml/circuits.hpp"

namespace qaml {

namespace {

void check_gate(int n, const CliffordGate& g) {
    if (g.q0 < 0 || g.q0 >= n) throw std::invalid_argument("clifford gate qubit out of range");
    if (g.kind == CliffordGate::kCX) {
        if (g.q1 < 0 || g.q1 >= n || g.q1 == g.q0)
            throw std::invalid_argument("clifford CX qubits invalid");
    }
}

}  // namespace

PauliString conjugate_by_gate(const PauliString& p, const CliffordGate& g) {
    PauliString out = p;
    std::uint64_t b0 = 1ull << g.q0;
    switch (g.kind) {
        case CliffordGate::kH: {
            // X <-> Z, Y -> -Y.
            bool bx = out.x & b0, bz = out.z & b0;
            if (bx && bz) out.phase = (out.phase + 2) % 4;
            out.x = (out.x & ~b0) | (bz ? b0 : 0);
            out.z = (out.z & ~b0) | (bx ? b0 : 0);
            break;
        }
        case CliffordGate::kS: {
            // X -> Y, Y -> -X, Z -> Z.
            bool bx = out.x & b0, bz = out.z & b0;
            if (bx && bz) out.phase = (out.phase + 2) % 4;
            if (bx) out.z ^= b0;
            (void)bz;
            break;
        }
        case CliffordGate::kCX: {
            std::uint64_t bt = 1ull << g.q1;
            bool xc = out.x & b0, zc = out.z & b0;
            bool xt = out.x & bt, zt = out.z & bt;
            // Sign flips exactly for the Y_c (X Z)_t-type combinations.
            if (xc && zt && (xt == zc)) out.phase = (out.phase + 2) % 4;
            if (xc) out.x ^= bt;
            if (zt) out.z ^= b0;
            break;
        }
    }
    return out;
}

CliffordTableau CliffordTableau::identity(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 64)
        throw std::invalid_argument("CliffordTableau supports 1..64 qubits");
    CliffordTableau t;
    t.n_qubits = n_qubits;
    for (int q = 0; q < n_qubits; ++q) {
        PauliString px = PauliString::identity(n_qubits);
        px.x = 1ull << q;
        PauliString pz = PauliString::identity(n_qubits);
        pz.z = 1ull << q;
        t.x_images.push_back(px);
        t.z_images.push_back(pz);
    }
    return t;
}

void CliffordTableau::append(const CliffordGate& g) {
    check_gate(n_qubits, g);
    for (auto& p : x_images) p = conjugate_by_gate(p, g);
    for (auto& p : z_images) p = conjugate_by_gate(p, g);
}

PauliString CliffordTableau::conjugate(const PauliString& p) const {
    if (p.n_qubits != n_qubits)
        throw std::invalid_argument("conjugate: arity mismatch");
    // P = i^{phase + #Y} * prod_q X_q^{x_q} Z_q^{z_q}; conjugation is a
    // homomorphism, so multiply the generator images in the same order.
    PauliString out = PauliString::identity(n_qubits);
    out.phase = (p.phase + std::popcount(p.x & p.z)) % 4;
    for (int q = 0; q < n_qubits; ++q) {
        if ((p.x >> q) & 1) out = out.multiply(x_images[static_cast<std::size_t>(q)]);
        if ((p.z >> q) & 1) out = out.multiply(z_images[static_cast<std::size_t>(q)]);
    }
    return out;
}

CliffordTableau CliffordTableau::inverse() const {
    // Letter part: the inverse of a symplectic map in the (x|z) basis is
    // Omega M^T Omega. Row q of M holds the image masks of generator q; the
    // transpose with x/z blocks swapped yields the inverse images' masks.
    CliffordTableau inv = CliffordTableau::identity(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        std::uint64_t ix = 0, iz = 0, zx = 0, zz = 0;
        for (int r = 0; r < n_qubits; ++r) {
            // Entries of Omega M^T Omega: the (x|z) blocks transpose and swap
            // roles, so each inverse mask reads bit q of a forward mask at r.
            if ((z_images[static_cast<std::size_t>(r)].z >> q) & 1) ix |= 1ull << r;
            if ((x_images[static_cast<std::size_t>(r)].z >> q) & 1) iz |= 1ull << r;
            if ((z_images[static_cast<std::size_t>(r)].x >> q) & 1) zx |= 1ull << r;
            if ((x_images[static_cast<std::size_t>(r)].x >> q) & 1) zz |= 1ull << r;
        }
        inv.x_images[static_cast<std::size_t>(q)].x = ix;
        inv.x_images[static_cast<std::size_t>(q)].z = iz;
        inv.z_images[static_cast<std::size_t>(q)].x = zx;
        inv.z_images[static_cast<std::size_t>(q)].z = zz;
    }
    // Phase fixing: C (C^dag G C) C^dag must equal G exactly.
    for (int q = 0; q < n_qubits; ++q) {
        PauliString gx = PauliString::identity(n_qubits);
        gx.x = 1ull << q;
        PauliString round = conjugate(inv.x_images[static_cast<std::size_t>(q)]);
        if (round.x != gx.x || round.z != gx.z)
            throw std::runtime_error("tableau inverse: letter mismatch");
        inv.x_images[static_cast<std::size_t>(q)].phase =
            (inv.x_images[static_cast<std::size_t>(q)].phase + 4 - round.phase) % 4;

        PauliString gz = PauliString::identity(n_qubits);
        gz.z = 1ull << q;
        round = conjugate(inv.z_images[static_cast<std::size_t>(q)]);
        if (round.x != gz.x || round.z != gz.z)
            throw std::runtime_error("tableau inverse: letter mismatch");
        inv.z_images[static_cast<std::size_t>(q)].phase =
            (inv.z_images[static_cast<std::size_t>(q)].phase + 4 - round.phase) % 4;
    }
    return inv;
}

bool CliffordTableau::is_symplectic() const {
    for (int a = 0; a < n_qubits; ++a) {
        const auto& xa = x_images[static_cast<std::size_t>(a)];
        const auto& za = z_images[static_cast<std::size_t>(a)];
        if (xa.phase % 2 != 0 || za.phase % 2 != 0) return false;  // not Hermitian
        if (xa.commutes_with(za)) return false;
        for (int b = a + 1; b < n_qubits; ++b) {
            const auto& xb = x_images[static_cast<std::size_t>(b)];
            const auto& zb = z_images[static_cast<std::size_t>(b)];
            if (!xa.commutes_with(xb) || !xa.commutes_with(zb)) return false;
            if (!za.commutes_with(xb) || !za.commutes_with(zb)) return false;
        }
    }
    return true;
}

std::vector<CliffordGate> random_clifford_gates(int n_qubits, RngStream& rng) {
    if (n_qubits < 1) throw std::invalid_argument("random_clifford_gates: n < 1");
    std::vector<CliffordGate> gates;
    int count = 5 * n_qubits * n_qubits;
    for (int i = 0; i < count; ++i) {
        CliffordGate g;
        std::uint64_t kind = (n_qubits > 1) ? rng.uniform_index(3) : rng.uniform_index(2);
        if (kind == 0) {
            g.kind = CliffordGate::kH;
            g.q0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_qubits)));
        } else if (kind == 1) {
            g.kind = CliffordGate::kS;
            g.q0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_qubits)));
        } else {
            g.kind = CliffordGate::kCX;
            g.q0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_qubits)));
            g.q1 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_qubits - 1)));
            if (g.q1 >= g.q0) ++g.q1;
        }
        gates.push_back(g);
    }
    return gates;
}

CliffordTableau clifford_from_gates(int n_qubits, const std::vector<CliffordGate>& gates) {
    CliffordTableau t = CliffordTableau::identity(n_qubits);
    for (const auto& g : gates) t.append(g);
    return t;
}

DenseOperator clifford_dense(int n_qubits, const std::vector<CliffordGate>& gates) {
    if (n_qubits > 10)
        throw std::invalid_argument("clifford_dense capped at 10 qubits");
    Eigen::Index d = Eigen::Index(1) << n_qubits;
    const Complex i1(0.0, 1.0);
    Eigen::Matrix2cd h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    s(0, 0) = 1.0;
    s(1, 1) = i1;

    DenseOperator u(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
        StateVector psi = basis_state(d, col);
        for (const auto& g : gates) {
            check_gate(n_qubits, g);
            switch (g.kind) {
                case CliffordGate::kH: apply_single_qubit(psi, g.q0, h); break;
                case CliffordGate::kS: apply_single_qubit(psi, g.q0, s); break;
                case CliffordGate::kCX: apply_cnot(psi, g.q0, g.q1); break;
            }
        }
        u.col(col) = psi;
    }
    return u;
}

PauliString universal_spoof_dense_encoding(const CliffordTableau& t) {
    PauliString x0 = PauliString::identity(t.n_qubits);
    x0.x = 1;
    return t.inverse().conjugate(x0);
}

AngleSpoofResult find_angle_encoding_spoof(const CliffordTableau& t, int k_measured) {
    if (k_measured < 1 || k_measured > t.n_qubits)
        throw std::invalid_argument("find_angle_encoding_spoof: bad k");
    std::uint64_t measured_mask = (k_measured == 64)
                                      ? ~0ull
                                      : ((1ull << k_measured) - 1);
    AngleSpoofResult res;
    std::uint64_t limit = 1ull << t.n_qubits;
    for (std::uint64_t mask = 1; mask < limit; ++mask) {
        PauliString p = PauliString::identity(t.n_qubits);
        p.x = mask;
        p.z = mask;  // Y letters on the mask
        ++res.attempts;
        PauliString image = t.conjugate(p);
        if (image.odd_xy_weight_on(measured_mask)) {
            res.p = p;
            res.found = true;
            return res;
        }
    }
    return res;
}

}  // namespace qaml
