#include "jr/clifford.hpp"

#include <cmath>
#include <stdexcept>

namespace jr {

namespace {

const cplx I(0.0, 1.0);

CMat pauli(int which) {
    CMat m(2);
    switch (which) {
        case 0: m(0, 0) = 1; m(1, 1) = 1; break;
        case 1: m(0, 1) = 1; m(1, 0) = 1; break;            // sigma_x
        case 2: m(0, 1) = -I; m(1, 0) = I; break;           // sigma_y
        case 3: m(0, 0) = 1; m(1, 1) = -1; break;           // sigma_z
        default: throw std::logic_error("pauli");
    }
    return m;
}

// Hermitian anticommuting family h_1..h_m on (C^2)^{tensor q}:
//   h_{2j-1} = sz^{j-1} (x) sx (x) 1...,  h_{2j} = sz^{j-1} (x) sy (x) 1...,
//   h_{2q+1} = sz^{q}.
std::vector<CMat> hermitian_generators(int count) {
    if (count == 1) {
        CMat one(1);
        one(0, 0) = 1;
        return {one};
    }
    const int q = count / 2;  // tensor levels, module dimension 2^q
    const std::size_t dim = std::size_t(1) << q;
    std::vector<CMat> out;
    auto lift = [&](const CMat& level_mat, int level) {
        // sz^{level-1} (x) level_mat (x) Id_rest
        CMat m = CMat::identity(1);
        for (int j = 0; j < level - 1; ++j) m = kron(m, pauli(3));
        m = kron(m, level_mat);
        while (m.n < dim) m = kron(m, pauli(0));
        return m;
    };
    for (int j = 1; j <= q; ++j) {
        out.push_back(lift(pauli(1), j));
        out.push_back(lift(pauli(2), j));
    }
    if (count % 2 == 1) {
        CMat m = CMat::identity(1);
        for (int j = 0; j < q; ++j) m = kron(m, pauli(3));
        out.push_back(m);
    }
    return out;
}

bool is_scalar(const CMat& x, cplx& value, double tol = 1e-12) {
    value = x(0, 0);
    return dist_to_scalar(x, value) <= tol;
}

// Does m * conj(g) == sign * g * m hold?
bool intertwines(const CMat& m, const CMat& g, int sign) {
    CMat lhs = m * conjugate(g);
    CMat rhs = cplx(double(sign), 0.0) * (g * m);
    return max_abs(lhs - rhs) <= 1e-12;
}

}  // namespace

const Mod8Row& mod8_row(int rho) {
    // Derived exhaustively from the constructions below; the convention
    // defaults for the even residues are sigma_0 = sigma_2 = -1,
    // sigma_4 = sigma_6 = +1.
    static const Mod8Row rows[8] = {
        {0, true, -1, +1, +1},
        {1, false, -1, +1, 0},
        {2, true, -1, +1, -1},   // A^2 = -sigma
        {3, false, +1, -1, 0},
        {4, true, +1, -1, -1},
        {5, false, -1, -1, 0},
        {6, true, +1, +1, -1},   // A^2 = +sigma
        {7, false, +1, +1, 0},
    };
    if (rho < 0 || rho > 7) throw std::invalid_argument("mod8_row: residue out of range");
    return rows[rho];
}

SpinorRep gamma_basis(Signature sig) {
    if (sig.t < 0 || sig.s < 0) throw std::invalid_argument("gamma_basis: negative signature");
    const int d = sig.dim();
    if (d < 1 || d > 8) throw std::invalid_argument("gamma_basis: need 1 <= t+s <= 8");

    SpinorRep rep;
    rep.sig = sig;
    std::vector<CMat> h = hermitian_generators(d);
    rep.dim = h[0].n;
    for (int i = 0; i < d; ++i) {
        // first t generators timelike (square +1, Hermitian), rest spacelike
        if (i < sig.t)
            rep.gammas.push_back(h[i]);
        else
            rep.gammas.push_back(I * h[i]);
    }
    if (d % 2 == 0) {
        CMat p = CMat::identity(rep.dim);
        for (const auto& g : rep.gammas) p = p * g;
        // p^2 is scalar; normalize so parity^2 = Id with +1 leading entry
        cplx p2;
        if (!is_scalar(p * p, p2)) throw std::logic_error("gamma_basis: parity not scalar-squared");
        cplx c = 1.0 / std::sqrt(p2);
        CMat parity = c * p;
        if (std::real(parity(0, 0)) < 0) parity = cplx(-1, 0) * parity;
        rep.parity = parity;
    }
    return rep;
}

CMat clifford_product(const SpinorRep& rep, const std::vector<int>& idx) {
    CMat m = CMat::identity(rep.dim);
    for (int i : idx) m = m * rep.gammas.at(std::size_t(i));
    return m;
}

PairingMap build_pairing(const SpinorRep& rep, int sigma_choice) {
    const int d = rep.sig.dim();
    const Mod8Row& row = mod8_row(rep.sig.mod8());
    int want_sigma = row.sigma;
    if (sigma_choice != 0) {
        if (!row.sigma_free && sigma_choice != row.sigma)
            throw std::invalid_argument("build_pairing: sigma is not free in odd dimensions");
        want_sigma = sigma_choice;
    }

    // The intertwiner is always realized by a product of gamma matrices;
    // search all 2^d subsets.
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        CMat m = clifford_product(rep, idx);
        bool ok = true;
        for (const auto& g : rep.gammas)
            if (!intertwines(m, g, want_sigma)) { ok = false; break; }
        if (!ok) continue;
        CMat a2 = m * conjugate(m);
        cplx s;
        if (!is_scalar(a2, s)) continue;
        if (std::abs(std::imag(s)) > 1e-12 || std::abs(std::abs(std::real(s)) - 1.0) > 1e-12)
            continue;
        PairingMap pm;
        pm.m = m;
        pm.sigma = want_sigma;
        pm.s_sign = std::real(s) > 0 ? +1 : -1;
        return pm;
    }
    throw std::runtime_error("build_pairing: no intertwiner found (unexpected)");
}

std::vector<Mod8Entry> verify_mod8_table() {
    std::vector<Mod8Entry> out;
    for (int d = 1; d <= 8; ++d) {
        for (int t = 0; t <= d; ++t) {
            Signature sig{t, d - t};
            SpinorRep rep = gamma_basis(sig);
            const Mod8Row& row = mod8_row(sig.mod8());
            std::vector<std::pair<int, int>> expected;  // (sigma, s_sign)
            if (row.sigma_free) {
                expected.push_back({row.sigma, row.s_sign_at_default});
                expected.push_back({-row.sigma, row.s_sign_at_other});
            } else {
                expected.push_back({row.sigma, row.s_sign_at_default});
            }
            for (auto [sg, want_s] : expected) {
                Mod8Entry e;
                e.t = t;
                e.s = d - t;
                e.rho = sig.mod8();
                bool pass = true;
                try {
                    PairingMap pm = build_pairing(rep, row.sigma_free ? sg : 0);
                    e.sigma = pm.sigma;
                    e.s_sign = pm.s_sign;
                    pass = (pm.sigma == sg) && (pm.s_sign == want_s);
                    // anti-unitarity: m must be unitary
                    pass = pass && dist_to_scalar(dagger(pm.m) * pm.m, 1.0) <= 1e-12;
                    // parity behaviour in even dimensions: A even iff rho in {0,4}
                    std::string par;
                    if (d % 2 == 0) {
                        CMat pc = pm.m * conjugate(rep.parity);
                        bool even = max_abs(pc - rep.parity * pm.m) <= 1e-12;
                        bool odd = max_abs(pc + rep.parity * pm.m) <= 1e-12;
                        bool want_even = (e.rho == 0 || e.rho == 4);
                        pass = pass && (want_even ? even : odd);
                        par = want_even ? "+even" : "+odd";
                    }
                    e.commute_pattern = (sg == 1 ? std::string("commute") : std::string("anticommute")) + par;
                } catch (const std::exception&) {
                    pass = false;
                    e.sigma = sg;
                    e.s_sign = 0;
                    e.commute_pattern = "construction-failed";
                }
                e.pass = pass;
                out.push_back(e);
            }
        }
    }
    return out;
}

namespace {

std::vector<std::vector<int>> index_subsets(int d, int parity_filter /* -1: all, 0: even, 1: odd */) {
    std::vector<std::vector<int>> out;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        if (parity_filter >= 0 && int(idx.size()) % 2 != parity_filter) continue;
        out.push_back(idx);
    }
    return out;
}

// B(x, y) = h(Ax, y) = x^T m^dagger y
CMat bilinear_block(const SpinorRep& rep, const PairingMap& pairing, const std::vector<int>& idx) {
    CMat c = clifford_product(rep, idx);
    CMat md = dagger(pairing.m);
    // S_ab = B(cl_I e_a, e_b) = sum_c (cl_I)_{c,a} (m^dagger)_{c,b}
    CMat s(rep.dim);
    for (std::size_t a = 0; a < rep.dim; ++a)
        for (std::size_t b = 0; b < rep.dim; ++b) {
            cplx v = 0;
            for (std::size_t cc = 0; cc < rep.dim; ++cc) v += c(cc, a) * md(cc, b);
            s(a, b) = v;
        }
    return s;
}

}  // namespace

std::size_t bhat_rank(const SpinorRep& rep, const PairingMap& pairing) {
    const int d = rep.sig.dim();
    auto subsets = index_subsets(d, d % 2 == 1 ? 0 : -1);
    const std::size_t n2 = rep.dim * rep.dim;
    if (subsets.size() != n2)
        throw std::logic_error("bhat_rank: index count mismatch");
    CMat big(n2);
    for (std::size_t r = 0; r < subsets.size(); ++r) {
        CMat s = bilinear_block(rep, pairing, subsets[r]);
        for (std::size_t a = 0; a < rep.dim; ++a)
            for (std::size_t b = 0; b < rep.dim; ++b)
                big(r, a * rep.dim + b) = s(a, b);
    }
    return cmat_rank(big);
}

int symmetry_sign(int k, const SpinorRep& rep, const PairingMap& pairing) {
    const int d = rep.sig.dim();
    if (k < 0 || k > d) throw std::invalid_argument("symmetry_sign: invalid degree");
    if (d % 2 == 1 && k % 2 == 1)
        throw std::invalid_argument("symmetry_sign: odd degree invalid in odd dimensions");
    int sgn = ((k * (k + 1) / 2) % 2 == 0) ? 1 : -1;
    int sig_pow = (k % 2 == 0) ? 1 : pairing.sigma;
    return sgn * pairing.s_sign * sig_pow;
}

int measured_symmetry_sign(int k, const SpinorRep& rep, const PairingMap& pairing, double tol) {
    const int d = rep.sig.dim();
    auto subsets = index_subsets(d, -1);
    int found = 0;
    for (const auto& idx : subsets) {
        if (int(idx.size()) != k) continue;
        CMat s = bilinear_block(rep, pairing, idx);
        double sym = 0, asym = 0;
        for (std::size_t a = 0; a < rep.dim; ++a)
            for (std::size_t b = 0; b < rep.dim; ++b) {
                sym = std::max(sym, std::abs(s(a, b) - s(b, a)));
                asym = std::max(asym, std::abs(s(a, b) + s(b, a)));
            }
        int this_sign = 0;
        if (sym <= tol && asym > tol) this_sign = +1;
        else if (asym <= tol && sym > tol) this_sign = -1;
        else return 0;  // zero or mixed block
        if (found == 0) found = this_sign;
        else if (found != this_sign) return 0;
    }
    return found;
}

}  // namespace jr
