#pragma once

#include <string>
#include <vector>

#include "jr/linalg.hpp"

namespace jr {

// Signature (t, s): t generators squaring to +1 (timelike, Hermitian gamma),
// s generators squaring to -1 (spacelike, skew-Hermitian gamma). Convention:
// cl(v)^2 = -g(v,v) with g = diag(-1^t, +1^s).
struct Signature {
    int t = 0;
    int s = 0;

    int r() const { return t - s; }
    int dim() const { return t + s; }
    // Residue keying the conjugation table below. With the sign convention
    // above, the canonical antilinear intertwiner of CL(0,2) (the flat
    // surface module) lands at residue 2, which is what the whole 2D
    // pipeline relies on (sigma = -1, A^2 = +1 there).
    int mod8() const { return ((s - t) % 8 + 8) % 8; }
};

struct SpinorRep {
    Signature sig;
    std::size_t dim = 0;        // 2^floor(d/2)
    std::vector<CMat> gammas;   // entries exactly in {0, +-1, +-i}
    CMat parity;                // even d only; parity.n == 0 otherwise
};

// Conjugate-linear intertwiner A(psi) = m * conj(psi) with
// A cl(v) = sigma cl(v) A and A^2 = s_sign * Id.
struct PairingMap {
    CMat m;
    int sigma = 0;
    int s_sign = 0;
};

// Row of the conjugation table, keyed by (s - t) mod 8.
struct Mod8Row {
    int rho;
    bool sigma_free;   // even dimension: both signs of sigma realized
    int sigma;         // fixed sign (odd d) or the default convention (even d)
    int s_sign_at_default;
    int s_sign_at_other;  // only meaningful when sigma_free
};

const Mod8Row& mod8_row(int rho);

struct Mod8Entry {
    int t, s, rho;
    int sigma, s_sign;
    std::string commute_pattern;  // "commute" / "anticommute", "+even" / "+odd" suffix for even d
    bool pass;
};

SpinorRep gamma_basis(Signature sig);

// sigma_choice: 0 picks the convention default (sigma = -1 at residues 0 and 2,
// +1 at 4 and 6); +-1 forces the sign in even dimensions. Odd dimensions have
// no freedom and reject a contradictory request.
PairingMap build_pairing(const SpinorRep& rep, int sigma_choice = 0);

// Exhaustive check of every signature with 1 <= t+s <= 8 against the table.
std::vector<Mod8Entry> verify_mod8_table();

// Rank of (Psi1, Psi2) -> (B(cl(dx^I) Psi1, Psi2))_I where B(x,y) = h(Ax, y),
// I running over even-size subsets when d is odd and all subsets when d is
// even. A full-rank result (dim^2) certifies the form-valued pairing is an
// isomorphism.
std::size_t bhat_rank(const SpinorRep& rep, const PairingMap& pairing);

// Predicted swap symmetry of the degree-k block of the form-valued pairing:
// (-1)^{k(k+1)/2} * s_sign * sigma^k.
int symmetry_sign(int k, const SpinorRep& rep, const PairingMap& pairing);

// Measured swap symmetry: +1 / -1 if every degree-k block satisfies
// S = +-S^T to tolerance, 0 if inconsistent.
int measured_symmetry_sign(int k, const SpinorRep& rep, const PairingMap& pairing,
                           double tol = 1e-12);

// Ordered product gamma_{i1} ... gamma_{ik} for an index subset.
CMat clifford_product(const SpinorRep& rep, const std::vector<int>& idx);

}  // namespace jr
