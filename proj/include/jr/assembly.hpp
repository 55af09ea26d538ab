#pragma once

#include <string>
#include <vector>

#include "jr/fields.hpp"
#include "jr/linalg.hpp"

namespace jr {

// Sparse real symmetric matrix in CSR form. Assemblers must produce exactly
// symmetric matrices; finalize() verifies this and throws otherwise.
struct SparseRealSym {
    int n = 0;
    std::vector<int> rowptr, col;
    std::vector<double> val;

    void matvec(const double* x, double* y) const;
    void matvec(const std::vector<double>& x, std::vector<double>& y) const;
    double max_asymmetry() const;
};

// Triplet accumulator; duplicate entries are summed.
struct TripletBuilder {
    int n = 0;
    std::vector<int> rows, cols;
    std::vector<double> vals;

    explicit TripletBuilder(int n_) : n(n_) {}
    void add(int r, int c, double v) {
        if (v == 0.0) return;
        rows.push_back(r);
        cols.push_back(c);
        vals.push_back(v);
    }
    // Emit a complex entry z coupling complex component blocks: rows
    // (2r, 2r+1) x cols (2c, 2c+1) get [[Re, -Im], [Im, Re]].
    void add_complex(int r2, int c2, cplx z) {
        add(r2, c2, z.real());
        add(r2, c2 + 1, -z.imag());
        add(r2 + 1, c2, z.imag());
        add(r2 + 1, c2 + 1, z.real());
    }
    // Conjugate-linear entry: component r2 += z * conj(component c2):
    // [[Re, Im], [Im, -Re]].
    void add_conj(int r2, int c2, cplx z) {
        add(r2, c2, z.real());
        add(r2, c2 + 1, z.imag());
        add(r2 + 1, c2, z.imag());
        add(r2 + 1, c2 + 1, -z.real());
    }
    SparseRealSym finalize(bool check_symmetry = true) const;
};

// Realified operator. Per-site layout: 4 consecutive reals
// (Re psi+, Im psi+, Re psi-, Im psi-); dimension 4 * sites for single
// operators and 8 * sites for the doubled particle-hole form.
struct RealSymOperator {
    SparseRealSym mat;
    Grid2D grid;
    std::string kind;
    double t = 1.0;

    int dim() const { return mat.n; }
};

// Component index helpers for the realified layout.
inline int re_plus(int site) { return 4 * site + 0; }
inline int re_minus(int site) { return 4 * site + 2; }

// d-bar block plus its exact adjoint, realified symmetric.
//
// Torus: forward gauge-covariant differences,
//   (d-bar psi)(x) = [(ux(x) psi(x+e_x) - psi(x)) + i (uy(x) psi(x+e_y) - psi(x))] / (2h).
// PlanePatch: spectral derivatives (sine-interpolant with odd extension across
// the Dirichlet boundary). A local one-sided stencil is not an option there:
// its symbol is a degree-one map of the Brillouin torus into C, so it has a
// second zero whose species is massless on an open patch and buries the
// physical spectrum under grid-scale states. The spectral symbol is exactly
// i k and has no partner zero. Plane assembly requires the zero connection.
RealSymOperator assemble_dirac(const Grid2D& g, const GaugeField& gauge);

// Exact 1D spectral derivative on n cell-centered points with zero boundary
// values (odd periodic extension of the sinc interpolant).
DMat spectral_derivative_1d(int n, double h);

// Pointwise conjugate-linear block (psi+, psi-) -> t*phi*(conj psi-, conj psi+).
RealSymOperator assemble_perturbation(const Grid2D& g, const HiggsConfig& higgs);

RealSymOperator assemble_H(const Grid2D& g, const GaugeField& gauge, const HiggsConfig& higgs);

// Chirality grading: +1 on the psi+ components, -1 on psi-.
std::vector<double> parity_diagonal(const Grid2D& g);

// Pointwise operator sum_i cl(dx^i) A_{grad_i phi} built from covariant
// forward differences of phi (phi transports with the squared spinor links).
RealSymOperator assemble_cl_grad_phi(const Grid2D& g, const GaugeField& gauge,
                                     const HiggsConfig& higgs);

// || (D A + A D - cl(A_grad_phi)) v || / || v || maximized over a few seeded
// random vectors. O(h) for smooth data; ~1e-12 on the torus when phi is
// covariantly constant.
double concentrating_pair_residual(const Grid2D& g, const GaugeField& gauge,
                                   const HiggsConfig& higgs, unsigned seed = 1,
                                   int trials = 4);

// Congruence e^{-varphi/2} H e^{-varphi/2} representing the conformally
// rescaled geometry in the flat-measure basis; kernel vectors transport as
// psi -> e^{varphi/2} psi.
RealSymOperator assemble_conformal(const Grid2D& g, const GaugeField& gauge,
                                   const HiggsConfig& higgs,
                                   const std::vector<double>& varphi);

struct BdGSpec {
    SparseRealSym ham;   // doubled dimension 8 * sites
    Grid2D grid;
    int p_sign = 1;      // relative sign of the two Dirac blocks
    int s_phi = 1;       // adjoint sign of the off-diagonal block
};

// Doubled operator [[D, A], [A^*, p D]] with A^* = s_phi A; C acts as
// (v1, v2) -> (conj v2, s_phi p conj v1) where conj flips the imaginary
// components of the realified layout.
BdGSpec assemble_bdg(const Grid2D& g, const GaugeField& gauge, const HiggsConfig& higgs,
                     int p_sign, int s_phi);

void bdg_apply_C(const BdGSpec& spec, const std::vector<double>& x, std::vector<double>& y);

// Sparse triplet text dump (row col value per line) plus a JSON sidecar with
// grid and operator metadata.
void export_operator(const RealSymOperator& op, const std::string& path_prefix);

}  // namespace jr
