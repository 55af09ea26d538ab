#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jr/linalg.hpp"

namespace jr {

// The brute-force reference solver lives on its own square patch (cell
// centered, zero outside) and builds its own spectral derivative matrices,
// so it shares no code path with the sparse pipeline it validates.
struct OracleDomain {
    double R = 0;
    int n = 0;
    double h = 0;
    std::vector<cplx> points;  // row-major cell centers

    int sites() const { return n * n; }
};

OracleDomain make_oracle_domain(double R, int n);

struct ModelProblem {
    cplx T{4.0, 0.0};
    int p = 1, q = 0;
    std::vector<cplx> poly;  // homogeneous perturbation coefficients (m+1 of them)
    double R = 3.0;
    int n = 32;
    std::function<cplx(cplx)> alpha;  // optional; support must stay inside R/2

    int m() const { return p + q; }
    int k() const { return p - q; }
    cplx phi(cplx z) const;
};

// Checks |Phi|^2 >= 2 |dPhi| outside R/2 (numerically on a ring sweep).
bool truncation_radius_ok(const ModelProblem& prob);

// Truncation radius for a leading coefficient of modulus |T| and degree m:
// a few decay lengths of the bound modes, and wide enough that the field
// dominates its gradient outside the half radius. Truncating farther out
// only deepens the boundary-layer artifact ladder the solver must classify.
double suggested_radius(double absT, int m);

struct OracleMode {
    double sigma = 0;
    std::vector<cplx> vec;  // complex samples
    double roughness = 0, boundary_mass = 0;
    bool physical = false;
};

struct KernelReport {
    int kernel_dim = -1;
    double separation = 0;
    double gap = 0;          // smallest physical singular value above the kernel
    double sigma_max = 0;
    int spurious = 0;
    bool ok = false;
    std::string note;
    std::vector<double> smallest;      // smallest resolved singular values (all)
    std::vector<OracleMode> modes;     // resolved bottom modes with classification
    OracleDomain dom;
};

// Kernel dimension of the first-order model operator
//   sign=+1: D+ f =  dbar f + alpha f + Phi conj(f)
//   sign=-1: D- f = -del  f + conj(alpha) f + Phi conj(f)
// by dense resolution of the bottom of the realified normal spectrum
// (full dense eigenvalues plus Cholesky-shifted block inverse iteration for
// the bottom eigenvectors). Singular vectors failing the decay test are
// truncation artifacts and are excluded and counted.
KernelReport dense_kernel_dim(const ModelProblem& prob, int sign);

// Closed-form kernel representative for Phi = t z: f = c exp(-t |z|^2).
std::vector<cplx> exact_mode_k1(double t, const OracleDomain& dom);

// Residual ||D f|| / ||f|| for given samples (same discretization as the
// dense solver).
double model_residual(const ModelProblem& prob, const OracleDomain& dom,
                      const std::vector<cplx>& f, int sign = +1);

struct DecayFit {
    double rate = 0;        // slope of -log|f| vs |z| over the fit annulus
    double quadratic = 0;   // coefficient of |z|^2 in the richer fit
    bool super_exponential = false;
    int points = 0;
};

// Least-squares decay fit of log|f| over the annulus [R/4, R/2].
DecayFit decay_rate_fit(const OracleDomain& dom, const std::vector<cplx>& f);

struct AlphaSweepRow {
    double alpha_norm = 0;
    int dim_plus = -1, dim_minus = -1;
    double separation = 0;
    bool ok = false;
};

// Re-runs the dense solver across alpha amplitudes (alpha = scale * bump with
// a fixed smooth bump supported in |z| < R/2).
std::vector<AlphaSweepRow> alpha_robustness(const ModelProblem& base,
                                            const std::vector<double>& scales);

// Largest amplitude (within [lo, hi], resolved by bisection to rel_tol) for
// which the kernel dimensions still match the unperturbed ones.
double alpha_threshold(const ModelProblem& base, double lo, double hi, double rel_tol = 0.05);

}  // namespace jr
