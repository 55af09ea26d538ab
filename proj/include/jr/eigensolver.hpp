#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jr/assembly.hpp"

namespace jr {

struct SolverConfig {
    int num_pairs = 8;
    double tol = 0.0;          // 0: default 1e-8 * estimated ||H||
    long max_matvecs = 2000000;
    std::uint64_t seed = 0;
    int basis_cap = 0;         // 0: auto

    // Optional: keep extending the search until at least min_physical of the
    // returned states pass the classifier (used to dig through truncation
    // artifacts that cluster below the physical spectrum on open patches).
    int min_physical = 0;
    std::function<bool(const std::vector<double>&)> physical;

    // Optional search guide: the Krylov iteration runs on F (shift - H^2) F
    // instead of shift - H^2, steering the basis away from grid-scale
    // artifact states. Candidates are still refined and residual-checked
    // against the true H, so results remain honest; the filter only decides
    // where the solver looks first.
    std::function<void(std::vector<double>&)> filter;
};

// Low-pass filter for the 4-real-per-site layout: projects each chirality
// component onto the lower `keep_fraction` of the sine spectrum per axis.
std::function<void(std::vector<double>&)> halfband_filter(const Grid2D& g,
                                                          double keep_fraction = 0.5);

struct SpectrumReport {
    std::vector<double> eigenvalues;            // sorted by |lambda|
    std::vector<double> residuals;              // ||H x - lambda x||, unit x
    std::vector<std::vector<double>> vectors;
    std::vector<double> plus_mass, minus_mass;  // chirality masses per vector
    double norm_estimate = 0;
    double tol_used = 0;
    bool converged = false;
    long matvecs = 0;

    // smallest |lambda| strictly above the given cluster size
    double gap_above(int kernel_count) const;
};

// Lowest-|lambda| eigenpairs of a realified symmetric operator. Works on the
// shifted square (shift*I - H^2), which is definite, and recovers signed
// eigenvalues by a final Rayleigh-Ritz pass with H itself. Deterministic for
// fixed seed.
SpectrumReport smallest_eigenpairs(const SparseRealSym& H, const SolverConfig& cfg);

// Power-method estimate of ||H|| (30 iterations through H^2, fixed seed).
double norm_estimate(const SparseRealSym& H, std::uint64_t seed = 12345);

struct KernelCount {
    int dim_plus = 0, dim_minus = 0;
    int total = 0;           // dim_plus + dim_minus
    int spurious = 0;        // truncation/lattice artifacts excluded from the count
    double separation = 0;   // ratio first-out-of-cluster / last-in-cluster
    double gap = 0;          // smallest |lambda| above the counted cluster
    bool ambiguous = false;
    std::string note;
};

// Kernel accounting on a finite grid. Exactly degenerate zero clusters are
// split by projecting the span onto the chirality grading. Otherwise
// near-zero states appear as +-lambda pairs in which one chirality component
// approximates a decaying continuum solution and the other is its lattice
// partner (boundary layer on a patch, grid-scale oscillation on a torus);
// each pair counts once, on the side of the physical component. Requires a
// >= sep_required jump in |lambda| to close the cluster.
KernelCount kernel_count(const SpectrumReport& rep, const Grid2D& grid,
                         double sep_required = 10.0);

// Quality statistics used to tell physical modes from lattice partners.
struct ModeQuality {
    double roughness = 0;      // h * ||grad w|| / ||w||; ~sqrt(2) at grid scale
    double boundary_mass = 0;  // mass fraction in the outer quarter of a patch
    bool physical = false;
};
ModeQuality mode_quality(const Grid2D& grid, const std::vector<cplx>& component);

// Cluster detection on a magnitude-sorted list (shared with the dense
// oracle): returns count below the break, or -1 when no admissible break.
int cluster_split(const std::vector<double>& magnitudes, double sep_required,
                  double scale, double* separation_out = nullptr);

}  // namespace jr
