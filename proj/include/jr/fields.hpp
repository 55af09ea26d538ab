#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jr/linalg.hpp"

namespace jr {

enum class GridKind { PlanePatch, Torus };

// Uniform 2D grid. PlanePatch covers (-R,R)^2 with n x n cell-centered sites
// and zero (Dirichlet) values outside; Torus covers [0,Lx) x [0,Ly) with
// nx x ny sites at integer multiples of the spacing. Row-major enumeration.
struct Grid2D {
    GridKind kind = GridKind::PlanePatch;
    double R = 0.0;        // PlanePatch half-width
    double Lx = 0.0, Ly = 0.0;
    int nx = 0, ny = 0;
    double h = 0.0;

    static Grid2D plane(double R, int n);
    static Grid2D torus(double Lx, double Ly, int nx, int ny);

    bool is_torus() const { return kind == GridKind::Torus; }
    int sites() const { return nx * ny; }
    int idx(int ix, int iy) const { return iy * nx + ix; }
    double x(int ix) const;
    double y(int iy) const;
    cplx z(int ix, int iy) const { return {x(ix), y(iy)}; }
    cplx z(int site) const { return z(site % nx, site / nx); }

    // Distance respecting torus periodicity.
    double dist(cplx a, cplx b) const;

    bool same_as(const Grid2D& o) const;
};

struct SpinorField {
    std::vector<cplx> plus, minus;  // one value per site

    static SpinorField zero(const Grid2D& g);
    double l2norm(const Grid2D& g) const;  // sqrt(sum |.|^2 h^2)
};

// U(1) link phases for the bundle carried by the spinor components.
// ux[i] transports site i -> i+x, uy[i] transports i -> i+y. On the plane
// the default is the zero connection; torus wrap links may carry spin
// structure twists.
struct GaugeField {
    std::vector<cplx> ux, uy;

    static GaugeField trivial(const Grid2D& g);
};

// Total plaquette flux: sum over plaquettes of arg(U_p), each wrapped
// to (-pi, pi].
double total_flux(const Grid2D& g, const GaugeField& gauge);
double plaquette_angle(const Grid2D& g, const GaugeField& gauge, int ix, int iy);

struct ZeroDatum {
    cplx position;
    int index_k = 0;   // winding of the perturbation around the zero
    int degree_m = 0;  // homogeneity degree of the leading term
};

struct HiggsConfig {
    std::vector<cplx> phi;  // one sample per site
    std::vector<ZeroDatum> zeros;
    double scale_t = 1.0;

    // Quarter of the minimal pairwise distance between declared zeros
    // (infinity when fewer than two zeros).
    double delta(const Grid2D& g) const;
    int total_index() const;
    int max_degree() const;
};

// Validates the zero data: distinct positions and |phi| bounded below off
// the delta-balls. Throws std::invalid_argument on violation.
void validate_higgs(const Grid2D& g, const HiggsConfig& higgs);

struct ScalingSchedule {
    std::vector<double> t_values;  // strictly increasing, positive
    int max_degree = 1;            // M

    double tau(double t) const;
    void validate() const;
};

// Phi(z) = T z^p conj(z)^q + poly, with poly a homogeneous degree-(p+q)
// polynomial given by coefficients c[j] of z^(m-j) conj(z)^j. The
// perturbation must stay below |T| |z|^m on the unit circle (sampled at 256
// points); the realized margin is returned via eps_out when non-null.
HiggsConfig sample_model_phi(const Grid2D& g, cplx T, int p, int q,
                             const std::vector<cplx>& poly = {},
                             double* eps_out = nullptr);

// Product of local vortex factors: for each zero, (z - a) when k = +1 or
// conj(z - a) when k = -1, raised to the stated multiplicity.
struct VortexFactor {
    cplx position;
    int winding = 1;       // +-1
    int multiplicity = 1;
};
HiggsConfig sample_product_phi(const Grid2D& g, const std::vector<VortexFactor>& factors,
                               cplx prefactor = 1.0);

// Winding of phi around a lattice circle of the given radius; throws when a
// zero (or near-zero) sample lies on the loop.
int winding_number(const Grid2D& g, const std::vector<cplx>& phi, cplx center, double radius);

// Uniform-flux torus connection of the given bundle degree, with optional
// antiperiodic twists across the two seams. Plaquette angles are uniform and
// the total flux is exactly 2*pi*degree.
GaugeField torus_gauge_field(const Grid2D& g, int degree, bool twist_x = false,
                             bool twist_y = false);

// Caps the sample modulus at the given ceiling (phi -> phi * min(1, cap/|phi|)),
// preserving phases, zeros and winding. Polynomial fields grow far past every
// spectral scale of interest toward the patch corners; capping them there
// changes nothing below the cap (modes are exponentially dead in that region)
// while keeping the operator norm -- and with it the iterative eigensolver's
// spectral transform -- well conditioned. Returns the fraction of sites
// touched. Plane assembly enforces a ceiling of 0.9*pi/h; the default cap
// below stays under it.
double saturate_higgs(HiggsConfig& higgs, double cap);

// Default cap for plane fields: just above pi*sqrt(2)/(2h) (above every
// representable symbol magnitude, safely below the symbol completion).
double default_saturation(const Grid2D& g, const HiggsConfig& higgs);

// Binary round-trip formats (magic + version + grid header, payload of
// little-endian doubles) and a CSV export.
void save_spinor(const std::string& path, const Grid2D& g, const SpinorField& f);
SpinorField load_spinor(const std::string& path, const Grid2D& expected);
void save_gauge(const std::string& path, const Grid2D& g, const GaugeField& f);
GaugeField load_gauge(const std::string& path, const Grid2D& expected);
void save_higgs(const std::string& path, const Grid2D& g, const HiggsConfig& f);
HiggsConfig load_higgs(const std::string& path, const Grid2D& expected);
void export_spinor_csv(const std::string& path, const Grid2D& g, const SpinorField& f);

}  // namespace jr
