#include "jr/fields.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace jr {

namespace {
constexpr double pi = std::numbers::pi;

double wrap_angle(double a) {
    while (a > pi) a -= 2 * pi;
    while (a <= -pi) a += 2 * pi;
    return a;
}
}  // namespace

Grid2D Grid2D::plane(double R, int n) {
    if (R <= 0 || n < 2) throw std::invalid_argument("Grid2D::plane: bad parameters");
    Grid2D g;
    g.kind = GridKind::PlanePatch;
    g.R = R;
    g.nx = g.ny = n;
    g.h = 2.0 * R / n;
    return g;
}

Grid2D Grid2D::torus(double Lx, double Ly, int nx, int ny) {
    if (Lx <= 0 || Ly <= 0 || nx < 2 || ny < 2)
        throw std::invalid_argument("Grid2D::torus: bad parameters");
    Grid2D g;
    g.kind = GridKind::Torus;
    g.Lx = Lx;
    g.Ly = Ly;
    g.nx = nx;
    g.ny = ny;
    g.h = Lx / nx;
    if (std::fabs(Ly / ny - g.h) > 1e-12 * g.h)
        throw std::invalid_argument("Grid2D::torus: anisotropic spacing unsupported");
    return g;
}

double Grid2D::x(int ix) const {
    return is_torus() ? ix * h : -R + (ix + 0.5) * h;
}

double Grid2D::y(int iy) const {
    return is_torus() ? iy * h : -R + (iy + 0.5) * h;
}

double Grid2D::dist(cplx a, cplx b) const {
    if (!is_torus()) return std::abs(a - b);
    double dx = std::fabs(a.real() - b.real());
    double dy = std::fabs(a.imag() - b.imag());
    dx = std::min(dx, Lx - dx);
    dy = std::min(dy, Ly - dy);
    return std::hypot(dx, dy);
}

bool Grid2D::same_as(const Grid2D& o) const {
    if (kind != o.kind || nx != o.nx || ny != o.ny) return false;
    if (kind == GridKind::PlanePatch) return std::fabs(R - o.R) < 1e-12;
    return std::fabs(Lx - o.Lx) < 1e-12 && std::fabs(Ly - o.Ly) < 1e-12;
}

SpinorField SpinorField::zero(const Grid2D& g) {
    SpinorField f;
    f.plus.assign(g.sites(), cplx(0, 0));
    f.minus.assign(g.sites(), cplx(0, 0));
    return f;
}

double SpinorField::l2norm(const Grid2D& g) const {
    double s = 0;
    for (const auto& v : plus) s += std::norm(v);
    for (const auto& v : minus) s += std::norm(v);
    return std::sqrt(s * g.h * g.h);
}

GaugeField GaugeField::trivial(const Grid2D& g) {
    GaugeField f;
    f.ux.assign(g.sites(), cplx(1, 0));
    f.uy.assign(g.sites(), cplx(1, 0));
    return f;
}

double plaquette_angle(const Grid2D& g, const GaugeField& gauge, int ix, int iy) {
    int n = g.idx(ix, iy);
    int nxp = g.idx((ix + 1) % g.nx, iy);
    int nyp = g.idx(ix, (iy + 1) % g.ny);
    cplx u = gauge.ux[n] * gauge.uy[nxp] * std::conj(gauge.ux[nyp]) * std::conj(gauge.uy[n]);
    return std::arg(u);
}

double total_flux(const Grid2D& g, const GaugeField& gauge) {
    double s = 0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) s += plaquette_angle(g, gauge, ix, iy);
    return s;
}

double HiggsConfig::delta(const Grid2D& g) const {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zeros.size(); ++i)
        for (std::size_t j = i + 1; j < zeros.size(); ++j)
            dmin = std::min(dmin, g.dist(zeros[i].position, zeros[j].position));
    return dmin / 4.0;
}

int HiggsConfig::total_index() const {
    int k = 0;
    for (const auto& z : zeros) k += z.index_k;
    return k;
}

int HiggsConfig::max_degree() const {
    int m = 0;
    for (const auto& z : zeros) m = std::max(m, z.degree_m);
    return m;
}

void validate_higgs(const Grid2D& g, const HiggsConfig& higgs) {
    if (higgs.phi.size() != std::size_t(g.sites()))
        throw std::invalid_argument("higgs: sample count does not match grid");
    for (std::size_t i = 0; i < higgs.zeros.size(); ++i) {
        if (higgs.zeros[i].degree_m < 1)
            throw std::invalid_argument("higgs: zero degree must be positive");
        for (std::size_t j = i + 1; j < higgs.zeros.size(); ++j)
            if (g.dist(higgs.zeros[i].position, higgs.zeros[j].position) < 1e-12)
                throw std::invalid_argument("higgs: coincident zeros (merge multiplicities)");
    }
    double del = higgs.delta(g);
    if (!higgs.zeros.empty()) {
        double floor_off = std::numeric_limits<double>::infinity();
        for (int s = 0; s < g.sites(); ++s) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& zd : higgs.zeros)
                d = std::min(d, g.dist(g.z(s), zd.position));
            bool outside = std::isinf(del) ? (d > 0.5) : (d > del);
            if (outside) floor_off = std::min(floor_off, std::abs(higgs.phi[s]));
        }
        if (!(floor_off > 0))
            throw std::invalid_argument("higgs: |phi| not bounded below away from declared zeros");
    }
}

double ScalingSchedule::tau(double t) const {
    return std::pow(t, 1.0 / (max_degree + 1));
}

void ScalingSchedule::validate() const {
    if (t_values.empty()) throw std::invalid_argument("schedule: empty");
    if (max_degree < 0) throw std::invalid_argument("schedule: bad degree");
    double prev = 0;
    for (double t : t_values) {
        if (!(t > prev)) throw std::invalid_argument("schedule: t values must be increasing and positive");
        prev = t;
    }
}

HiggsConfig sample_model_phi(const Grid2D& g, cplx T, int p, int q,
                             const std::vector<cplx>& poly, double* eps_out) {
    if (p < 0 || q < 0) throw std::invalid_argument("sample_model_phi: p, q must be nonnegative");
    const int m = p + q;
    if (!poly.empty() && int(poly.size()) != m + 1)
        throw std::invalid_argument("sample_model_phi: perturbation needs m+1 coefficients");

    auto eval_poly = [&](cplx z) {
        cplx v = 0;
        if (poly.empty()) return v;
        for (int j = 0; j <= m; ++j)
            v += poly[j] * std::pow(z, m - j) * std::pow(std::conj(z), j);
        return v;
    };

    // sup of |poly| on the unit circle vs |T|
    double worst = 0;
    for (int i = 0; i < 256; ++i) {
        double th = 2 * pi * i / 256;
        worst = std::max(worst, std::abs(eval_poly(std::polar(1.0, th))));
    }
    double margin = worst / std::abs(T);
    if (margin >= 1.0 - 1e-9)
        throw std::invalid_argument("sample_model_phi: perturbation exceeds the leading term");
    if (eps_out) *eps_out = 1.0 - margin;

    HiggsConfig hc;
    hc.phi.resize(g.sites());
    for (int s = 0; s < g.sites(); ++s) {
        cplx z = g.z(s);
        hc.phi[s] = T * std::pow(z, p) * std::pow(std::conj(z), q) + eval_poly(z);
    }
    if (m > 0) hc.zeros.push_back({cplx(0, 0), p - q, m});
    return hc;
}

HiggsConfig sample_product_phi(const Grid2D& g, const std::vector<VortexFactor>& factors,
                               cplx prefactor) {
    HiggsConfig hc;
    hc.phi.assign(g.sites(), prefactor);
    for (int s = 0; s < g.sites(); ++s) {
        cplx z = g.z(s);
        for (const auto& f : factors) {
            cplx w = z - f.position;
            cplx base = (f.winding >= 0) ? w : std::conj(w);
            for (int j = 0; j < f.multiplicity; ++j) hc.phi[s] *= base;
        }
    }
    for (const auto& f : factors)
        hc.zeros.push_back({f.position, (f.winding >= 0 ? 1 : -1) * f.multiplicity, f.multiplicity});
    return hc;
}

int winding_number(const Grid2D& g, const std::vector<cplx>& phi, cplx center, double radius) {
    if (radius <= g.h) throw std::invalid_argument("winding_number: radius below grid spacing");
    int steps = std::max(64, int(std::ceil(2 * pi * radius / g.h)) * 2);
    auto site_near = [&](double th) {
        cplx target = center + std::polar(radius, th);
        int ix = int(std::lround(g.is_torus() ? target.real() / g.h
                                              : (target.real() + g.R) / g.h - 0.5));
        int iy = int(std::lround(g.is_torus() ? target.imag() / g.h
                                              : (target.imag() + g.R) / g.h - 0.5));
        if (g.is_torus()) {
            ix = ((ix % g.nx) + g.nx) % g.nx;
            iy = ((iy % g.ny) + g.ny) % g.ny;
        } else {
            if (ix < 0 || iy < 0 || ix >= g.nx || iy >= g.ny)
                throw std::invalid_argument("winding_number: loop leaves the grid");
        }
        return g.idx(ix, iy);
    };
    double total = 0;
    int prev = site_near(0);
    if (std::abs(phi[prev]) == 0) throw std::invalid_argument("winding_number: zero on loop");
    int first = prev;
    for (int i = 1; i <= steps; ++i) {
        int cur = (i == steps) ? first : site_near(2 * pi * i / steps);
        if (cur == prev) continue;
        if (std::abs(phi[cur]) == 0) throw std::invalid_argument("winding_number: zero on loop");
        total += std::arg(phi[cur] / phi[prev]);
        prev = cur;
    }
    double w = total / (2 * pi);
    int k = int(std::lround(w));
    if (std::fabs(w - k) > 0.25)
        throw std::runtime_error("winding_number: phase increments do not close to an integer");
    return k;
}

GaugeField torus_gauge_field(const Grid2D& g, int degree, bool twist_x, bool twist_y) {
    if (!g.is_torus()) throw std::invalid_argument("torus_gauge_field: grid is not a torus");
    GaugeField f = GaugeField::trivial(g);
    const double bh2 = 2 * pi * double(degree) / double(g.nx * g.ny);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int n = g.idx(ix, iy);
            f.ux[n] = std::polar(1.0, -bh2 * iy);
            if (iy == g.ny - 1)
                f.uy[n] = std::polar(1.0, bh2 * g.ny * ix);
        }
    if (twist_x)
        for (int iy = 0; iy < g.ny; ++iy) f.ux[g.idx(g.nx - 1, iy)] *= -1.0;
    if (twist_y)
        for (int ix = 0; ix < g.nx; ++ix) f.uy[g.idx(ix, g.ny - 1)] *= -1.0;
    return f;
}

double saturate_higgs(HiggsConfig& higgs, double cap) {
    if (!(cap > 0)) throw std::invalid_argument("saturate_higgs: cap must be positive");
    std::size_t touched = 0;
    for (auto& v : higgs.phi) {
        double a = std::abs(v);
        if (a > cap) {
            v *= cap / a;
            ++touched;
        }
    }
    return higgs.phi.empty() ? 0.0 : double(touched) / double(higgs.phi.size());
}

double default_saturation(const Grid2D& g, const HiggsConfig& higgs) {
    (void)higgs;
    // twice the largest representable symbol magnitude: the capped region is
    // spectrally dead for every resolvable mode, truncation layers are
    // suppressed exponentially deep, and the operator norm stays moderate
    return pi * std::sqrt(2.0) / g.h;
}

// ---------------------------------------------------------------------------
// binary format: "JRFB" u32 | version u32 | kind u32 | grid | payload
// grid: kind u32, nx i32, ny i32, R f64, Lx f64, Ly f64

namespace {

constexpr uint32_t kMagic = 0x4a524642;  // "JRFB"
constexpr uint32_t kVersion = 1;

struct Writer {
    FILE* f;
    explicit Writer(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw std::runtime_error("cannot open for write: " + path);
    }
    ~Writer() { if (f) std::fclose(f); }
    void u32(uint32_t v) { if (std::fwrite(&v, 4, 1, f) != 1) throw std::runtime_error("write failed"); }
    void i32(int32_t v) { if (std::fwrite(&v, 4, 1, f) != 1) throw std::runtime_error("write failed"); }
    void f64(double v) { if (std::fwrite(&v, 8, 1, f) != 1) throw std::runtime_error("write failed"); }
    void cvec(const std::vector<cplx>& v) {
        for (const auto& c : v) { f64(c.real()); f64(c.imag()); }
    }
};

struct Reader {
    FILE* f;
    explicit Reader(const std::string& path) : f(std::fopen(path.c_str(), "rb")) {
        if (!f) throw std::runtime_error("cannot open for read: " + path);
    }
    ~Reader() { if (f) std::fclose(f); }
    uint32_t u32() { uint32_t v; if (std::fread(&v, 4, 1, f) != 1) throw std::runtime_error("malformed field file"); return v; }
    int32_t i32() { int32_t v; if (std::fread(&v, 4, 1, f) != 1) throw std::runtime_error("malformed field file"); return v; }
    double f64() { double v; if (std::fread(&v, 8, 1, f) != 1) throw std::runtime_error("malformed field file"); return v; }
    void cvec(std::vector<cplx>& v, std::size_t n) {
        v.resize(n);
        for (auto& c : v) { double re = f64(), im = f64(); c = {re, im}; }
    }
};

void write_header(Writer& w, uint32_t kind, const Grid2D& g) {
    w.u32(kMagic);
    w.u32(kVersion);
    w.u32(kind);
    w.u32(g.kind == GridKind::Torus ? 1u : 0u);
    w.i32(g.nx);
    w.i32(g.ny);
    w.f64(g.R);
    w.f64(g.Lx);
    w.f64(g.Ly);
}

void read_header(Reader& r, uint32_t want_kind, const Grid2D& expected) {
    if (r.u32() != kMagic) throw std::runtime_error("malformed field file (bad magic)");
    if (r.u32() != kVersion) throw std::runtime_error("malformed field file (bad version)");
    if (r.u32() != want_kind) throw std::runtime_error("field file holds a different payload kind");
    Grid2D g;
    g.kind = r.u32() == 1u ? GridKind::Torus : GridKind::PlanePatch;
    g.nx = r.i32();
    g.ny = r.i32();
    g.R = r.f64();
    g.Lx = r.f64();
    g.Ly = r.f64();
    g.h = g.kind == GridKind::Torus ? (g.nx ? g.Lx / g.nx : 0) : (g.nx ? 2 * g.R / g.nx : 0);
    if (!g.same_as(expected)) throw std::runtime_error("grid mismatch");
}

}  // namespace

void save_spinor(const std::string& path, const Grid2D& g, const SpinorField& f) {
    Writer w(path);
    write_header(w, 0, g);
    w.cvec(f.plus);
    w.cvec(f.minus);
}

SpinorField load_spinor(const std::string& path, const Grid2D& expected) {
    Reader r(path);
    read_header(r, 0, expected);
    SpinorField f;
    r.cvec(f.plus, expected.sites());
    r.cvec(f.minus, expected.sites());
    return f;
}

void save_gauge(const std::string& path, const Grid2D& g, const GaugeField& f) {
    Writer w(path);
    write_header(w, 1, g);
    w.cvec(f.ux);
    w.cvec(f.uy);
}

GaugeField load_gauge(const std::string& path, const Grid2D& expected) {
    Reader r(path);
    read_header(r, 1, expected);
    GaugeField f;
    r.cvec(f.ux, expected.sites());
    r.cvec(f.uy, expected.sites());
    return f;
}

void save_higgs(const std::string& path, const Grid2D& g, const HiggsConfig& f) {
    Writer w(path);
    write_header(w, 2, g);
    w.cvec(f.phi);
    w.u32(uint32_t(f.zeros.size()));
    for (const auto& z : f.zeros) {
        w.f64(z.position.real());
        w.f64(z.position.imag());
        w.i32(z.index_k);
        w.i32(z.degree_m);
    }
    w.f64(f.scale_t);
}

HiggsConfig load_higgs(const std::string& path, const Grid2D& expected) {
    Reader r(path);
    read_header(r, 2, expected);
    HiggsConfig f;
    r.cvec(f.phi, expected.sites());
    uint32_t nz = r.u32();
    if (nz > 1u << 20) throw std::runtime_error("malformed field file (zero count)");
    for (uint32_t i = 0; i < nz; ++i) {
        ZeroDatum z;
        double re = r.f64(), im = r.f64();
        z.position = {re, im};
        z.index_k = r.i32();
        z.degree_m = r.i32();
        f.zeros.push_back(z);
    }
    f.scale_t = r.f64();
    return f;
}

void export_spinor_csv(const std::string& path, const Grid2D& g, const SpinorField& f) {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open for write: " + path);
    std::fprintf(fp, "ix,iy,component,re,im\n");
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int s = g.idx(ix, iy);
            std::fprintf(fp, "%d,%d,plus,%.17g,%.17g\n", ix, iy, f.plus[s].real(), f.plus[s].imag());
            std::fprintf(fp, "%d,%d,minus,%.17g,%.17g\n", ix, iy, f.minus[s].real(), f.minus[s].imag());
        }
    std::fclose(fp);
}

}  // namespace jr
