#include "jr/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "jr/rng.hpp"
#include <json.hpp>

namespace jr {

void SparseRealSym::matvec(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

void SparseRealSym::matvec(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(n);
    matvec(x.data(), y.data());
}

double SparseRealSym::max_asymmetry() const {
    // compare against the transpose entry-by-entry
    std::vector<int> order(col.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> row_of(col.size());
    for (int i = 0; i < n; ++i)
        for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) row_of[k] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::pair(col[a], row_of[a]) < std::pair(col[b], row_of[b]);
    });
    double worst = 0;
    std::size_t p = 0;
    for (int i = 0; i < n; ++i)
        for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) {
            // entry (i, col[k]); the p-th entry of the (col, row)-sorted list
            // must be its transpose partner
            int tk = order[p++];
            if (col[tk] != i || row_of[tk] != col[k]) return 1e300;  // pattern mismatch
            worst = std::max(worst, std::fabs(val[k] - val[tk]));
        }
    return worst;
}

SparseRealSym TripletBuilder::finalize(bool check_symmetry) const {
    std::vector<int> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::pair(rows[a], cols[a]) < std::pair(rows[b], cols[b]);
    });
    SparseRealSym m;
    m.n = n;
    m.rowptr.assign(n + 1, 0);
    for (std::size_t p = 0; p < order.size();) {
        int r = rows[order[p]], c = cols[order[p]];
        double v = 0;
        while (p < order.size() && rows[order[p]] == r && cols[order[p]] == c)
            v += vals[order[p++]];
        if (v != 0.0) {
            m.col.push_back(c);
            m.val.push_back(v);
            m.rowptr[r + 1]++;
        }
    }
    for (int i = 0; i < n; ++i) m.rowptr[i + 1] += m.rowptr[i];
    if (check_symmetry) {
        double asym = m.max_asymmetry();
        if (!(asym == 0.0))
            throw std::logic_error("assembled operator is not exactly symmetric");
    }
    return m;
}

namespace {

struct Neighbor {
    int site = -1;   // -1: outside a Dirichlet patch
    cplx link = 1.0; // transport factor for the spinor components
};

Neighbor neighbor_x(const Grid2D& g, const GaugeField& gauge, int ix, int iy) {
    if (ix + 1 < g.nx) return {g.idx(ix + 1, iy), gauge.ux[g.idx(ix, iy)]};
    if (!g.is_torus()) return {};
    return {g.idx(0, iy), gauge.ux[g.idx(ix, iy)]};
}

Neighbor neighbor_y(const Grid2D& g, const GaugeField& gauge, int ix, int iy) {
    if (iy + 1 < g.ny) return {g.idx(ix, iy + 1), gauge.uy[g.idx(ix, iy)]};
    if (!g.is_torus()) return {};
    return {g.idx(ix, 0), gauge.uy[g.idx(ix, iy)]};
}

// Emit the complex Hermitian pair for the off-diagonal Dirac blocks:
// component (minus at row site) += z * (plus at col site), and the adjoint.
void add_dirac_entry(TripletBuilder& b, int row_site, int col_site, cplx z) {
    b.add_complex(re_minus(row_site), re_plus(col_site), z);
    b.add_complex(re_plus(col_site), re_minus(row_site), std::conj(z));
}

void check_consistency(const Grid2D& g, const GaugeField& gauge) {
    if (gauge.ux.size() != std::size_t(g.sites()) || gauge.uy.size() != std::size_t(g.sites()))
        throw std::invalid_argument("gauge field does not match grid");
    for (const auto& u : gauge.ux)
        if (std::fabs(std::abs(u) - 1.0) > 1e-12)
            throw std::invalid_argument("gauge link is not unimodular");
    for (const auto& u : gauge.uy)
        if (std::fabs(std::abs(u) - 1.0) > 1e-12)
            throw std::invalid_argument("gauge link is not unimodular");
}

}  // namespace

DMat spectral_derivative_1d(int n, double h) {
    // periodic sinc derivative on 2n points (antisymmetric, exact on trig
    // polynomials below Nyquist), folded through the odd extension
    const double pi = 3.14159265358979323846;
    const int N = 2 * n;
    const double L = N * h;
    auto dper = [&](int k) -> double {
        k = ((k % N) + N) % N;
        if (k == 0) return 0.0;
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return (pi / L) * sign / std::tan(pi * k / N);
    };
    DMat d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d(i, j) = dper(i - j) - dper(i - (N - 1 - j));
    // The Nyquist sawtooth samples to zero under the interpolant derivative
    // (its cosine image vanishes at cell centers), leaving a spurious null.
    // Complete the symbol at the zone edge with a penalty above any admissible
    // saturated field (fields are capped at 1.5*pi/h, see default_saturation),
    // so no pointwise cancellation ring can form; smooth fields carry no
    // Nyquist content, so this is inert.
    const double c = 4.0 * pi / h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double si = (i % 2 == 0) ? 1.0 : -1.0;
            double sj = (j % 2 == 0) ? 1.0 : -1.0;
            d(i, j) += c * si * sj / double(n);
        }
    return d;
}

namespace {

RealSymOperator assemble_dirac_plane(const Grid2D& g) {
    const int n = g.nx;
    DMat d1 = spectral_derivative_1d(n, g.h);
    TripletBuilder b(4 * g.sites());
    const cplx I(0, 1);
    // d-bar = (Dx + i Dy) / 2 acting on cell values, Dirichlet outside
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int s = g.idx(ix, iy);
            for (int jx = 0; jx < n; ++jx) {
                double v = d1(ix, jx);
                if (v != 0.0) add_dirac_entry(b, s, g.idx(jx, iy), 0.5 * v);
            }
            for (int jy = 0; jy < n; ++jy) {
                double v = d1(iy, jy);
                if (v != 0.0) add_dirac_entry(b, s, g.idx(ix, jy), 0.5 * I * v);
            }
        }
    RealSymOperator op;
    op.mat = b.finalize();
    op.grid = g;
    op.kind = "dirac_spectral";
    return op;
}

}  // namespace

RealSymOperator assemble_dirac(const Grid2D& g, const GaugeField& gauge) {
    check_consistency(g, gauge);
    if (!g.is_torus()) {
        for (const auto& u : gauge.ux)
            if (std::abs(u - cplx(1, 0)) > 1e-14)
                throw std::invalid_argument("plane assembly supports only the zero connection");
        for (const auto& u : gauge.uy)
            if (std::abs(u - cplx(1, 0)) > 1e-14)
                throw std::invalid_argument("plane assembly supports only the zero connection");
        return assemble_dirac_plane(g);
    }
    TripletBuilder b(4 * g.sites());
    const double w = 1.0 / (2.0 * g.h);
    const cplx I(0, 1);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int s = g.idx(ix, iy);
            // d-bar psi = [(ux psi_+x - psi) + i (uy psi_+y - psi)] / (2h)
            add_dirac_entry(b, s, s, -(cplx(1, 0) + I) * w);
            Neighbor nx = neighbor_x(g, gauge, ix, iy);
            if (nx.site >= 0) add_dirac_entry(b, s, nx.site, nx.link * w);
            Neighbor ny = neighbor_y(g, gauge, ix, iy);
            if (ny.site >= 0) add_dirac_entry(b, s, ny.site, I * ny.link * w);
        }
    RealSymOperator op;
    op.mat = b.finalize();
    op.grid = g;
    op.kind = "dirac";
    return op;
}

RealSymOperator assemble_perturbation(const Grid2D& g, const HiggsConfig& higgs) {
    if (higgs.phi.size() != std::size_t(g.sites()))
        throw std::invalid_argument("higgs field does not match grid");
    TripletBuilder b(4 * g.sites());
    for (int s = 0; s < g.sites(); ++s) {
        cplx z = higgs.scale_t * higgs.phi[s];
        b.add_conj(re_plus(s), re_minus(s), z);
        b.add_conj(re_minus(s), re_plus(s), z);
    }
    RealSymOperator op;
    op.mat = b.finalize();
    op.grid = g;
    op.kind = "perturbation";
    op.t = higgs.scale_t;
    return op;
}

namespace {

RealSymOperator assemble_sum(const Grid2D& g, const RealSymOperator& a, const RealSymOperator& c,
                             const std::string& kind) {
    TripletBuilder b(a.mat.n);
    auto push = [&](const SparseRealSym& m) {
        for (int i = 0; i < m.n; ++i)
            for (int k = m.rowptr[i]; k < m.rowptr[i + 1]; ++k) b.add(i, m.col[k], m.val[k]);
    };
    push(a.mat);
    push(c.mat);
    RealSymOperator op;
    op.mat = b.finalize();
    op.grid = g;
    op.kind = kind;
    op.t = c.t;
    return op;
}

}  // namespace

RealSymOperator assemble_H(const Grid2D& g, const GaugeField& gauge, const HiggsConfig& higgs) {
    if (!g.is_torus()) {
        // the spectral symbol completion dominates saturated fields 2x; an
        // uncapped field could cancel it on a ring and fake sub-gap states
        double ceiling = 1.8 * 3.14159265358979323846 / g.h;
        double worst = 0;
        for (const auto& v : higgs.phi) worst = std::max(worst, std::abs(v));
        worst *= std::fabs(higgs.scale_t);
        if (worst > ceiling)
            throw std::invalid_argument(
                "plane field exceeds the spectral mass ceiling; saturate_higgs first");
    }
    return assemble_sum(g, assemble_dirac(g, gauge), assemble_perturbation(g, higgs), "jr");
}

std::vector<double> parity_diagonal(const Grid2D& g) {
    std::vector<double> p(4 * g.sites());
    for (int s = 0; s < g.sites(); ++s) {
        p[4 * s + 0] = 1;
        p[4 * s + 1] = 1;
        p[4 * s + 2] = -1;
        p[4 * s + 3] = -1;
    }
    return p;
}

RealSymOperator assemble_cl_grad_phi(const Grid2D& g, const GaugeField& gauge,
                                     const HiggsConfig& higgs) {
    check_consistency(g, gauge);
    TripletBuilder b(4 * g.sites());
    auto phi_at = [&](int site) { return higgs.scale_t * higgs.phi[site]; };
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            int s = g.idx(ix, iy);
            cplx wx, wy;
            if (g.is_torus()) {
                // forward covariant differences; phi transports with the
                // squared spinor links (matches the Dirac stencil)
                Neighbor nx = neighbor_x(g, gauge, ix, iy);
                Neighbor ny = neighbor_y(g, gauge, ix, iy);
                wx = (nx.link * nx.link * phi_at(nx.site) - phi_at(s)) / g.h;
                wy = (ny.link * ny.link * phi_at(ny.site) - phi_at(s)) / g.h;
            } else {
                // zero connection: centered differences, one-sided at edges
                auto diff = [&](int bx, int by) -> cplx {
                    int xp = ix + bx, yp = iy + by, xm = ix - bx, ym = iy - by;
                    bool has_p = xp >= 0 && yp >= 0 && xp < g.nx && yp < g.ny;
                    bool has_m = xm >= 0 && ym >= 0 && xm < g.nx && ym < g.ny;
                    cplx fp = has_p ? phi_at(g.idx(xp, yp)) : phi_at(s);
                    cplx fm = has_m ? phi_at(g.idx(xm, ym)) : phi_at(s);
                    double span = (has_p && has_m) ? 2 * g.h : g.h;
                    return (fp - fm) / span;
                };
                wx = diff(1, 0);
                wy = diff(0, 1);
            }
            // cl(dx) A_{wx} + cl(dy) A_{wy} acts diagonally per chirality:
            //   psi+ <- ((-wx + i wy)/2) conj(psi+),  psi- <- ((wx + i wy)/2) conj(psi-)
            b.add_conj(re_plus(s), re_plus(s), (-wx + cplx(0, 1) * wy) * 0.5);
            b.add_conj(re_minus(s), re_minus(s), (wx + cplx(0, 1) * wy) * 0.5);
        }
    RealSymOperator op;
    op.mat = b.finalize();
    op.grid = g;
    op.kind = "cl_grad_phi";
    op.t = higgs.scale_t;
    return op;
}

double concentrating_pair_residual(const Grid2D& g, const GaugeField& gauge,
                                   const HiggsConfig& higgs, unsigned seed, int trials) {
    RealSymOperator D = assemble_dirac(g, gauge);
    RealSymOperator A = assemble_perturbation(g, higgs);
    RealSymOperator C = assemble_cl_grad_phi(g, gauge, higgs);
    const int n = D.mat.n;
    Rng rng(seed);
    double worst = 0;
    std::vector<double> v, t1, t2, t3;
    for (int trial = 0; trial < trials; ++trial) {
        v = rng.vector(n);
        double nv = norm2(v);
        A.mat.matvec(v, t1);
        D.mat.matvec(t1, t2);  // D A v
        D.mat.matvec(v, t1);
        std::vector<double> t4;
        A.mat.matvec(t1, t4);  // A D v
        C.mat.matvec(v, t3);
        double r = 0;
        for (int i = 0; i < n; ++i) {
            double e = t2[i] + t4[i] - t3[i];
            r += e * e;
        }
        worst = std::max(worst, std::sqrt(r) / nv);
    }
    return worst;
}

RealSymOperator assemble_conformal(const Grid2D& g, const GaugeField& gauge,
                                   const HiggsConfig& higgs,
                                   const std::vector<double>& varphi) {
    if (varphi.size() != std::size_t(g.sites()))
        throw std::invalid_argument("conformal factor does not match grid");
    for (double v : varphi)
        if (!std::isfinite(v)) throw std::invalid_argument("conformal factor not finite");
    RealSymOperator op = assemble_H(g, gauge, higgs);
    std::vector<double> c(op.mat.n);
    for (int s = 0; s < g.sites(); ++s) {
        double f = std::exp(-0.5 * varphi[s]);
        for (int j = 0; j < 4; ++j) c[4 * s + j] = f;
    }
    for (int i = 0; i < op.mat.n; ++i)
        for (int k = op.mat.rowptr[i]; k < op.mat.rowptr[i + 1]; ++k)
            op.mat.val[k] *= c[i] * c[op.mat.col[k]];
    op.kind = "jr_conformal";
    return op;
}

BdGSpec assemble_bdg(const Grid2D& g, const GaugeField& gauge, const HiggsConfig& higgs,
                     int p_sign, int s_phi) {
    if (p_sign * p_sign != 1 || s_phi * s_phi != 1)
        throw std::invalid_argument("assemble_bdg: signs must be +-1");
    RealSymOperator D = assemble_dirac(g, gauge);
    const int half = D.mat.n;
    // J = realified componentwise conjugation (flips the imaginary slots).
    auto jsign = [](int i) { return (i % 2 == 0) ? 1.0 : -1.0; };
    // Doubled blocks: [[D, A J], [s J A, p J D J]]. The second slot carries
    // conjugate components, which is where the J factors come from; with
    // A^T = s_phi A this is symmetric and satisfies the C identities exactly.
    TripletBuilder b(2 * half);
    for (int i = 0; i < half; ++i)
        for (int k = D.mat.rowptr[i]; k < D.mat.rowptr[i + 1]; ++k) {
            int j = D.mat.col[k];
            double v = D.mat.val[k];
            b.add(i, j, v);
            b.add(i + half, j + half, p_sign * jsign(i) * jsign(j) * v);
        }
    for (int s = 0; s < g.sites(); ++s) {
        cplx z = higgs.scale_t * higgs.phi[s];
        TripletBuilder a(half);
        a.add_conj(re_plus(s), re_minus(s), z);
        a.add_conj(re_minus(s), re_plus(s), double(s_phi) * z);
        for (std::size_t t = 0; t < a.rows.size(); ++t) {
            int i = a.rows[t], j = a.cols[t];
            double v = a.vals[t];
            b.add(i, j + half, v * jsign(j));
            b.add(i + half, j, s_phi * jsign(i) * v);
        }
    }
    BdGSpec spec;
    spec.ham = b.finalize();
    spec.grid = g;
    spec.p_sign = p_sign;
    spec.s_phi = s_phi;
    return spec;
}

void bdg_apply_C(const BdGSpec& spec, const std::vector<double>& x, std::vector<double>& y) {
    const int half = spec.ham.n / 2;
    y.assign(spec.ham.n, 0.0);
    const double sp = double(spec.s_phi * spec.p_sign);
    for (int i = 0; i < half; i += 2) {
        // realified conjugation: flip the imaginary component
        y[i] = x[half + i];
        y[i + 1] = -x[half + i + 1];
        y[half + i] = sp * x[i];
        y[half + i + 1] = -sp * x[i + 1];
    }
}

void export_operator(const RealSymOperator& op, const std::string& path_prefix) {
    {
        FILE* f = std::fopen((path_prefix + ".triplets").c_str(), "w");
        if (!f) throw std::runtime_error("cannot open for write: " + path_prefix + ".triplets");
        for (int i = 0; i < op.mat.n; ++i)
            for (int k = op.mat.rowptr[i]; k < op.mat.rowptr[i + 1]; ++k)
                std::fprintf(f, "%d %d %.17g\n", i, op.mat.col[k], op.mat.val[k]);
        std::fclose(f);
    }
    nlohmann::json meta;
    meta["kind"] = op.kind;
    meta["t"] = op.t;
    meta["dim"] = op.mat.n;
    meta["grid"]["type"] = op.grid.is_torus() ? "torus" : "plane";
    meta["grid"]["nx"] = op.grid.nx;
    meta["grid"]["ny"] = op.grid.ny;
    if (op.grid.is_torus()) {
        meta["grid"]["Lx"] = op.grid.Lx;
        meta["grid"]["Ly"] = op.grid.Ly;
    } else {
        meta["grid"]["R"] = op.grid.R;
    }
    FILE* f = std::fopen((path_prefix + ".json").c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for write: " + path_prefix + ".json");
    std::string s = meta.dump(2);
    std::fwrite(s.data(), 1, s.size(), f);
    std::fputc('\n', f);
    std::fclose(f);
}

}  // namespace jr
