// Sparse-path probe: low spectrum of the patch problem at acceptance-scale grids.
#include <cstdio>
#include <cmath>
#include <cstdlib>

#include "jr/assembly.hpp"
#include "jr/eigensolver.hpp"
#include "jr/fields.hpp"

using namespace jr;

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 48;
    double t = argc > 2 ? std::atof(argv[2]) : 4.0;
    double R = argc > 3 ? std::atof(argv[3]) : 4.0;
    int pexp = argc > 4 ? std::atoi(argv[4]) : 1;
    int qexp = argc > 5 ? std::atoi(argv[5]) : 0;
    int pairs = argc > 6 ? std::atoi(argv[6]) : 10;

    Grid2D g = Grid2D::plane(R, n);
    GaugeField gauge = GaugeField::trivial(g);
    HiggsConfig higgs = sample_model_phi(g, cplx(t, 0), pexp, qexp);
    double cap = (argc > 7 && std::atof(argv[7]) > 0) ? std::atof(argv[7])
                                                       : default_saturation(g, higgs);
    if (cap > 0) {
        double frac = saturate_higgs(higgs, cap);
        std::printf("saturation cap %.3f touched %.1f%% of sites\n", cap, 100 * frac);
    }

    RealSymOperator H = assemble_H(g, gauge, higgs);
    SolverConfig cfg;
    cfg.num_pairs = pairs;
    cfg.seed = 3;
    cfg.min_physical = 4;
    cfg.tol = argc > 8 ? std::atof(argv[8]) : 0.0;
    cfg.physical = [&](const std::vector<double>& v) {
        std::vector<cplx> plus(g.sites()), minus(g.sites());
        double mp = 0, mm = 0;
        for (int s = 0; s < g.sites(); ++s) {
            plus[s] = {v[4 * s + 0], v[4 * s + 1]};
            minus[s] = {v[4 * s + 2], v[4 * s + 3]};
            mp += std::norm(plus[s]);
            mm += std::norm(minus[s]);
        }
        bool ok = false;
        if (mp > 1e-4 * (mp + mm) && mode_quality(g, plus).physical) ok = true;
        if (mm > 1e-4 * (mp + mm) && mode_quality(g, minus).physical) ok = true;
        return ok;
    };
    SpectrumReport rep = smallest_eigenpairs(H.mat, cfg);
    std::printf("n=%d t=%g R=%g (p,q)=(%d,%d) dim=%d norm=%.3g tol=%.2e conv=%d matvecs=%ld\n",
                n, t, R, pexp, qexp, H.mat.n, rep.norm_estimate, rep.tol_used,
                int(rep.converged), rep.matvecs);
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        std::vector<cplx> plus(g.sites()), minus(g.sites());
        const auto& v = rep.vectors[i];
        for (int s = 0; s < g.sites(); ++s) {
            plus[s] = {v[4 * s + 0], v[4 * s + 1]};
            minus[s] = {v[4 * s + 2], v[4 * s + 3]};
        }
        ModeQuality qp = mode_quality(g, plus);
        ModeQuality qm = mode_quality(g, minus);
        std::printf(" lam %+12.5e res %.1e m+=%.3f | +:r=%.2f b=%.2f | -:r=%.2f b=%.2f\n",
                    rep.eigenvalues[i], rep.residuals[i],
                    rep.plus_mass[i] / (rep.plus_mass[i] + rep.minus_mass[i]),
                    qp.roughness, qp.boundary_mass, qm.roughness, qm.boundary_mass);
    }
    KernelCount kc = kernel_count(rep, g);
    std::printf("kernel: (+%d,-%d) total=%d spurious=%d sep=%.2f gap=%.4g amb=%d note=%s\n",
                kc.dim_plus, kc.dim_minus, kc.total, kc.spurious, kc.separation, kc.gap,
                int(kc.ambiguous), kc.note.c_str());
    return 0;
}
