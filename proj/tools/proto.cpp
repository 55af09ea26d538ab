// Scratch probe for the low spectrum structure on small grids. Not part of test suite.
#include <cstdio>
#include <cmath>

#include "jr/assembly.hpp"
#include "jr/eigensolver.hpp"
#include "jr/fields.hpp"
#include "jr/model_oracle.hpp"

using namespace jr;

static void dense_spectrum_probe(const Grid2D& g, const GaugeField& gauge,
                                 const HiggsConfig& higgs, const char* label) {
    RealSymOperator H = assemble_H(g, gauge, higgs);
    DMat D(H.mat.n, H.mat.n);
    for (int i = 0; i < H.mat.n; ++i)
        for (int k = H.mat.rowptr[i]; k < H.mat.rowptr[i + 1]; ++k)
            D(i, H.mat.col[k]) = H.mat.val[k];
    SymEig eig = sym_eigen(D);
    // sort by |lambda|
    std::vector<int> order(eig.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(eig.values[a]) < std::fabs(eig.values[b]);
    });
    std::printf("== %s (dim %d)\n", label, H.mat.n);
    for (int j = 0; j < 12; ++j) {
        int c = order[j];
        // chirality masses + localization + roughness
        std::vector<cplx> plus(g.sites()), minus(g.sites());
        for (int s = 0; s < g.sites(); ++s) {
            plus[s] = {eig.vecs(4 * s + 0, c), eig.vecs(4 * s + 1, c)};
            minus[s] = {eig.vecs(4 * s + 2, c), eig.vecs(4 * s + 3, c)};
        }
        double mp = 0, mm = 0;
        for (const auto& v : plus) mp += std::norm(v);
        for (const auto& v : minus) mm += std::norm(v);
        ModeQuality qp = mode_quality(g, plus);
        ModeQuality qm = mode_quality(g, minus);
        std::printf("  lam %+12.5e  mass(+)=%.3f  rough(+)=%.2f bnd(+)=%.2f | rough(-)=%.2f bnd(-)=%.2f\n",
                    eig.values[c], mp / (mp + mm), qp.roughness, qp.boundary_mass,
                    qm.roughness, qm.boundary_mass);
    }
}

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 24;
    double t = argc > 2 ? std::atof(argv[2]) : 4.0;
    double R = argc > 3 ? std::atof(argv[3]) : 4.0;

    {
        Grid2D g = Grid2D::plane(R, n);
        GaugeField gauge = GaugeField::trivial(g);
        HiggsConfig higgs = sample_model_phi(g, cplx(t, 0), 1, 0);
        char label[128];
        std::snprintf(label, sizeof label, "plane patch n=%d R=%.2f Phi=%.1f z", n, R, t);
        dense_spectrum_probe(g, gauge, higgs, label);
    }
    {
        // model oracle on the same scale
        ModelProblem prob;
        prob.T = {t, 0};
        prob.p = 1;
        prob.q = 0;
        prob.R = R;
        prob.n = n;
        for (int sign : {+1, -1}) {
            KernelReport rep = dense_kernel_dim(prob, sign);
            std::printf("oracle sign %+d: ok=%d dim=%d sep=%.2f gap=%.4g spurious=%d note=%s\n",
                        sign, int(rep.ok), rep.kernel_dim, rep.separation, rep.gap,
                        rep.spurious, rep.note.c_str());
            for (std::size_t i = 0; i < rep.modes.size() && i < 8; ++i)
                std::printf("   sigma=%.4e rough=%.2f bnd=%.2f phys=%d\n", rep.modes[i].sigma,
                            rep.modes[i].roughness, rep.modes[i].boundary_mass,
                            int(rep.modes[i].physical));
        }
    }
    {
        // flat torus, degree 0: kernel should be the constants
        int nt = (n % 4 == 0) ? n + 2 : n;
        Grid2D g = Grid2D::torus(6.0, 6.0, nt, nt);
        GaugeField gauge = GaugeField::trivial(g);
        HiggsConfig higgs;
        higgs.phi.assign(g.sites(), cplx(0, 0));
        char label[128];
        std::snprintf(label, sizeof label, "flat torus n=%d Phi=0", nt);
        dense_spectrum_probe(g, gauge, higgs, label);
    }
    return 0;
}
