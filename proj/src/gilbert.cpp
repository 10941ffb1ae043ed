#include "dynamo/gilbert.hpp"

#include <cmath>

namespace dynamo {

GilbertData gilbert_constants(const VelocityProfile& profile, double r0, double M)
{
    const double om1 = profile.omega(r0, 1), om2 = profile.omega(r0, 2);
    const double u1 = profile.uz(r0, 1), u2 = profile.uz(r0, 2);
    if (u1 == 0.0) throw Error(ErrorKind::Degenerate, "degenerate pitch: U'(r0) = 0");
    if (om1 == 0.0) throw Error(ErrorKind::Degenerate, "degenerate shear: Omega'(r0) = 0");
    GilbertData gd;
    gd.r0 = r0;
    gd.M = M;
    gd.rho = om1 / u1;
    gd.K = -M * gd.rho;
    gd.omega_p = om1;
    gd.curvature = om2 - gd.rho * u2;
    gd.c2 = 0.5 * I_UNIT * M * gd.curvature;
    if (std::abs(gd.c2) == 0.0)
        throw Error(ErrorKind::Degenerate, "degenerate curvature: c2 = 0 (M = 0 or T''(r0) = 0)");
    gd.c2_sqrt = sqrt_re_pos(gd.c2);
    gd.alpha = sqrt_re_pos(-2.0 * I_UNIT * M / (r0 * r0 * r0 * om1));
    gd.stretch_root = sqrt_re_pos(-2.0 * I_UNIT * M * om1 / r0);
    gd.sigma = -r0 * om1 * gd.alpha;
    gd.mu_star = -gd.mass_term() + gd.stretch_root - gd.c2_sqrt;
    gd.chi = 0.5 / std::sqrt(std::abs(gd.c2));
    return gd;
}

double re_mu_star_of(const GilbertData& gd, double M)
{
    const double aM = std::abs(M);
    return std::sqrt(aM) * (std::sqrt(std::abs(gd.omega_p)) / std::sqrt(gd.r0) -
                            0.5 * std::sqrt(std::abs(gd.curvature))) -
           aM * aM * (1.0 / (gd.r0 * gd.r0) + gd.rho * gd.rho);
}

GrowthRate growth_rate(const GilbertData& gd)
{
    GrowthRate g;
    g.mu_star = gd.mu_star;
    g.re_mu_star = gd.mu_star.real();
    g.re_formula = re_mu_star_of(gd, gd.M);
    if (std::abs(g.re_formula - g.re_mu_star) > 1e-10 * std::max(1.0, std::abs(g.re_formula)))
        throw Error(ErrorKind::Numerical, "branch-choice error: complex and real growth-rate formulas disagree");
    return g;
}

AnsatzValue ansatz_profile(const GilbertData& gd, double eps, double r)
{
    const double x = r - gd.r0;
    const cplx g = std::exp(-0.5 * std::pow(eps, -2.0 / 3.0) * gd.c2_sqrt * x * x);
    const cplx beta = gd.alpha * std::cbrt(eps);
    AnsatzValue a;
    if (gd.growing_component() == 0) {
        a.V1 = g;
        a.V2 = 0.0;
    } else {
        a.V1 = 0.0;
        a.V2 = g;
    }
    a.br = beta * (a.V2 - a.V1);
    a.btheta = a.V1 + a.V2;
    return a;
}

}  // namespace dynamo
