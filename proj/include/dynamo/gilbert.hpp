#pragma once

#include "dynamo/common.hpp"
#include "dynamo/profiles.hpp"

namespace dynamo {

// Closed-form boundary-layer constants at the critical radius.
struct GilbertData {
    double r0 = 1.0;
    double M = 0.0, K = 0.0;
    double rho = 0.0;        // Ω'(r₀)/U'(r₀)
    double omega_p = 0.0;    // Ω'(r₀)
    double curvature = 0.0;  // Ω''(r₀) − ρU''(r₀) = T''(r₀)
    cplx alpha;              // α² = −2iM/(r₀³Ω'(r₀))
    cplx c2;                 // (iM/2)(Ω'' − ρU'')
    cplx c2_sqrt;            // Re > 0
    cplx stretch_root;       // √(−2iMΩ'(r₀)/r₀), Re > 0
    cplx sigma;              // −r₀Ω'(r₀)α : stretching seen by the first V component (= ±stretch_root)
    cplx mu_star;
    double chi = 0.0;        // ½|c₂|^{-1/2}

    double mass_term() const { return M * M * (1.0 / (r0 * r0) + rho * rho); }
    cplx lambda_star(double eps) const { return std::cbrt(eps) * mu_star; }
    // Weber index for contour offset η (λ = ε^{1/3}(μ⋆ + η)) in the growing component
    cplx nu(cplx eta) const { return -0.5 * eta / c2_sqrt; }
    // 0 when the Gilbert mode lives in V₁ (Ω'(r₀) < 0), 1 otherwise
    int growing_component() const { return sigma.real() > 0.0 ? 0 : 1; }
    // Higher Hermite-index eigenvalues μ_j = μ⋆ − 2j c₂^{1/2} (documentation only)
    cplx mu_j(int j) const { return mu_star - 2.0 * j * c2_sqrt; }
};

GilbertData gilbert_constants(const VelocityProfile& profile, double r0, double M);

struct GrowthRate {
    cplx mu_star;
    double re_mu_star = 0.0;     // from the complex formula
    double re_formula = 0.0;     // from the real-part formula
};

// Throws Error(Numerical) when the two routes disagree beyond 1e-10.
GrowthRate growth_rate(const GilbertData& gd);

// Re(μ⋆) as a function of M for fixed profile data; depends on |M| only.
double re_mu_star_of(const GilbertData& gd, double M);

struct AnsatzValue {
    cplx V1, V2;
    cplx br, btheta;
};

// Gaussian mode exp(−½ε^{-2/3}c₂^{1/2}(r−r₀)²) placed in the growing V component.
AnsatzValue ansatz_profile(const GilbertData& gd, double eps, double r);

}  // namespace dynamo
