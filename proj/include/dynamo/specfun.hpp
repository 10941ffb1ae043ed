#pragma once

#include "dynamo/common.hpp"

namespace dynamo {

// value · e^{log_scale}; est_error is a relative error estimate.
struct SpecFunResult {
    cplx value;
    double log_scale = 0.0;
    double est_error = 0.0;

    cplx full() const { return value * std::exp(log_scale); }
    // log of the modulus, -inf for an exact zero
    double log_abs() const { return std::log(std::abs(value)) + log_scale; }
};

SpecFunResult gamma_fn(cplx z);
cplx log_gamma(cplx z);
inline cplx rgamma(cplx z);  // 1/Γ(z), zero at the poles

// D_ν(z) together with D_ν'(z), both scaled by the same log_scale.
struct WeberPair {
    cplx d, dp;
    double log_scale = 0.0;
    double est_error = 0.0;
};

WeberPair parabolic_cylinder_pair(cplx nu, cplx z);
SpecFunResult parabolic_cylinder_D(cplx nu, cplx z);
SpecFunResult hermite_H(cplx nu, cplx z);

// Modified Bessel functions at w = νz on the rays arg z = ±π/4; derivatives are d/dw.
struct BesselIK {
    SpecFunResult I, K, Ip, Kp;
    int method = 0;  // 0 uniform (Olver), 1 Hankel large-argument, 2 series + integral
    int terms = 0;
};

BesselIK bessel_IK_uniform(double nu, cplx z);
// Same without the ray restriction (Re w > 0 required); used internally and by the near-zero kernel.
BesselIK bessel_IK(double nu, cplx w);

// Airy function on the rays arg z ∈ {±π/6, ±5π/6} (z = 0 allowed).
SpecFunResult airy_Ai(cplx z);
SpecFunResult airy_Ai_prime(cplx z);

struct AiryPair {
    cplx ai, aip;
    double log_scale = 0.0;
    double est_error = 0.0;
};
// Unrestricted evaluation used by the kernels.
AiryPair airy_pair(cplx z);

inline cplx rgamma(cplx z)
{
    const double re = z.real();
    if (z.imag() == 0.0 && re <= 0.0 && re == std::round(re)) return 0.0;
    return std::exp(-log_gamma(z));
}

}  // namespace dynamo
