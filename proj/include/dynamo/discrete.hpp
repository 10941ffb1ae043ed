#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dynamo/banded.hpp"
#include "dynamo/gilbert.hpp"
#include "dynamo/grid.hpp"
#include "dynamo/profiles.hpp"

namespace dynamo {

enum class OperatorKind { RThetaSystem, ZEquation, L2Frozen };

// Generalized pencil A x = λ B x. B is the identity with the boundary-condition rows zeroed.
struct DiscreteOperator {
    OperatorKind kind = OperatorKind::RThetaSystem;
    RadialGrid grid;
    BandedMatrix A;
    std::vector<char> bc_row;
    double eps = 0.0;
    GilbertData gd;
    std::vector<double> uz_prime;  // U'(r_i), forcing of the z equation

    int components() const { return kind == OperatorKind::RThetaSystem ? 2 : 1; }
    int unknowns() const { return A.n(); }
    VecC apply(const VecC& x) const { return A.multiply(x); }
    VecC applyB(const VecC& x) const;
    // A − σB
    BandedMatrix shifted(cplx sigma) const;
};

// Second-order centred differences on a uniform grid. Throws Error(Config) when h > ε^{1/3}/20.
DiscreteOperator assemble(const VelocityProfile& profile, const GilbertData& gd, double eps, const RadialGrid& grid,
                          OperatorKind which);

// Solves (A − σB)x = rhs. A singular shift is retried once with a relative perturbation of 1e-10.
VecC solve_banded(const DiscreteOperator& op, cplx sigma, const VecC& rhs);

struct GaussianFit {
    double center = 0.0;
    double curvature = 0.0;        // −d²/dr² log|b_θ|
    double amplitude_ratio = 0.0;  // max|b_r| / max|b_θ|
};

struct EigenResult {
    cplx lambda;
    VecC x;            // raw eigenvector (interleaved for the r/θ system)
    GridFunction b;    // (b_r, b_θ) for the r/θ system; c0 holds the scalar otherwise
    VecC bz;           // filled by the three-component pipeline
    double residual_2cpt = 0.0;
    double residual_3cpt = -1.0;
    double div_norm = -1.0;
    double rayleigh_gap = 0.0;  // |λ − Rayleigh quotient of the normalized vector|
    int iterations = 0;
    int shift_updates = 0;
    GaussianFit fit;
    std::vector<std::string> warnings;
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iter = 60;
    int max_shift_updates = 3;
};

// Inverse iteration seeded at `seed` with up to max_shift_updates Rayleigh-quotient shift updates.
// The default start vector is the Gaussian ansatz (or a constant for the z equation).
EigenResult eigensolve(const DiscreteOperator& op, cplx seed, const EigenOptions& opts = {},
                       const VecC* start = nullptr);

// Relative residual ‖Ax − λBx‖ / (|λ| ‖Bx‖)
double eigen_residual(const DiscreteOperator& op, cplx lambda, const VecC& x);

// Gaussian ansatz sampled on the operator's grid in its own unknown layout.
VecC sample_ansatz(const DiscreteOperator& op);

struct Contour {
    cplx center;
    double radius = 0.0;
    int n_points = 16;
};

// (1/N) Σ R e^{iθ_k} (λ_k B − A)^{-1} B f
VecC riesz_project_discrete(const DiscreteOperator& op, const VecC& f, const Contour& c, unsigned workers = 0);

// (L_z − λ) b_z = −U' b_r with the z-operator's boundary rows.
VecC solve_z(const DiscreteOperator& opz, const VecC& br, cplx lambda);

// Combined relative residual of the r/θ system and the forced z equation.
double modal_residual_3cpt(const DiscreteOperator& op, const DiscreteOperator& opz, cplx lambda, const VecC& x,
                           const VecC& bz);

// sup|∂_r b_r + b_r/r + (im/r) b_θ + ik b_z| / sup(|∂_r b_r| + |b_r/r| + |m b_θ/r| + |k b_z|)
double divergence_norm(const RadialGrid& grid, const VecC& br, const VecC& btheta, const VecC& bz, long m, long k);

struct BoxCount {
    int count = 0;
    double winding = 0.0;  // accumulated phase / 2π before rounding
    int evaluations = 0;
};

// Argument-principle count of pencil eigenvalues inside [re_lo, re_hi] × [im_lo, im_hi].
BoxCount count_eigenvalues_in_box(const DiscreteOperator& op, double re_lo, double re_hi, double im_lo,
                                  double im_hi);

}  // namespace dynamo
