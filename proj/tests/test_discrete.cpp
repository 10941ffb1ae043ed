#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynamo/discrete.hpp"

using namespace dynamo;

namespace {

const Domain kAnnulus{DomainKind::Annulus, 0.25, 2.5};

VecC random_vec(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    VecC v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(N(rng), N(rng));
    return v;
}

double cosine(const VecC& a, const VecC& b) { return std::abs(a.dot(b)) / (a.norm() * b.norm()); }

// I_m(x) and I_m'(x) by power series
std::pair<double, double> bessel_I(int m, double x)
{
    double term = std::pow(x / 2.0, m) / std::tgamma(m + 1.0), s = term, ds = m * term / x;
    for (int k = 1; k < 200; ++k) {
        term *= (x / 2.0) * (x / 2.0) / (k * (k + m));
        s += term;
        ds += (m + 2.0 * k) * term / x;
    }
    return {s, ds};
}

struct Fixture {
    VelocityProfile p = VelocityProfile::simplified();
    GilbertData gd = gilbert_constants(p, 1.0, 0.1);
};

}  // namespace

TEST(Assemble, ConstantCoefficientKernel)
{
    // Ω' ≡ 0 and M = 0: the diagonal block is ε(∂² + r⁻¹∂ − r⁻²), which annihilates r
    const auto p = VelocityProfile::custom([](double) { return Jet(1.0); }, [](double r) { return Jet::variable(r); });
    GilbertData gd;
    gd.r0 = 1.0;
    const double eps = 1e-3;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(p, gd, eps, g, OperatorKind::RThetaSystem);
    VecC x(op.unknowns());
    for (size_t i = 0; i < g.size(); ++i) x[2 * i] = x[2 * i + 1] = g.r[i];
    const VecC y = op.apply(x);
    double worst = 0.0;
    for (int k = 0; k < y.size(); ++k)
        if (!op.bc_row[k]) worst = std::max(worst, std::abs(y[k]));
    EXPECT_LT(worst, 1e-9);
}

TEST(Assemble, Bandwidth)
{
    Fixture f;
    const double eps = 1e-3;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::RThetaSystem);
    // interior rows: offsets −2..2
    for (int k = 2; k < op.unknowns() - 2; ++k) {
        if (op.bc_row[k]) continue;
        for (int d = -4; d <= 4; ++d)
            if (std::abs(d) > 2) EXPECT_EQ(op.A.get(k, k + d), cplx(0.0));
    }
    // the one-sided (r b_θ)' stencil adds the offsets ±4 in the two boundary rows only
    EXPECT_LE(op.A.nonzero_diagonals(), 7);
}

TEST(Assemble, ResolutionGuard)
{
    Fixture f;
    const double eps = 1e-3;
    EXPECT_THROW(assemble(f.p, f.gd, eps, RadialGrid::uniform(kAnnulus, eps, 10.0), OperatorKind::RThetaSystem), Error);
}

TEST(Assemble, L2FrozenOnAnsatz)
{
    Fixture f;
    const double eps = 1e-4, e3 = std::cbrt(eps);
    const RadialGrid g = RadialGrid::with_spacing(Domain{DomainKind::Annulus, 1.0 - 12 * e3, 1.0 + 12 * e3}, e3 / 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::L2Frozen);
    // independent sample of f⋆ = exp(−½ε^{-2/3}c₂^{1/2}(r − r₀)²)
    VecC x(op.unknowns());
    for (size_t i = 0; i < g.size(); ++i) {
        const double s = g.r[i] - 1.0;
        x[i] = std::exp(-0.5 * f.gd.c2_sqrt * s * s / (e3 * e3));
    }
    EXPECT_LE(eigen_residual(op, f.gd.lambda_star(eps), x), 1e-3);
    const EigenResult er = eigensolve(op, f.gd.lambda_star(eps));
    EXPECT_LE(std::abs(er.lambda - f.gd.lambda_star(eps)) / std::abs(f.gd.lambda_star(eps)), 1e-3);
    EXPECT_GE(cosine(er.x, x), 0.999);
}

TEST(SolveBanded, Identity)
{
    DiscreteOperator op;
    op.A = BandedMatrix(50, 4, 4);
    op.bc_row.assign(50, 0);
    for (int i = 0; i < 50; ++i) op.A.at(i, i) = 1.0;
    const VecC b = random_vec(50, 3);
    EXPECT_LT((solve_banded(op, 0.0, b) - b).norm(), 1e-15);
}

TEST(SolveBanded, MultiplyThenSolve)
{
    Fixture f;
    const double eps = 1e-4;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::RThetaSystem);
    const cplx sigma = f.gd.lambda_star(eps) * 1.1;
    const VecC x = random_vec(op.unknowns(), 5);
    const VecC rhs = op.apply(x) - sigma * op.applyB(x);
    EXPECT_LT((solve_banded(op, sigma, rhs) - x).norm() / x.norm(), 1e-9);
}

TEST(Eigensolve, FullSystemGrowthRate)
{
    Fixture f;
    const double eps = 1e-5;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::RThetaSystem);
    const EigenResult er = eigensolve(op, f.gd.lambda_star(eps));
    EXPECT_NEAR(er.lambda.real() / std::cbrt(eps), 0.145614, 0.05);
    EXPECT_LT(er.residual_2cpt, 1e-6);
}

TEST(Eigensolve, ConjugationSymmetry)
{
    const auto p = VelocityProfile::simplified();
    const double eps = 1e-3;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const GilbertData a = gilbert_constants(p, 1.0, 0.1), b = gilbert_constants(p, 1.0, -0.1);
    const EigenResult ea = eigensolve(assemble(p, a, eps, g, OperatorKind::RThetaSystem), a.lambda_star(eps));
    const EigenResult eb = eigensolve(assemble(p, b, eps, g, OperatorKind::RThetaSystem), b.lambda_star(eps));
    EXPECT_LT(std::abs(ea.lambda - std::conj(eb.lambda)), 1e-10 * std::abs(ea.lambda));
}

TEST(Riesz, ProjectorProperties)
{
    Fixture f;
    const double eps = 1e-4;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::RThetaSystem);
    const EigenResult er = eigensolve(op, f.gd.lambda_star(eps));
    const Contour c{er.lambda, 0.05 * std::cbrt(eps), 16};
    // eigenvector is reproduced
    const VecC Pv = riesz_project_discrete(op, er.x, c);
    EXPECT_LT((Pv - er.x).norm() / er.x.norm(), 1e-2);
    // idempotence on a random vector
    const VecC r = random_vec(op.unknowns(), 9);
    const VecC Pr = riesz_project_discrete(op, r, c), PPr = riesz_project_discrete(op, Pr, c);
    EXPECT_LT((PPr - Pr).norm() / Pr.norm(), 2e-2);
    // the projected ansatz lines up with the eigenvector
    const VecC Pf = riesz_project_discrete(op, sample_ansatz(op), c);
    EXPECT_GE(cosine(Pf, er.x), 0.99);
}

TEST(Riesz, BadContour)
{
    Fixture f;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, 1e-3, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, 1e-3, g, OperatorKind::RThetaSystem);
    EXPECT_THROW(riesz_project_discrete(op, sample_ansatz(op), Contour{0.0, 0.0, 16}), Error);
}

TEST(SolveZ, ZeroForcing)
{
    Fixture f;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, 1e-3, 40.0);
    const DiscreteOperator opz = assemble(f.p, f.gd, 1e-3, g, OperatorKind::ZEquation);
    const VecC bz = solve_z(opz, VecC::Zero(g.size()), f.gd.lambda_star(1e-3));
    EXPECT_EQ(bz.norm(), 0.0);
}

TEST(SolveZ, MultiplyBack)
{
    Fixture f;
    const double eps = 1e-4;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator opz = assemble(f.p, f.gd, eps, g, OperatorKind::ZEquation);
    const cplx lam = f.gd.lambda_star(eps);
    const VecC br = random_vec(static_cast<int>(g.size()), 13);
    const VecC bz = solve_z(opz, br, lam);
    const VecC lhs = opz.apply(bz) - lam * opz.applyB(bz);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        const cplx rhs = opz.bc_row[i] ? cplx(0.0) : -f.p.uz(g.r[i], 1) * br[i];
        num = std::max(num, std::abs(lhs[i] - rhs));
        den = std::max(den, std::abs(rhs));
    }
    EXPECT_LT(num / den, 1e-8);
    // manufactured solution through the banded solver
    const VecC gz = random_vec(static_cast<int>(g.size()), 17);
    EXPECT_LT((solve_banded(opz, lam, opz.apply(gz) - lam * opz.applyB(gz)) - gz).norm() / gz.norm(), 1e-8);
}

TEST(Divergence, ZeroField)
{
    const RadialGrid g = RadialGrid::uniform(kAnnulus, 1e-3, 40.0);
    const VecC z = VecC::Zero(g.size());
    EXPECT_EQ(divergence_norm(g, z, z, z, 3, 2), 0.0);
}

TEST(Divergence, GradientOfHelmholtzKernel)
{
    // φ = I_m(|k| r) solves φ'' + φ'/r − (m²/r² + k²)φ = 0, so ∇φ is divergence free
    const long m = 2, k = -1;
    std::vector<double> errs;
    for (double h : {2e-3, 1e-3}) {
        const RadialGrid g = RadialGrid::with_spacing(kAnnulus, h);
        const int n = static_cast<int>(g.size());
        VecC br(n), bt(n), bz(n);
        for (int i = 0; i < n; ++i) {
            const double r = g.r[i];
            const auto [phi, dphi] = bessel_I(static_cast<int>(m), std::abs(k) * r);
            br[i] = std::abs(k) * dphi;
            bt[i] = I_UNIT * static_cast<double>(m) / r * phi;
            bz[i] = I_UNIT * static_cast<double>(k) * phi;
        }
        errs.push_back(divergence_norm(g, br, bt, bz, m, k));
    }
    EXPECT_LT(errs[1], 1e-5);
    EXPECT_GT(errs[0] / errs[1], 3.0);  // second order
}

TEST(Counting, SingleEigenvalueInBox)
{
    Fixture f;
    const double eps = 1e-3;
    const RadialGrid g = RadialGrid::uniform(kAnnulus, eps, 40.0);
    const DiscreteOperator op = assemble(f.p, f.gd, eps, g, OperatorKind::RThetaSystem);
    const EigenResult er = eigensolve(op, f.gd.lambda_star(eps));
    const double d = 0.02 * std::cbrt(eps);
    const BoxCount bc = count_eigenvalues_in_box(op, er.lambda.real() - d, er.lambda.real() + d, er.lambda.imag() - d,
                                                 er.lambda.imag() + d);
    EXPECT_EQ(bc.count, 1);
}
