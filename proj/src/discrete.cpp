#include "dynamo/discrete.hpp"

#include <algorithm>
#include <numeric>

namespace dynamo {

VecC DiscreteOperator::applyB(const VecC& x) const
{
    VecC y = x;
    for (int i = 0; i < y.size(); ++i)
        if (bc_row[i]) y[i] = 0.0;
    return y;
}

BandedMatrix DiscreteOperator::shifted(cplx sigma) const
{
    BandedMatrix s = A;
    for (int i = 0; i < s.n(); ++i)
        if (!bc_row[i]) s.add(i, i, -sigma);
    return s;
}

namespace {

struct Stencil {
    double lo, di, up;  // ε(∂² + r⁻¹∂) weights
};

Stencil radial_laplacian(double eps, double h, double r)
{
    return {eps * (1.0 / (h * h) - 1.0 / (2.0 * h * r)), -2.0 * eps / (h * h), eps * (1.0 / (h * h) + 1.0 / (2.0 * h * r))};
}

DiscreteOperator assemble_rtheta(const VelocityProfile& profile, const GilbertData& gd, double eps,
                                 const RadialGrid& g)
{
    const int n = static_cast<int>(g.size());
    const double h = g.h, e3 = std::cbrt(eps), e23 = e3 * e3;
    const double M = gd.M;
    TransportFunction T(profile, gd.r0);
    DiscreteOperator op;
    op.A = BandedMatrix(2 * n, 4, 4);
    op.bc_row.assign(2 * n, 0);
    const bool inner_bc = !g.domain.contains_origin();
    const bool outer_phys = g.domain.outer_is_physical();
    for (int i = 0; i < n; ++i) {
        const double r = g.r[i];
        const int kr = 2 * i, kt = 2 * i + 1;
        if (i == 0 && inner_bc) {
            // b_r = 0, (r b_θ)' = 0
            op.bc_row[kr] = op.bc_row[kt] = 1;
            op.A.at(kr, kr) = 1.0;
            op.A.at(kt, 1) = -3.0 * g.r[0];
            op.A.at(kt, 3) = 4.0 * g.r[1];
            op.A.at(kt, 5) = -g.r[2];
            continue;
        }
        if (i == n - 1) {
            op.bc_row[kr] = op.bc_row[kt] = 1;
            op.A.at(kr, kr) = 1.0;
            if (outer_phys) {
                op.A.at(kt, kt) = 3.0 * g.r[n - 1];
                op.A.at(kt, kt - 2) = -4.0 * g.r[n - 2];
                op.A.at(kt, kt - 4) = g.r[n - 3];
            } else {
                op.A.at(kt, kt) = 1.0;  // truncation: homogeneous Dirichlet
            }
            continue;
        }
        const Stencil s = radial_laplacian(eps, h, r);
        const cplx d0 = -eps / (r * r) - e3 * M * M * (1.0 / (r * r) + gd.rho * gd.rho) - I_UNIT * M * T.value(r) / e3;
        const cplx Bc = 2.0 * I_UNIT * M * e23 / (r * r);
        const double Cc = profile.stretching_enabled() ? r * profile.omega(r, 1) : 0.0;
        for (int k : {kr, kt}) {
            if (i > 0) op.A.at(k, k - 2) = s.lo;  // staggered first node: ghost value 0 at −h/2
            op.A.at(k, k) = s.di + d0;
            op.A.at(k, k + 2) = s.up;
        }
        op.A.at(kr, kt) = -Bc;
        op.A.at(kt, kr) = Bc + Cc;
    }
    return op;
}

DiscreteOperator assemble_z(const VelocityProfile& profile, const GilbertData& gd, double eps, const RadialGrid& g)
{
    const int n = static_cast<int>(g.size());
    const double h = g.h, e3 = std::cbrt(eps);
    const double M = gd.M, K = gd.K;
    const double om0 = profile.omega(gd.r0), u0 = profile.uz(gd.r0);
    DiscreteOperator op;
    op.A = BandedMatrix(n, 2, 2);
    op.bc_row.assign(n, 0);
    const bool inner_bc = !g.domain.contains_origin();
    const bool outer_phys = g.domain.outer_is_physical();
    for (int i = 0; i < n; ++i) {
        const double r = g.r[i];
        if (i == 0 && inner_bc) {
            op.bc_row[0] = 1;
            op.A.at(0, 0) = -3.0;
            op.A.at(0, 1) = 4.0;
            op.A.at(0, 2) = -1.0;
            continue;
        }
        if (i == n - 1) {
            op.bc_row[i] = 1;
            if (outer_phys) {
                op.A.at(i, i) = 3.0;
                op.A.at(i, i - 1) = -4.0;
                op.A.at(i, i - 2) = 1.0;
            } else {
                op.A.at(i, i) = 1.0;
            }
            continue;
        }
        const Stencil s = radial_laplacian(eps, h, r);
        const double adv = M * (profile.omega(r) - om0) + K * (profile.uz(r) - u0);
        const cplx d0 = -e3 * M * M / (r * r) - e3 * K * K - I_UNIT * adv / e3;
        if (i > 0) op.A.at(i, i - 1) = s.lo;
        op.A.at(i, i) = s.di + d0;
        op.A.at(i, i + 1) = s.up;
    }
    return op;
}

DiscreteOperator assemble_l2(const GilbertData& gd, double eps, const RadialGrid& g)
{
    const int n = static_cast<int>(g.size());
    const double h = g.h, e3 = std::cbrt(eps);
    DiscreteOperator op;
    op.A = BandedMatrix(n, 1, 1);
    op.bc_row.assign(n, 0);
    // stretching term of the growing component (+σ in V₁, −σ in V₂)
    const cplx stretch = gd.growing_component() == 0 ? gd.sigma : -gd.sigma;
    for (int i = 0; i < n; ++i) {
        if (i == 0 || i == n - 1) {
            op.bc_row[i] = 1;
            op.A.at(i, i) = 1.0;
            continue;
        }
        const double x = g.r[i] - gd.r0;
        op.A.at(i, i - 1) = eps / (h * h);
        op.A.at(i, i + 1) = eps / (h * h);
        op.A.at(i, i) = -2.0 * eps / (h * h) - gd.c2 * x * x / e3 - e3 * gd.mass_term() + e3 * stretch;
    }
    return op;
}

}  // namespace

DiscreteOperator assemble(const VelocityProfile& profile, const GilbertData& gd, double eps, const RadialGrid& grid,
                          OperatorKind which)
{
    const double e3 = std::cbrt(eps);
    if (grid.h > e3 / 20.0 * (1.0 + 1e-9))
        throw Error(ErrorKind::Config, "layer-resolution violation: h = " + std::to_string(grid.h) +
                                           " exceeds eps^{1/3}/20 = " + std::to_string(e3 / 20.0));
    if (grid.size() < 64) throw Error(ErrorKind::Config, "grid needs at least 64 nodes");
    DiscreteOperator op;
    switch (which) {
    case OperatorKind::RThetaSystem: op = assemble_rtheta(profile, gd, eps, grid); break;
    case OperatorKind::ZEquation: op = assemble_z(profile, gd, eps, grid); break;
    case OperatorKind::L2Frozen: op = assemble_l2(gd, eps, grid); break;
    }
    op.kind = which;
    op.grid = grid;
    op.eps = eps;
    op.gd = gd;
    op.uz_prime.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) op.uz_prime[i] = profile.uz(grid.r[i], 1);
    return op;
}

VecC solve_banded(const DiscreteOperator& op, cplx sigma, const VecC& rhs)
{
    try {
        BandedLU lu(op.shifted(sigma));
        return lu.solve(rhs);
    } catch (const Error&) {
        const cplx s2 = sigma * (1.0 + 1e-10) + cplx(1e-14, 1e-14);
        BandedLU lu(op.shifted(s2));
        return lu.solve(rhs);
    }
}

double eigen_residual(const DiscreteOperator& op, cplx lambda, const VecC& x)
{
    const VecC Bx = op.applyB(x);
    const VecC r = op.apply(x) - lambda * Bx;
    return r.norm() / (std::abs(lambda) * Bx.norm());
}

VecC sample_ansatz(const DiscreteOperator& op)
{
    const size_t n = op.grid.size();
    VecC x(op.unknowns());
    for (size_t i = 0; i < n; ++i) {
        const AnsatzValue a = ansatz_profile(op.gd, op.eps, op.grid.r[i]);
        switch (op.kind) {
        case OperatorKind::RThetaSystem:
            x[2 * i] = a.br;
            x[2 * i + 1] = a.btheta;
            break;
        case OperatorKind::L2Frozen: x[i] = a.V1 + a.V2; break;
        case OperatorKind::ZEquation: x[i] = 1.0; break;
        }
    }
    return x;
}

namespace {

cplx rayleigh(const DiscreteOperator& op, const VecC& x)
{
    const VecC Bx = op.applyB(x);
    return Bx.dot(op.apply(x)) / Bx.squaredNorm();
}

GaussianFit gaussian_fit(const DiscreteOperator& op, const VecC& x)
{
    GaussianFit fit;
    const double e3 = std::cbrt(op.eps), r0 = op.gd.r0;
    const bool two = op.kind == OperatorKind::RThetaSystem;
    std::vector<double> s, y;
    double bt_max = 0.0, br_max = 0.0;
    for (size_t i = 0; i < op.grid.size(); ++i) {
        const cplx bt = two ? x[2 * i + 1] : x[i];
        bt_max = std::max(bt_max, std::abs(bt));
        if (two) br_max = std::max(br_max, std::abs(x[2 * i]));
        const double d = op.grid.r[i] - r0;
        if (std::abs(d) <= 2.0 * e3 && std::abs(bt) > 0.0) {
            s.push_back(d);
            y.push_back(std::log(std::abs(bt)));
        }
    }
    fit.amplitude_ratio = bt_max > 0.0 ? br_max / bt_max : 0.0;
    if (s.size() < 3) return fit;
    Eigen::MatrixXd V(s.size(), 3);
    Eigen::VectorXd Y(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        V(i, 0) = 1.0;
        V(i, 1) = s[i] / e3;
        V(i, 2) = s[i] * s[i] / (e3 * e3);
        Y[i] = y[i];
    }
    const Eigen::Vector3d p = V.colPivHouseholderQr().solve(Y);
    const double p1 = p[1] / e3, p2 = p[2] / (e3 * e3);
    fit.curvature = -2.0 * p2;
    fit.center = p2 != 0.0 ? r0 - p1 / (2.0 * p2) : r0;
    return fit;
}

}  // namespace

EigenResult eigensolve(const DiscreteOperator& op, cplx seed, const EigenOptions& opts, const VecC* start)
{
    VecC x = start ? *start : sample_ansatz(op);
    if (x.size() != op.unknowns()) throw Error(ErrorKind::Config, "eigensolve: start vector has the wrong size");
    if (x.norm() == 0.0) x.setOnes();
    x /= x.norm();
    cplx sigma = seed;
    auto factor = [&](cplx s) {
        try {
            return BandedLU(op.shifted(s));
        } catch (const Error&) {
            return BandedLU(op.shifted(s * (1.0 + 1e-10) + cplx(1e-14, 1e-14)));
        }
    };
    BandedLU lu = factor(sigma);
    EigenResult res;
    cplx rq = seed, lam_inv = seed;
    double resid = std::numeric_limits<double>::infinity();
    int since_update = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const VecC y = lu.solve(op.applyB(x));
        const cplx xy = x.dot(y);
        if (xy != cplx(0.0)) lam_inv = sigma + x.squaredNorm() / xy;
        x = y / y.norm();
        rq = rayleigh(op, x);
        resid = eigen_residual(op, rq, x);
        res.iterations = it;
        if (resid <= opts.tol) break;
        if (++since_update >= 3 && res.shift_updates < opts.max_shift_updates) {
            sigma = rq;
            lu = factor(sigma);
            ++res.shift_updates;
            since_update = 0;
        }
    }
    if (!(resid <= opts.tol))
        throw Error(ErrorKind::Numerical, "eigensolve did not converge in " + std::to_string(opts.max_iter) +
                                              " iterations: last Rayleigh quotient (" + std::to_string(rq.real()) +
                                              ", " + std::to_string(rq.imag()) + "), residual " + std::to_string(resid));
    // normalize max|b_θ| = 1 with a real positive peak
    const bool two = op.kind == OperatorKind::RThetaSystem;
    const int stride = two ? 2 : 1, off = two ? 1 : 0;
    int imax = off;
    for (int i = off; i < x.size(); i += stride)
        if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
    x /= x[imax];
    res.lambda = rq;
    res.x = x;
    res.residual_2cpt = resid;
    res.rayleigh_gap = std::abs(rq - lam_inv);
    if (two) {
        res.b = GridFunction::from_interleaved(Basis::B, x);
    } else {
        res.b = GridFunction(Basis::B, op.grid.size());
        res.b.c0 = x;
    }
    if (op.kind != OperatorKind::ZEquation) res.fit = gaussian_fit(op, x);
    const double e3 = std::cbrt(op.eps);
    if (std::abs(rq.real() - seed.real()) > 10.0 * e3 * std::abs(op.gd.mu_star))
        res.warnings.push_back("wrong-branch warning: converged eigenvalue far from the seed");
    return res;
}

VecC riesz_project_discrete(const DiscreteOperator& op, const VecC& f, const Contour& c, unsigned workers)
{
    if (c.n_points < 1 || !(c.radius > 0.0)) throw Error(ErrorKind::Config, "contour needs radius > 0 and points >= 1");
    const VecC Bf = op.applyB(f);
    std::vector<VecC> parts(c.n_points);
    parallel_for(
        c.n_points,
        [&](size_t k) {
            const cplx e = std::exp(I_UNIT * (2.0 * PI * static_cast<double>(k) / c.n_points));
            const cplx lam = c.center + c.radius * e;
            VecC y;
            try {
                y = BandedLU(op.shifted(lam)).solve(Bf);
            } catch (const Error& err) {
                throw Error(ErrorKind::Numerical, std::string("contour quadrature point failure at lambda = (") +
                                                      std::to_string(lam.real()) + ", " + std::to_string(lam.imag()) +
                                                      "): " + err.what());
            }
            // (λB − A)^{-1} = −(A − λB)^{-1}
            parts[k] = -(c.radius * e / static_cast<double>(c.n_points)) * y;
        },
        workers);
    VecC out = VecC::Zero(f.size());
    for (const VecC& p : parts) out += p;
    return out;
}

VecC solve_z(const DiscreteOperator& opz, const VecC& br, cplx lambda)
{
    if (opz.kind != OperatorKind::ZEquation) throw Error(ErrorKind::Config, "solve_z needs the z-equation operator");
    VecC rhs(opz.unknowns());
    for (int i = 0; i < rhs.size(); ++i) rhs[i] = opz.bc_row[i] ? cplx(0.0) : -opz.uz_prime[i] * br[i];
    return solve_banded(opz, lambda, rhs);
}

double modal_residual_3cpt(const DiscreteOperator& op, const DiscreteOperator& opz, cplx lambda, const VecC& x,
                           const VecC& bz)
{
    const VecC Bx = op.applyB(x), Bz = opz.applyB(bz);
    const VecC r1 = op.apply(x) - lambda * Bx;
    VecC r2 = opz.apply(bz) - lambda * Bz;
    for (int i = 0; i < r2.size(); ++i)
        if (!opz.bc_row[i]) r2[i] += opz.uz_prime[i] * x[2 * i];
    return std::sqrt(r1.squaredNorm() + r2.squaredNorm()) /
           (std::abs(lambda) * std::sqrt(Bx.squaredNorm() + Bz.squaredNorm()));
}

double divergence_norm(const RadialGrid& g, const VecC& br, const VecC& bt, const VecC& bz, long m, long k)
{
    const int n = static_cast<int>(g.size());
    if (br.size() != n || bt.size() != n || bz.size() != n) throw Error(ErrorKind::Config, "divergence: size mismatch");
    const double h = g.h;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        cplx d;
        if (i == 0)
            d = g.staggered ? (br[1] - cplx(0.0)) / (2.0 * h)  // ghost b_r(−h/2) = 0
                            : (-3.0 * br[0] + 4.0 * br[1] - br[2]) / (2.0 * h);
        else if (i == n - 1)
            d = (3.0 * br[n - 1] - 4.0 * br[n - 2] + br[n - 3]) / (2.0 * h);
        else
            d = (br[i + 1] - br[i - 1]) / (2.0 * h);
        const double r = g.r[i];
        const cplx t1 = br[i] / r, t2 = I_UNIT * static_cast<double>(m) * bt[i] / r, t3 = I_UNIT * static_cast<double>(k) * bz[i];
        num = std::max(num, std::abs(d + t1 + t2 + t3));
        den = std::max(den, std::abs(d) + std::abs(t1) + std::abs(t2) + std::abs(t3));
    }
    return den > 0.0 ? num / den : 0.0;
}

BoxCount count_eigenvalues_in_box(const DiscreteOperator& op, double re_lo, double re_hi, double im_lo, double im_hi)
{
    if (!(re_hi > re_lo) || !(im_hi > im_lo)) throw Error(ErrorKind::Config, "count box must have positive extent");
    BoxCount out;
    auto phase = [&](cplx z) {
        ++out.evaluations;
        try {
            return BandedLU(op.shifted(z)).log_det().imag();
        } catch (const Error&) {
            return BandedLU(op.shifted(z + cplx(1e-12, 1e-12))).log_det().imag();
        }
    };
    const cplx corners[5] = {{re_lo, im_lo}, {re_hi, im_lo}, {re_hi, im_hi}, {re_lo, im_hi}, {re_lo, im_lo}};
    double total = 0.0;
    double ph = phase(corners[0]);
    for (int e = 0; e < 4; ++e) {
        const cplx a = corners[e], b = corners[e + 1];
        const double base = 1.0 / 64.0;
        double t = 0.0, dt = base;
        while (t < 1.0) {
            dt = std::min(dt, 1.0 - t);
            const double pn = phase(a + (b - a) * (t + dt));
            const double d = std::remainder(pn - ph, 2.0 * PI);
            if (std::abs(d) > PI / 4.0 && dt > 1e-12) {
                dt *= 0.5;
                continue;
            }
            total += d;
            ph = pn;
            t += dt;
            dt = std::min(2.0 * dt, base);
        }
    }
    out.winding = total / (2.0 * PI);
    out.count = static_cast<int>(std::lround(out.winding));
    return out;
}

}  // namespace dynamo
