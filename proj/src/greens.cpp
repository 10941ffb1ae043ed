#include "dynamo/greens.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "dynamo/specfun.hpp"

namespace dynamo {

namespace {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();
// kernel values below e^{-CUT} relative to the support values are dropped
constexpr double CUT = 50.0;

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// value = m e^{L}; L = -inf is an exact zero
struct LogVals {
    std::vector<cplx> m;
    std::vector<double> L;
    explicit LogVals(size_t n = 0) : m(n, 0.0), L(n, NEG_INF) {}
    void set(size_t i, cplx v, double log_scale)
    {
        const double a = std::abs(v);
        if (a == 0.0 || !std::isfinite(a)) {
            m[i] = 0.0;
            L[i] = NEG_INF;
            return;
        }
        m[i] = v / a;
        L[i] = std::log(a) + log_scale;
    }
};

struct LogAcc {
    cplx m = 0.0;
    double L = NEG_INF;
    void add(cplx v, double lv)
    {
        if (v == cplx(0.0) || lv == NEG_INF) return;
        if (L == NEG_INF) {
            m = v;
            L = lv;
            return;
        }
        const double nl = std::max(L, lv);
        m = m * std::exp(L - nl) + v * std::exp(lv - nl);
        L = nl;
    }
};

cplx times_exp(cplx a, cplx b, double l)
{
    if (l == NEG_INF || a == cplx(0.0) || b == cplx(0.0)) return 0.0;
    return a * b * std::exp(l);
}

// u_i += [y₊(r_i) Σ_{k≤i} y₋(s_k) q_k + y₋(r_i) Σ_{k>i} y₊(s_k) q_k] / den, q supported in [k0, k1]
void two_point_green(const LogVals& yp, const LogVals& ym, const VecC& q, size_t k0, size_t k1, cplx den, VecC& u)
{
    const size_t n = q.size();
    LogAcc S;
    for (size_t i = k0; i < n; ++i) {
        if (i <= k1) S.add(ym.m[i] * q[i], ym.L[i]);
        if (yp.L[i] == NEG_INF && i > k1) break;
        u[i] += times_exp(yp.m[i], S.m, yp.L[i] + S.L) / den;
    }
    LogAcc B;
    for (size_t ii = k1 + 1; ii-- > 0;) {
        const size_t i = ii;
        if (ym.L[i] == NEG_INF && i < k0) break;
        u[i] += times_exp(ym.m[i], B.m, ym.L[i] + B.L) / den;
        if (i >= k0) B.add(yp.m[i] * q[i], yp.L[i]);
    }
}

// E1 = (1 − e^{−z})/z, E2 = (1 − e^{−z} − z e^{−z})/z²
void phi12(cplx z, cplx& e1, cplx& e2)
{
    if (std::abs(z) < 0.5) {
        cplx t = 1.0;  // (−z)^k / k!
        e1 = 0.0;
        e2 = 0.0;
        for (int k = 0; k < 20; ++k) {
            e1 += t / static_cast<double>(k + 1);
            e2 += t / static_cast<double>(k + 2);
            t *= -z / static_cast<double>(k + 1);
        }
        return;
    }
    const cplx ez = std::exp(-z);
    e1 = (1.0 - ez) / z;
    e2 = (1.0 - ez - z * ez) / (z * z);
}

// ∫_{t0}^{t1} t^p dt for 0 ≤ t0 < t1 (t0 = 0 needs Re p > −1)
cplx power_integral(cplx p, double t0, double t1)
{
    const cplx q = p + 1.0;
    if (t0 == 0.0) return std::exp(q * std::log(t1)) / q;
    const double l0 = std::log(t0), l1 = std::log(t1);
    const cplx z = q * (l1 - l0);
    cplx e1, e2;
    phi12(-z, e1, e2);  // (e^z − 1)/z
    return std::exp(q * l0) * (l1 - l0) * e1;
}

// u_i += [y₊(r_i) ∫_0^{r_i} y₋ g ds/s + y₋(r_i) ∫_{r_i}^{hi} y₊ g ds/s] / den with g = r²f linear between nodes
// and y± local power laws, so that r⁻² data and the r^{±ν} behaviour of the Bessel pair are integrated exactly.
void radial_power_green(const RadialGrid& grid, const LogVals& yp, const LogVals& ym, const VecC& f, double hi,
                        cplx den, VecC& u)
{
    const size_t n = f.size();
    VecC gv(n);
    for (size_t i = 0; i < n; ++i) gv[i] = grid.r[i] * grid.r[i] * f[i];
    // cell j = [r_j, r_{j+1}] ∩ [0, hi)
    auto cell = [&](const LogVals& y, size_t j, LogAcc& acc) {
        const double a = grid.r[j], b = grid.r[j + 1], x1 = std::min(b, hi);
        if (x1 <= a || y.L[j] == NEG_INF || y.L[j + 1] == NEG_INF) return;
        const double lr = std::log(b / a);
        const cplx mu = (y.L[j + 1] - y.L[j] + I_UNIT * std::arg(y.m[j + 1] / y.m[j])) / lr;
        const bool right = mu.real() >= 0.0;
        const size_t k = right ? j + 1 : j;
        const double ra = grid.r[k];
        const cplx B = (gv[j + 1] - gv[j]) / (b - a), A = gv[j] - B * a;
        const cplx c = A * power_integral(mu - 1.0, a / ra, x1 / ra) + B * ra * power_integral(mu, a / ra, x1 / ra);
        acc.add(y.m[k] * c, y.L[k]);
    };
    // ∫_0^{r_i}: the first stretch [0, r_0] uses the power law of cell 0 and g ≈ g(r_0)
    std::vector<LogAcc> left(n);
    LogAcc S;
    if (n > 1 && ym.L[0] != NEG_INF && ym.L[1] != NEG_INF) {
        const cplx mu = (ym.L[1] - ym.L[0] + I_UNIT * std::arg(ym.m[1] / ym.m[0])) / std::log(grid.r[1] / grid.r[0]);
        if (mu.real() > 0.0 && grid.r[0] < hi)
            S.add(ym.m[0] * gv[0] * power_integral(mu - 1.0, 0.0, std::min(1.0, hi / grid.r[0])), ym.L[0]);
    }
    left[0] = S;
    for (size_t j = 0; j + 1 < n; ++j) {
        cell(ym, j, S);
        left[j + 1] = S;
    }
    LogAcc R;
    for (size_t i = n; i-- > 0;) {
        if (i + 1 < n) cell(yp, i, R);
        u[i] += (times_exp(yp.m[i], left[i].m, yp.L[i] + left[i].L) + times_exp(ym.m[i], R.m, ym.L[i] + R.L)) / den;
    }
}

double hat_integral(const RadialGrid& g, size_t i, double a, double b)
{
    const double ri = g.r[i], h = g.h;
    double lo_dom = g.staggered ? 0.0 : g.r.front();
    double tot = 0.0;
    auto seg = [&](double x1, double x2, auto phi) {
        x1 = std::max({x1, a, lo_dom});
        x2 = std::min({x2, b, g.r.back()});
        if (x2 > x1) tot += 0.5 * (x2 - x1) * (phi(x1) + phi(x2));
    };
    if (i > 0 || g.staggered) seg(ri - h, ri, [&](double s) { return (s - (ri - h)) / h; });
    if (i + 1 < g.size()) seg(ri, ri + h, [&](double s) { return (ri + h - s) / h; });
    return tot;
}

// piecewise-linear interpolant of nodal values (staggered grids: ghost zero one step left of node 0)
cplx interp(const RadialGrid& g, const VecC& v, double x)
{
    const long n = static_cast<long>(g.size());
    long j = static_cast<long>(std::floor((x - g.r.front()) / g.h));
    j = std::clamp<long>(j, g.staggered ? -1 : 0, n - 2);
    const double rj = j >= 0 ? g.r[j] : g.r.front() - g.h;
    const double t = std::clamp((x - rj) / g.h, 0.0, 1.0);
    const cplx vj = j >= 0 ? v[j] : cplx(0.0);
    return (1.0 - t) * vj + t * v[j + 1];
}

}  // namespace

// ---------------------------------------------------------------- decomposition

void validate_exponents(const Exponents& e)
{
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::Config, "exponent constraint violated: " + what + " (gamma = " + fmt(e.gamma) +
                                           ", delta = " + fmt(e.delta) + ", omega = " + fmt(e.omega) + ")");
    };
    if (!(e.gamma > 2.0 / 9.0)) fail("γ ≤ 2/9");
    if (!(e.gamma < 1.0 / 3.0)) fail("γ ≥ 1/3");
    if (!(e.delta > e.gamma)) fail("δ ≤ γ");
    if (!(e.gamma + e.delta < 2.0 / 3.0)) fail("γ + δ ≥ 2/3");
    if (!(e.omega > 2.0 / 9.0)) fail("ω ≤ 2/9");
    if (!(e.omega < e.gamma)) fail("ω ≥ γ");
}

std::string to_string(RegionKind k)
{
    switch (k) {
    case RegionKind::NearZero: return "near_zero";
    case RegionKind::TowardsZero: return "towards_zero";
    case RegionKind::Critical: return "critical";
    case RegionKind::LinearVanish: return "linear_vanish";
    case RegionKind::TowardsInfinity: return "towards_infinity";
    }
    return "?";
}

std::vector<double> RegionDecomposition::knots(RegionKind k) const
{
    std::vector<double> out;
    for (const Cell& c : cells)
        if (c.kind == k) out.push_back(c.a);
    return out;
}

int RegionDecomposition::region_of(double r) const
{
    for (size_t i = 0; i < regions.size(); ++i)
        if (r >= regions[i].a && (r < regions[i].b || (i + 1 == regions.size() && r <= regions[i].b)))
            return static_cast<int>(i);
    return -1;
}

RegionDecomposition decompose(const VelocityProfile& profile, double r0, double eps, double lo, double hi,
                              bool near_zero, const std::optional<Exponents>& exps)
{
    RegionDecomposition d;
    d.eps = eps;
    d.exps = exps.value_or(Exponents{});
    validate_exponents(d.exps);
    if (!(eps > 0.0) || !(eps < 1.0)) throw Error(ErrorKind::Config, "decompose: need 0 < eps < 1");
    if (!(hi > lo)) throw Error(ErrorKind::Config, "decompose: empty interval");
    d.r0 = r0;
    d.lo = near_zero ? 0.0 : lo;
    d.hi = hi;
    const double eg = std::pow(eps, d.exps.gamma), ed = std::pow(eps, d.exps.delta), eo = std::pow(eps, d.exps.omega);
    if (!(r0 - eg > d.lo) || !(r0 + eg < hi))
        throw Error(ErrorKind::Config, "decompose: critical region [r0 - eps^gamma, r0 + eps^gamma] leaves the domain");
    const double nz_end = near_zero ? eg : d.lo;
    if (near_zero && nz_end >= r0 - eg)
        throw Error(ErrorKind::Config, "decompose: near-zero and critical regions overlap");

    // special intervals in increasing order
    std::vector<Region> special;
    special.push_back({RegionKind::Critical, r0 - eg, r0 + eg, -1});
    d.zeros = find_zero_set(profile, r0, nz_end, hi);
    for (size_t j = 0; j < d.zeros.size(); ++j) {
        const double s = d.zeros[j].s;
        Region rg{RegionKind::LinearVanish, std::max(nz_end, s - eo), std::min(hi, s + eo), static_cast<int>(j)};
        special.push_back(rg);
    }
    std::sort(special.begin(), special.end(), [](const Region& a, const Region& b) { return a.a < b.a; });
    for (size_t i = 1; i < special.size(); ++i)
        if (special[i].a < special[i - 1].b)
            throw Error(ErrorKind::Config, "decompose: linear zero at distance < eps^omega from another special region");

    if (near_zero) d.regions.push_back({RegionKind::NearZero, 0.0, nz_end, -1});
    double cur = nz_end;
    auto gap = [&](double a, double b) {
        if (b - a <= 0.0) return;
        d.regions.push_back({b <= r0 ? RegionKind::TowardsZero : RegionKind::TowardsInfinity, a, b, -1});
    };
    for (const Region& s : special) {
        gap(cur, s.a);
        d.regions.push_back(s);
        cur = s.b;
    }
    gap(cur, hi);

    for (const Region& rg : d.regions) {
        if (rg.kind != RegionKind::TowardsZero && rg.kind != RegionKind::TowardsInfinity) continue;
        const long nc = std::max<long>(1, static_cast<long>(std::ceil((rg.b - rg.a) / ed - 1e-9)));
        for (long k = 0; k < nc; ++k) {
            const double a = rg.a + static_cast<double>(k) * ed;
            const double b = k + 1 == nc ? rg.b : rg.a + static_cast<double>(k + 1) * ed;
            d.cells.push_back({a, b, rg.kind});
        }
    }
    return d;
}

// ---------------------------------------------------------------- setup and caches

struct CellData {
    double a, b;
    RegionKind kind;
    cplx kappa;
};

struct NearZeroData {
    bool present = false;
    int region = -1;
    LogVals v1, v2;  // I_ν(√b r), K_ν(√b r)
    VecC coupling;   // (2iM/α) ε^{1/3}/r²
};

struct LinearVanishData {
    int region = -1;
    size_t k0 = 0, k1 = 0;
    LogVals vp, vm;
    cplx den;  // εW
};

struct KernelCache {
    std::vector<CellData> cells;
    NearZeroData nz;
    std::vector<LinearVanishData> lv;
};

namespace {

std::pair<size_t, size_t> support_of(const std::vector<double>& w)
{
    size_t k0 = w.size(), k1 = 0;
    for (size_t i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) {
            k0 = std::min(k0, i);
            k1 = i;
        }
    if (k0 == w.size()) return {1, 0};
    return {k0, k1};
}

void build_cache(GreensSetup& s)
{
    auto cache = std::make_shared<KernelCache>();
    const double eps = s.eps, e3 = std::cbrt(eps), e23 = e3 * e3;
    const double M = s.gd.M;
    TransportFunction T(s.profile, s.gd.r0);
    const RadialGrid& g = s.grid;
    const size_t n = g.size();

    for (const Cell& c : s.dec.cells) {
        const double t = T.value(c.a);
        if (std::abs(M * t) < 1e-14)
            throw Error(ErrorKind::Numerical, "frozen-coefficient degeneracy: T vanishes at knot r = " + fmt(c.a));
        cache->cells.push_back({c.a, c.b, c.kind, sqrt_re_pos(I_UNIT * M * t) / e23});
    }

    for (size_t ri = 0; ri < s.dec.regions.size(); ++ri) {
        const Region& rg = s.dec.regions[ri];
        if (rg.kind == RegionKind::NearZero) {
            NearZeroData& nz = cache->nz;
            nz.present = true;
            nz.region = static_cast<int>(ri);
            const double tau = T.tau();
            if (std::abs(tau * M) < 1e-14) throw Error(ErrorKind::Numerical, "near-zero kernel: T(0) = 0");
            const double nu = std::abs(M) / e3;
            const cplx sb = sqrt_re_pos(I_UNIT * tau * M) / e23;  // √b, arg ±π/4
            nz.v1 = LogVals(n);
            nz.v2 = LogVals(n);
            nz.coupling = VecC(n);
            const cplx cc = -s.gd.alpha * std::pow(s.gd.r0, 3) * s.gd.omega_p * e3;
            for (size_t i = 0; i < n; ++i) {
                const cplx w = sb * g.r[i];
                const BesselIK b = nu >= 1.0 ? bessel_IK_uniform(nu, w / nu) : bessel_IK(nu, w);
                nz.v1.set(i, b.I.value, b.I.log_scale);
                nz.v2.set(i, b.K.value, b.K.log_scale);
                nz.coupling[i] = cc / (g.r[i] * g.r[i]);
            }
        } else if (rg.kind == RegionKind::LinearVanish) {
            LinearVanishData lv;
            lv.region = static_cast<int>(ri);
            auto [k0, k1] = support_of(s.region_weights[ri]);
            lv.k0 = k0;
            lv.k1 = k1;
            const LinearZero& z = s.dec.zeros[rg.zero_index];
            const double tau = M * z.slope;
            const cplx c = std::pow(cplx(0.0, tau), 1.0 / 3.0) * std::pow(eps, -4.0 / 9.0);
            const cplx om = std::exp(2.0 * PI / 3.0 * I_UNIT);
            const cplx cm = (tau > 0.0 ? om : om * om) * c;
            const AiryPair a0 = airy_pair(0.0);
            // W = v₋v₊' − v₋'v₊ at x = 0
            lv.den = eps * (a0.ai * c * a0.aip - cm * a0.aip * a0.ai) * std::exp(2.0 * a0.log_scale);
            lv.vp = LogVals(n);
            lv.vm = LogVals(n);
            double ref = NEG_INF;
            for (size_t i = k0; i < n; ++i) {
                const AiryPair p = airy_pair(c * (g.r[i] - z.s));
                lv.vp.set(i, p.ai, p.log_scale);
                if (i <= k1) ref = std::max(ref, lv.vp.L[i]);
                else if (lv.vp.L[i] < ref - CUT) break;
            }
            ref = NEG_INF;
            for (size_t ii = k1 + 1; ii-- > 0;) {
                const AiryPair p = airy_pair(cm * (g.r[ii] - z.s));
                lv.vm.set(ii, p.ai, p.log_scale);
                if (ii >= k0) ref = std::max(ref, lv.vm.L[ii]);
                else if (lv.vm.L[ii] < ref - CUT) break;
            }
            cache->lv.push_back(std::move(lv));
        }
    }
    s.cache = cache;
}

}  // namespace

GreensSetup make_greens_setup(const VelocityProfile& profile, const GilbertData& gd, double eps, const RadialGrid& grid,
                              const Exponents& exps, int weight_N)
{
    GreensSetup s;
    s.profile = profile;
    s.gd = gd;
    s.eps = eps;
    s.grid = grid;
    const bool nz = grid.domain.contains_origin();
    s.dec = decompose(profile, gd.r0, eps, grid.lo(), grid.hi(), nz, exps);
    s.L = assemble(profile, gd, eps, grid, OperatorKind::RThetaSystem);
    s.norms = WeightedNorms{weight_N, eps, gd.r0};
    s.beta = gd.alpha * std::cbrt(eps);
    const size_t n = grid.size();
    s.full_weights.assign(n, 0.0);
    for (const Region& rg : s.dec.regions) {
        std::vector<double> w(n, 0.0);
        const size_t i0 = rg.a <= grid.r.front() ? 0 : grid.nearest(rg.a);
        const size_t lo = i0 > 2 ? i0 - 2 : 0;
        for (size_t i = lo; i < n && grid.r[i] <= rg.b + 2.0 * grid.h; ++i) {
            w[i] = hat_integral(grid, i, rg.a, rg.b);
            s.full_weights[i] += w[i];
        }
        s.region_weights.push_back(std::move(w));
    }
    build_cache(s);
    return s;
}

GridFunction restrict_to(const GreensSetup& s, const GridFunction& f, RegionKind kind, bool inside)
{
    GridFunction out = f;
    const size_t n = f.size();
    std::vector<char> touches(n, 0);
    for (size_t k = 0; k < s.dec.regions.size(); ++k)
        if (s.dec.regions[k].kind == kind)
            for (size_t i = 0; i < n; ++i)
                if (s.region_weights[k][i] != 0.0) touches[i] = 1;
    for (size_t i = 0; i < n; ++i)
        if (static_cast<bool>(touches[i]) != inside) {
            out.c0[i] = 0.0;
            out.c1[i] = 0.0;
        }
    return out;
}

// ---------------------------------------------------------------- kernels

namespace {

void g13_scalar(const RadialGrid& g, const CellData& c, double eps, const VecC& f, VecC& u)
{
    const size_t n = g.size();
    const cplx k = c.kappa;
    const cplx pref = -1.0 / (2.0 * eps * k);
    const size_t i_first = static_cast<size_t>(std::lower_bound(g.r.begin(), g.r.end(), c.a) - g.r.begin());
    const size_t i_end = static_cast<size_t>(std::lower_bound(g.r.begin(), g.r.end(), c.b) - g.r.begin());
    // breakpoints a, interior nodes, b
    std::vector<double> x{c.a};
    std::vector<cplx> fx{interp(g, f, c.a)};
    for (size_t i = i_first; i < i_end; ++i) {
        if (g.r[i] <= c.a) continue;
        x.push_back(g.r[i]);
        fx.push_back(f[i]);
    }
    x.push_back(c.b);
    fx.push_back(interp(g, f, c.b));
    const size_t m = x.size();
    std::vector<cplx> Lacc(m, 0.0), Racc(m, 0.0), decay(m - 1);
    std::vector<cplx> e1(m - 1), e2(m - 1);
    for (size_t j = 0; j + 1 < m; ++j) {
        const double len = x[j + 1] - x[j];
        phi12(k * len, e1[j], e2[j]);
        decay[j] = std::exp(-k * len);
    }
    for (size_t j = 0; j + 1 < m; ++j) {
        const double len = x[j + 1] - x[j];
        Lacc[j + 1] = decay[j] * Lacc[j] + len * (fx[j] * e2[j] + fx[j + 1] * (e1[j] - e2[j]));
    }
    for (size_t j = m - 1; j-- > 0;) {
        const double len = x[j + 1] - x[j];
        Racc[j] = decay[j] * Racc[j + 1] + len * (fx[j] * (e1[j] - e2[j]) + fx[j + 1] * e2[j]);
    }
    size_t j = 0;
    for (size_t i = i_first; i < i_end; ++i) {
        if (g.r[i] > c.a) ++j;
        u[i] += pref * (Lacc[j] + Racc[j]);
    }
    const double kr = k.real();
    for (size_t i = i_end; i < n; ++i) {
        const double d = g.r[i] - c.b;
        if (kr * d > 40.0) break;
        u[i] += pref * Lacc[m - 1] * std::exp(-k * d);
    }
    for (size_t i = i_first; i-- > 0;) {
        const double d = c.a - g.r[i];
        if (kr * d > 40.0) break;
        u[i] += pref * Racc[0] * std::exp(-k * d);
    }
}

void require_v(const GridFunction& f, const char* who)
{
    if (f.basis != Basis::V) throw Error(ErrorKind::Numerical, std::string(who) + ": expects a V-basis grid function");
}

}  // namespace

GridFunction g13_apply(const GreensSetup& s, const GridFunction& f, RegionKind direction)
{
    require_v(f, "g13_apply");
    GridFunction u(Basis::V, f.size());
    for (const CellData& c : s.cache->cells) {
        if (c.kind != direction) continue;
        g13_scalar(s.grid, c, s.eps, f.c0, u.c0);
        g13_scalar(s.grid, c, s.eps, f.c1, u.c1);
    }
    return u;
}

GridFunction g0_apply(const GreensSetup& s, const GridFunction& f)
{
    require_v(f, "g0_apply");
    const NearZeroData& nz = s.cache->nz;
    GridFunction u(Basis::V, f.size());
    if (!nz.present) return u;
    const size_t n = f.size();
    const double hi = s.dec.regions[nz.region].b;
    const cplx den = -s.eps;
    auto scalar = [&](const VecC& g, double top) {
        VecC out = VecC::Zero(static_cast<Eigen::Index>(n));
        radial_power_green(s.grid, nz.v2, nz.v1, g, top, den, out);
        return out;
    };
    const VecC fp = f.c0 + f.c1, fm = f.c0 - f.c1;
    const VecC Vp = scalar(fp, hi);
    const VecC cV = nz.coupling.cwiseProduct(Vp);
    const VecC Vm = scalar(fm, hi) - scalar(cV, INFINITY);
    u.c0 = 0.5 * (Vp + Vm);
    u.c1 = 0.5 * (Vp - Vm);
    return u;
}

GridFunction glv_apply(const GreensSetup& s, const GridFunction& f, int zero_index)
{
    require_v(f, "glv_apply");
    GridFunction u(Basis::V, f.size());
    for (const LinearVanishData& lv : s.cache->lv) {
        if (s.dec.regions[lv.region].zero_index != zero_index) continue;
        const std::vector<double>& w = s.region_weights[lv.region];
        for (int c = 0; c < 2; ++c) {
            VecC q = f.comp(c);
            for (Eigen::Index i = 0; i < q.size(); ++i) q[i] *= w[i];
            two_point_green(lv.vp, lv.vm, q, lv.k0, lv.k1, lv.den, u.comp(c));
        }
    }
    return u;
}

GluedGreens::GluedGreens(const GreensSetup& s, cplx lambda) : s_(&s), lambda_(lambda)
{
    for (size_t k = 0; k < s.dec.regions.size(); ++k)
        if (s.dec.regions[k].kind == RegionKind::Critical) crit_ = static_cast<int>(k);
    if (crit_ < 0) return;
    std::tie(k0_, k1_) = support_of(s.region_weights[crit_]);
    const GilbertData& gd = s.gd;
    const double e3 = std::cbrt(s.eps);
    const cplx c2s = gd.c2_sqrt;
    const cplx eta = lambda / e3 - gd.mu_star;
    if (std::abs((c2s * eta).real()) > 2.0)
        throw Error(ErrorKind::Domain, "spectral parameter outside the critical-kernel window: |Re(c2^{1/2} eta)| = " +
                                           fmt(std::abs((c2s * eta).real())) + " > 2");
    const cplx kappa = std::sqrt(2.0) * root4_re_pos(gd.c2) / e3;
    const size_t n = s.grid.size();
    for (int c = 0; c < 2; ++c) {
        const double sc = c == 0 ? 1.0 : -1.0;
        nu_[c] = -(e3 * (gd.mass_term() - sc * gd.sigma) + lambda) / (2.0 * c2s * e3) - 0.5;
        const cplx rg = rgamma(-nu_[c]);
        if (std::abs(rg) < 1e-13)
            throw Error(ErrorKind::Domain, "Wronskian pole: nu = " + fmt(nu_[c].real()) + (nu_[c].imag() < 0 ? "" : "+") +
                                               fmt(nu_[c].imag()) + "i is a Hermite index (lambda on a frozen eigenvalue)");
        wr_[c] = s.eps * (-kappa * std::sqrt(2.0 * PI) * rg);
        LogVals yp(n), ym(n);
        double ref = NEG_INF;
        for (size_t i = k0_; i < n; ++i) {
            const WeberPair p = parabolic_cylinder_pair(nu_[c], kappa * (s.grid.r[i] - gd.r0));
            yp.set(i, p.d, p.log_scale);
            if (i <= k1_) ref = std::max(ref, yp.L[i]);
            else if (yp.L[i] < ref - CUT) break;
        }
        ref = NEG_INF;
        for (size_t ii = k1_ + 1; ii-- > 0;) {
            const WeberPair p = parabolic_cylinder_pair(nu_[c], -kappa * (s.grid.r[ii] - gd.r0));
            ym.set(ii, p.d, p.log_scale);
            if (ii >= k0_) ref = std::max(ref, ym.L[ii]);
            else if (ym.L[ii] < ref - CUT) break;
        }
        yp_[c] = std::move(yp.m);
        ym_[c] = std::move(ym.m);
        ypL_[c] = std::move(yp.L);
        ymL_[c] = std::move(ym.L);
    }
}

GridFunction GluedGreens::apply_critical(const GridFunction& f) const
{
    require_v(f, "g2_apply");
    GridFunction u(Basis::V, f.size());
    if (crit_ < 0) return u;
    const std::vector<double>& w = s_->region_weights[crit_];
    for (int c = 0; c < 2; ++c) {
        LogVals yp, ym;
        yp.m = yp_[c];
        yp.L = ypL_[c];
        ym.m = ym_[c];
        ym.L = ymL_[c];
        VecC q = f.comp(c);
        for (Eigen::Index i = 0; i < q.size(); ++i) q[i] *= w[i];
        two_point_green(yp, ym, q, k0_, k1_, wr_[c], u.comp(c));
    }
    return u;
}

GridFunction GluedGreens::apply_extra(const GridFunction& f) const
{
    const GreensSetup& s = *s_;
    GridFunction u = g13_apply(s, f, RegionKind::TowardsZero);
    u += g13_apply(s, f, RegionKind::TowardsInfinity);
    if (s.cache->nz.present) u += g0_apply(s, f);
    for (size_t j = 0; j < s.dec.zeros.size(); ++j) u += glv_apply(s, f, static_cast<int>(j));
    return u;
}

GridFunction GluedGreens::apply(const GridFunction& f) const
{
    GridFunction u = apply_critical(f);
    u += apply_extra(f);
    return u;
}

GridFunction g2_apply(const GreensSetup& s, const GridFunction& f, cplx lambda)
{
    return GluedGreens(s, lambda).apply_critical(f);
}

GridFunction glued_apply(const GreensSetup& s, const GridFunction& f, cplx lambda)
{
    return GluedGreens(s, lambda).apply(f);
}

// ---------------------------------------------------------------- error operator and Neumann series

GridFunction error_apply(const GreensSetup& s, const GluedGreens& g, const GridFunction& f)
{
    if (s.grid.h > std::cbrt(s.eps) / 10.0)
        throw Error(ErrorKind::Config, "resolution: h exceeds eps^{1/3}/10");
    const GridFunction u = g.apply(f).to_b(s.beta);
    const VecC x = u.interleaved();
    const VecC y = s.L.apply(x) - g.lambda() * s.L.applyB(x);
    GridFunction e = GridFunction::from_interleaved(Basis::B, y).to_v(s.beta);
    e -= f;
    const size_t n = f.size();
    for (size_t i : {size_t{0}, n - 1}) {
        if (s.L.bc_row[2 * i]) {
            e.c0[i] = 0.0;
            e.c1[i] = 0.0;
        }
    }
    return e;
}

ErrorApplyResult error_apply(const GreensSetup& s, const GridFunction& f, cplx lambda)
{
    require_v(f, "error_apply");
    GluedGreens g(s, lambda);
    ErrorApplyResult r;
    r.e = error_apply(s, g, f);
    const double fn = s.norms.y_norm(s.grid, f);
    r.rho = fn > 0.0 ? s.norms.y_norm(s.grid, r.e) / fn : 0.0;
    return r;
}

NeumannResult neumann_resolvent(const GreensSetup& s, const GluedGreens& g, const GridFunction& f,
                                const NeumannOptions& opts)
{
    require_v(f, "neumann_resolvent");
    NeumannResult res;
    const double fn = s.norms.y_norm(s.grid, f);
    GridFunction y(Basis::V, f.size());
    if (fn == 0.0) {
        res.u = y;
        return res;
    }
    GridFunction e = f;
    bool done = false;
    for (int k = 0; k < opts.n_max; ++k) {
        if (k % 2 == 0) y += e;
        else y -= e;
        e = error_apply(s, g, e);
        const double ratio = s.norms.y_norm(s.grid, e) / fn;
        res.history.push_back(ratio);
        res.terms = k + 1;
        if (k == 0) res.first_ratio = ratio;
        res.geometric_rate = std::pow(ratio, 1.0 / (k + 1));
        res.residual_ratio = ratio;
        if (!std::isfinite(ratio) || ratio > 1e6) break;
        if (ratio <= opts.tol) {
            done = true;
            break;
        }
    }
    if (!done)
        throw Error(ErrorKind::Numerical, "Neumann series diverged: contraction ratio rho ~ " + fmt(res.geometric_rate) +
                                              " (first step " + fmt(res.first_ratio) + ", residual " +
                                              fmt(res.residual_ratio) + " after " + std::to_string(res.terms) +
                                              " terms)");
    res.u = g.apply(y);
    return res;
}

NeumannResult neumann_resolvent(const GreensSetup& s, const GridFunction& f, cplx lambda, const NeumannOptions& opts)
{
    GluedGreens g(s, lambda);
    return neumann_resolvent(s, g, f, opts);
}

GridFunction riesz_project_greens(const GreensSetup& s, const GridFunction& f, const Contour& c,
                                  const NeumannOptions& opts, unsigned workers)
{
    const int N = c.n_points;
    std::vector<GridFunction> parts(N);
    parallel_for(
        static_cast<size_t>(N),
        [&](size_t k) {
            const cplx ph = std::exp(I_UNIT * (2.0 * PI * static_cast<double>(k) / N));
            const cplx lam = c.center + c.radius * ph;
            NeumannResult r = neumann_resolvent(s, f, lam, opts);
            parts[k] = (-c.radius * ph / static_cast<double>(N)) * r.u;
        },
        workers);
    GridFunction out(Basis::V, f.size());
    for (const GridFunction& p : parts) out += p;
    return out;
}

GridFunction sample_fstar(const GreensSetup& s)
{
    GridFunction f(Basis::V, s.grid.size());
    for (size_t i = 0; i < s.grid.size(); ++i) {
        const AnsatzValue a = ansatz_profile(s.gd, s.eps, s.grid.r[i]);
        f.c0[i] = a.V1;
        f.c1[i] = a.V2;
    }
    return f;
}

// ---------------------------------------------------------------- boundary correction

namespace {

size_t node_at(const RadialGrid& g, double x)
{
    const size_t i = g.nearest(x);
    if (std::abs(g.r[i] - x) > 1e-6 * g.h)
        throw Error(ErrorKind::Config, "boundary system: r = " + fmt(x) + " is not a grid node");
    return i;
}

}  // namespace

Eigen::Vector4cd boundary_residues(const GreensSetup& s, const BoundarySystem& bs, const GridFunction& b)
{
    if (b.basis != Basis::B) throw Error(ErrorKind::Numerical, "boundary_residues: expects a b-basis grid function");
    const auto& r = s.grid.r;
    const double h2 = 2.0 * s.grid.h;
    const size_t p = bs.ip, q = bs.iq;
    Eigen::Vector4cd v;
    v[0] = b.c0[p];
    v[1] = (-3.0 * r[p] * b.c1[p] + 4.0 * r[p + 1] * b.c1[p + 1] - r[p + 2] * b.c1[p + 2]) / h2;
    v[2] = b.c0[q];
    v[3] = (3.0 * r[q] * b.c1[q] - 4.0 * r[q - 1] * b.c1[q - 1] + r[q - 2] * b.c1[q - 2]) / h2;
    return v;
}

BoundarySystem build_boundary_system(const GreensSetup& s, double p, double q, cplx lambda, const NeumannOptions& opts)
{
    BoundarySystem bs;
    bs.ip = node_at(s.grid, p);
    bs.iq = node_at(s.grid, q);
    if (bs.ip < 1 || bs.iq + 1 >= s.grid.size() || bs.iq < bs.ip + 4)
        throw Error(ErrorKind::Config, "boundary system: [p, q] must lie strictly inside the extended interval");
    const double ed = std::pow(s.eps, s.dec.exps.delta);
    GluedGreens g(s, lambda);
    const size_t n = s.grid.size();
    for (int k = 0; k < 4; ++k) {
        const bool at_p = k % 2 == 0;
        GridFunction data(Basis::B, n);
        for (size_t i = 0; i < n; ++i) {
            const double r = s.grid.r[i];
            const bool in = at_p ? (r >= p - ed - 1e-12 && i <= bs.ip) : (i >= bs.iq && r <= q + ed + 1e-12);
            if (in) data.comp(k < 2 ? 0 : 1)[i] = 1.0;
        }
        NeumannResult nr = neumann_resolvent(s, g, data.to_v(s.beta), opts);
        bs.v[k] = nr.u.to_b(s.beta);
        bs.neumann_terms[k] = nr.terms;
        bs.J.col(k) = boundary_residues(s, bs, bs.v[k]);
    }
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(bs.J);
    const auto sv = svd.singularValues();
    const double smin = sv[3], smax = sv[0];
    bs.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(smin > 1e-13 * smax))
        throw Error(ErrorKind::Numerical, "boundary-correction degeneracy: J is singular (cond = " + fmt(bs.cond) + ")");
    bs.jinv_norm = 1.0 / smin;
    return bs;
}

GridFunction boundary_correct(const GreensSetup& s, const BoundarySystem& bs, const GridFunction& particular,
                              Eigen::Vector4cd* coefficients)
{
    const Eigen::Vector4cd rhs = boundary_residues(s, bs, particular);
    const Eigen::Vector4cd c = bs.J.fullPivLu().solve(rhs);
    GridFunction out = particular;
    for (int k = 0; k < 4; ++k) out -= c[k] * bs.v[k];
    if (coefficients) *coefficients = c;
    return out;
}

RadialGrid extended_grid(const RadialGrid& inner, double lo, double hi)
{
    if (inner.staggered) throw Error(ErrorKind::Config, "extended_grid: needs an annulus grid");
    const double h = inner.h;
    const long k0 = std::max<long>(0, std::lround((inner.lo() - lo) / h));
    const long k1 = std::max<long>(0, std::lround((hi - inner.hi()) / h));
    const long ni = static_cast<long>(inner.size());
    RadialGrid g;
    g.h = h;
    g.r.resize(static_cast<size_t>(ni + k0 + k1));
    for (long i = 0; i < ni + k0 + k1; ++i) g.r[i] = i >= k0 && i < k0 + ni ? inner.r[i - k0] : inner.lo() + (i - k0) * h;
    g.domain = Domain{DomainKind::Annulus, g.r.front(), g.r.back()};
    return g;
}

GridFunction random_test_function(const RadialGrid& g, double a, double b, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    GridFunction f(Basis::V, g.size());
    for (int c = 0; c < 2; ++c) {
        cplx coef[8];
        for (auto& x : coef) {
            const double re = nd(rng);
            const double im = nd(rng);
            x = cplx(re, im);
        }
        for (size_t i = 0; i < g.size(); ++i) {
            const double r = g.r[i];
            if (r < a || r > b) continue;
            cplx v = 0.0;
            for (int k = 1; k <= 8; ++k) v += coef[k - 1] * std::sin(k * PI * (r - a) / (b - a));
            f.comp(c)[i] = v;
        }
    }
    return f;
}

}  // namespace dynamo
