#include "dynamo/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dynamo/gilbert.hpp"

namespace dynamo {

std::string to_string(DomainKind k)
{
    switch (k) {
    case DomainKind::FullLine: return "full_line";
    case DomainKind::Disk: return "disk";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::Exterior: return "exterior";
    }
    return "annulus";
}

DomainKind domain_kind_from_string(const std::string& s)
{
    if (s == "full_line") return DomainKind::FullLine;
    if (s == "disk") return DomainKind::Disk;
    if (s == "annulus") return DomainKind::Annulus;
    if (s == "exterior") return DomainKind::Exterior;
    throw Error(ErrorKind::Config, "unknown domain kind '" + s + "'");
}

// ---------------------------------------------------------------- spline

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
{
    const size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw Error(ErrorKind::Config, "spline needs at least 3 matching samples");
    for (size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw Error(ErrorKind::Config, "spline abscissae must be strictly increasing");
    // natural end conditions, tridiagonal solve for second derivatives
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
        const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        const double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
}

Jet CubicSpline::eval(double x) const
{
    size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    i = std::clamp<size_t>(i, 1, x_.size() - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    Jet j;
    j.d[0] = A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    j.d[1] = (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
    j.d[2] = A * m_[i] + B * m_[i + 1];
    j.d[3] = (m_[i + 1] - m_[i]) / h;
    return j;
}

// ---------------------------------------------------------------- presets

namespace {

// smooth step: 1 for r <= R0, 0 for r >= R1
Jet smooth_cutoff(double r, double R0, double R1)
{
    if (r <= R0) return Jet(1.0);
    if (r >= R1) return Jet(0.0);
    Jet x = Jet::variable(r);
    Jet a = exp(-(Jet(1.0) / (Jet(R1) - x)));
    Jet b = exp(-(Jet(1.0) / (x - Jet(R0))));
    return a / (a + b);
}

Jet fd_jet(const VelocityProfile::ScalarFn& f, double r)
{
    // 4th-order central differences; third derivative uses a wider step to keep round-off down
    const double h = 1e-5 * std::max(1.0, std::abs(r));
    const double h3 = 1e-3 * std::max(1.0, std::abs(r));
    Jet j;
    const double f0 = f(r), fp1 = f(r + h), fm1 = f(r - h), fp2 = f(r + 2 * h), fm2 = f(r - 2 * h);
    j.d[0] = f0;
    j.d[1] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    j.d[2] = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    const double g1 = f(r + h3), g2 = f(r + 2 * h3), g3 = f(r + 3 * h3);
    const double k1 = f(r - h3), k2 = f(r - 2 * h3), k3 = f(r - 3 * h3);
    j.d[3] = (-g3 + 8.0 * g2 - 13.0 * g1 + 13.0 * k1 - 8.0 * k2 + k3) / (8.0 * h3 * h3 * h3);
    return j;
}

}  // namespace

VelocityProfile VelocityProfile::simplified()
{
    VelocityProfile p;
    p.om_ = [](double r) { Jet x = Jet::variable(r); return Jet(1.0) - x; };
    p.uz_ = [](double r) { Jet x = Jet::variable(r); return Jet(1.0) - x * x; };
    p.preset_ = Preset::Simplified;
    p.name_ = "simplified";
    return p;
}

VelocityProfile VelocityProfile::gaussian(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0) || a == b)
        throw Error(ErrorKind::Config, "gaussian preset needs a, b > 0 and a != b");
    VelocityProfile p;
    p.om_ = [a](double r) { Jet x = Jet::variable(r); return exp(Jet(-a) * x * x); };
    p.uz_ = [b](double r) { Jet x = Jet::variable(r); return exp(Jet(-b) * x * x); };
    p.preset_ = Preset::Gaussian;
    p.name_ = "gaussian";
    p.params_ = {a, b};
    return p;
}

VelocityProfile VelocityProfile::compact(double R0, double R1)
{
    if (!(R1 > R0) || !(R0 > 0.0)) throw Error(ErrorKind::Config, "compact preset needs 0 < R0 < R1");
    VelocityProfile p;
    p.om_ = [R0, R1](double r) {
        Jet x = Jet::variable(r);
        return (Jet(1.0) - x) * smooth_cutoff(r, R0, R1);
    };
    p.uz_ = [R0, R1](double r) {
        Jet x = Jet::variable(r);
        return (Jet(1.0) - x * x) * smooth_cutoff(r, R0, R1);
    };
    p.preset_ = Preset::Compact;
    p.name_ = "compact";
    p.params_ = {R0, R1};
    return p;
}

VelocityProfile VelocityProfile::taylor_couette(double a1, double a2, double a3, double a4)
{
    VelocityProfile p;
    p.om_ = [a1, a3](double r) { Jet x = Jet::variable(r); return Jet(a1) / (x * x) + Jet(a3); };
    p.uz_ = [a2, a4](double r) { Jet x = Jet::variable(r); return Jet(a2) * log(x) + Jet(a4); };
    p.preset_ = Preset::TaylorCouette;
    p.name_ = "taylor_couette";
    p.params_ = {a1, a2, a3, a4};
    return p;
}

VelocityProfile VelocityProfile::custom(JetFn omega, JetFn uz, std::string name)
{
    VelocityProfile p;
    p.om_ = std::move(omega);
    p.uz_ = std::move(uz);
    p.preset_ = Preset::Custom;
    p.name_ = std::move(name);
    return p;
}

VelocityProfile VelocityProfile::custom_fd(ScalarFn omega, ScalarFn uz, std::string name)
{
    VelocityProfile p;
    p.om_ = [omega](double r) { return fd_jet(omega, r); };
    p.uz_ = [uz](double r) { return fd_jet(uz, r); };
    p.preset_ = Preset::Custom;
    p.name_ = std::move(name);
    return p;
}

VelocityProfile VelocityProfile::from_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open profile CSV '" + path + "'");
    std::string line;
    std::getline(in, line);
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    if (line != "r,omega,uz") throw Error(ErrorKind::Config, "profile CSV header must be 'r,omega,uz'");
    std::vector<double> r, om, uz;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b, c;
        if (!(ss >> a >> b >> c))
            throw Error(ErrorKind::Config, "profile CSV: bad row at line " + std::to_string(lineno));
        r.push_back(a);
        om.push_back(b);
        uz.push_back(c);
    }
    auto so = std::make_shared<CubicSpline>(r, om);
    auto su = std::make_shared<CubicSpline>(r, uz);
    VelocityProfile p;
    p.om_ = [so](double x) { return so->eval(x); };
    p.uz_ = [su](double x) { return su->eval(x); };
    p.preset_ = Preset::Custom;
    p.name_ = "custom";
    return p;
}

VelocityProfile VelocityProfile::without_stretching() const
{
    VelocityProfile p = *this;
    p.stretching_ = false;
    return p;
}

// ---------------------------------------------------------------- transport

TransportFunction::TransportFunction(const VelocityProfile& profile, double r0) : profile_(profile), r0_(r0)
{
    const double u1 = profile_.uz(r0, 1);
    if (u1 == 0.0) throw Error(ErrorKind::Degenerate, "degenerate pitch: U'(r0) = 0");
    rho_ = profile_.omega(r0, 1) / u1;
    om0_ = profile_.omega(r0);
    u0_ = profile_.uz(r0);
}

double TransportFunction::value(double r) const
{
    if (r == r0_) return 0.0;
    return (profile_.omega(r) - om0_) - rho_ * (profile_.uz(r) - u0_);
}

double TransportFunction::deriv(double r, int k) const
{
    return profile_.omega(r, k) - rho_ * profile_.uz(r, k);
}

Jet TransportFunction::jet(double r) const
{
    Jet t = (profile_.omega_jet(r) - Jet(om0_)) - Jet(rho_) * (profile_.uz_jet(r) - Jet(u0_));
    if (r == r0_) t.d[0] = 0.0;
    return t;
}

double TransportFunction::tau() const
{
    // extrapolate to r = 0 from the right; all presets are regular there
    const double r = 1e-12;
    return value(r);
}

double evaluate_transport(const VelocityProfile& profile, double r0, double r)
{
    return TransportFunction(profile, r0).value(r);
}

// ---------------------------------------------------------------- zero set

std::vector<LinearZero> find_zero_set(const VelocityProfile& profile, double r0, double lo, double hi, double tol)
{
    if (!(hi > lo)) throw Error(ErrorKind::Config, "zero-set window must have hi > lo");
    if (tol <= 0.0) tol = 1e-12 * (hi - lo);
    TransportFunction T(profile, r0);
    const long n = std::max<long>(2, static_cast<long>(std::ceil((hi - lo) * 1e4)));
    const double excl = 1e-4 * std::max(1.0, r0);
    std::vector<LinearZero> out;
    auto excluded = [&](double r) { return std::abs(r - r0) < excl; };
    double ra = lo, ta = T.value(lo);
    for (long i = 1; i <= n; ++i) {
        const double rb = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double tb = T.value(rb);
        if (!excluded(ra) && !excluded(rb) && ((ta < 0.0 && tb > 0.0) || (ta > 0.0 && tb < 0.0) || tb == 0.0)) {
            double a = ra, b = rb, fa = ta;
            if (tb == 0.0) {
                a = b = rb;
            }
            while (b - a > tol) {
                const double m = 0.5 * (a + b);
                const double fm = T.value(m);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            const double s = 0.5 * (a + b);
            const double slope = T.deriv(s, 1);
            if (std::abs(slope) < 1e-8)
                throw Error(ErrorKind::Degenerate, "non-simple zero of T at r = " + std::to_string(s));
            if (out.empty() || std::abs(out.back().s - s) > 10 * tol) out.push_back({s, slope});
        }
        ra = rb;
        ta = tb;
    }
    return out;
}

// ---------------------------------------------------------------- audit

AuditReport audit(const VelocityProfile& profile, double r0, double M, double lo, double hi)
{
    if (!(r0 > lo && r0 < hi)) throw Error(ErrorKind::Config, "audit: r0 must be interior to the window");
    AuditReport rep;
    TransportFunction T(profile, r0);
    auto note = [&](const std::string& s) { rep.diagnostics.push_back(s); };

    // H0: C^3 on the window, checked by sampling
    rep.h0_ok = true;
    for (int i = 0; i <= 2000; ++i) {
        const double r = lo + (hi - lo) * i / 2000.0;
        Jet o = profile.omega_jet(r), u = profile.uz_jet(r);
        for (int k = 0; k < 4; ++k)
            if (!std::isfinite(o[k]) || !std::isfinite(u[k])) rep.h0_ok = false;
    }
    note(rep.h0_ok ? "H0: derivatives to third order finite on the window" : "H0: non-finite derivative sampled");

    // H1: quadratic tangency at r0, simple zeros elsewhere
    const double t1 = T.deriv(r0, 1), t2 = T.deriv(r0, 2);
    rep.t2_at_r0 = t2;
    bool tangency = std::abs(T.value(r0)) == 0.0 && std::abs(t1) <= 1e-8 * std::max(1.0, std::abs(t2)) &&
                    std::abs(t2) > 1e-8;
    try {
        rep.zero_set = find_zero_set(profile, r0, lo, hi);
        rep.h1_ok = tangency;
    } catch (const Error& e) {
        rep.h1_ok = false;
        note(std::string("H1: ") + e.what());
    }
    note("H1: T''(r0) = " + std::to_string(t2) + ", " + std::to_string(rep.zero_set.size()) + " linear zero(s)");

    // H2: relative derivative bounds on the window tail beyond the last zero
    double zmax = r0;
    for (auto& z : rep.zero_set) zmax = std::max(zmax, z.s);
    const double xi = zmax + 0.5 * (hi - zmax);
    double b1 = 0, b2 = 0, s0 = 0, s1 = 0, tmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        const double r = xi + (hi - xi) * i / 1000.0;
        Jet tj = T.jet(r);
        const double at = std::abs(tj[0]);
        tmin = std::min(tmin, at);
        Jet o = profile.omega_jet(r);
        const double st0 = r * o[1], st1 = o[1] + r * o[2];
        b1 = std::max(b1, std::abs(tj[1]) / at);
        b2 = std::max(b2, std::abs(tj[2]) / at);
        s0 = std::max(s0, std::abs(st0) / at);
        s1 = std::max(s1, std::abs(st1) / at);
    }
    rep.h2_ok = tmin > 1e-10 && b1 < 1e6 && b2 < 1e6 && s0 < 1e6 && s1 < 1e6;
    note("H2: tail [" + std::to_string(xi) + "," + std::to_string(hi) + "] inf|T|=" + std::to_string(tmin) +
         " sup|T'|/|T|=" + std::to_string(b1) + " sup|T''|/|T|=" + std::to_string(b2) +
         " sup|rOmega'|/|T|=" + std::to_string(s0));

    // H3: far-field behaviour beyond the window
    {
        const double R1 = hi, R2 = 50.0 * std::max(1.0, hi);
        const int ns = 400;
        double st_max = 0.0, st_far = 0.0, tmin_far = std::numeric_limits<double>::infinity(), tmax_far = -tmin_far;
        std::vector<double> rs(ns + 1), tv(ns + 1), sv(ns + 1);
        for (int i = 0; i <= ns; ++i) {
            const double r = R1 * std::pow(R2 / R1, static_cast<double>(i) / ns);
            rs[i] = r;
            tv[i] = T.value(r);
            sv[i] = std::abs(r * profile.omega(r, 1));
            st_max = std::max(st_max, sv[i]);
            tmin_far = std::min(tmin_far, tv[i]);
            tmax_far = std::max(tmax_far, tv[i]);
        }
        st_far = sv[ns];
        const bool option_a = std::isfinite(st_max) && st_far <= 1e-2 * std::max(st_max, 1e-300) + 1e-12;
        bool option_b = false;
        if (std::abs(tv[ns]) > 100.0 * std::max(1.0, std::abs(tv[0]))) {
            // T bounded on one side: shift by Λ so that T + Λ stays away from 0
            const double lam = tmin_far > -std::numeric_limits<double>::infinity() && tv[ns] > 0
                                   ? 1.0 - std::min(0.0, tmin_far)
                                   : -1.0 - std::max(0.0, tmax_far);
            double q = 0.0;
            for (int i = 0; i <= ns; ++i) q = std::max(q, sv[i] * sv[i] / std::abs(tv[i] + lam));
            option_b = std::isfinite(q) && q < 1e6;
            note("H3: sup |rOmega'|^2/|T+Lambda| = " + std::to_string(q));
        }
        rep.h3_ok = option_a || option_b;
        note(std::string("H3: ") + (option_a ? "|rOmega'| -> 0 " : "") + (option_b ? "|T| -> inf with quotient bound" : "") +
             (rep.h3_ok ? "" : "neither alternative detected"));
    }

    // Gilbert's geometric condition r0 |d/dr log|Ω'/U'|| < 4
    const double om1 = profile.omega(r0, 1), om2 = profile.omega(r0, 2);
    const double u1 = profile.uz(r0, 1), u2 = profile.uz(r0, 2);
    rep.log_deriv_value = r0 * std::abs(om2 / om1 - u2 / u1);
    rep.gilbert_ok = rep.log_deriv_value < 4.0;

    // M window from Re(μ⋆)(|M|) = 0
    try {
        GilbertData gd = gilbert_constants(profile, r0, M == 0.0 ? 1.0 : M);
        auto f = [&](double m) { return re_mu_star_of(gd, m); };
        const double mlo = 1e-12;
        if (f(mlo) > 0.0) {
            double a = mlo, b = 2.0 * mlo;
            while (f(b) > 0.0 && b < 1e12) {
                a = b;
                b *= 2.0;
            }
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double m = 0.5 * (a + b);
                (f(m) > 0.0 ? a : b) = m;
            }
            rep.m_window_lo = 0.0;
            rep.m_window_hi = 0.5 * (a + b);
        }
        rep.M_in_window = M != 0.0 && std::abs(M) < rep.m_window_hi;
    } catch (const Error& e) {
        note(std::string("M window: ") + e.what());
    }
    return rep;
}

// ---------------------------------------------------------------- integer modes

ModeSelection select_integer_modes(const VelocityProfile& profile, double r0, double M, double eps, double lo,
                                   double hi)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::Config, "eps must be positive");
    ModeSelection ms;
    ms.eps = eps;
    const double e3 = std::cbrt(eps);
    double mr = M / e3;
    long m = std::lround(mr);
    if (std::abs(mr - static_cast<double>(m)) < 1e-9) m = std::lround(mr);
    if (m == 0) m = M >= 0.0 ? 1 : -1;
    ms.m = m;
    ms.M = static_cast<double>(m) * e3;
    if (std::abs(ms.M - M) > e3 * (1.0 + 1e-12))
        throw Error(ErrorKind::Numerical, "mode selection: |M~ - M| exceeds eps^{1/3}");

    auto rho = [&](double r) { return profile.omega(r, 1) / profile.uz(r, 1); };
    auto kof = [&](double r) { return -static_cast<double>(m) * rho(r); };
    // Ω'/U' must vary near r0 for k to be adjustable
    const double drho = (rho(r0 + 1e-5) - rho(r0 - 1e-5)) / 2e-5;

    const double k0 = kof(r0);
    if (std::abs(k0 - std::round(k0)) < 1e-9) {
        ms.k = std::lround(k0);
        ms.r0_adjusted = r0;
    } else {
        if (std::abs(drho) < 1e-10)
            throw Error(ErrorKind::Numerical, "mode selection: Omega'/U' is constant near r0");
        double best_r = std::numeric_limits<double>::quiet_NaN();
        long best_k = 0;
        for (long kc : {static_cast<long>(std::floor(k0)), static_cast<long>(std::ceil(k0))}) {
            auto g = [&](double r) { return kof(r) - static_cast<double>(kc); };
            // march outward from r0 on both sides; keep the nearest bracketed root
            const double step = 1e-3 * (hi - lo);
            for (int side : {-1, 1}) {
                double a = r0, ga = g(a);
                for (double t = step; ; t += step) {
                    double b = r0 + side * t;
                    if (b <= lo || b >= hi) break;
                    double gb = g(b);
                    if (!std::isfinite(gb)) break;
                    if ((ga < 0.0) != (gb < 0.0)) {
                        double x0 = std::min(a, b), x1 = std::max(a, b);
                        double g0 = g(x0);
                        for (int it = 0; it < 200 && x1 - x0 > 1e-15 * std::max(1.0, x1); ++it) {
                            const double xm = 0.5 * (x0 + x1);
                            const double gm = g(xm);
                            if ((gm < 0.0) == (g0 < 0.0)) {
                                x0 = xm;
                                g0 = gm;
                            } else {
                                x1 = xm;
                            }
                        }
                        const double root = 0.5 * (x0 + x1);
                        if (std::isnan(best_r) || std::abs(root - r0) < std::abs(best_r - r0)) {
                            best_r = root;
                            best_k = kc;
                        }
                        break;
                    }
                    a = b;
                    ga = gb;
                }
            }
        }
        if (std::isnan(best_r))
            throw Error(ErrorKind::Numerical, "mode selection failure: no r0 in [" + std::to_string(lo) + "," +
                                                  std::to_string(hi) + "] makes k integer; widen the window");
        ms.k = best_k;
        ms.r0_adjusted = best_r;
    }
    ms.K = static_cast<double>(ms.k) * e3;
    return ms;
}

}  // namespace dynamo
