#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynamo/common.hpp"

namespace dynamo {

enum class DomainKind { FullLine, Disk, Annulus, Exterior };

struct Domain {
    DomainKind kind = DomainKind::Annulus;
    double p = 0.25;  // inner radius (0 for disk / full line)
    double q = 2.5;   // outer radius; truncation radius for exterior / full line

    bool contains_origin() const { return kind == DomainKind::Disk || kind == DomainKind::FullLine; }
    bool outer_is_physical() const { return kind == DomainKind::Disk || kind == DomainKind::Annulus; }
};

std::string to_string(DomainKind k);
DomainKind domain_kind_from_string(const std::string& s);

enum class Preset { Simplified, Gaussian, Compact, TaylorCouette, Custom };

// Natural cubic spline through tabulated data; derivatives up to third order.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    Jet eval(double x) const;
    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }

private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

// Helical flow u = rΩ(r) θ + U(r) z.
class VelocityProfile {
public:
    using JetFn = std::function<Jet(double)>;
    using ScalarFn = std::function<double(double)>;

    static VelocityProfile simplified();
    static VelocityProfile gaussian(double a, double b);
    static VelocityProfile compact(double R0 = 2.0, double R1 = 3.0);
    static VelocityProfile taylor_couette(double a1, double a2, double a3, double a4);
    // Callables with closed-form derivatives (as jets).
    static VelocityProfile custom(JetFn omega, JetFn uz, std::string name = "custom");
    // Callables without derivatives: 4th-order central differences are used.
    static VelocityProfile custom_fd(ScalarFn omega, ScalarFn uz, std::string name = "custom");
    // CSV with header "r,omega,uz", interpolated by natural cubic splines.
    static VelocityProfile from_csv(const std::string& path);

    // k-th derivative, k in 0..3
    double omega(double r, int k = 0) const { return om_(r)[k]; }
    double uz(double r, int k = 0) const { return uz_(r)[k]; }
    Jet omega_jet(double r) const { return om_(r); }
    Jet uz_jet(double r) const { return uz_(r); }

    Preset preset() const { return preset_; }
    const std::string& name() const { return name_; }
    std::vector<double> params() const { return params_; }
    // Velocity with the stretching coupling rΩ' suppressed (control experiments)
    bool stretching_enabled() const { return stretching_; }
    VelocityProfile without_stretching() const;

private:
    JetFn om_, uz_;
    Preset preset_ = Preset::Custom;
    std::string name_;
    std::vector<double> params_;
    bool stretching_ = true;
};

// T(r) = Ω(r) − Ω(r₀) − ρ(U(r) − U(r₀)),  ρ = Ω'(r₀)/U'(r₀)
class TransportFunction {
public:
    TransportFunction(const VelocityProfile& profile, double r0);
    double r0() const { return r0_; }
    double rho() const { return rho_; }
    double value(double r) const;
    double deriv(double r, int k) const;  // k in 1..3
    Jet jet(double r) const;
    // lim_{r→0} T(r)
    double tau() const;

private:
    VelocityProfile profile_;
    double r0_, rho_, om0_, u0_;
};

double evaluate_transport(const VelocityProfile& profile, double r0, double r);

struct LinearZero {
    double s;      // location
    double slope;  // T'(s)
};

std::vector<LinearZero> find_zero_set(const VelocityProfile& profile, double r0, double lo, double hi,
                                      double tol = -1.0);

struct AuditReport {
    bool h0_ok = false, h1_ok = false, h2_ok = false, h3_ok = false, gilbert_ok = false;
    std::vector<std::string> diagnostics;
    std::vector<LinearZero> zero_set;
    double log_deriv_value = 0.0;
    double t2_at_r0 = 0.0;
    // Re(μ⋆) > 0 exactly for 0 < |M| < m_window_hi (empty when m_window_hi == 0)
    double m_window_lo = 0.0, m_window_hi = 0.0;
    bool M_in_window = false;
};

AuditReport audit(const VelocityProfile& profile, double r0, double M, double lo, double hi);

struct ModeSelection {
    double eps = 0.0;
    double M = 0.0, K = 0.0;
    long m = 0, k = 0;
    double r0_adjusted = 0.0;
};

ModeSelection select_integer_modes(const VelocityProfile& profile, double r0, double M, double eps,
                                   double lo, double hi);

}  // namespace dynamo
