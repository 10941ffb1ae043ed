#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dynamo/profiles.hpp"

using namespace dynamo;

namespace {

// dense sign scan of T away from r0; returns bracket midpoints
std::vector<double> scan_zeros(const VelocityProfile& p, double r0, double lo, double hi, int n = 100000)
{
    std::vector<double> out;
    double prev = evaluate_transport(p, r0, lo), x_prev = lo;
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double t = evaluate_transport(p, r0, x);
        if (std::abs(x - r0) > 1e-3 && std::abs(x_prev - r0) > 1e-3 && (prev < 0) != (t < 0)) out.push_back(0.5 * (x + x_prev));
        prev = t;
        x_prev = x;
    }
    return out;
}

}  // namespace

TEST(Transport, SimplifiedValues)
{
    const auto p = VelocityProfile::simplified();
    EXPECT_EQ(evaluate_transport(p, 1.0, 1.0), 0.0);
    EXPECT_NEAR(evaluate_transport(p, 1.0, 2.0), 0.5, 1e-14);
    EXPECT_NEAR(evaluate_transport(VelocityProfile::gaussian(1.0, 2.0), 1.0, 1.0), 0.0, 1e-15);
}

TEST(Transport, SimplifiedClosedFormOnGrid)
{
    const auto p = VelocityProfile::simplified();
    for (double r0 : {0.5, 1.0, 1.7}) {
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double r = 0.1 + 2.9 * i / 999.0;
            worst = std::max(worst, std::abs(evaluate_transport(p, r0, r) - (r - r0) * (r - r0) / (2.0 * r0)));
        }
        EXPECT_LT(worst, 1e-14) << "r0 = " << r0;
    }
}

TEST(Transport, QuadraticTangency)
{
    for (const auto& p : {VelocityProfile::simplified(), VelocityProfile::gaussian(1.0, 2.0),
                          VelocityProfile::taylor_couette(1.0, 1.0, 0.0, 0.0)}) {
        const TransportFunction T(p, 1.0);
        EXPECT_NEAR(T.value(1.0), 0.0, 1e-14);
        EXPECT_LE(std::abs(T.deriv(1.0, 1)), 1e-12 * std::abs(T.deriv(1.0, 2)));
        EXPECT_GT(std::abs(T.deriv(1.0, 2)), 1e-8);
    }
}

TEST(Transport, DegeneratePitch)
{
    const auto flat = VelocityProfile::custom([](double r) { return Jet(1.0) - Jet::variable(r); },
                                              [](double) { return Jet(2.0); });
    EXPECT_THROW(evaluate_transport(flat, 1.0, 1.5), Error);
}

TEST(ZeroSet, SimplifiedIsEmpty)
{
    EXPECT_TRUE(find_zero_set(VelocityProfile::simplified(), 1.0, 0.1, 3.0).empty());
    EXPECT_TRUE(scan_zeros(VelocityProfile::simplified(), 1.0, 0.1, 3.0).empty());
}

TEST(ZeroSet, TaylorCouetteIsEmpty)
{
    const auto p = VelocityProfile::taylor_couette(1.0, 1.0, 0.0, 0.0);
    EXPECT_TRUE(find_zero_set(p, 1.0, 0.2, 3.0).empty());
    EXPECT_TRUE(scan_zeros(p, 1.0, 0.2, 3.0).empty());
}

TEST(ZeroSet, CustomMatchesSignScan)
{
    // Ω = cos r, U = r: T' = −sin r + sin r0, so any r0 works; T has further simple zeros
    auto cos_jet = [](double r) {
        Jet c;
        c.d = {std::cos(r), -std::sin(r), -std::cos(r), std::sin(r)};
        return c;
    };
    const auto p = VelocityProfile::custom(cos_jet, [](double r) { return Jet::variable(r); });
    const double r0 = 1.0, lo = 0.05, hi = 6.0;
    const auto zs = find_zero_set(p, r0, lo, hi);
    const auto oracle = scan_zeros(p, r0, lo, hi);
    ASSERT_EQ(zs.size(), oracle.size());
    ASSERT_FALSE(zs.empty());
    for (size_t i = 0; i < zs.size(); ++i) {
        EXPECT_NEAR(zs[i].s, oracle[i], 1e-4);
        EXPECT_NEAR(evaluate_transport(p, r0, zs[i].s), 0.0, 1e-10);
        EXPECT_NEAR(zs[i].slope, -std::sin(zs[i].s) + std::sin(r0), 1e-8);
    }
}

TEST(ZeroSet, GaussianMatchesSignScan)
{
    const auto p = VelocityProfile::gaussian(1.0, 2.0);
    const auto zs = find_zero_set(p, 1.0, 0.1, 3.0);
    EXPECT_EQ(zs.size(), scan_zeros(p, 1.0, 0.1, 3.0).size());
}

TEST(Audit, Simplified)
{
    const AuditReport a = audit(VelocityProfile::simplified(), 1.0, 0.1, 0.25, 2.5);
    EXPECT_TRUE(a.gilbert_ok);
    EXPECT_NEAR(a.log_deriv_value, 1.0, 1e-10);
    EXPECT_TRUE(a.h0_ok && a.h1_ok);
    EXPECT_TRUE(a.M_in_window);
}

TEST(Audit, GaussianLogDerivative)
{
    for (double r0 : {0.7, 1.0}) {
        const AuditReport a = audit(VelocityProfile::gaussian(1.0, 1.5), r0, 0.1, 0.2, 3.0);
        EXPECT_NEAR(a.log_deriv_value, 2.0 * r0 * r0 * 0.5, 1e-8);
        EXPECT_EQ(a.gilbert_ok, a.log_deriv_value < 4.0);
    }
}

TEST(Audit, LargeMOutsideWindow)
{
    const AuditReport a = audit(VelocityProfile::simplified(), 1.0, 1.0, 0.25, 2.5);
    EXPECT_FALSE(a.M_in_window);
    EXPECT_LT(a.m_window_hi, 1.0);
    // simplified, r0 = 1: Re √(2iM) = √M, Re √(iM/2) = √M/2, M²(1 + ρ²) = 1.25M²
    auto re_mu = [](double M) { return std::sqrt(M) * (1.0 - 0.5) - 1.25 * M * M; };
    EXPECT_NEAR(re_mu(a.m_window_hi), 0.0, 1e-8);
    EXPECT_NEAR(re_mu(1.0), -0.75, 1e-15);
}

TEST(Audit, MWindowSymmetric)
{
    const auto p = VelocityProfile::simplified();
    const AuditReport a = audit(p, 1.0, 0.1, 0.25, 2.5), b = audit(p, 1.0, -0.1, 0.25, 2.5);
    EXPECT_EQ(a.m_window_hi, b.m_window_hi);
    EXPECT_EQ(a.M_in_window, b.M_in_window);
}

TEST(ModeSelection, CoarseEpsForcesHalfRadius)
{
    const ModeSelection s = select_integer_modes(VelocityProfile::simplified(), 1.0, 0.1, 1e-3, 0.25, 2.5);
    EXPECT_EQ(s.m, 1);
    EXPECT_NEAR(s.M, 0.1, 1e-14);
    EXPECT_EQ(s.k, -1);
    EXPECT_NEAR(s.r0_adjusted, 0.5, 1e-10);
}

TEST(ModeSelection, FineEps)
{
    const ModeSelection s = select_integer_modes(VelocityProfile::simplified(), 1.0, 0.1, 1e-6, 0.25, 2.5);
    EXPECT_EQ(s.m, 10);
    EXPECT_LE(std::abs(s.r0_adjusted - 1.0), 0.05);
    const double e3 = std::cbrt(1e-6);
    EXPECT_NEAR(s.M / e3, static_cast<double>(s.m), 1e-9);
    EXPECT_NEAR(s.K / e3, static_cast<double>(s.k), 1e-9);
    // Gilbert relation K = −MΩ'/U' with Ω' = −1, U' = −2r
    EXPECT_NEAR(s.K, -s.M * (-1.0) / (-2.0 * s.r0_adjusted), 1e-10);
}

TEST(ModeSelection, AlreadyInteger)
{
    const double eps = 1e-3;  // 0.2·10 = 2
    const ModeSelection s = select_integer_modes(VelocityProfile::simplified(), 1.0, 0.2, eps, 0.25, 2.5);
    EXPECT_EQ(s.M, 0.2);
    EXPECT_EQ(s.m, 2);
}

TEST(Profiles, PresetDerivatives)
{
    const auto tc = VelocityProfile::taylor_couette(1.5, 0.7, 0.2, 0.1);
    const double r = 1.3;
    EXPECT_NEAR(tc.omega(r), 1.5 / (r * r) + 0.2, 1e-14);
    EXPECT_NEAR(tc.omega(r, 1), -3.0 / (r * r * r), 1e-13);
    EXPECT_NEAR(tc.omega(r, 3), -36.0 / std::pow(r, 5), 1e-12);
    EXPECT_NEAR(tc.uz(r, 2), -0.7 / (r * r), 1e-13);
    const auto g = VelocityProfile::gaussian(1.0, 2.0);
    // third derivative of exp(−r²): (−8r³ + 12r) e^{−r²}
    EXPECT_NEAR(g.omega(r, 3), (-8 * r * r * r + 12 * r) * std::exp(-r * r), 1e-12);
}

TEST(Profiles, FiniteDifferenceCustom)
{
    const auto fd = VelocityProfile::custom_fd([](double r) { return std::sin(r); }, [](double r) { return r * r * r; });
    EXPECT_NEAR(fd.omega(0.8, 1), std::cos(0.8), 1e-8);
    EXPECT_NEAR(fd.omega(0.8, 2), -std::sin(0.8), 1e-6);
    EXPECT_NEAR(fd.uz(0.8, 3), 6.0, 1e-3);
}

TEST(Profiles, CsvSplineReproducesSimplified)
{
    const std::string path = ::testing::TempDir() + "profile_simplified.csv";
    {
        std::ofstream out(path);
        out << "r,omega,uz\n";
        for (int i = 0; i <= 400; ++i) {
            const double r = 0.1 + 2.9 * i / 400.0;
            out << r << "," << 1.0 - r << "," << 1.0 - r * r << "\n";
        }
    }
    const auto p = VelocityProfile::from_csv(path);
    EXPECT_NEAR(p.omega(1.0), 0.0, 1e-8);
    EXPECT_NEAR(p.uz(1.0, 1), -2.0, 1e-4);
    EXPECT_NEAR(evaluate_transport(p, 1.0, 2.0), 0.5, 1e-4);
    std::remove(path.c_str());
}

TEST(Profiles, CsvBadHeader)
{
    const std::string path = ::testing::TempDir() + "profile_bad.csv";
    {
        std::ofstream out(path);
        out << "x,y\n1,2\n";
    }
    EXPECT_THROW(VelocityProfile::from_csv(path), Error);
    std::remove(path.c_str());
}

TEST(Profiles, DomainKinds)
{
    for (DomainKind k : {DomainKind::FullLine, DomainKind::Disk, DomainKind::Annulus, DomainKind::Exterior})
        EXPECT_EQ(domain_kind_from_string(to_string(k)), k);
    EXPECT_THROW(domain_kind_from_string("torus"), Error);
}
