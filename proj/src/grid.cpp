#include "dynamo/grid.hpp"

#include <algorithm>

namespace dynamo {

size_t RadialGrid::nearest(double x) const
{
    if (x <= r.front()) return 0;
    if (x >= r.back()) return r.size() - 1;
    const double t = staggered ? x / h + 0.5 : (x - r.front()) / h;
    const long i = std::lround(t) - (staggered ? 1 : 0);
    return static_cast<size_t>(std::clamp<long>(i, 0, static_cast<long>(r.size()) - 1));
}

RadialGrid RadialGrid::uniform(const Domain& d, double eps, double grid_factor)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::Config, "grid: eps must be positive");
    if (grid_factor < 20.0) throw Error(ErrorKind::Config, "grid factor must be >= 20");
    return with_spacing(d, std::cbrt(eps) / grid_factor);
}

RadialGrid RadialGrid::with_spacing(const Domain& d, double h_target)
{
    RadialGrid g;
    g.domain = d;
    if (d.contains_origin()) {
        if (!(d.q > 0.0)) throw Error(ErrorKind::Config, "grid: outer radius must be positive");
        const long n = std::max<long>(64, static_cast<long>(std::ceil(d.q / h_target + 0.5)));
        g.h = d.q / (static_cast<double>(n) - 0.5);
        g.staggered = true;
        g.r.resize(n);
        for (long i = 0; i < n; ++i) g.r[i] = (static_cast<double>(i) + 0.5) * g.h;
        g.r.back() = d.q;
    } else {
        if (!(d.q > d.p) || !(d.p > 0.0)) throw Error(ErrorKind::Config, "grid: need 0 < p < q");
        const long n = std::max<long>(64, static_cast<long>(std::ceil((d.q - d.p) / h_target)) + 1);
        g.h = (d.q - d.p) / static_cast<double>(n - 1);
        g.r.resize(n);
        for (long i = 0; i < n; ++i) g.r[i] = d.p + static_cast<double>(i) * g.h;
        g.r.back() = d.q;
    }
    return g;
}

GridFunction GridFunction::to_b(cplx beta) const
{
    if (basis == Basis::B) return *this;
    GridFunction out(Basis::B, size());
    out.c0 = beta * (c1 - c0);
    out.c1 = c0 + c1;
    return out;
}

GridFunction GridFunction::to_v(cplx beta) const
{
    if (basis == Basis::V) return *this;
    GridFunction out(Basis::V, size());
    const VecC s = c0 / beta;
    out.c0 = 0.5 * (c1 - s);
    out.c1 = 0.5 * (c1 + s);
    return out;
}

VecC GridFunction::interleaved() const
{
    const Eigen::Index n = c0.size();
    VecC x(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[2 * i] = c0[i];
        x[2 * i + 1] = c1[i];
    }
    return x;
}

GridFunction GridFunction::from_interleaved(Basis b, const VecC& x)
{
    const Eigen::Index n = x.size() / 2;
    GridFunction g(b, static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        g.c0[i] = x[2 * i];
        g.c1[i] = x[2 * i + 1];
    }
    return g;
}

GridFunction& GridFunction::operator+=(const GridFunction& o)
{
    if (o.basis != basis) throw Error(ErrorKind::Numerical, "grid function basis mismatch");
    c0 += o.c0;
    c1 += o.c1;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o)
{
    if (o.basis != basis) throw Error(ErrorKind::Numerical, "grid function basis mismatch");
    c0 -= o.c0;
    c1 -= o.c1;
    return *this;
}

GridFunction& GridFunction::operator*=(cplx a)
{
    c0 *= a;
    c1 *= a;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx a, GridFunction b) { return b *= a; }

double WeightedNorms::x_norm(const RadialGrid& g, const GridFunction& f) const
{
    double m = 0.0;
    for (size_t i = 0; i < g.size(); ++i)
        m = std::max(m, x_weight(g.r[i]) * std::max(std::abs(f.c0[i]), std::abs(f.c1[i])));
    return m;
}

double WeightedNorms::y_norm(const RadialGrid& g, const GridFunction& f) const
{
    double m = 0.0;
    for (size_t i = 0; i < g.size(); ++i)
        m = std::max(m, y_weight(g.r[i]) * std::max(std::abs(f.c0[i]), std::abs(f.c1[i])));
    return m;
}

double WeightedNorms::x_norm(const RadialGrid& g, const VecC& f) const
{
    double m = 0.0;
    for (size_t i = 0; i < g.size(); ++i) m = std::max(m, x_weight(g.r[i]) * std::abs(f[i]));
    return m;
}

double WeightedNorms::y_norm(const RadialGrid& g, const VecC& f) const
{
    double m = 0.0;
    for (size_t i = 0; i < g.size(); ++i) m = std::max(m, y_weight(g.r[i]) * std::abs(f[i]));
    return m;
}

double cosine_similarity(const GridFunction& a, const GridFunction& b)
{
    const cplx dot = a.c0.dot(b.c0) + a.c1.dot(b.c1);
    const double na = std::sqrt(a.c0.squaredNorm() + a.c1.squaredNorm());
    const double nb = std::sqrt(b.c0.squaredNorm() + b.c1.squaredNorm());
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(dot) / (na * nb);
}

}  // namespace dynamo
