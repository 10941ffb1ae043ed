#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dynamo/common.hpp"
#include "dynamo/profiles.hpp"

namespace dynamo {

using VecC = Eigen::VectorXcd;

// Uniform radial grid. Disk / full-line domains are staggered: r_i = (i − ½)h, so r = 0 is a ghost node.
struct RadialGrid {
    std::vector<double> r;
    double h = 0.0;
    Domain domain;
    bool staggered = false;

    size_t size() const { return r.size(); }
    double lo() const { return r.front(); }
    double hi() const { return r.back(); }
    // index of the node nearest to x
    size_t nearest(double x) const;

    // h = ε^{1/3}/grid_factor (rounded so that the endpoints are nodes)
    static RadialGrid uniform(const Domain& d, double eps, double grid_factor = 40.0);
    static RadialGrid with_spacing(const Domain& d, double h);
};

enum class Basis { B, V };

// Two radial components per node: (b_r, b_θ) in the b-basis or (V₁, V₂) in the V-basis.
struct GridFunction {
    Basis basis = Basis::B;
    VecC c0, c1;

    GridFunction() = default;
    GridFunction(Basis b, size_t n) : basis(b), c0(VecC::Zero(n)), c1(VecC::Zero(n)) {}
    GridFunction(Basis b, VecC a, VecC c) : basis(b), c0(std::move(a)), c1(std::move(c)) {}

    size_t size() const { return static_cast<size_t>(c0.size()); }
    VecC& comp(int k) { return k == 0 ? c0 : c1; }
    const VecC& comp(int k) const { return k == 0 ? c0 : c1; }

    // b_r = β(V₂ − V₁), b_θ = V₁ + V₂ with β = αε^{1/3}
    GridFunction to_b(cplx beta) const;
    GridFunction to_v(cplx beta) const;

    // interleaved (c0₀, c1₀, c0₁, c1₁, …)
    VecC interleaved() const;
    static GridFunction from_interleaved(Basis b, const VecC& x);

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(cplx a);
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx a, GridFunction b);

// Weighted sup norms: w_ε(s) = 1 + (ε^{-1/3}|s|)^N, X weight max{1,r²}w_ε(r−r₀), Y weight r²w_ε(r−r₀).
struct WeightedNorms {
    int N = 4;
    double eps = 1e-3;
    double r0 = 1.0;

    double w(double s) const { return 1.0 + std::pow(std::abs(s) / std::cbrt(eps), N); }
    double x_weight(double r) const { return std::max(1.0, r * r) * w(r - r0); }
    double y_weight(double r) const { return r * r * w(r - r0); }
    // sup over nodes of weight × max over components
    double x_norm(const RadialGrid& g, const GridFunction& f) const;
    double y_norm(const RadialGrid& g, const GridFunction& f) const;
    double x_norm(const RadialGrid& g, const VecC& f) const;
    double y_norm(const RadialGrid& g, const VecC& f) const;
};

// Cosine similarity |<a,b>|/(‖a‖‖b‖) over both components.
double cosine_similarity(const GridFunction& a, const GridFunction& b);

}  // namespace dynamo
