#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynamo/discrete.hpp"
#include "dynamo/gilbert.hpp"
#include "dynamo/grid.hpp"
#include "dynamo/profiles.hpp"

namespace dynamo {

struct Exponents {
    double gamma = 0.25;
    double delta = 0.30;
    double omega = 0.24;
};

// Throws Error(Config) naming the first violated inequality.
void validate_exponents(const Exponents& e);

enum class RegionKind { NearZero, TowardsZero, Critical, LinearVanish, TowardsInfinity };
std::string to_string(RegionKind k);

struct Region {
    RegionKind kind;
    double a, b;          // [a, b)
    int zero_index = -1;  // for LinearVanish
};

// Frozen-coefficient cell of the towards-zero / towards-infinity partitions; T is frozen at the knot a.
struct Cell {
    double a, b;
    RegionKind kind;
};

struct RegionDecomposition {
    double eps = 0.0;
    Exponents exps;
    double r0 = 1.0;
    double lo = 0.0, hi = 0.0;
    std::vector<Region> regions;  // ordered, tiling [lo, hi]
    std::vector<Cell> cells;      // 𝒫₁ ∪ 𝒫₃, ordered
    std::vector<LinearZero> zeros;

    std::vector<double> knots(RegionKind k) const;
    int region_of(double r) const;
};

// lo/hi: computational interval; near_zero: the domain contains r = 0.
RegionDecomposition decompose(const VelocityProfile& profile, double r0, double eps, double lo, double hi,
                              bool near_zero, const std::optional<Exponents>& exps = std::nullopt);

struct KernelCache;

// Everything the kernels need for one (profile, ε, grid).
struct GreensSetup {
    VelocityProfile profile;
    GilbertData gd;
    double eps = 0.0;
    RadialGrid grid;
    RegionDecomposition dec;
    DiscreteOperator L;  // r/θ system in the b-basis on the same grid
    WeightedNorms norms;
    cplx beta;           // αε^{1/3}
    // hat-function weights ∫_{region} φ_i, one dense vector per region of dec.regions
    std::vector<std::vector<double>> region_weights;
    std::vector<double> full_weights;  // ∫ φ_i over the whole interval
    std::shared_ptr<const KernelCache> cache;  // λ-independent kernel data
};

GreensSetup make_greens_setup(const VelocityProfile& profile, const GilbertData& gd, double eps,
                              const RadialGrid& grid, const Exponents& exps = {}, int weight_N = 4);

// inside = true keeps the nodes whose hat function overlaps a region of the given kind, false keeps the others.
GridFunction restrict_to(const GreensSetup& s, const GridFunction& f, RegionKind kind, bool inside);

// Kernel applications; inputs and outputs are in the V-basis on s.grid.
GridFunction g2_apply(const GreensSetup& s, const GridFunction& f, cplx lambda);
GridFunction g13_apply(const GreensSetup& s, const GridFunction& f, RegionKind direction);
GridFunction g0_apply(const GreensSetup& s, const GridFunction& f);
GridFunction glv_apply(const GreensSetup& s, const GridFunction& f, int zero_index);

// λ-dependent kernel data cached once per spectral parameter.
class GluedGreens {
public:
    GluedGreens(const GreensSetup& s, cplx lambda);
    GridFunction apply(const GridFunction& f) const;
    GridFunction apply_critical(const GridFunction& f) const;
    GridFunction apply_extra(const GridFunction& f) const;  // λ-independent blocks
    cplx lambda() const { return lambda_; }
    cplx nu(int comp) const { return nu_[comp]; }

private:
    const GreensSetup* s_;
    cplx lambda_;
    std::array<cplx, 2> nu_;
    std::array<cplx, 2> wr_;  // ε W per component
    std::array<std::vector<cplx>, 2> yp_, ym_;  // D_ν(±κ(r − r₀)) = m e^{L}
    std::array<std::vector<double>, 2> ypL_, ymL_;
    int crit_ = -1;
    size_t k0_ = 0, k1_ = 0;  // nodes with nonzero critical weight
};

GridFunction glued_apply(const GreensSetup& s, const GridFunction& f, cplx lambda);

struct ErrorApplyResult {
    GridFunction e;
    double rho = 0.0;  // ‖e‖_Y / ‖f‖_Y
};

// ((L − λ)G^λ − Id) f on interior nodes (boundary nodes set to zero).
ErrorApplyResult error_apply(const GreensSetup& s, const GridFunction& f, cplx lambda);
GridFunction error_apply(const GreensSetup& s, const GluedGreens& g, const GridFunction& f);

struct NeumannOptions {
    int n_max = 200;
    double tol = 1e-8;
};

struct NeumannResult {
    GridFunction u;               // V-basis approximation of (L − λ)^{-1} f
    int terms = 0;                // number of series terms summed
    double residual_ratio = 0.0;  // ‖(L − λ)u − f‖_Y / ‖f‖_Y (exact, telescoped)
    double first_ratio = 0.0;     // ρ of the first error application
    double geometric_rate = 0.0;  // (‖e_n‖/‖e_0‖)^{1/n}
    std::vector<double> history;  // ‖e_k‖_Y / ‖f‖_Y
};

// Throws Error(Numerical) reporting ρ when the series does not reach tol within n_max terms.
NeumannResult neumann_resolvent(const GreensSetup& s, const GridFunction& f, cplx lambda,
                                const NeumannOptions& opts = {});
NeumannResult neumann_resolvent(const GreensSetup& s, const GluedGreens& g, const GridFunction& f,
                                const NeumannOptions& opts = {});

// −(1/N) Σ R e^{iθ_k} neumann_resolvent(f, λ_k)
GridFunction riesz_project_greens(const GreensSetup& s, const GridFunction& f, const Contour& c,
                                  const NeumannOptions& opts = {}, unsigned workers = 0);

// Gilbert ansatz f⋆ in the V-basis on s.grid.
GridFunction sample_fstar(const GreensSetup& s);

// Homogeneous solutions for the perfectly conducting conditions at p and q.
struct BoundarySystem {
    size_t ip = 0, iq = 0;       // grid indices of p and q
    std::array<GridFunction, 4> v;  // b-basis, on s.grid
    Eigen::Matrix4cd J;          // rows: b_r(p), (rb_θ)'(p), b_r(q), (rb_θ)'(q); columns v₁..v₄
    double cond = 0.0;
    double jinv_norm = 0.0;      // ‖J⁻¹‖₂
    std::array<int, 4> neumann_terms{};
};

// v₁, v₃: data 1_{[p−ε^δ, p]} in b_r resp. b_θ; v₂, v₄: data 1_{[q, q+ε^δ]} in b_r resp. b_θ.
// s must be set up on an interval strictly containing [p, q].
BoundarySystem build_boundary_system(const GreensSetup& s, double p, double q, cplx lambda,
                                     const NeumannOptions& opts = {});

// The four boundary functionals of a b-basis grid function.
Eigen::Vector4cd boundary_residues(const GreensSetup& s, const BoundarySystem& bs, const GridFunction& b);

// particular − Σ c_k v_k with J c = residues(particular); particular is in the b-basis.
GridFunction boundary_correct(const GreensSetup& s, const BoundarySystem& bs, const GridFunction& particular,
                              Eigen::Vector4cd* coefficients = nullptr);

// Uniform grid on [p − k₀h, q + k₁h] whose nodes contain those of RadialGrid::with_spacing({annulus p, q}, h).
RadialGrid extended_grid(const RadialGrid& inner, double lo, double hi);

// Fixed-seed test family Σ_{k=1..8} (N + iN) sin(kπ(r − a)/(b − a)) per component on [a, b], zero outside.
GridFunction random_test_function(const RadialGrid& g, double a, double b, unsigned seed);

}  // namespace dynamo
