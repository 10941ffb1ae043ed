#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynamo/discrete.hpp"
#include "dynamo/greens.hpp"
#include "dynamo/profiles.hpp"

namespace dynamo {

struct ProfileSpec {
    std::string name = "simplified";
    std::vector<double> params;
    std::string csv;  // for name == "csv"
};

struct GreensConfig {
    std::optional<Exponents> exponents;
    double eta = 0.05;             // λ = ε^{1/3}(μ⋆ + η) for the contraction suite
    int n_random = 10;
    double contour_radius = 0.05;  // in units of ε^{1/3}
    int contour_points = 16;
    bool riesz = true;
    int n_max = 200;
    double tol = 1e-8;
};

struct RunConfig {
    std::string experiment;
    ProfileSpec profile;
    Domain domain;
    double r0 = 1.0;
    std::optional<double> M;  // nullopt = "auto"
    std::vector<double> eps_list;
    double grid_factor = 40.0;
    double tol = 1e-8;
    int max_iter = 60;
    int weight_N = 4;
    bool stretching = true;
    bool integer_modes = false;
    bool richardson = false;
    bool contraction_in_sweep = false;
    GreensConfig greens;
    std::optional<std::pair<double, double>> exponent_range;  // acceptance window for sweep fits
    unsigned workers = 0;
    std::string out_dir = "out";
    bool plots = true;
};

// Throws Error(Config) naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
// Parse errors carry the line number.
RunConfig load_config(const std::string& path);

VelocityProfile make_profile(const ProfileSpec& spec);
// Audit window used for a domain (the disk starts slightly off the axis).
std::pair<double, double> audit_window(const Domain& d);
// Configured M, or the midpoint of the audit's M window for "auto".
double resolve_M(const RunConfig& cfg, const VelocityProfile& profile);

struct SweepRow {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    cplx lambda;
    double re_scaled = 0.0;  // Re λ / ε^{1/3}
    double im_scaled = 0.0;
    double residual = 0.0;
    double curvature = 0.0;
    double center = 0.0;
    double amplitude_ratio = 0.0;
    double gap = 0.0;  // |Re λ/ε^{1/3} − Re μ⋆|
    int iterations = 0;
    std::optional<cplx> lambda_refined;  // grid factor doubled
    std::optional<double> rho;           // Green's contraction ratio
    std::vector<std::string> warnings;
};

struct ScalingFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    int used = 0;
    std::vector<std::string> warnings;
};

// OLS on (log ε, log Re λ). Rows with Re λ ≤ 0 are skipped with a warning; fewer than 3 usable rows throw.
ScalingFit fit_scaling(const std::vector<SweepRow>& rows);

struct ModeProfile {
    std::vector<double> r;
    std::vector<double> abs_btheta;
    std::vector<double> abs_ansatz;
};

struct SweepReport {
    std::vector<SweepRow> rows;  // ε descending
    double mu_star_re = 0.0;
    std::optional<ScalingFit> fit;
    std::optional<ModeProfile> mode;
    std::vector<std::string> warnings;
};

SweepReport run_sweep(const RunConfig& cfg, const VelocityProfile& profile, double M);

nlohmann::json to_json(const SweepReport& rep);

// Writes gnuplot scripts with their data files; panels without data are omitted. Returns the script paths.
std::vector<std::string> emit_plots(const SweepReport& rep, const std::string& dir);

// Eigenmode export: CSV (r, Re/Im of b_r, b_θ, b_z) plus JSON metadata.
void write_eigenmode(const std::string& csv_path, const std::string& json_path, const RadialGrid& grid,
                     const EigenResult& res, const nlohmann::json& meta);

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 1 config, 2 numerical, 3 acceptance threshold
    nlohmann::json report;
    std::vector<std::string> files;
};

RunOutcome run(const RunConfig& cfg);

// Atomic text write (temporary file + rename).
void write_file(const std::string& path, const std::string& text);

}  // namespace dynamo
