#include "dynamo/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dynamo/gilbert.hpp"
#include "dynamo/specfun.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dynamo {

// ---------------------------------------------------------------- configuration

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what)
{
    throw Error(ErrorKind::Config, "config key '" + key + "': " + what);
}

double number(const json& j, const std::string& key)
{
    if (!j.is_number()) bad(key, "expected a number");
    return j.get<double>();
}

bool boolean(const json& j, const std::string& key)
{
    if (!j.is_boolean()) bad(key, "expected true/false");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& key)
{
    if (!j.is_string()) bad(key, "expected a string");
    return j.get<std::string>();
}

int integer(const json& j, const std::string& key)
{
    if (!j.is_number_integer()) bad(key, "expected an integer");
    return j.get<int>();
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) bad(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

}  // namespace

RunConfig parse_config(const json& j)
{
    only_keys(j, "", {"experiment", "profile", "domain", "r0", "M", "eps_list", "solver", "stretching",
                      "integer_modes", "richardson", "contraction", "greens", "thresholds", "workers", "output",
                      "plots"});
    RunConfig c;
    if (j.contains("experiment")) {
        c.experiment = text(j["experiment"], "experiment");
        static const std::set<std::string> known{"audit", "growthrate", "eigensolve", "sweep", "greens-verify",
                                                 "specfun-verify"};
        if (!known.count(c.experiment)) bad("experiment", "unknown experiment '" + c.experiment + "'");
    }
    if (j.contains("profile")) {
        const json& p = j["profile"];
        only_keys(p, "profile", {"name", "params", "csv"});
        if (p.contains("name")) c.profile.name = text(p["name"], "profile.name");
        if (p.contains("params")) {
            if (!p["params"].is_array()) bad("profile.params", "expected an array of numbers");
            for (const json& x : p["params"]) c.profile.params.push_back(number(x, "profile.params"));
        }
        if (p.contains("csv")) c.profile.csv = text(p["csv"], "profile.csv");
        make_profile(c.profile);  // validates name and parameters
    }
    if (j.contains("domain")) {
        const json& d = j["domain"];
        only_keys(d, "domain", {"kind", "p", "q"});
        if (d.contains("kind")) {
            try {
                c.domain.kind = domain_kind_from_string(text(d["kind"], "domain.kind"));
            } catch (const Error& e) {
                bad("domain.kind", e.what());
            }
        }
        if (c.domain.contains_origin()) c.domain.p = 0.0;
        if (d.contains("p")) c.domain.p = number(d["p"], "domain.p");
        if (d.contains("q")) c.domain.q = number(d["q"], "domain.q");
        if (!c.domain.contains_origin() && !(c.domain.p > 0.0)) bad("domain.p", "must be positive");
        if (!(c.domain.q > c.domain.p)) bad("domain.q", "must exceed domain.p");
    }
    if (j.contains("r0")) c.r0 = number(j["r0"], "r0");
    if (!(c.r0 > c.domain.p && c.r0 < c.domain.q)) bad("r0", "must lie inside the domain");
    if (j.contains("M")) {
        const json& m = j["M"];
        if (m.is_string()) {
            if (m.get<std::string>() != "auto") bad("M", "expected a number or \"auto\"");
        } else {
            c.M = number(m, "M");
            if (*c.M == 0.0) bad("M", "must be nonzero");
        }
    } else {
        c.M = 0.1;
    }
    if (j.contains("eps_list")) {
        if (!j["eps_list"].is_array()) bad("eps_list", "expected an array");
        for (const json& x : j["eps_list"]) c.eps_list.push_back(number(x, "eps_list"));
    }
    for (size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0 && c.eps_list[i] <= 0.1)) bad("eps_list", "every eps must lie in (0, 0.1]");
        if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) bad("eps_list", "must be strictly decreasing");
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        only_keys(s, "solver", {"grid_factor", "tol", "max_iter", "weight_N"});
        if (s.contains("grid_factor")) c.grid_factor = number(s["grid_factor"], "solver.grid_factor");
        if (s.contains("tol")) c.tol = number(s["tol"], "solver.tol");
        if (s.contains("max_iter")) c.max_iter = integer(s["max_iter"], "solver.max_iter");
        if (s.contains("weight_N")) c.weight_N = integer(s["weight_N"], "solver.weight_N");
    }
    if (c.grid_factor < 20.0) bad("solver.grid_factor", "must be >= 20");
    if (!(c.tol > 0.0)) bad("solver.tol", "must be positive");
    if (c.max_iter < 1) bad("solver.max_iter", "must be >= 1");
    if (c.weight_N < 1) bad("solver.weight_N", "must be >= 1");
    if (j.contains("stretching")) c.stretching = boolean(j["stretching"], "stretching");
    if (j.contains("integer_modes")) c.integer_modes = boolean(j["integer_modes"], "integer_modes");
    if (j.contains("richardson")) c.richardson = boolean(j["richardson"], "richardson");
    if (j.contains("contraction")) c.contraction_in_sweep = boolean(j["contraction"], "contraction");
    if (j.contains("greens")) {
        const json& g = j["greens"];
        only_keys(g, "greens", {"gamma", "delta", "omega", "eta", "n_random", "contour_radius", "contour_points",
                                "riesz", "n_max", "tol"});
        if (g.contains("gamma") || g.contains("delta") || g.contains("omega")) {
            Exponents e;
            if (g.contains("gamma")) e.gamma = number(g["gamma"], "greens.gamma");
            if (g.contains("delta")) e.delta = number(g["delta"], "greens.delta");
            if (g.contains("omega")) e.omega = number(g["omega"], "greens.omega");
            try {
                validate_exponents(e);
            } catch (const Error& err) {
                bad("greens", err.what());
            }
            c.greens.exponents = e;
        }
        if (g.contains("eta")) c.greens.eta = number(g["eta"], "greens.eta");
        if (g.contains("n_random")) c.greens.n_random = integer(g["n_random"], "greens.n_random");
        if (g.contains("contour_radius")) c.greens.contour_radius = number(g["contour_radius"], "greens.contour_radius");
        if (g.contains("contour_points")) c.greens.contour_points = integer(g["contour_points"], "greens.contour_points");
        if (g.contains("riesz")) c.greens.riesz = boolean(g["riesz"], "greens.riesz");
        if (g.contains("n_max")) c.greens.n_max = integer(g["n_max"], "greens.n_max");
        if (g.contains("tol")) c.greens.tol = number(g["tol"], "greens.tol");
        if (c.greens.n_random < 1) bad("greens.n_random", "must be >= 1");
        if (c.greens.contour_points < 8) bad("greens.contour_points", "must be >= 8");
        if (!(c.greens.contour_radius > 0.0)) bad("greens.contour_radius", "must be positive");
    }
    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        only_keys(t, "thresholds", {"exponent"});
        if (t.contains("exponent")) {
            const json& e = t["exponent"];
            if (!e.is_array() || e.size() != 2) bad("thresholds.exponent", "expected [lo, hi]");
            c.exponent_range = std::make_pair(number(e[0], "thresholds.exponent"), number(e[1], "thresholds.exponent"));
        }
    }
    if (j.contains("workers")) {
        const int w = integer(j["workers"], "workers");
        if (w < 0) bad("workers", "must be >= 0");
        c.workers = static_cast<unsigned>(w);
    }
    if (j.contains("output")) c.out_dir = text(j["output"], "output");
    if (j.contains("plots")) c.plots = boolean(j["plots"], "plots");
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string body = ss.str();
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        const size_t upto = std::min<size_t>(e.byte, body.size());
        const long line = 1 + std::count(body.begin(), body.begin() + static_cast<long>(upto), '\n');
        throw Error(ErrorKind::Config, path + ":" + std::to_string(line) + ": JSON parse error: " + e.what());
    }
    return parse_config(j);
}

VelocityProfile make_profile(const ProfileSpec& spec)
{
    auto need = [&](size_t n) {
        if (spec.params.size() != n)
            bad("profile.params", "preset '" + spec.name + "' takes " + std::to_string(n) + " parameter(s)");
    };
    if (spec.name == "simplified") {
        need(0);
        return VelocityProfile::simplified();
    }
    if (spec.name == "gaussian") {
        need(2);
        return VelocityProfile::gaussian(spec.params[0], spec.params[1]);
    }
    if (spec.name == "compact") {
        if (spec.params.empty()) return VelocityProfile::compact();
        need(2);
        return VelocityProfile::compact(spec.params[0], spec.params[1]);
    }
    if (spec.name == "taylor_couette") {
        need(4);
        return VelocityProfile::taylor_couette(spec.params[0], spec.params[1], spec.params[2], spec.params[3]);
    }
    if (spec.name == "csv") {
        if (spec.csv.empty()) bad("profile.csv", "path required for the csv profile");
        return VelocityProfile::from_csv(spec.csv);
    }
    bad("profile.name", "unknown preset '" + spec.name + "'");
}

std::pair<double, double> audit_window(const Domain& d)
{
    const double lo = d.contains_origin() ? std::min(0.05, 0.1 * d.q) : d.p;
    return {lo, d.q};
}

double resolve_M(const RunConfig& cfg, const VelocityProfile& profile)
{
    if (cfg.M) return *cfg.M;
    auto [lo, hi] = audit_window(cfg.domain);
    const AuditReport a = audit(profile, cfg.r0, 1.0, lo, hi);
    if (!(a.m_window_hi > a.m_window_lo))
        throw Error(ErrorKind::Config, "M = \"auto\": the audit found no M window with Re(mu*) > 0");
    return 0.5 * (a.m_window_lo + a.m_window_hi);
}

// ---------------------------------------------------------------- sweep

ScalingFit fit_scaling(const std::vector<SweepRow>& rows)
{
    ScalingFit f;
    std::vector<double> x, y;
    for (const SweepRow& r : rows) {
        if (!r.ok) continue;
        if (!(r.lambda.real() > 0.0)) {
            f.warnings.push_back("row eps = " + std::to_string(r.eps) + " excluded: Re(lambda) <= 0");
            continue;
        }
        x.push_back(std::log(r.eps));
        y.push_back(std::log(r.lambda.real()));
    }
    f.used = static_cast<int>(x.size());
    if (x.size() < 3)
        throw Error(ErrorKind::Numerical, "scaling fit needs at least 3 rows with Re(lambda) > 0 (have " +
                                              std::to_string(x.size()) + ")");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::Numerical, "scaling fit: all eps values coincide");
    f.exponent = sxy / sxx;
    const double b = my - f.exponent * mx;
    double sse = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (b + f.exponent * x[i]);
        sse += e * e;
    }
    f.stderr_ = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return f;
}

namespace {

struct Problem {
    VelocityProfile profile;  // possibly with stretching disabled
    GilbertData gd;
    long m = 0, k = 0;
    bool integer_modes = false;
};

Problem make_problem(const RunConfig& cfg, const VelocityProfile& base, double M, double eps)
{
    Problem p{base, {}, 0, 0, false};
    double r0 = cfg.r0, Mm = M;
    if (cfg.integer_modes) {
        auto [lo, hi] = audit_window(cfg.domain);
        const ModeSelection ms = select_integer_modes(base, cfg.r0, M, eps, lo, hi);
        r0 = ms.r0_adjusted;
        Mm = ms.M;
        p.m = ms.m;
        p.k = ms.k;
        p.integer_modes = true;
    }
    p.gd = gilbert_constants(base, r0, Mm);
    if (!cfg.stretching) p.profile = base.without_stretching();
    return p;
}

double contraction_ratio(const RunConfig& cfg, const Problem& pb, double eps, const RadialGrid& grid,
                         double* gconst = nullptr)
{
    const GreensSetup s = make_greens_setup(pb.profile, pb.gd, eps, grid, cfg.greens.exponents.value_or(Exponents{}),
                                            cfg.weight_N);
    const cplx lam = pb.gd.lambda_star(eps) + std::cbrt(eps) * cfg.greens.eta;
    const GluedGreens g(s, lam);
    double rho = 0.0, gc = 0.0;
    for (int sd = 1; sd <= cfg.greens.n_random; ++sd) {
        const GridFunction f = random_test_function(grid, grid.lo(), grid.hi(), static_cast<unsigned>(sd));
        const double fy = s.norms.y_norm(grid, f);
        rho = std::max(rho, s.norms.y_norm(grid, error_apply(s, g, f)) / fy);
        if (gconst) gc = std::max(gc, s.norms.x_norm(grid, g.apply(f)) * std::cbrt(eps) / fy);
    }
    if (gconst) *gconst = gc;
    return rho;
}

}  // namespace

SweepReport run_sweep(const RunConfig& cfg, const VelocityProfile& profile, double M)
{
    if (cfg.eps_list.empty()) throw Error(ErrorKind::Config, "config key 'eps_list': sweep needs at least one eps");
    SweepReport rep;
    rep.mu_star_re = gilbert_constants(profile, cfg.r0, M).mu_star.real();
    const size_t n = cfg.eps_list.size();
    rep.rows.resize(n);
    std::vector<std::optional<ModeProfile>> modes(n);
    parallel_for(
        n,
        [&](size_t i) {
            SweepRow& row = rep.rows[i];
            row.eps = cfg.eps_list[i];
            try {
                const Problem pb = make_problem(cfg, profile, M, row.eps);
                const RadialGrid grid = RadialGrid::uniform(cfg.domain, row.eps, cfg.grid_factor);
                const DiscreteOperator op = assemble(pb.profile, pb.gd, row.eps, grid, OperatorKind::RThetaSystem);
                const EigenResult er = eigensolve(op, pb.gd.lambda_star(row.eps), {cfg.tol, cfg.max_iter, 3});
                const double e3 = std::cbrt(row.eps);
                row.lambda = er.lambda;
                row.re_scaled = er.lambda.real() / e3;
                row.im_scaled = er.lambda.imag() / e3;
                row.residual = er.residual_2cpt;
                row.curvature = er.fit.curvature;
                row.center = er.fit.center;
                row.amplitude_ratio = er.fit.amplitude_ratio;
                row.gap = std::abs(row.re_scaled - pb.gd.mu_star.real());
                row.iterations = er.iterations;
                row.warnings = er.warnings;
                ModeProfile mp;
                for (size_t k = 0; k < grid.size(); ++k) {
                    mp.r.push_back(grid.r[k]);
                    mp.abs_btheta.push_back(std::abs(er.b.c1[k]));
                    mp.abs_ansatz.push_back(std::abs(ansatz_profile(pb.gd, row.eps, grid.r[k]).btheta));
                }
                modes[i] = std::move(mp);
                if (cfg.richardson) {
                    const RadialGrid fine = RadialGrid::uniform(cfg.domain, row.eps, 2.0 * cfg.grid_factor);
                    const DiscreteOperator opf = assemble(pb.profile, pb.gd, row.eps, fine, OperatorKind::RThetaSystem);
                    row.lambda_refined = eigensolve(opf, er.lambda, {cfg.tol, cfg.max_iter, 3}).lambda;
                }
                if (cfg.contraction_in_sweep) row.rho = contraction_ratio(cfg, pb, row.eps, grid);
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        },
        cfg.workers);
    for (size_t i = n; i-- > 0;)
        if (modes[i]) {
            rep.mode = modes[i];
            break;
        }
    try {
        rep.fit = fit_scaling(rep.rows);
    } catch (const Error& e) {
        rep.warnings.push_back(e.what());
    }
    return rep;
}

json to_json(const SweepReport& rep)
{
    json j;
    j["mu_star_re"] = rep.mu_star_re;
    json rows = json::array();
    bool monotone = true;
    double prev_gap = -1.0;
    for (const SweepRow& r : rep.rows) {
        json o;
        o["eps"] = r.eps;
        o["ok"] = r.ok;
        if (!r.ok) {
            o["error"] = r.error;
            rows.push_back(o);
            continue;
        }
        o["lambda_re"] = r.lambda.real();
        o["lambda_im"] = r.lambda.imag();
        o["re_scaled"] = r.re_scaled;
        o["im_scaled"] = r.im_scaled;
        o["residual"] = r.residual;
        o["fit_curvature"] = r.curvature;
        o["fit_center"] = r.center;
        o["amplitude_ratio"] = r.amplitude_ratio;
        o["gap"] = r.gap;
        o["iterations"] = r.iterations;
        if (r.lambda_refined) {
            o["lambda_refined_re"] = r.lambda_refined->real();
            o["lambda_refined_im"] = r.lambda_refined->imag();
            o["richardson_re_scaled"] = (4.0 * r.lambda_refined->real() - r.lambda.real()) / 3.0 / std::cbrt(r.eps);
        }
        if (r.rho) o["rho"] = *r.rho;
        if (!r.warnings.empty()) o["warnings"] = r.warnings;
        if (prev_gap >= 0.0 && !(r.gap < prev_gap)) monotone = false;
        prev_gap = r.gap;
        rows.push_back(o);
    }
    j["rows"] = rows;
    j["gap_monotone"] = monotone;
    if (rep.fit) {
        j["fit"] = {{"exponent", rep.fit->exponent}, {"stderr", rep.fit->stderr_}, {"rows_used", rep.fit->used}};
        if (!rep.fit->warnings.empty()) j["fit"]["warnings"] = rep.fit->warnings;
    }
    if (!rep.warnings.empty()) j["warnings"] = rep.warnings;
    return j;
}

void write_file(const std::string& path, const std::string& body)
{
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Config, "cannot write '" + tmp.string() + "'");
        out << body;
        if (!out) throw Error(ErrorKind::Numerical, "write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, p);
}

namespace {

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return buf;
}

}  // namespace

std::vector<std::string> emit_plots(const SweepReport& rep, const std::string& dir)
{
    std::vector<std::string> scripts;
    const fs::path d(dir);
    auto script = [&](const std::string& name, const std::string& body) {
        write_file((d / name).string(), body);
        scripts.push_back((d / name).string());
    };
    std::string growth;
    for (const SweepRow& r : rep.rows)
        if (r.ok) growth += num(r.eps) + " " + num(r.re_scaled) + "\n";
    if (!growth.empty()) {
        write_file((d / "growth.dat").string(), "# eps  Re(lambda)/eps^(1/3)\n" + growth);
        script("growth.gp", "set terminal pngcairo size 800,600\nset output 'growth.png'\nset logscale x\n"
                            "set xlabel 'eps'\nset ylabel 'Re(lambda)/eps^{1/3}'\n"
                            "plot 'growth.dat' using 1:2 with linespoints title 'computed', \\\n     " +
                                num(rep.mu_star_re) + " with lines title 'Re(mu*)'\n");
    }
    if (rep.mode) {
        std::string body = "# r  |b_theta|  |ansatz|\n";
        for (size_t i = 0; i < rep.mode->r.size(); ++i)
            body += num(rep.mode->r[i]) + " " + num(rep.mode->abs_btheta[i]) + " " + num(rep.mode->abs_ansatz[i]) + "\n";
        write_file((d / "mode.dat").string(), body);
        script("mode.gp", "set terminal pngcairo size 800,600\nset output 'mode.png'\nset xlabel 'r'\n"
                          "set ylabel '|b_theta|'\n"
                          "plot 'mode.dat' using 1:2 with lines title 'eigenmode', \\\n"
                          "     'mode.dat' using 1:3 with lines dashtype 2 title 'Gaussian ansatz'\n");
    }
    std::string contraction;
    for (const SweepRow& r : rep.rows)
        if (r.ok && r.rho) contraction += num(r.eps) + " " + num(*r.rho) + "\n";
    if (!contraction.empty()) {
        write_file((d / "contraction.dat").string(), "# eps  rho\n" + contraction);
        script("contraction.gp", "set terminal pngcairo size 800,600\nset output 'contraction.png'\n"
                                 "set logscale xy\nset xlabel 'eps'\nset ylabel 'rho'\n"
                                 "plot 'contraction.dat' using 1:2 with linespoints title 'rho(eps)'\n");
    }
    return scripts;
}

void write_eigenmode(const std::string& csv_path, const std::string& json_path, const RadialGrid& grid,
                     const EigenResult& res, const json& meta)
{
    std::string body = "r,br_re,br_im,btheta_re,btheta_im,bz_re,bz_im\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const cplx br = res.b.c0[i], bt = res.b.c1[i];
        const cplx bz = res.bz.size() == static_cast<Eigen::Index>(grid.size()) ? res.bz[i] : cplx(0.0);
        body += num(grid.r[i]) + "," + num(br.real()) + "," + num(br.imag()) + "," + num(bt.real()) + "," +
                num(bt.imag()) + "," + num(bz.real()) + "," + num(bz.imag()) + "\n";
    }
    write_file(csv_path, body);
    json m = meta;
    m["lambda_re"] = res.lambda.real();
    m["lambda_im"] = res.lambda.imag();
    m["residual_2cpt"] = res.residual_2cpt;
    if (res.residual_3cpt >= 0.0) m["residual_3cpt"] = res.residual_3cpt;
    if (res.div_norm >= 0.0) m["div_norm"] = res.div_norm;
    m["iterations"] = res.iterations;
    m["fit"] = {{"center", res.fit.center}, {"curvature", res.fit.curvature},
                {"amplitude_ratio", res.fit.amplitude_ratio}};
    if (!res.warnings.empty()) m["warnings"] = res.warnings;
    write_file(json_path, m.dump(2) + "\n");
}

// ---------------------------------------------------------------- experiments

namespace {

std::string eps_tag(double eps)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0e", eps);
    return buf;
}

RunOutcome run_audit(const RunConfig& cfg, const VelocityProfile& profile)
{
    auto [lo, hi] = audit_window(cfg.domain);
    const double M = resolve_M(cfg, profile);
    const AuditReport a = audit(profile, cfg.r0, M, lo, hi);
    RunOutcome out;
    json& j = out.report;
    j["h0_ok"] = a.h0_ok;
    j["h1_ok"] = a.h1_ok;
    j["h2_ok"] = a.h2_ok;
    j["h3_ok"] = a.h3_ok;
    j["gilbert_ok"] = a.gilbert_ok;
    j["log_deriv"] = a.log_deriv_value;
    j["t2_at_r0"] = a.t2_at_r0;
    j["M"] = M;
    j["M_window"] = {a.m_window_lo, a.m_window_hi};
    j["M_in_window"] = a.M_in_window;
    json zs = json::array();
    for (const LinearZero& z : a.zero_set) zs.push_back({{"s", z.s}, {"slope", z.slope}});
    j["zero_set"] = zs;
    j["diagnostics"] = a.diagnostics;
    out.exit_code = a.h0_ok && a.h1_ok && a.h2_ok && a.h3_ok && a.gilbert_ok ? 0 : 3;
    return out;
}

RunOutcome run_growthrate(const RunConfig& cfg, const VelocityProfile& profile)
{
    const double M = resolve_M(cfg, profile);
    const GilbertData gd = gilbert_constants(profile, cfg.r0, M);
    const GrowthRate g = growth_rate(gd);
    RunOutcome out;
    json& j = out.report;
    j["r0"] = gd.r0;
    j["M"] = gd.M;
    j["K"] = gd.K;
    j["alpha_re"] = gd.alpha.real();
    j["alpha_im"] = gd.alpha.imag();
    j["c2_re"] = gd.c2.real();
    j["c2_im"] = gd.c2.imag();
    j["mu_star_re"] = g.mu_star.real();
    j["mu_star_im"] = g.mu_star.imag();
    j["chi"] = gd.chi;
    json ls = json::array();
    for (double eps : cfg.eps_list) {
        const cplx l = gd.lambda_star(eps);
        ls.push_back({{"eps", eps}, {"lambda_star_re", l.real()}, {"lambda_star_im", l.imag()}});
    }
    // λ⋆ = ε^{1/3} μ⋆; reported for the first listed ε (or ε = 1 when none is given)
    const cplx l0 = gd.lambda_star(cfg.eps_list.empty() ? 1.0 : cfg.eps_list.front());
    j["lambda_star_re"] = l0.real();
    j["lambda_star_im"] = l0.imag();
    j["lambda_star"] = ls;
    return out;
}

RunOutcome run_eigensolve(const RunConfig& cfg, const VelocityProfile& profile)
{
    if (cfg.eps_list.empty()) throw Error(ErrorKind::Config, "config key 'eps_list': eigensolve needs at least one eps");
    const double M = resolve_M(cfg, profile);
    RunOutcome out;
    json rows = json::array();
    bool failed = false;
    for (double eps : cfg.eps_list) {
        json row{{"eps", eps}};
        try {
            const Problem pb = make_problem(cfg, profile, M, eps);
            const RadialGrid grid = RadialGrid::uniform(cfg.domain, eps, cfg.grid_factor);
            const DiscreteOperator op = assemble(pb.profile, pb.gd, eps, grid, OperatorKind::RThetaSystem);
            EigenResult er = eigensolve(op, pb.gd.lambda_star(eps), {cfg.tol, cfg.max_iter, 3});
            if (pb.integer_modes) {
                const DiscreteOperator opz = assemble(pb.profile, pb.gd, eps, grid, OperatorKind::ZEquation);
                er.bz = solve_z(opz, er.b.c0, er.lambda);
                er.residual_3cpt = modal_residual_3cpt(op, opz, er.lambda, er.x, er.bz);
                er.div_norm = divergence_norm(grid, er.b.c0, er.b.c1, er.bz, pb.m, pb.k);
                row["m"] = pb.m;
                row["k"] = pb.k;
            }
            json meta{{"eps", eps}, {"r0", pb.gd.r0}, {"M", pb.gd.M}, {"K", pb.gd.K}, {"n", grid.size()},
                      {"h", grid.h}, {"stretching", cfg.stretching}};
            const std::string base = (fs::path(cfg.out_dir) / ("mode_eps" + eps_tag(eps))).string();
            write_eigenmode(base + ".csv", base + ".json", grid, er, meta);
            out.files.push_back(base + ".csv");
            out.files.push_back(base + ".json");
            row["lambda_re"] = er.lambda.real();
            row["lambda_im"] = er.lambda.imag();
            row["re_scaled"] = er.lambda.real() / std::cbrt(eps);
            row["residual_2cpt"] = er.residual_2cpt;
            if (er.residual_3cpt >= 0) row["residual_3cpt"] = er.residual_3cpt;
            if (er.div_norm >= 0) row["div_norm"] = er.div_norm;
            row["ok"] = true;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config) throw;
            row["ok"] = false;
            row["error"] = e.what();
            failed = true;
        }
        rows.push_back(row);
    }
    out.report["rows"] = rows;
    out.exit_code = failed ? 2 : 0;
    return out;
}

RunOutcome run_sweep_experiment(const RunConfig& cfg, const VelocityProfile& profile)
{
    const double M = resolve_M(cfg, profile);
    const SweepReport rep = run_sweep(cfg, profile, M);
    RunOutcome out;
    out.report = to_json(rep);
    out.report["M"] = M;
    if (cfg.plots) out.files = emit_plots(rep, cfg.out_dir);
    bool failed = false;
    for (const SweepRow& r : rep.rows) failed = failed || !r.ok;
    bool pass = rep.fit.has_value();
    if (rep.fit && cfg.exponent_range)
        pass = rep.fit->exponent >= cfg.exponent_range->first && rep.fit->exponent <= cfg.exponent_range->second;
    out.report["pass"] = pass && !failed;
    out.exit_code = failed ? 2 : (pass ? 0 : 3);
    return out;
}

RunOutcome run_greens_verify(const RunConfig& cfg, const VelocityProfile& profile)
{
    if (cfg.eps_list.empty()) throw Error(ErrorKind::Config, "config key 'eps_list': greens-verify needs at least one eps");
    const double M = resolve_M(cfg, profile);
    RunOutcome out;
    json rho_by_eps = json::array(), consts = json::array();
    std::vector<double> rhos;
    bool ok = true;
    for (double eps : cfg.eps_list) {
        const Problem pb = make_problem(cfg, profile, M, eps);
        const RadialGrid grid = RadialGrid::uniform(cfg.domain, eps, cfg.grid_factor);
        double gc = 0.0;
        const double rho = contraction_ratio(cfg, pb, eps, grid, &gc);
        rhos.push_back(rho);
        rho_by_eps.push_back({{"eps", eps}, {"rho", rho}});
        json c{{"eps", eps}, {"G_X_over_Y_times_eps13", gc}};
        const GreensSetup s = make_greens_setup(pb.profile, pb.gd, eps, grid,
                                                cfg.greens.exponents.value_or(Exponents{}), cfg.weight_N);
        const GridFunction fs = sample_fstar(s);
        const NeumannOptions nopt{cfg.greens.n_max, cfg.greens.tol};
        try {
            const NeumannResult nr = neumann_resolvent(s, fs, pb.gd.lambda_star(eps) + std::cbrt(eps) * cfg.greens.eta, nopt);
            c["fstar_neumann_terms"] = nr.terms;
            c["fstar_neumann_rate"] = nr.geometric_rate;
            if (cfg.greens.riesz) {
                const Contour ct{pb.gd.lambda_star(eps), cfg.greens.contour_radius * std::cbrt(eps),
                                 cfg.greens.contour_points};
                const GridFunction P = riesz_project_greens(s, fs, ct, nopt, cfg.workers);
                const GridFunction PP = riesz_project_greens(s, P, ct, nopt, cfg.workers);
                const double pn = s.norms.x_norm(grid, P);
                c["riesz_norm_ratio"] = pn / s.norms.x_norm(grid, fs);
                c["riesz_idempotence"] = s.norms.x_norm(grid, PP - P) / pn;
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config) throw;
            c["fstar_error"] = e.what();
            ok = false;
        }
        consts.push_back(c);
    }
    for (size_t i = 1; i < rhos.size(); ++i) ok = ok && rhos[i] < rhos[i - 1];
    for (size_t i = 0; i < rhos.size(); ++i)
        if (cfg.eps_list[i] <= 1e-4 * (1 + 1e-9)) ok = ok && rhos[i] < 0.5;
    out.report["M"] = M;
    out.report["rho_by_eps"] = rho_by_eps;
    out.report["fitted_constants"] = consts;
    out.report["pass"] = ok;
    out.exit_code = ok ? 0 : 3;
    return out;
}

RunOutcome run_specfun_verify()
{
    RunOutcome out;
    json& j = out.report;
    bool pass = true;
    auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };

    // Γ(z)Γ(1−z) sin(πz)/π = 1
    {
        const cplx z(0.3, 0.2);
        const double e = std::abs(gamma_fn(z).full() * gamma_fn(1.0 - z).full() * std::sin(PI * z) / PI - 1.0);
        j["gamma_reflection_err"] = e;
        pass = pass && e < 1e-10;
    }
    // Bessel Wronskian I K' − I' K = −1/w on the π/4 ray
    {
        double worst = 0.0;
        const double nus[4] = {1.0, 5.0, 20.0, 50.0};
        const double mods[5] = {0.1, 0.5, 1.0, 3.0, 10.0};
        for (double nu : nus)
            for (double m : mods) {
                const cplx z = std::polar(m, PI / 4.0);
                const BesselIK b = bessel_IK_uniform(nu, z);
                const cplx W = b.I.full() * b.Kp.full() - b.Ip.full() * b.K.full();
                worst = std::max(worst, rel(W, -1.0 / (nu * z)));
            }
        j["bessel_wronskian_max_rel"] = worst;
        pass = pass && worst < 1e-8;
    }
    // W(D_ν(z), D_ν(−z)) = √(2π)/Γ(−ν)
    {
        double worst = 0.0;
        const cplx c2s = sqrt_re_pos(cplx(0.0, 0.05));
        const cplx nus[4] = {-0.5 * 0.01 / c2s, -0.5 * 0.5 / c2s, cplx(0.3, 0.1), cplx(-1.2, 0.4)};
        for (const cplx& nu : nus)
            for (int k = 0; k < 5; ++k) {
                const cplx z = std::polar(0.5 + 2.0 * k, PI / 8.0);
                const WeberPair a = parabolic_cylinder_pair(nu, z), b = parabolic_cylinder_pair(nu, -z);
                const cplx W = (a.d * (-b.dp) - a.dp * b.d) * std::exp(a.log_scale + b.log_scale);
                worst = std::max(worst, rel(W, std::sqrt(2.0 * PI) * rgamma(-nu)));
            }
        j["weber_wronskian_max_rel"] = worst;
        pass = pass && worst < 1e-8;
    }
    // Airy ODE residual along the rays
    {
        double worst = 0.0;
        const double rays[4] = {PI / 6.0, -PI / 6.0, 5.0 * PI / 6.0, -5.0 * PI / 6.0};
        for (double th : rays)
            for (int k = 0; k < 25; ++k) {
                const double rad = 0.5 + 0.3 * k;
                const cplx d = std::polar(1.0, th), z = rad * d;
                const double h = 1e-4;
                const cplx f0 = airy_Ai(z).full(), fp = airy_Ai(z + h * d).full(), fm = airy_Ai(z - h * d).full();
                const cplx second = (fp - 2.0 * f0 + fm) / (h * h * d * d);
                worst = std::max(worst, std::abs(second - z * f0) / std::max(std::abs(z * f0), 1e-300));
            }
        j["airy_ode_max_rel"] = worst;
        pass = pass && worst < 1e-5;
    }
    {
        const double a0 = airy_Ai(0.0).full().real(), a1 = airy_Ai_prime(0.0).full().real();
        j["airy_Ai0"] = a0;
        j["airy_Aip0"] = a1;
        pass = pass && std::abs(a0 - 0.3550280539) < 1e-8 && std::abs(a1 + 0.2588194038) < 1e-8;
    }
    j["pass"] = pass;
    out.exit_code = pass ? 0 : 3;
    return out;
}

}  // namespace

RunOutcome run(const RunConfig& cfg)
{
    RunOutcome out;
    if (cfg.experiment == "specfun-verify") {
        out = run_specfun_verify();
    } else {
        VelocityProfile profile = make_profile(cfg.profile);
        if (cfg.experiment == "audit") out = run_audit(cfg, profile);
        else if (cfg.experiment == "growthrate") out = run_growthrate(cfg, profile);
        else if (cfg.experiment == "eigensolve") out = run_eigensolve(cfg, profile);
        else if (cfg.experiment == "sweep") out = run_sweep_experiment(cfg, profile);
        else if (cfg.experiment == "greens-verify") out = run_greens_verify(cfg, profile);
        else throw Error(ErrorKind::Config, "config key 'experiment': missing or unknown");
    }
    out.report["experiment"] = cfg.experiment;
    const std::string path = (fs::path(cfg.out_dir) / "report.json").string();
    write_file(path, out.report.dump(2) + "\n");
    out.files.push_back(path);
    return out;
}

}  // namespace dynamo
