// Experiment driver: generated or external saddle systems, GSS-family
// preconditioners, GMRES, spectra and parameter estimates.

#include "pess/errors.hpp"
#include "pess/gmres.hpp"
#include "pess/matrix_io.hpp"
#include "pess/param_select.hpp"
#include "pess/problems.hpp"
#include "pess/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

using namespace pess;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct Options {
    // problem source
    std::size_t gen_l = 0;
    std::string a_path, b_path, c_path;
    bool shift_a = false;
    std::string scaling = "fd";
    // preconditioner
    std::string precond = "pess";
    std::string case_name = "I";
    double s = 12.0;
    double alpha = 0.1, beta = 1.0, gamma = 1e-3;
    double lambda1_coef = 1.0;
    double lambda3_coef = 1e-3;
    bool lpess_unit = false;
    // solver
    double tol = 1e-6;
    std::size_t maxit = 7000;
    std::string side = "right";
    std::uint64_t seed = 1;
    std::string out;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct Problem {
    SaddlePointSystem sys;
    std::string id;
};

Problem load_problem(const Options& o) {
    const bool gen = o.gen_l > 0;
    const bool ext = !o.a_path.empty() || !o.b_path.empty() || !o.c_path.empty();
    require<InvalidArgument>(gen != ext, "exactly one problem source: --gen-l or --a/--b/--c");
    if (gen) {
        require<InvalidArgument>(o.scaling == "fd" || o.scaling == "printed", "--scaling must be fd or printed");
        const Scaling sc = o.scaling == "fd" ? Scaling::kFiniteDifference : Scaling::kAsPrinted;
        return {example1(o.gen_l, sc), "example1-l" + std::to_string(o.gen_l)};
    }
    require<InvalidArgument>(!o.a_path.empty() && !o.b_path.empty() && !o.c_path.empty(),
                             "external problems need --a, --b and --c");
    return {load_external(o.a_path, o.b_path, o.c_path, o.shift_a), "external"};
}

PreconditionSide side_of(const Options& o) {
    if (o.side == "right") return PreconditionSide::kRight;
    if (o.side == "left") return PreconditionSide::kLeft;
    throw InvalidArgument("--side must be left or right");
}

struct Built {
    std::unique_ptr<Preconditioner> precond;  // null for "none"
    std::optional<GssConfig> cfg;
    std::vector<std::pair<std::string, std::string>> params;
};

Built make_preconditioner(const std::string& kind, const SaddlePointSystem& sys, const Options& o) {
    Built b;
    b.params.emplace_back("precond", kind);
    if (kind == "none") return b;
    if (kind == "bd") {
        b.precond = build_bd(sys);
        return b;
    }
    const GssKind k = gss_kind_from_string(kind);
    const CaseId cs = case_from_string(o.case_name);
    GssParams prm;
    switch (k) {
    case GssKind::kPess:
    case GssKind::kLpess:
        prm = preset_params(case_preset(cs, sys, o.lambda1_coef, o.lambda3_coef), o.s);
        prm.lpess_unit_coefficient = o.lpess_unit;
        b.params.emplace_back("case", o.case_name);
        b.params.emplace_back("s", fmt(o.s));
        b.params.emplace_back("lambda1_coef", fmt(o.lambda1_coef));
        b.params.emplace_back("lambda3_coef", fmt(o.lambda3_coef));
        break;
    case GssKind::kSs:
    case GssKind::kRss:
        prm.alpha = o.alpha;
        b.params.emplace_back("alpha", fmt(o.alpha));
        break;
    case GssKind::kEgss:
    case GssKind::kRpgss:
        prm.alpha = o.alpha;
        prm.beta = o.beta;
        prm.gamma = o.gamma;
        if (cs == CaseId::kII) {
            prm.P = SpdOperator::sparse(sys.A());
            prm.W = SpdOperator::sparse(spmm(sys.C(), transpose(sys.C())));
        }
        b.params.emplace_back("case", o.case_name);
        b.params.emplace_back("alpha", fmt(o.alpha));
        b.params.emplace_back("beta", fmt(o.beta));
        b.params.emplace_back("gamma", fmt(o.gamma));
        break;
    }
    b.cfg = make_config(k, sys.n(), sys.m(), sys.p(), prm);
    b.precond = build(sys, *b.cfg);
    return b;
}

ReportRecord run_solve(const std::string& kind, const Problem& pb, const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    ReportRecord r;
    r.process = kind;
    r.problem = pb.id;
    r.size = pb.sys.size();
    Built b = make_preconditioner(kind, pb.sys, o);
    GmresOptions go;
    go.tol = o.tol;
    go.maxit = o.maxit;
    go.side = side_of(o);
    const SolveReport rep = gmres(pb.sys, b.precond.get(), rhs_for_ones(pb.sys), go);
    r.it = rep.iterations;
    r.res = rep.final_res;
    r.converged = rep.converged;
    r.params = std::move(b.params);
    r.params.emplace_back("side", o.side);
    r.params.emplace_back("tol", fmt(o.tol));
    r.params.emplace_back("true_res", format_res(rep.final_true_res));
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

void emit(const std::vector<ReportRecord>& records, const Options& o) {
    if (o.out.empty()) write_report(records, ReportFormat::kCsv, std::cout);
    else write_report(records, report_format_from_path(o.out), o.out);
}

void add_problem_options(CLI::App* sub, Options& o) {
    sub->add_option("--gen-l", o.gen_l, "Generate the test problem on an l x l grid");
    sub->add_option("--a", o.a_path, "Matrix Market file for A");
    sub->add_option("--b", o.b_path, "Matrix Market file for B");
    sub->add_option("--c", o.c_path, "Matrix Market file for C");
    sub->add_flag("--shift-a", o.shift_a, "Use A + 0.001 I for external problems");
    sub->add_option("--scaling", o.scaling, "Generator scaling: fd or printed")->capture_default_str();
}

void add_precond_options(CLI::App* sub, Options& o) {
    sub->add_option("--precond", o.precond, "none, bd, pess, lpess, ss, rss, egss, rpgss")->capture_default_str();
    sub->add_option("--case", o.case_name, "Parameter preset: I or II")->capture_default_str();
    sub->add_option("--s", o.s, "Shift parameter s")->capture_default_str();
    sub->add_option("--alpha", o.alpha, "SS/RSS/EGSS alpha")->capture_default_str();
    sub->add_option("--beta", o.beta, "EGSS/RPGSS beta")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "EGSS/RPGSS gamma")->capture_default_str();
    sub->add_option("--lambda1-coef", o.lambda1_coef, "Scale of Lambda1 in the case preset")->capture_default_str();
    sub->add_option("--lambda3-coef", o.lambda3_coef, "Scale of Lambda3 in the case preset")->capture_default_str();
    sub->add_flag("--lpess-unit", o.lpess_unit, "LPESS with A (not sA) in the leading block");
}

void add_solver_options(CLI::App* sub, Options& o) {
    sub->add_option("--tol", o.tol, "Relative residual tolerance")->capture_default_str();
    sub->add_option("--maxit", o.maxit, "Maximum GMRES iterations")->capture_default_str();
    sub->add_option("--side", o.side, "Preconditioning side: right or left")->capture_default_str();
    sub->add_option("--out", o.out, "Report path (.csv or .json); stdout CSV when omitted");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_solve(const Options& o) {
    const Problem pb = load_problem(o);
    const ReportRecord r = run_solve(o.precond, pb, o);
    emit({r}, o);
    std::fprintf(stderr, "%s %s: IT=%zu RES=%s %s\n", r.process.c_str(), r.problem.c_str(), r.it,
                 format_res(r.res).c_str(), r.converged ? "converged" : "NOT converged");
    return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_compare(const Options& o, const std::string& kinds) {
    const Problem pb = load_problem(o);
    std::vector<ReportRecord> rows;
    for (const auto& kind : split_list(kinds)) {
        try {
            rows.push_back(run_solve(kind, pb, o));
        } catch (const Error& e) {
            ReportRecord r;
            r.process = kind;
            r.problem = pb.id;
            r.size = pb.sys.size();
            r.res = 1.0;
            r.params = {{"error", e.what()}};
            rows.push_back(std::move(r));
        }
    }
    emit(rows, o);
    return kExitOk;
}

nlohmann::ordered_json report_json(const BoundReport& r) {
    nlohmann::ordered_json j;
    j["theorem"] = r.theorem;
    j["holds"] = r.holds;
    j["checked"] = r.checked;
    for (const auto& [k, v] : r.bounds) j["bounds"][k] = v;
    for (const auto& [k, v] : r.branches) j["branches"][k] = v;
    j["violations"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.violations.size() && i < 50; ++i) {
        const auto& v = r.violations[i];
        j["violations"].push_back({{"re", v.eigenvalue.real()},
                                   {"im", v.eigenvalue.imag()},
                                   {"margin", v.margin},
                                   {"bound", v.bound}});
    }
    j["violation_count"] = r.violations.size();
    return j;
}

int cmd_spectrum(const Options& o, const std::string& eig_out, const std::string& report_out) {
    const Problem pb = load_problem(o);
    require<SizeGuardExceeded>(pb.sys.size() <= kDenseSizeGuard, "spectrum: size guard 5000 exceeded");
    Built b = make_preconditioner(o.precond, pb.sys, o);
    const ComplexSpectrum sp = preconditioned_spectrum(pb.sys, b.precond.get());

    std::vector<BoundReport> reports;
    nlohmann::ordered_json meta;
    meta["problem"] = pb.id;
    meta["precond"] = o.precond;
    meta["size"] = pb.sys.size();
    if (b.cfg) {
        const GssConfig& cfg = *b.cfg;
        const double s = cfg.s;
        const ScalarExtremes ex = scalar_extremes(pb.sys, cfg);
        meta["s"] = s;
        meta["theta_tilde_form"] = "coupling-scaled: lambda(Lambda2^-1 C^T Lambda3^-1 C)";
        meta["extremes"] = {{"xi_min", ex.xi_min},           {"xi_max", ex.xi_max},
                            {"eta_min", ex.eta_min},         {"eta_max", ex.eta_max},
                            {"theta_max", ex.theta_max},     {"vartheta_min", ex.vartheta_min},
                            {"vartheta_max", ex.vartheta_max}, {"theta_tilde_min", ex.theta_tilde_min},
                            {"theta_tilde_max", ex.theta_tilde_max}};
        if (cfg.kind == GssKind::kLpess) {
            reports.push_back(check_lpess(sp, ex, s, pb.sys.n()));
        } else if (cfg.is_pess_instance()) {
            reports.push_back(check_unit_disk(sp, s));
            reports.push_back(check_pess_real(sp, ex, s));
            reports.push_back(check_pess_nonreal(sp, ex, s));
            reports.push_back(check_real_positive_below_inverse_s(sp, s));
        } else {
            reports.push_back(check_real_positive_below_inverse_s(sp, s));
        }
    }

    if (!eig_out.empty()) {
        std::ofstream f(eig_out);
        require<Error>(static_cast<bool>(f), "cannot open " + eig_out);
        f << "re,im,classification\n";
        char buf[96];
        for (const auto& z : sp.eigenvalues) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,", z.real(), z.imag());
            f << buf << (sp.is_real(z) ? "real" : "nonreal") << '\n';
        }
    }
    nlohmann::ordered_json j;
    j["metadata"] = meta;
    j["reports"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& r : reports) {
        j["reports"].push_back(report_json(r));
        all = all && r.holds;
        std::fprintf(stderr, "%-28s %s (checked %zu, violations %zu)\n", r.theorem.c_str(), r.holds ? "holds" : "VIOLATED",
                     r.checked, r.violations.size());
    }
    j["all_hold"] = all;
    if (report_out.empty()) std::cout << j.dump(2) << '\n';
    else {
        std::ofstream f(report_out);
        require<Error>(static_cast<bool>(f), "cannot open " + report_out);
        f << j.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_sweep_s(Options o, double s_min, double s_max, double s_step, bool kappa) {
    require<InvalidArgument>(s_step > 0 && s_min > 0 && s_min <= s_max, "sweep-s: empty or invalid s range");
    const Problem pb = load_problem(o);
    std::vector<ReportRecord> rows;
    const auto count = static_cast<std::size_t>(std::floor((s_max - s_min) / s_step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        o.s = s_min + static_cast<double>(i) * s_step;
        ReportRecord r = run_solve(o.precond, pb, o);
        if (kappa) {
            Built b = make_preconditioner(o.precond, pb.sys, o);
            r.params.emplace_back("kappa", fmt(condition_number(pb.sys, b.precond.get())));
        }
        rows.push_back(std::move(r));
    }
    emit(rows, o);
    return kExitOk;
}

int cmd_sensitivity(Options o, const std::string& levels) {
    const Problem pb = load_problem(o);
    const BlockVector d = rhs_for_ones(pb.sys);
    GmresOptions go;
    go.tol = o.tol;
    go.maxit = o.maxit;
    go.side = side_of(o);
    auto solve = [&](const SaddlePointSystem& sys) {
        Built b = make_preconditioner(o.precond, sys, o);
        return gmres(sys, b.precond.get(), d, go);
    };
    const SolveReport base = solve(pb.sys);
    std::vector<ReportRecord> rows;
    for (const auto& lv : split_list(levels)) {
        const auto t0 = std::chrono::steady_clock::now();
        NoiseSpec ns;
        ns.percentage = std::stod(lv);
        ns.seed = o.seed;
        const SaddlePointSystem noisy = perturb(pb.sys, ns);
        const SolveReport rep = solve(noisy);
        Vector diff(d.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rep.solution.data()[i] - base.solution.data()[i];
        ReportRecord r;
        r.process = o.precond;
        r.problem = pb.id + "-noise" + lv;
        r.size = pb.sys.size();
        r.it = rep.iterations;
        r.res = rep.final_res;
        r.converged = rep.converged;
        r.params = {{"noise_percent", lv},
                    {"seed", std::to_string(o.seed)},
                    {"std", "population over all block entries"},
                    {"solution_error", format_res(norm2(diff))}};
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(r));
        std::fprintf(stderr, "N_P=%s  |u~ - u| = %s\n", lv.c_str(), format_res(norm2(diff)).c_str());
    }
    emit(rows, o);
    return kExitOk;
}

int cmd_params(Options o, const std::string& preset, const std::string& phi_grid, bool solve) {
    const Problem pb = load_problem(o);
    const SaddlePointSystem& sys = pb.sys;
    const SpdOperator l3 = SpdOperator::sparse(scale(spmm(sys.C(), transpose(sys.C())), o.lambda3_coef));
    const ParamEstimate e = estimate_params(sys, l3);
    std::printf("norm2(A)=%.6e norm2(B)=%.6e norm2(C)=%.6e norm2(CtL3invC)=%.6e\n", e.norms.a, e.norms.b, e.norms.c,
                e.norms.coupling);
    std::printf("s_est=%.6e beta_est=%.6e\n", e.s_est, e.beta_est);

    if (!phi_grid.empty()) {
        const auto g = split_list(phi_grid);
        require<InvalidArgument>(g.size() == 3, "--phi-grid expects min,max,step");
        const double lo = std::stod(g[0]), hi = std::stod(g[1]), step = std::stod(g[2]);
        require<InvalidArgument>(step > 0 && lo <= hi, "--phi-grid: empty range");
        const GssConfig cfg = make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(),
                                          preset_params(case_preset(case_from_string(o.case_name), sys,
                                                                    o.lambda1_coef, o.lambda3_coef),
                                                        1.0));
        std::printf("s,phi\n");
        for (double s = lo; s <= hi + 1e-12; s += step) std::printf("%.6g,%.12e\n", s, phi(sys, cfg, s));
        std::printf("analytic minimizer s*=%.12g\n", phi_minimizer(sys, cfg));
    }

    if (!preset.empty()) {
        const bool lp = preset.rfind("lpess", 0) == 0;
        require<InvalidArgument>(preset == "pess-II" || preset == "lpess-II" || preset == "pess-I" ||
                                     preset == "lpess-I",
                                 "--preset must be pess-I, pess-II, lpess-I or lpess-II");
        const bool case2 = preset.ends_with("-II");
        GssParams prm;
        prm.s = e.s_est;
        prm.lambda1 = case2 ? SpdOperator::sparse(sys.A()) : SpdOperator::scaled_identity(sys.n(), 1.0);
        prm.lambda2 = SpdOperator::scaled_identity(sys.m(), e.beta_est);
        prm.lambda3 = case2 ? l3 : SpdOperator::scaled_identity(sys.p(), o.lambda3_coef);
        prm.lpess_unit_coefficient = o.lpess_unit;
        if (solve) {
            const auto t0 = std::chrono::steady_clock::now();
            const GssConfig cfg = make_config(lp ? GssKind::kLpess : GssKind::kPess, sys.n(), sys.m(), sys.p(), prm);
            auto P = build(sys, cfg);
            GmresOptions go;
            go.tol = o.tol;
            go.maxit = o.maxit;
            go.side = side_of(o);
            const SolveReport rep = gmres(sys, P.get(), rhs_for_ones(sys), go);
            ReportRecord r;
            r.process = preset;
            r.problem = pb.id;
            r.size = sys.size();
            r.it = rep.iterations;
            r.res = rep.final_res;
            r.converged = rep.converged;
            r.params = {{"s_est", fmt(e.s_est)}, {"beta_est", fmt(e.beta_est)},
                        {"lambda3_coef", fmt(o.lambda3_coef)}, {"side", o.side}};
            r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            emit({r}, o);
            return rep.converged ? kExitOk : kExitNotConverged;
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shift-splitting preconditioned solvers for three-by-three block saddle point systems"};
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "One preconditioned GMRES solve");
    add_problem_options(solve, o);
    add_precond_options(solve, o);
    add_solver_options(solve, o);

    std::string kinds = "ss,rss,egss,pess,lpess";
    auto* compare = app.add_subcommand("compare", "Several preconditioners on one problem");
    add_problem_options(compare, o);
    add_precond_options(compare, o);
    add_solver_options(compare, o);
    compare->add_option("--kinds", kinds, "Comma-separated preconditioner list")->capture_default_str();

    std::string eig_out, report_out;
    auto* spectrum = app.add_subcommand("spectrum", "Spectrum of the preconditioned operator and bound checks");
    add_problem_options(spectrum, o);
    add_precond_options(spectrum, o);
    spectrum->add_option("--eig-out", eig_out, "Eigenvalue CSV (re,im,classification)");
    spectrum->add_option("--report-out", report_out, "Bound report JSON; stdout when omitted");

    double s_min = 1, s_max = 30, s_step = 1;
    bool kappa = false;
    auto* sweep = app.add_subcommand("sweep-s", "GMRES iterations (and optionally kappa) over a range of s");
    add_problem_options(sweep, o);
    add_precond_options(sweep, o);
    add_solver_options(sweep, o);
    sweep->add_option("--s-min", s_min)->capture_default_str();
    sweep->add_option("--s-max", s_max)->capture_default_str();
    sweep->add_option("--s-step", s_step)->capture_default_str();
    sweep->add_flag("--kappa", kappa, "Also compute the condition number");

    std::string levels = "5,10,15,20,25,30,35,40";
    auto* sens = app.add_subcommand("sensitivity", "Solution change under noise on B and C");
    add_problem_options(sens, o);
    add_precond_options(sens, o);
    add_solver_options(sens, o);
    sens->add_option("--noise", levels, "Comma-separated N_P values in percent")->capture_default_str();
    sens->add_option("--seed", o.seed, "Noise seed")->capture_default_str();

    std::string preset, phi_grid;
    bool params_solve = false;
    auto* params = app.add_subcommand("params", "Parameter estimates and the Frobenius objective");
    add_problem_options(params, o);
    add_solver_options(params, o);
    params->add_option("--case", o.case_name, "Preset used for the phi grid")->capture_default_str();
    params->add_option("--lambda1-coef", o.lambda1_coef)->capture_default_str();
    params->add_option("--lambda3-coef", o.lambda3_coef, "Lambda3 = coef * C C^T")->capture_default_str();
    params->add_option("--preset", preset, "pess-I, pess-II, lpess-I or lpess-II");
    params->add_option("--phi-grid", phi_grid, "min,max,step");
    params->add_flag("--solve", params_solve, "Solve with the chosen preset");
    params->add_flag("--lpess-unit", o.lpess_unit);

    // the params subcommand follows the strategy's Λ3 = 1e-4 CCᵀ unless overridden
    params->preparse_callback([&](std::size_t) { o.lambda3_coef = 1e-4; });
    sens->preparse_callback([&](std::size_t) {
        o.case_name = "II";
        o.s = 12;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*compare) return cmd_compare(o, kinds);
        if (*spectrum) return cmd_spectrum(o, eig_out, report_out);
        if (*sweep) return cmd_sweep_s(o, s_min, s_max, s_step, kappa);
        if (*sens) return cmd_sensitivity(o, levels);
        if (*params) return cmd_params(o, preset, phi_grid, params_solve);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
