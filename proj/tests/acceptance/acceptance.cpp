// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include "pess/errors.hpp"
#include "pess/gmres.hpp"
#include "pess/param_select.hpp"
#include "pess/problems.hpp"
#include "pess/spectral.hpp"
#include "pess/stationary.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace pess;

namespace {

int g_pass = 0, g_fail = 0;
bool g_monotone = true;
std::size_t g_runs = 0;

void verdict(const std::string& id, bool ok, const std::string& what) {
    std::printf("%s [%s] %s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str());
    std::fflush(stdout);
    (ok ? g_pass : g_fail)++;
}

void info(const std::string& what) {
    std::printf("INFO %s\n", what.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool nonincreasing(const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i] > h[i - 1] * (1 + 1e-12)) return false;
    return true;
}

struct Run {
    SolveReport report;
    double seconds;
};

// Build + solve, timed together; the minimized residual history is checked for monotonicity.
Run timed_solve(const SaddlePointSystem& sys, const std::function<std::unique_ptr<Preconditioner>()>& make,
                PreconditionSide side) {
    const auto t0 = std::chrono::steady_clock::now();
    auto P = make();
    GmresOptions o;
    o.side = side;
    Run r{gmres(sys, P.get(), rhs_for_ones(sys), o), 0.0};
    r.seconds = seconds_since(t0);
    ++g_runs;
    if (!nonincreasing(r.report.res_history)) g_monotone = false;
    return r;
}

// Same value when both are rounded to three significant digits.
bool same3(double computed, double table) {
    auto round3 = [](double v) {
        if (v == 0) return 0.0;
        const double e = std::floor(std::log10(std::abs(v))) - 2;
        return std::round(v / std::pow(10.0, e)) * std::pow(10.0, e);
    };
    const double a = round3(computed), b = round3(table);
    return std::abs(a - b) <= 1e-9 * std::abs(b);
}

GssConfig preset(const SaddlePointSystem& sys, GssKind kind, CaseId c, double s, double l1 = 1.0, double l3 = 1e-3) {
    return make_config(kind, sys.n(), sys.m(), sys.p(), preset_params(case_preset(c, sys, l1, l3), s));
}

// ---- criterion 1 ----

void table2(std::size_t l) {
    const auto sys = example1(l);
    const std::string L = std::to_string(l);
    const auto left = PreconditionSide::kLeft;
    const double budget = l <= 16 ? 5.0 : 60.0;

    struct Row {
        std::string name;
        std::function<std::unique_ptr<Preconditioner>()> make;
        std::size_t expect;
    };
    GssParams ss;
    ss.alpha = 0.1;
    GssParams eg;
    eg.alpha = 0.1;
    eg.beta = 1.0;
    eg.gamma = 1e-3;
    auto gss = [&](GssConfig cfg) { return [&sys, cfg] { return std::unique_ptr<Preconditioner>(build(sys, cfg)); }; };
    const std::vector<Row> rows{
        {"PESS Case I s=12 (Lambda1=0.1I)", gss(preset(sys, GssKind::kPess, CaseId::kI, 12, 0.1)), 2},
        {"LPESS Case I s=12", gss(preset(sys, GssKind::kLpess, CaseId::kI, 12)), 2},
        {"PESS Case II s=12", gss(preset(sys, GssKind::kPess, CaseId::kII, 12)), 3},
        {"LPESS Case II s=12", gss(preset(sys, GssKind::kLpess, CaseId::kII, 12)), 3},
        {"SS alpha=0.1", gss(make_config(GssKind::kSs, sys.n(), sys.m(), sys.p(), ss)), 4},
        {"RSS alpha=0.1", gss(make_config(GssKind::kRss, sys.n(), sys.m(), sys.p(), ss)), 4},
        {"EGSS Case I", gss(make_config(GssKind::kEgss, sys.n(), sys.m(), sys.p(), eg)), 4},
        {"BD", [&sys] { return std::unique_ptr<Preconditioner>(build_bd(sys)); }, 4},
    };
    for (const auto& row : rows) {
        const Run r = timed_solve(sys, row.make, left);
        const bool ok = r.report.converged && r.report.iterations == row.expect && r.seconds < budget;
        verdict("1 l=" + L, ok,
                fmt("%s: IT=%zu (expect %zu), RES=%.4e, true RES=%.4e, %.2fs (limit %.0fs)", row.name.c_str(),
                    r.report.iterations, row.expect, r.report.final_res, r.report.final_true_res, r.seconds, budget));
    }
    const Run unit = timed_solve(sys, gss(preset(sys, GssKind::kPess, CaseId::kI, 12, 1.0)), left);
    info(fmt("l=%zu PESS Case I s=12 with Lambda1=I: IT=%zu RES=%.4e", l, unit.report.iterations,
             unit.report.final_res));
}

void table2_unpreconditioned() {
    const auto sys = example1(16);
    const Run r = timed_solve(sys, [] { return std::unique_ptr<Preconditioner>(); }, PreconditionSide::kRight);
    const std::size_t it = r.report.iterations;
    const bool ok = r.report.converged && it >= 779 && it <= 951 && r.report.final_res < 1e-6 && r.seconds < 60;
    verdict("1 l=16", ok,
            fmt("GMRES without preconditioner: IT=%zu (865 +/- 10%%), RES=%.4e, %.2fs (limit 60s)", it,
                r.report.final_res, r.seconds));
}

// ---- criterion 2 ----

void parameter_strategy(std::size_t l) {
    const auto sys = example1(l);
    const auto l3 = SpdOperator::sparse(scale(spmm(sys.C(), transpose(sys.C())), 1e-4));
    const ParamEstimate e = estimate_params(sys, l3);
    info(fmt("l=%zu s_est=%.6e beta_est=%.6e", l, e.s_est, e.beta_est));
    for (GssKind kind : {GssKind::kPess, GssKind::kLpess}) {
        GssParams prm;
        prm.s = e.s_est;
        prm.lambda1 = SpdOperator::sparse(sys.A());
        prm.lambda2 = SpdOperator::scaled_identity(sys.m(), e.beta_est);
        prm.lambda3 = l3;
        const auto cfg = make_config(kind, sys.n(), sys.m(), sys.p(), prm);
        for (auto side : {PreconditionSide::kLeft, PreconditionSide::kRight}) {
            const Run r = timed_solve(sys, [&] { return std::unique_ptr<Preconditioner>(build(sys, cfg)); }, side);
            verdict("2 l=" + std::to_string(l), r.report.converged && r.report.iterations == 3,
                    fmt("%s-II with s_est, beta_est, Lambda3=1e-4 CC^T (%s): IT=%zu (expect 3), RES=%.4e",
                        to_string(kind).c_str(), side == PreconditionSide::kLeft ? "left" : "right",
                        r.report.iterations, r.report.final_res));
        }
    }
}

// ---- criterion 3 ----

void spectral_table() {
    const auto sys = example1(16);
    const double s = 13;
    const auto cfg = preset(sys, GssKind::kPess, CaseId::kII, s);
    const auto ex = scalar_extremes(sys, cfg);
    info(fmt("extremes: xi=[%.6g, %.6g] eta=[%.6g, %.6g] theta_max=%.6g vartheta=[%.6g, %.6g] theta~=[%.6g, %.6g]",
             ex.xi_min, ex.xi_max, ex.eta_min, ex.eta_max, ex.theta_max, ex.vartheta_min, ex.vartheta_max,
             ex.theta_tilde_min, ex.theta_tilde_max));

    const auto P = build(sys, cfg);
    const auto sp = preconditioned_spectrum(sys, P.get());
    const RealInterval iv = pess_real_interval(ex, s);
    double worst_real = 0, min_real = 1e300;
    std::size_t nreal = 0;
    for (const auto& z : sp.eigenvalues)
        if (sp.is_real(z)) {
            ++nreal;
            worst_real = std::max(worst_real, z.real());
            min_real = std::min(min_real, z.real());
        }
    verdict("3 PESS real", std::abs(iv.upper - 0.071429) <= 1e-6 && min_real > 0 && worst_real <= 0.071429 + 1e-6,
            fmt("%zu real eigenvalues in [%.6g, %.8g]; endpoint %.8g vs 0.071429 (tol 1e-6)", nreal, min_real,
                worst_real, iv.upper));

    const auto nr = check_pess_nonreal(sp, ex, s);
    std::string branches;
    for (const auto& [k, v] : nr.branches) branches += fmt(" %s:%zu", k.c_str(), v);
    verdict("3 PESS non-real", nr.holds,
            fmt("%zu non-real eigenvalues satisfy part (1) or part (2);%s", nr.checked, branches.c_str()));
    const NonrealBounds b = pess_nonreal_bounds(ex, s);
    const struct {
        const char* name;
        double computed, table;
    } nonreal_rows[] = {{"|lambda| lower", b.modulus_lower, 0.0667}, {"|lambda| upper", b.modulus_upper, 0.0739},
                        {"Re(mu) lower", b.re_mu_lower, 4.258e-5},   {"Re(mu) upper", b.re_mu_upper, 0.5},
                        {"|Im(mu)| upper", b.im_mu_max, 31.6386}};
    for (const auto& row : nonreal_rows)
        verdict("3 PESS bound value", same3(row.computed, row.table),
                fmt("%s = %.6g vs table %.6g (3 significant digits)", row.name, row.computed, row.table));

    const auto lcfg = preset(sys, GssKind::kLpess, CaseId::kII, s);
    const auto LP = build(sys, lcfg);
    const auto lsp = preconditioned_spectrum(sys, LP.get());
    const std::size_t mult = count_near(lsp, 1.0 / s, 1e-8);
    verdict("3 LPESS multiplicity", mult == sys.n(), fmt("%zu eigenvalues within 1e-8 of 1/13 (expect %zu)", mult, sys.n()));
    const auto lr = check_lpess(lsp, ex, s, sys.n());
    verdict("3 LPESS bounds hold", lr.holds,
            fmt("%zu remaining eigenvalues, %zu violations of the computed bounds", lr.checked, lr.violations.size()));
    double max_mod = 0;
    for (const auto& z : lsp.eigenvalues)
        if (!lsp.is_real(z)) max_mod = std::max(max_mod, std::abs(z));
    info(fmt("LPESS largest non-real |lambda| = %.8g", max_mod));
    const LpessBounds lb = lpess_bounds(ex, s);
    const struct {
        const char* name;
        double computed, table;
    } lpess_rows[] = {{"real lower", lb.real_lower, 0.0416},        {"real upper", lb.real_upper, 0.0769},
                      {"|lambda| lower", lb.modulus_lower, 0.0285}, {"|lambda| upper", lb.modulus_upper, 0.07693},
                      {"|lambda-1/s| lower", lb.annulus_lower, 1.8666e-4},
                      {"|lambda-1/s| upper", lb.annulus_upper, 0.04384}};
    for (const auto& row : lpess_rows)
        verdict("3 LPESS bound value", same3(row.computed, row.table),
                fmt("%s = %.6g vs table %.6g (3 significant digits)", row.name, row.computed, row.table));
}

// ---- criterion 4 ----

void condition_numbers() {
    const auto s32 = example1(32);
    auto t0 = std::chrono::steady_clock::now();
    const double ka = condition_number(s32, nullptr);
    verdict("4", std::abs(ka / 5.4289e4 - 1) <= 0.01,
            fmt("kappa(A) at l=32 = %.6g vs 5.4289e+04 (1%%), %.1fs", ka, seconds_since(t0)));
    t0 = std::chrono::steady_clock::now();
    const auto P = build(s32, preset(s32, GssKind::kPess, CaseId::kII, 50));
    const double kp = condition_number(s32, P.get());
    verdict("4", std::abs(kp / 3.4221 - 1) <= 0.01,
            fmt("kappa(P^-1 A) PESS Case II l=32 s=50 = %.6g vs 3.4221 (1%%), %.1fs", kp, seconds_since(t0)));

    const auto s8 = example1(8);
    std::string list;
    double prev = 1e300;
    bool decreasing = true;
    for (double s : {5.0, 10.0, 20.0, 50.0}) {
        const auto Q = build(s8, preset(s8, GssKind::kPess, CaseId::kII, s));
        const double k = condition_number(s8, Q.get());
        decreasing = decreasing && k < prev;
        prev = k;
        list += fmt(" s=%g:%.6g", s, k);
    }
    verdict("4", decreasing, "kappa(s) strictly decreasing at l=8, Case II:" + list);
}

// ---- criterion 5 ----

void sensitivity() {
    const auto sys = example1(16);
    const auto d = rhs_for_ones(sys);
    auto solve = [&](const SaddlePointSystem& s) {
        auto P = build(s, preset(s, GssKind::kPess, CaseId::kII, 12));
        const auto r = gmres(s, P.get(), d);
        ++g_runs;
        if (!nonincreasing(r.res_history)) g_monotone = false;
        return r.solution;
    };
    const auto base = solve(sys);
    const auto exact = lu_solve(to_dense(sys), d.data());
    for (int np = 5; np <= 40; np += 5) {
        NoiseSpec ns;
        ns.percentage = np;
        ns.seed = 2024;
        const auto noisy = perturb(sys, ns);
        const auto u = solve(noisy);
        Vector diff(d.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u.data()[i] - base.data()[i];
        const double err = norm2(diff);
        // direct-solve oracle for the same perturbed system
        const auto ue = lu_solve(to_dense(noisy), d.data());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ue[i] - exact[i];
        verdict("5", err < 1e-8,
                fmt("N_P=%d%%: ||u~ - u||_2 = %.4e (limit 1e-8); direct-solve oracle %.4e", np, err, norm2(diff)));
    }
}

// ---- criterion 6 ----

SparseMatrix random_block(std::mt19937_64& rng, std::size_t r, std::size_t c, double density) {
    std::uniform_real_distribution<double> u(-1, 1), coin(0, 1);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (coin(rng) < density) t.push_back({i, j, u(rng)});
    return SparseMatrix::from_triplets(r, c, t);
}

SparseMatrix random_spd(std::mt19937_64& rng, std::size_t n, double shift) {
    const auto M = random_block(rng, n, n, 0.4);
    const auto G = spmm(transpose(M), M);
    return add(add(G, transpose(G), 0.5, 0.5), SparseMatrix::identity(n), 1.0, shift);
}

// validated random system (full row rank checked)
SaddlePointSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t p, double coupling = 1) {
    for (;;) {
        auto sys = assemble(random_spd(rng, n, 0.5), scale(random_block(rng, m, n, 0.6), coupling),
                            scale(random_block(rng, p, m, 0.6), coupling));
        if (validate(sys, ValidationLevel::kFull).ok()) return sys;
    }
}

GssParams random_params(std::mt19937_64& rng, const SaddlePointSystem& sys, double s) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    GssParams prm;
    prm.s = s;
    prm.alpha = u(rng);
    prm.beta = u(rng);
    prm.gamma = u(rng);
    prm.lambda1 = SpdOperator::sparse(random_spd(rng, sys.n(), 0.3));
    Vector d(sys.m());
    for (auto& v : d) v = u(rng);
    prm.lambda2 = SpdOperator::diagonal(d);
    prm.lambda3 = SpdOperator::sparse(random_spd(rng, sys.p(), 0.3));
    prm.P = SpdOperator::sparse(random_spd(rng, sys.n(), 1.0));
    prm.Q = SpdOperator::scaled_identity(sys.m(), u(rng));
    prm.W = SpdOperator::sparse(random_spd(rng, sys.p(), 1.0));
    return prm;
}

void algorithm_oracle() {
    std::mt19937_64 rng(601);
    std::vector<SaddlePointSystem> systems{example1(12), example1(5)};
    systems.push_back(random_system(rng, 60, 35, 20));
    double worst = 0;
    std::size_t checks = 0;
    for (const auto& sys : systems)
        for (GssKind kind : {GssKind::kPess, GssKind::kLpess, GssKind::kSs, GssKind::kRss, GssKind::kEgss,
                             GssKind::kRpgss}) {
            const auto cfg = make_config(kind, sys.n(), sys.m(), sys.p(), random_params(rng, sys, 0.5 + 10 * (rng() % 100) / 100.0));
            const auto P = build(sys, cfg);
            const auto lu = lu_factor(to_dense_preconditioner(sys, cfg));
            std::uniform_real_distribution<double> u(-1, 1);
            for (int k = 0; k < 50; ++k) {
                Vector r(sys.size()), w(sys.size());
                for (auto& v : r) v = u(rng);
                P->apply(r, w);
                const auto x = lu_solve(lu, r);
                double num = 0, den = 0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    num += (w[i] - x[i]) * (w[i] - x[i]);
                    den += x[i] * x[i];
                }
                worst = std::max(worst, std::sqrt(num / den));
                ++checks;
            }
        }
    verdict("6 oracle", worst < 1e-10,
            fmt("block elimination vs dense LU of P: %zu solves over six kinds, max relative error %.3e (limit 1e-10)",
                checks, worst));
}

void splitting_identity() {
    std::mt19937_64 rng(602);
    std::uniform_real_distribution<double> su(0.05, 5.0);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const auto sys = random_system(rng, 20, 12, 6);
        const auto cfg = make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(), random_params(rng, sys, su(rng)));
        worst = std::max(worst, splitting_residual(sys, cfg) / frobenius_norm(to_dense(sys)));
    }
    verdict("6 splitting", worst < 1e-12,
            fmt("||(P - Q) - A||_F / ||A||_F over 20 random PESS configs: max %.3e (limit 1e-12)", worst));
}

void spectral_properties() {
    std::mt19937_64 rng(603);
    std::uniform_real_distribution<double> su(0.5, 20.0);
    std::size_t disk = 0, positive = 0, interval = 0;
    for (int k = 0; k < 20; ++k) {
        const auto sys = random_system(rng, 24, 14, 7);
        const double s = k == 0 ? 0.5 : su(rng);
        const auto cfg = make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(), random_params(rng, sys, s));
        const auto P = build(sys, cfg);
        const auto sp = preconditioned_spectrum(sys, P.get());
        disk += check_unit_disk(sp, s).holds;
        bool pos = true;
        for (const auto& z : sp.eigenvalues)
            if (sp.is_real(z) && !(z.real() > 1e-10)) pos = false;
        positive += pos;
        interval += check_real_positive_below_inverse_s(sp, s).holds;
    }
    verdict("6 disk", disk == 20, fmt("|lambda - 1| < 1 on %zu/20 random systems with s >= 1/2", disk));
    verdict("6 positivity", positive == 20, fmt("real eigenvalues > 1e-10 on %zu/20 random systems", positive));
    verdict("6 interval", interval == 20,
            fmt("real eigenvalues in (0, 1/s) and none equal to 1/s on %zu/20 random systems", interval));
}

void stationary_equivalence() {
    std::mt19937_64 rng(604);
    std::size_t agree = 0, violated = 0, total = 0, radius_agree = 0;
    for (int k = 0; k < 20; ++k) {
        // weak A and strong coupling make small s violate the predicate
        const double coupling = k % 2 ? 3.0 : 1.0;
        const auto base = random_system(rng, 10, 6, 3, coupling);
        const auto sys = assemble(scale(base.A(), k % 2 ? 0.05 : 1.0), base.B(), base.C());
        const double s = k % 2 ? 0.05 + 0.1 * (k % 4) : 0.5 + k;
        GssParams prm;
        prm.s = s;
        prm.lambda1 = SpdOperator::scaled_identity(sys.n(), 1);
        prm.lambda2 = SpdOperator::scaled_identity(sys.m(), 1);
        prm.lambda3 = SpdOperator::scaled_identity(sys.p(), 1);
        const auto cfg = make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(), prm);
        const auto pred = convergence_predicate(sys, cfg);
        const double rho = iteration_spectral_radius(sys, cfg);
        radius_agree += pred.holds == (rho < 1.0);
        bool converged = false;
        try {
            converged = pess_iterate(sys, cfg, make_block_vector(sys), rhs_for_ones(sys)).converged;
        } catch (const Diverged&) {
        }
        ++total;
        violated += !pred.holds;
        agree += converged == pred.holds;
    }
    verdict("6 stationary", agree == total && violated > 0 && radius_agree == total,
            fmt("iteration converges iff predicate holds on %zu/%zu systems (%zu violations engineered); spectral "
                "radius agrees on %zu/%zu",
                agree, total, violated, radius_agree, total));
}

void phi_checks() {
    std::mt19937_64 rng(605);
    std::uniform_real_distribution<double> su(-2.0, 4.0);
    double worst = 0;
    bool convex = true;
    for (int k = 0; k < 10; ++k) {
        const auto sys = k < 2 ? example1(2 + k) : random_system(rng, 12, 7, 3);
        GssConfig cfg = make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(), random_params(rng, sys, 1.0));
        for (int j = 0; j < 5; ++j) {
            const double s = su(rng);
            const double f = phi(sys, cfg, s);
            worst = std::max(worst, std::abs(f - phi_direct(sys, cfg, s)) / f);
            convex = convex && phi(sys, cfg, s - 0.3) - 2 * f + phi(sys, cfg, s + 0.3) > 0;
        }
    }
    verdict("6 phi", worst < 1e-10 && convex,
            fmt("closed form vs direct ||Q||_F^2: max relative error %.3e (limit 1e-10); convex on every stencil: %s",
                worst, convex ? "yes" : "no"));
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    std::printf("Acceptance suite\n");
    try {
        table2_unpreconditioned();
        table2(16);
        table2(32);
        parameter_strategy(16);
        parameter_strategy(32);
        spectral_table();
        condition_numbers();
        sensitivity();
        algorithm_oracle();
        splitting_identity();
        spectral_properties();
        stationary_equivalence();
        phi_checks();
        verdict("6 monotone", g_monotone,
                fmt("GMRES minimized-residual history nonincreasing on all %zu acceptance runs", g_runs));
    } catch (const std::exception& e) {
        verdict("abort", false, std::string("unexpected exception: ") + e.what());
    }
    const double total = seconds_since(t0);
    verdict("runtime", total < 600, fmt("total acceptance runtime %.1fs (limit 600s)", total));
    std::printf("SUMMARY %d passed, %d failed\n", g_pass, g_fail);
    return g_fail == 0 ? 0 : 1;
}
