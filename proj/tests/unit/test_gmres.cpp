#include "pess/gmres.hpp"
#include "pess/problems.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace pess;
using namespace testing_support;

namespace {

bool nonincreasing(const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i] > h[i - 1] * (1 + 1e-12)) return false;
    return true;
}

class Scaled : public Preconditioner {
public:
    Scaled(const Preconditioner& inner, double c) : inner_(inner), c_(c) {}
    std::size_t size() const override { return inner_.size(); }
    void apply(std::span<const double> r, std::span<double> w) const override {
        inner_.apply(r, w);
        for (auto& v : w) v /= c_;
    }
    std::string name() const override { return "scaled"; }

private:
    const Preconditioner& inner_;
    double c_;
};

GssConfig pess_case(const SaddlePointSystem& sys, CaseId c, double s, double l1 = 1.0) {
    return make_config(GssKind::kPess, sys.n(), sys.m(), sys.p(), preset_params(case_preset(c, sys, l1), s));
}

} // namespace

TEST_CASE("an exact preconditioner converges in one step") {
    std::mt19937_64 rng(41);
    for (const auto& sys : {example1(2), example1(4), random_system(rng, 15, 8, 5)}) {
        const DenseLuPreconditioner P(to_dense(sys));
        for (auto side : {PreconditionSide::kRight, PreconditionSide::kLeft}) {
            GmresOptions o;
            o.side = side;
            const auto r = gmres(sys, &P, rhs_for_ones(sys), o);
            CHECK(r.iterations == 1);
            CHECK(r.converged);
        }
    }
}

TEST_CASE("unpreconditioned GMRES on the l=16 problem") {
    const auto sys = example1(16);
    const auto r = gmres(sys, nullptr, rhs_for_ones(sys));
    CHECK(r.converged);
    CHECK(r.iterations >= 779);
    CHECK(r.iterations <= 951);
    CHECK(r.final_res < 1e-6);
    CHECK(r.final_res == doctest::Approx(8.2852e-07).epsilon(1e-3));
    CHECK(nonincreasing(r.res_history));
    CHECK(r.res_history.size() == r.iterations + 1);
    CHECK(r.res_history.front() == 1.0);
    // solution close to ones
    double err = 0;
    for (double v : r.solution.data()) err = std::max(err, std::abs(v - 1.0));
    CHECK(err < 1e-4);
}

TEST_CASE("PESS Case I at l=16 needs two iterations") {
    const auto sys = example1(16);
    const auto P = build(sys, pess_case(sys, CaseId::kI, 12));
    const auto r = gmres(sys, P.get(), rhs_for_ones(sys));
    CHECK(r.iterations == 2);
    CHECK(r.final_res < 1e-6);
    CHECK(r.final_true_res == r.final_res);
}

TEST_CASE("left preconditioning stops on the preconditioned residual") {
    const auto sys = example1(8);
    const auto P = build(sys, pess_case(sys, CaseId::kII, 12));
    GmresOptions o;
    o.side = PreconditionSide::kLeft;
    o.tol = 1e-8;
    const auto d = rhs_for_ones(sys);
    const auto r = gmres(sys, P.get(), d, o);
    CHECK(r.converged);
    CHECK(r.final_res < 1e-8);
    CHECK(nonincreasing(r.res_history));
    CHECK(r.true_res_history.size() == r.res_history.size());
    CHECK(r.final_true_res == doctest::Approx(true_residual(sys, r.solution, d)).epsilon(1e-6));
    // recompute the preconditioned residual independently
    const auto Au = operator_apply(sys, r.solution);
    Vector res(sys.size()), pr(sys.size()), pd(sys.size());
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = d.data()[i] - Au.data()[i];
    P->apply(res, pr);
    P->apply(d.data(), pd);
    CHECK(norm2(pr) / norm2(pd) == doctest::Approx(r.final_res).epsilon(1e-6));
}

TEST_CASE("converged solutions do not depend on the preconditioner") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 3; ++k) {
        const auto sys = random_system(rng, 14, 8, 4);
        const auto d = rhs_for_ones(sys);
        GmresOptions o;
        o.tol = 1e-11;
        const auto plain = gmres(sys, nullptr, d, o);
        for (GssKind kind : {GssKind::kPess, GssKind::kLpess, GssKind::kSs}) {
            GssParams prm;
            prm.s = 2.0;
            prm.alpha = 0.5;
            prm.lambda1 = SpdOperator::scaled_identity(sys.n(), 1.0);
            prm.lambda2 = SpdOperator::scaled_identity(sys.m(), 1.0);
            prm.lambda3 = SpdOperator::scaled_identity(sys.p(), 0.1);
            const auto P = build(sys, make_config(kind, sys.n(), sys.m(), sys.p(), prm));
            const auto r = gmres(sys, P.get(), d, o);
            CHECK(nonincreasing(r.res_history));
            CHECK(max_abs_diff(r.solution.data(), plain.solution.data()) < 1e-5);
        }
    }
}

TEST_CASE("scaling the preconditioner leaves right-preconditioned iterates unchanged") {
    const auto sys = example1(6);
    const auto P = build(sys, pess_case(sys, CaseId::kII, 3));
    const Scaled Q(*P, 7.5);
    GmresOptions o;
    o.tol = 1e-12;
    const auto a = gmres(sys, P.get(), rhs_for_ones(sys), o);
    const auto b = gmres(sys, &Q, rhs_for_ones(sys), o);
    CHECK(a.iterations == b.iterations);
    for (std::size_t i = 0; i < a.res_history.size(); ++i)
        CHECK(std::abs(a.res_history[i] - b.res_history[i]) <= 1e-12 + 1e-9 * a.res_history[i]);
    CHECK(max_abs_diff(a.solution.data(), b.solution.data()) < 1e-10);
}

TEST_CASE("maxit reached reports non-convergence") {
    const auto sys = example1(8);
    GmresOptions o;
    o.maxit = 5;
    const auto r = gmres(sys, nullptr, rhs_for_ones(sys), o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 5);
}

TEST_CASE("operator form") {
    const auto sys = example1(3);
    const auto d = rhs_for_ones(sys);
    LinearOperator op = [&](std::span<const double> x, std::span<double> y) { sys.apply(x, y); };
    GmresOptions o;
    o.tol = 1e-12;
    const auto r = gmres(op, nullptr, d.data(), o);
    for (double v : r.solution.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("true_residual") {
    const auto sys = example1(2);
    const auto d = rhs_for_ones(sys);
    CHECK(true_residual(sys, make_block_vector(sys, 1.0), d) < 1e-14);
    CHECK(true_residual(sys, make_block_vector(sys, 0.0), d) == doctest::Approx(1.0));
    std::mt19937_64 rng(43);
    const BlockVector u(sys.n(), sys.m(), sys.p(), random_vector(rng, sys.size()));
    const auto Au = matvec(to_dense(sys), u.data());
    Vector r(sys.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = Au[i] - d.data()[i];
    CHECK(std::abs(true_residual(sys, u, d) - norm2(r) / norm2(d.data())) < 1e-14);
}
