#include "pess/errors.hpp"
#include "pess/problems.hpp"
#include "pess/saddle_system.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace pess;
using namespace testing_support;

namespace {

SaddlePointSystem minimal() {
    return assemble(SparseMatrix::identity(2), SparseMatrix::from_triplets(1, 2, {{0, 0, 1}}),
                    SparseMatrix::identity(1));
}

} // namespace

TEST_CASE("assemble") {
    const auto sys = example1(2, Scaling::kAsPrinted);
    CHECK(sys.n() == 8);
    CHECK(sys.m() == 4);
    CHECK(sys.p() == 4);
    CHECK(sys.size() == 16);
    CHECK(validate(minimal(), ValidationLevel::kFull).ok());
    CHECK_THROWS_AS(assemble(SparseMatrix::identity(2), SparseMatrix::identity(3), SparseMatrix::identity(3)),
                    DimensionMismatch);
    CHECK_THROWS(assemble(SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}}),
                          SparseMatrix::identity(2), SparseMatrix::identity(2)));
}

TEST_CASE("operator_apply and rhs_for_ones") {
    const auto sys = minimal();
    const auto zero = operator_apply(sys, make_block_vector(sys));
    for (double v : zero.data()) CHECK(v == 0.0);
    const BlockVector u(2, 1, 1, Vector{1, 0, 1, 1});
    const auto out = operator_apply(sys, u);
    CHECK(out.data() == Vector{2, 0, -2, 1});
    // u = ones: A x + Bᵀy = [2, 1]
    CHECK(rhs_for_ones(sys).data() == Vector{2, 1, -2, 1});

    const auto ex = example1(2, Scaling::kAsPrinted);
    CHECK(operator_apply(ex, make_block_vector(ex, 1.0)).data() == rhs_for_ones(ex).data());

    std::mt19937_64 rng(21);
    for (std::size_t l : {2u, 4u, 8u}) {
        const auto s = example1(l);
        const auto D = to_dense(s);
        const auto v = random_vector(rng, s.size());
        const auto got = operator_apply(s, BlockVector(s.n(), s.m(), s.p(), v));
        CHECK(rel_diff(got.data(), matvec(D, v)) < 1e-13);
        // transpose through the sign similarity
        Vector t(s.size());
        s.apply_transpose(v, t);
        CHECK(rel_diff(t, matvec(transpose(D), v)) < 1e-13);
    }
}

TEST_CASE("rhs_for_ones gives ones as the exact solution") {
    for (std::size_t l : {2u, 3u, 4u}) {
        const auto s = example1(l);
        const auto x = lu_solve(to_dense(s), rhs_for_ones(s).data());
        for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("validate") {
    CHECK(validate(example1(4), ValidationLevel::kFull).ok());
    const auto bad_a = SaddlePointSystem(SparseMatrix::diagonal(Vector{1, -1}),
                                         SparseMatrix::from_triplets(1, 2, {{0, 0, 1}}), SparseMatrix::identity(1));
    const auto r = validate(bad_a, ValidationLevel::kFull);
    CHECK_FALSE(r.a_spd);
    CHECK_FALSE(r.ok());
    CHECK_THROWS_AS(require_valid(r), NotPositiveDefinite);

    // B with a zero row
    const auto bad_b = SaddlePointSystem(SparseMatrix::identity(2), SparseMatrix::from_triplets(2, 2, {{0, 0, 1}}),
                                         SparseMatrix::identity(2));
    const auto rb = validate(bad_b, ValidationLevel::kFull);
    CHECK_FALSE(rb.b_full_row_rank);
    CHECK_THROWS_AS(require_valid(rb), FullRankViolation);

    // C with a zero row appended
    const auto bad_c = SaddlePointSystem(SparseMatrix::identity(2), SparseMatrix::identity(2),
                                         SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 1}}));
    CHECK_FALSE(validate(bad_c, ValidationLevel::kFull).c_full_row_rank);
    CHECK(validate(bad_c, ValidationLevel::kShape).shape_ok);
}

TEST_CASE("to_dense") {
    const auto D = to_dense(minimal());
    CHECK(D == DenseMatrix::from_rows({{1, 0, 1, 0}, {0, 1, 0, 0}, {-1, 0, 0, -1}, {0, 0, 1, 0}}));

    const auto zb = SaddlePointSystem(SparseMatrix::identity(2), SparseMatrix::zero(1, 2), SparseMatrix::zero(1, 1));
    const auto Z = to_dense(zb);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(Z(i, j) == ((i == j && i < 2) ? 1.0 : 0.0));

    const auto E = to_dense(example1(2, Scaling::kAsPrinted));
    CHECK(E.nrows() == 16);
    CHECK(trace(E) == doctest::Approx(8.0 * 4.0 / 9.0));
}

TEST_CASE("the saddle matrix is positive stable") {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 5; ++k) {
        const auto sys = random_system(rng, 12, 7, 4);
        REQUIRE(validate(sys, ValidationLevel::kFull).ok());
        for (const auto& z : eig_general(to_dense(sys)).eigenvalues) CHECK(z.real() > 0.0);
    }
    for (const auto& z : eig_general(to_dense(example1(4))).eigenvalues) CHECK(z.real() > 0.0);
}
