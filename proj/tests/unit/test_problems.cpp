#include "pess/errors.hpp"
#include "pess/matrix_io.hpp"
#include "pess/problems.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace pess;
using namespace testing_support;

namespace {

std::size_t dense_nnz(const SparseMatrix& M) {
    std::size_t c = 0;
    const auto D = dense_of(M);
    for (double v : D.values()) c += v != 0.0;
    return c;
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "pess_problems_test";
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("generator at l=2 with the printed scaling") {
    const auto sys = example1(2, Scaling::kAsPrinted);
    const auto A = dense_of(sys.A());
    // I⊗G + G⊗I with G = (1/9)[[2,−1],[−1,2]]: diagonal 4/9
    for (std::size_t i = 0; i < 8; ++i) CHECK(A(i, i) == doctest::Approx(4.0 / 9));
    CHECK(A(0, 1) == doctest::Approx(-1.0 / 9));
    CHECK(A(0, 2) == doctest::Approx(-1.0 / 9));
    CHECK(A(0, 3) == 0.0);
    CHECK(A(0, 4) == 0.0);
    const double t = 1.0 / 3.0;
    const std::vector<std::vector<double>> C{{t, -t, 0, 0}, {0, t, 0, 0}, {0, 0, 1, -1}, {0, 0, 0, 1}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(sys.C().at(i, j) == doctest::Approx(C[i][j]));
    // B = [I⊗F, F⊗I]
    CHECK(sys.B().at(0, 0) == doctest::Approx(t));
    CHECK(sys.B().at(0, 1) == doctest::Approx(-t));
    CHECK(sys.B().at(0, 4) == doctest::Approx(t));
    CHECK(sys.B().at(0, 6) == doctest::Approx(-t));
}

TEST_CASE("finite-difference scaling multiplies the printed blocks") {
    for (std::size_t l : {2u, 5u}) {
        const auto a = example1(l, Scaling::kAsPrinted), b = example1(l);
        const double h = static_cast<double>(l + 1);
        CHECK(max_abs_diff(dense_of(b.A()).values(), dense_of(scale(a.A(), std::pow(h, 4))).values()) < 1e-10);
        CHECK(max_abs_diff(dense_of(b.B()).values(), dense_of(scale(a.B(), h * h)).values()) < 1e-12);
        CHECK(max_abs_diff(dense_of(b.C()).values(), dense_of(scale(a.C(), h * h)).values()) < 1e-10);
    }
}

TEST_CASE("sizes and validation") {
    const auto s16 = example1(16);
    CHECK(s16.size() == 1024);
    CHECK(s16.n() == 512);
    CHECK(s16.m() == 256);
    CHECK(s16.p() == 256);
    for (std::size_t l = 2; l <= 8; ++l) {
        const auto sys = example1(l);
        CHECK(sys.size() == 4 * l * l);
        CHECK(validate(sys, ValidationLevel::kFull).ok());
        CHECK(sys.A().nnz() == dense_nnz(sys.A()));
        CHECK(sys.A().nnz() == 2 * (5 * l * l - 4 * l));
        CHECK(sys.B().nnz() == dense_nnz(sys.B()));
        CHECK(sys.B().nnz() == 2 * (2 * l - 1) * l);
        CHECK(sys.C().nnz() == dense_nnz(sys.C()));
    }
    CHECK_THROWS_AS(example1(1), InvalidArgument);
}

TEST_CASE("case presets") {
    const auto sys = example1(4);
    const auto c1 = case_preset(CaseId::kI, sys);
    CHECK(c1.lambda1.to_sparse() == SparseMatrix::identity(sys.n()));
    CHECK(c1.lambda2.to_sparse() == SparseMatrix::identity(sys.m()));
    CHECK(c1.lambda3.to_sparse() == scale(SparseMatrix::identity(sys.p()), 1e-3));
    const auto c2 = case_preset(CaseId::kII, sys, 1.0, 1e-4);
    CHECK(c2.lambda1.to_sparse() == sys.A());
    CHECK(c2.lambda3.to_sparse() == scale(spmm(sys.C(), transpose(sys.C())), 1e-4));
    for (std::size_t l = 2; l <= 8; ++l) {
        const auto s = example1(l);
        CHECK_NOTHROW(cholesky(case_preset(CaseId::kII, s).lambda3.to_dense()));
    }
    CHECK(case_from_string("II") == CaseId::kII);
    CHECK_THROWS_AS(case_from_string("III"), InvalidArgument);
}

TEST_CASE("noise perturbation") {
    const auto sys = example1(4);
    NoiseSpec none;
    const auto same = perturb(sys, none);
    CHECK(same.B() == sys.B());
    CHECK(same.C() == sys.C());

    NoiseSpec ns;
    ns.percentage = 5;
    ns.seed = 42;
    const auto a = perturb(sys, ns), b = perturb(sys, ns);
    CHECK(a.A() == sys.A());
    CHECK(a.B() == b.B());
    CHECK(a.C() == b.C());
    CHECK(a.B().nnz() == sys.m() * sys.n());  // dense-as-sparse
    const double ratio_a = frobenius_norm(add(a.B(), sys.B(), 1, -1)) / frobenius_norm(sys.B());
    const double ratio_b = frobenius_norm(add(b.B(), sys.B(), 1, -1)) / frobenius_norm(sys.B());
    CHECK(ratio_a == ratio_b);
    ns.seed = 43;
    CHECK_FALSE(perturb(sys, ns).B() == a.B());

    // population std over all entries
    const auto M = SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {1, 1, 3}});
    CHECK(block_std(M) == doctest::Approx(std::sqrt(1.5)));

    // E‖ΔB‖_F grows linearly in N_P
    auto mean_norm = [&](double np) {
        double sum = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            NoiseSpec n;
            n.percentage = np;
            n.seed = seed;
            sum += frobenius_norm(add(perturb(sys, n).B(), sys.B(), 1, -1));
        }
        return sum / 20;
    };
    const double m5 = mean_norm(5), m20 = mean_norm(20);
    CHECK(std::abs(m20 / m5 - 4.0) < 0.4);
    // and matches the expected size 1e-4·N_P·std·√(mn)
    const double expect = 1e-4 * 5 * block_std(sys.B()) * std::sqrt(double(sys.m() * sys.n()));
    CHECK(std::abs(m5 / expect - 1.0) < 0.1);
    ns.percentage = -1;
    CHECK_THROWS_AS(perturb(sys, ns), InvalidArgument);
}

TEST_CASE("external loading") {
    const auto dir = temp_dir();
    const auto sys = example1(2);
    write_matrix_market(sys.A(), (dir / "A.mtx").string());
    write_matrix_market(sys.B(), (dir / "B.mtx").string());
    write_matrix_market(sys.C(), (dir / "C.mtx").string());
    const auto back = load_external((dir / "A.mtx").string(), (dir / "B.mtx").string(), (dir / "C.mtx").string());
    CHECK(back.A() == sys.A());
    CHECK(back.B() == sys.B());
    CHECK(back.C() == sys.C());
    CHECK_THROWS_AS(load_external((dir / "missing.mtx").string(), (dir / "B.mtx").string(), (dir / "C.mtx").string()),
                    ParseError);

    write_matrix_market(SparseMatrix::zero(8, 8), (dir / "Z.mtx").string());
    const auto shifted =
        load_external((dir / "Z.mtx").string(), (dir / "B.mtx").string(), (dir / "C.mtx").string(), true);
    CHECK(shifted.A() == scale(SparseMatrix::identity(8), 1e-3));
    // shape mismatch: C does not have m columns
    CHECK_THROWS_AS(load_external((dir / "A.mtx").string(), (dir / "B.mtx").string(), (dir / "A.mtx").string()),
                    DimensionMismatch);
    std::filesystem::remove_all(dir);
}
