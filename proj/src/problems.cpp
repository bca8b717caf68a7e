#include "pess/problems.hpp"

#include "pess/errors.hpp"
#include "pess/matrix_io.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace pess {

SaddlePointSystem example1(std::size_t l, Scaling scaling) {
    require<InvalidArgument>(l >= 2, "example1: l must be at least 2");
    const double h = static_cast<double>(l + 1);
    const double gs = scaling == Scaling::kFiniteDifference ? h * h : 1.0 / (h * h);
    const double fs = scaling == Scaling::kFiniteDifference ? h : 1.0 / h;
    const SparseMatrix G = tridiag(l, -gs, 2.0 * gs, -gs);
    const SparseMatrix F = tridiag(l, 0.0, fs, -fs);
    const SparseMatrix I = SparseMatrix::identity(l);
    Vector e(l);
    for (std::size_t k = 0; k < l; ++k) e[k] = 1.0 + static_cast<double>(k * l);
    const SparseMatrix E = SparseMatrix::diagonal(e);

    const SparseMatrix lap = add(kron(I, G), kron(G, I));
    const std::size_t nl = l * l;
    const SparseMatrix Z = SparseMatrix::zero(nl, nl);
    SparseMatrix A = block_assemble({{&lap, &Z}, {&Z, &lap}}, {nl, nl}, {nl, nl});
    const SparseMatrix IF = kron(I, F), FI = kron(F, I);
    SparseMatrix B = block_assemble({{&IF, &FI}}, {nl}, {nl, nl});
    SparseMatrix C = kron(E, F);
    return assemble(std::move(A), std::move(B), std::move(C));
}

CaseId case_from_string(const std::string& name) {
    if (name == "I" || name == "i" || name == "1") return CaseId::kI;
    if (name == "II" || name == "ii" || name == "2") return CaseId::kII;
    throw InvalidArgument("unknown case '" + name + "' (expected I or II)");
}

CasePreset case_preset(CaseId id, const SaddlePointSystem& sys, double lambda1_coef, double lambda3_coef) {
    require<InvalidArgument>(lambda1_coef > 0 && lambda3_coef > 0, "case_preset: coefficients must be positive");
    CasePreset c;
    c.lambda2 = SpdOperator::scaled_identity(sys.m(), 1.0);
    if (id == CaseId::kI) {
        c.lambda1 = SpdOperator::scaled_identity(sys.n(), lambda1_coef);
        c.lambda3 = SpdOperator::scaled_identity(sys.p(), lambda3_coef);
    } else {
        c.lambda1 = SpdOperator::sparse(scale(sys.A(), lambda1_coef));
        c.lambda3 = SpdOperator::sparse(scale(spmm(sys.C(), transpose(sys.C())), lambda3_coef));
    }
    return c;
}

GssParams preset_params(const CasePreset& preset, double s) {
    GssParams prm;
    prm.s = s;
    prm.lambda1 = preset.lambda1;
    prm.lambda2 = preset.lambda2;
    prm.lambda3 = preset.lambda3;
    return prm;
}

double block_std(const SparseMatrix& M) {
    const double count = static_cast<double>(M.nrows() * M.ncols());
    if (count == 0) return 0.0;
    double sum = 0.0;
    for (double v : M.values()) sum += v;
    const double mean = sum / count;
    // implicit zeros contribute mean² each
    double ss = (count - static_cast<double>(M.nnz())) * mean * mean;
    for (double v : M.values()) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / count);
}

namespace {

class BoxMuller {
public:
    explicit BoxMuller(std::uint64_t seed) : rng_(seed) {}
    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // uniform in (0, 1] from the top 53 bits
        auto uniform = [&] { return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53; };
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

SparseMatrix noisy(const SparseMatrix& M, double amplitude, BoxMuller& gen) {
    std::vector<Triplet> t;
    t.reserve(M.nrows() * M.ncols());
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t j = 0; j < M.ncols(); ++j) t.push_back({i, j, M.at(i, j) + amplitude * gen.next()});
    return SparseMatrix::from_triplets(M.nrows(), M.ncols(), t);
}

} // namespace

SaddlePointSystem perturb(const SaddlePointSystem& sys, const NoiseSpec& noise) {
    require<InvalidArgument>(noise.percentage >= 0.0, "perturb: percentage must be non-negative");
    if (noise.percentage == 0.0) return sys;
    BoxMuller gen(noise.seed);
    const double k = noise.scale * noise.percentage;
    SparseMatrix B = noisy(sys.B(), k * block_std(sys.B()), gen);
    SparseMatrix C = noisy(sys.C(), k * block_std(sys.C()), gen);
    return SaddlePointSystem(sys.A(), std::move(B), std::move(C));
}

SaddlePointSystem load_external(const std::string& a_path, const std::string& b_path, const std::string& c_path,
                                bool shift_a) {
    SparseMatrix A = read_matrix_market(a_path);
    SparseMatrix B = read_matrix_market(b_path);
    SparseMatrix C = read_matrix_market(c_path);
    if (shift_a) {
        require<DimensionMismatch>(A.nrows() == A.ncols(), "load_external: A must be square");
        A = add(A, SparseMatrix::identity(A.nrows()), 1.0, 1e-3);
    }
    return assemble(std::move(A), std::move(B), std::move(C));
}

} // namespace pess
