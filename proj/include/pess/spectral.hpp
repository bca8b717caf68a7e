#pragma once

#include "pess/dense.hpp"
#include "pess/preconditioner.hpp"
#include "pess/saddle_system.hpp"

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace pess {

/// Dense M = P⁻¹𝒜 (or 𝒜 itself for a null preconditioner), column by column.
DenseMatrix densify_preconditioned(const SaddlePointSystem& sys, const Preconditioner* precond);
ComplexSpectrum preconditioned_spectrum(const SaddlePointSystem& sys, const Preconditioner* precond);

/// Which operator defines the LPESS C-block extremes θ̃.
enum class ThetaTildeForm {
    kCouplingScaled,  ///< λ(Λ2⁻¹ Cᵀ Λ3⁻¹ C), calibrated default
    kUnscaled,        ///< λ(Λ3⁻¹ C Cᵀ)
};

struct ScalarExtremes {
    bool has_xi_eta = false;  // false when Λ1 is the zero block
    double xi_max = 0, xi_min = 0;
    double eta_max = 0, eta_min = 0;
    double theta_max = 0;
    double vartheta_max = 0, vartheta_min = 0;
    double theta_tilde_max = 0, theta_tilde_min = 0;
    ThetaTildeForm theta_tilde_form = ThetaTildeForm::kCouplingScaled;
};

ScalarExtremes scalar_extremes(const SaddlePointSystem& sys, const GssConfig& cfg,
                               ThetaTildeForm form = ThetaTildeForm::kCouplingScaled);

struct Violation {
    std::complex<double> eigenvalue;
    double margin;  // how far outside the bound, positive
    std::string bound;
};

struct BoundReport {
    std::string theorem;
    std::vector<std::pair<std::string, double>> bounds;
    std::size_t checked = 0;
    bool holds = true;
    std::vector<Violation> violations;
    /// Per-branch counts (e.g. which part of a disjunction was satisfied).
    std::vector<std::pair<std::string, std::size_t>> branches;

    double bound(const std::string& name) const;
};

/// |λ − 1| < 1 (+1e-9) for every eigenvalue.
BoundReport check_unit_disk(const ComplexSpectrum& spectrum, double s);

struct RealInterval {
    double lower;
    double upper;
    bool lower_open;
};

/// (0, ξmax/(1 + s ξmax)].
RealInterval pess_real_interval(const ScalarExtremes& ex, double s);
BoundReport check_pess_real(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s);

/// Real eigenvalues strictly inside (0, 1/s) and no eigenvalue equal to 1/s.
BoundReport check_real_positive_below_inverse_s(const ComplexSpectrum& spectrum, double s);

struct NonrealBounds {
    double modulus_lower, modulus_upper;  // part (1)
    double re_mu_lower, re_mu_upper;      // part (2), μ = λ/(1 − sλ)
    double im_mu_max;
};

NonrealBounds pess_nonreal_bounds(const ScalarExtremes& ex, double s);
/// Each non-real eigenvalue must satisfy part (1) OR part (2), slack 1e-6.
BoundReport check_pess_nonreal(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s);

struct LpessBounds {
    double real_lower, real_upper;
    double modulus_lower, modulus_upper;
    double annulus_lower, annulus_upper;  // on |λ − 1/s|
};

LpessBounds lpess_bounds(const ScalarExtremes& ex, double s);
/// Multiplicity of 1/s (cluster 1e-8) must reach n; the rest checked with slack 1e-6.
BoundReport check_lpess(const ComplexSpectrum& spectrum, const ScalarExtremes& ex, double s, std::size_t n);

std::size_t count_near(const ComplexSpectrum& spectrum, std::complex<double> z, double tol);

/// κ₂ of P⁻¹𝒜 (or 𝒜). Dense up to order 600, Lanczos above.
double condition_number(const SaddlePointSystem& sys, const Preconditioner* precond);
/// Always the Lanczos path; exposed for cross-checks.
double condition_number_lanczos(const SaddlePointSystem& sys, const Preconditioner* precond);

inline constexpr std::size_t kDenseConditionLimit = 600;

} // namespace pess
