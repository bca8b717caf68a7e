#pragma once

#include "pess/preconditioner.hpp"
#include "pess/saddle_system.hpp"

#include <complex>
#include <vector>

namespace pess {

struct StationaryReport {
    BlockVector solution;
    std::size_t iterations = 0;
    bool converged = false;
    /// True RES per iteration, starting with u₀.
    std::vector<double> error_history;
};

/// u_{k+1} = P⁻¹(Q u_k + d) with Q u = P u − 𝒜 u. Throws Diverged when RES exceeds 1e12.
StationaryReport pess_iterate(const SaddlePointSystem& sys, const GssConfig& cfg, const BlockVector& u0,
                              const BlockVector& d, double tol = 1e-8, std::size_t maxit = 20000);

struct PredicateWitness {
    std::complex<double> mu;
    double lhs;  // (2s−1)|μ|² + 2 Re μ
};

struct PredicateResult {
    bool holds = false;
    PredicateWitness worst;
    /// Every eigenvalue with its left-hand side, ascending by lhs.
    std::vector<PredicateWitness> witnesses;
};

/// Σ = diag(Λ1, Λ2, Λ3) must be SPD. Eigenvalues of Σ^{-1/2}𝒜Σ^{-1/2} are
/// computed from the similar matrix L⁻¹𝒜L⁻ᵀ with Σ = LLᵀ.
PredicateResult convergence_predicate(const SaddlePointSystem& sys, const GssConfig& cfg);

/// max{½(1 − λmin(Σ^{-1/2}(𝒜+𝒜ᵀ)Σ^{-1/2}) / ϑ(Σ^{-1/2}𝒜Σ^{-1/2})²), 0}.
double sufficient_s_lower_bound(const SaddlePointSystem& sys, const GssConfig& cfg);

/// Spectral radius of the iteration matrix P⁻¹Q = I − P⁻¹𝒜 (dense).
double iteration_spectral_radius(const SaddlePointSystem& sys, const GssConfig& cfg);

} // namespace pess
