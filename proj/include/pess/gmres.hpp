#pragma once

#include "pess/preconditioner.hpp"
#include "pess/saddle_system.hpp"

#include <functional>
#include <span>
#include <vector>

namespace pess {

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

enum class PreconditionSide { kRight, kLeft };

struct GmresOptions {
    double tol = 1e-6;
    std::size_t maxit = 7000;
    PreconditionSide side = PreconditionSide::kRight;
};

struct SolveReport {
    BlockVector solution;
    std::size_t iterations = 0;
    bool converged = false;
    /// Relative residual used by the stopping test, one entry per iteration
    /// starting with the initial guess: the true RES under right
    /// preconditioning, ‖P⁻¹(d − 𝒜u)‖/‖P⁻¹d‖ under left preconditioning.
    std::vector<double> res_history;
    double final_res = 1.0;
    /// ‖𝒜u − d‖/‖d‖ per iteration regardless of side.
    std::vector<double> true_res_history;
    double final_true_res = 1.0;
    /// Least-squares residual estimate from the Arnoldi recurrence.
    std::vector<double> estimate_history;
};

/// Full GMRES (modified Gram–Schmidt, Givens rotations) from u₀ = 0.
/// The residual is recomputed explicitly each iteration.
SolveReport gmres(const SaddlePointSystem& sys, const Preconditioner* precond, const BlockVector& d,
                  const GmresOptions& options = {});

/// Operator form used for auxiliary solves; solution returned flat.
SolveReport gmres(const LinearOperator& op, const Preconditioner* precond, std::span<const double> d,
                  const GmresOptions& options = {});

/// ‖𝒜u − d‖₂ / ‖d‖₂.
double true_residual(const SaddlePointSystem& sys, const BlockVector& u, const BlockVector& d);

} // namespace pess
