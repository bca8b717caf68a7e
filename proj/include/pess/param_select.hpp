#pragma once

#include "pess/preconditioner.hpp"
#include "pess/saddle_system.hpp"

namespace pess {

/// φ(s) = ‖Q‖²_F for the splitting 𝒜 = P − Q with Q = Σ + (s−1)𝒜, closed form.
/// cfg supplies Σ; its own s is ignored.
double phi(const SaddlePointSystem& sys, const GssConfig& cfg, double s);
/// Same quantity from the densified Q (desk scale).
double phi_direct(const SaddlePointSystem& sys, const GssConfig& cfg, double s);
/// Minimizer of the quadratic φ: 1 − tr(Λ1 A) / (‖A‖²_F + 2‖B‖²_F + 2‖C‖²_F).
double phi_minimizer(const SaddlePointSystem& sys, const GssConfig& cfg);

struct ParamNorms {
    double a = 0, b = 0, c = 0;
    double coupling = 0;  // ‖Cᵀ Λ3⁻¹ C‖₂
};

struct ParamEstimate {
    double s_est = 0;
    double beta_est = 0;  // Λ2 = β_est·I
    ParamNorms norms;
};

/// Balances Λ2 against CᵀΛ3⁻¹C: β = ‖B‖⁴/(4‖CᵀΛ3⁻¹C‖‖A‖²), s = √(β/‖CᵀΛ3⁻¹C‖).
ParamEstimate estimate_params(const SaddlePointSystem& sys, const SpdOperator& lambda3);

} // namespace pess
