#pragma once

#include "pess/preconditioner.hpp"
#include "pess/saddle_system.hpp"

#include <cstdint>
#include <string>

namespace pess {

/// Mesh scaling of the tridiagonal generators.
enum class Scaling {
    kFiniteDifference,  ///< G = (l+1)² tridiag(−1,2,−1), F = (l+1) tridiag(0,1,−1)
    kAsPrinted,         ///< G = tridiag(−1,2,−1)/(l+1)², F = tridiag(0,1,−1)/(l+1)
};

/// Test problem on an l×l grid: n = 2l², m = p = l².
/// A = diag(I⊗G + G⊗I, I⊗G + G⊗I), B = [I⊗F, F⊗I], C = E⊗F, E = diag(1 + k l).
SaddlePointSystem example1(std::size_t l, Scaling scaling = Scaling::kFiniteDifference);

enum class CaseId { kI, kII };

CaseId case_from_string(const std::string& name);

struct CasePreset {
    SpdOperator lambda1, lambda2, lambda3;
};

/// Case I: (c1·I, I, c3·I). Case II: (c1·A, I, c3·CCᵀ).
CasePreset case_preset(CaseId id, const SaddlePointSystem& sys, double lambda1_coef = 1.0,
                       double lambda3_coef = 1e-3);

/// GssParams carrying the preset blocks and s.
GssParams preset_params(const CasePreset& preset, double s);

struct NoiseSpec {
    double percentage = 0.0;  // N_P, in percent
    double scale = 1e-4;
    std::uint64_t seed = 1;
};

/// Population standard deviation over every entry of the densified block.
double block_std(const SparseMatrix& M);

/// B + scale·N_P·std(B)·randn and likewise for C; A untouched. Perturbed
/// blocks are stored dense-as-sparse. Normals come from std::mt19937_64
/// through Box–Muller (both outputs used), B first, row-major, then C.
SaddlePointSystem perturb(const SaddlePointSystem& sys, const NoiseSpec& noise);

/// Reads A, B, C from Matrix Market files; optionally A + 0.001·I.
SaddlePointSystem load_external(const std::string& a_path, const std::string& b_path,
                                const std::string& c_path, bool shift_a = false);

} // namespace pess
