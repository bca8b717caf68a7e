#include "pess/sparse_matrix.hpp"

#include "pess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pess {

SparseMatrix::SparseMatrix(std::size_t nrows, std::size_t ncols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices,
                           std::vector<double> values)
    : nrows_(nrows), ncols_(ncols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)), values_(std::move(values)) {
    require<InvalidArgument>(row_offsets_.size() == nrows_ + 1, "row_offsets must have nrows+1 entries");
    require<InvalidArgument>(row_offsets_.front() == 0, "row_offsets[0] must be 0");
    require<InvalidArgument>(row_offsets_.back() == values_.size() && col_indices_.size() == values_.size(),
                             "row_offsets[nrows] must equal nnz");
    for (std::size_t i = 0; i < nrows_; ++i) {
        require<InvalidArgument>(row_offsets_[i] <= row_offsets_[i + 1], "row_offsets must be nondecreasing");
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            require<IndexOutOfRange>(col_indices_[k] < ncols_, "column index out of range");
            require<InvalidArgument>(k == row_offsets_[i] || col_indices_[k - 1] < col_indices_[k],
                                     "column indices must strictly increase within a row");
            require<InvalidArgument>(values_[k] != 0.0, "explicit zero in canonical CSR");
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t nrows, std::size_t ncols, std::vector<Triplet> entries) {
    for (const auto& e : entries) {
        if (e.row >= nrows || e.col >= ncols)
            throw IndexOutOfRange("triplet (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                                  ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    }
    // stable sort keeps the summation order of duplicates deterministic
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix M;
    M.nrows_ = nrows;
    M.ncols_ = ncols;
    M.row_offsets_.assign(nrows + 1, 0);
    M.col_indices_.reserve(entries.size());
    M.values_.reserve(entries.size());
    std::size_t k = 0;
    while (k < entries.size()) {
        const std::size_t r = entries[k].row, c = entries[k].col;
        double v = 0.0;
        for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) v += entries[k].value;
        if (v == 0.0) continue;
        M.col_indices_.push_back(c);
        M.values_.push_back(v);
        ++M.row_offsets_[r + 1];
    }
    std::partial_sum(M.row_offsets_.begin(), M.row_offsets_.end(), M.row_offsets_.begin());
    return M;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    return diagonal(Vector(n, 1.0));
}

SparseMatrix SparseMatrix::zero(std::size_t nrows, std::size_t ncols) {
    SparseMatrix M;
    M.nrows_ = nrows;
    M.ncols_ = ncols;
    M.row_offsets_.assign(nrows + 1, 0);
    return M;
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
    std::vector<Triplet> t;
    t.reserve(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) t.push_back({i, i, diag[i]});
    return from_triplets(diag.size(), diag.size(), std::move(t));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    require<IndexOutOfRange>(i < nrows_ && j < ncols_, "entry index out of range");
    auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void matvec(const SparseMatrix& M, std::span<const double> x, std::span<double> y) {
    require<DimensionMismatch>(x.size() == M.ncols() && y.size() == M.nrows(), "matvec: dimension mismatch");
    const auto& ro = M.row_offsets();
    const auto& ci = M.col_indices();
    const auto& v = M.values();
    for (std::size_t i = 0; i < M.nrows(); ++i) {
        double s = 0.0;
        for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) s += v[k] * x[ci[k]];
        y[i] = s;
    }
}

Vector matvec(const SparseMatrix& M, std::span<const double> x) {
    Vector y(M.nrows());
    matvec(M, x, y);
    return y;
}

void matvec_transpose(const SparseMatrix& M, std::span<const double> x, std::span<double> y) {
    require<DimensionMismatch>(x.size() == M.nrows() && y.size() == M.ncols(),
                               "matvec_transpose: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    const auto& ro = M.row_offsets();
    const auto& ci = M.col_indices();
    const auto& v = M.values();
    for (std::size_t i = 0; i < M.nrows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) y[ci[k]] += v[k] * xi;
    }
}

Vector matvec_transpose(const SparseMatrix& M, std::span<const double> x) {
    Vector y(M.ncols());
    matvec_transpose(M, x, y);
    return y;
}

SparseMatrix transpose(const SparseMatrix& M) {
    const auto& ro = M.row_offsets();
    const auto& ci = M.col_indices();
    const auto& v = M.values();
    std::vector<std::size_t> off(M.ncols() + 1, 0);
    for (auto c : ci) ++off[c + 1];
    std::partial_sum(off.begin(), off.end(), off.begin());
    std::vector<std::size_t> cols(M.nnz());
    std::vector<double> vals(M.nnz());
    std::vector<std::size_t> next(off.begin(), off.end() - 1);
    // rows visited in order, so each output row receives ascending column indices
    for (std::size_t i = 0; i < M.nrows(); ++i) {
        for (std::size_t k = ro[i]; k < ro[i + 1]; ++k) {
            const std::size_t dst = next[ci[k]]++;
            cols[dst] = i;
            vals[dst] = v[k];
        }
    }
    return SparseMatrix(M.ncols(), M.nrows(), std::move(off), std::move(cols), std::move(vals));
}

SparseMatrix kron(const SparseMatrix& X, const SparseMatrix& Y) {
    constexpr auto kMax = std::numeric_limits<std::size_t>::max();
    require<InvalidArgument>(Y.nrows() == 0 || X.nrows() <= kMax / Y.nrows(), "kron: row index overflow");
    require<InvalidArgument>(Y.ncols() == 0 || X.ncols() <= kMax / Y.ncols(), "kron: column index overflow");
    const std::size_t nr = X.nrows() * Y.nrows(), nc = X.ncols() * Y.ncols();
    std::vector<std::size_t> off(nr + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(X.nnz() * Y.nnz());
    vals.reserve(X.nnz() * Y.nnz());
    const auto &xo = X.row_offsets(), &xc = X.col_indices();
    const auto &yo = Y.row_offsets(), &yc = Y.col_indices();
    const auto &xv = X.values(), &yv = Y.values();
    std::size_t row = 0;
    for (std::size_t i = 0; i < X.nrows(); ++i) {
        for (std::size_t k = 0; k < Y.nrows(); ++k, ++row) {
            for (std::size_t a = xo[i]; a < xo[i + 1]; ++a) {
                for (std::size_t b = yo[k]; b < yo[k + 1]; ++b) {
                    const double v = xv[a] * yv[b];
                    if (v == 0.0) continue;  // underflow
                    cols.push_back(xc[a] * Y.ncols() + yc[b]);
                    vals.push_back(v);
                }
            }
            off[row + 1] = vals.size();
        }
    }
    return SparseMatrix(nr, nc, std::move(off), std::move(cols), std::move(vals));
}

SparseMatrix tridiag(std::size_t n, double sub, double diag, double super) {
    require<InvalidArgument>(n >= 1, "tridiag: order must be at least 1");
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, sub});
        t.push_back({i, i, diag});
        if (i + 1 < n) t.push_back({i, i + 1, super});
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix spmm(const SparseMatrix& X, const SparseMatrix& Y) {
    require<DimensionMismatch>(X.ncols() == Y.nrows(), "spmm: inner dimensions differ");
    const auto &xo = X.row_offsets(), &xc = X.col_indices();
    const auto &yo = Y.row_offsets(), &yc = Y.col_indices();
    const auto &xv = X.values(), &yv = Y.values();
    std::vector<std::size_t> off(X.nrows() + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    // dense accumulator with a marker array (Gustavson)
    std::vector<double> acc(Y.ncols(), 0.0);
    std::vector<std::size_t> mark(Y.ncols(), std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> pattern;
    for (std::size_t i = 0; i < X.nrows(); ++i) {
        pattern.clear();
        for (std::size_t a = xo[i]; a < xo[i + 1]; ++a) {
            const std::size_t k = xc[a];
            for (std::size_t b = yo[k]; b < yo[k + 1]; ++b) {
                const std::size_t j = yc[b];
                if (mark[j] != i) {
                    mark[j] = i;
                    acc[j] = 0.0;
                    pattern.push_back(j);
                }
                acc[j] += xv[a] * yv[b];
            }
        }
        std::sort(pattern.begin(), pattern.end());
        for (auto j : pattern) {
            if (acc[j] == 0.0) continue;
            cols.push_back(j);
            vals.push_back(acc[j]);
        }
        off[i + 1] = vals.size();
    }
    return SparseMatrix(X.nrows(), Y.ncols(), std::move(off), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& X, const SparseMatrix& Y, double alpha, double beta) {
    require<DimensionMismatch>(X.nrows() == Y.nrows() && X.ncols() == Y.ncols(), "add: shape mismatch");
    std::vector<std::size_t> off(X.nrows() + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(X.nnz() + Y.nnz());
    vals.reserve(X.nnz() + Y.nnz());
    const auto &xo = X.row_offsets(), &xc = X.col_indices();
    const auto &yo = Y.row_offsets(), &yc = Y.col_indices();
    const auto &xv = X.values(), &yv = Y.values();
    auto emit = [&](std::size_t c, double v) {
        if (v == 0.0) return;
        cols.push_back(c);
        vals.push_back(v);
    };
    for (std::size_t i = 0; i < X.nrows(); ++i) {
        std::size_t a = xo[i], b = yo[i];
        while (a < xo[i + 1] || b < yo[i + 1]) {
            if (b == yo[i + 1] || (a < xo[i + 1] && xc[a] < yc[b])) {
                emit(xc[a], alpha * xv[a]);
                ++a;
            } else if (a == xo[i + 1] || yc[b] < xc[a]) {
                emit(yc[b], beta * yv[b]);
                ++b;
            } else {
                emit(xc[a], alpha * xv[a] + beta * yv[b]);
                ++a;
                ++b;
            }
        }
        off[i + 1] = vals.size();
    }
    return SparseMatrix(X.nrows(), X.ncols(), std::move(off), std::move(cols), std::move(vals));
}

SparseMatrix scale(const SparseMatrix& M, double c) {
    if (c == 0.0) return SparseMatrix::zero(M.nrows(), M.ncols());
    std::vector<double> vals(M.values());
    std::vector<std::size_t> off(M.row_offsets()), cols(M.col_indices());
    // scaling may underflow to exact zero; rebuild through triplets in that rare case
    bool underflow = false;
    for (auto& v : vals) {
        v *= c;
        underflow = underflow || v == 0.0;
    }
    if (!underflow) return SparseMatrix(M.nrows(), M.ncols(), std::move(off), std::move(cols), std::move(vals));
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t k = off[i]; k < off[i + 1]; ++k) t.push_back({i, cols[k], vals[k]});
    return SparseMatrix::from_triplets(M.nrows(), M.ncols(), std::move(t));
}

SparseMatrix block_assemble(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                            const std::vector<std::size_t>& row_sizes,
                            const std::vector<std::size_t>& col_sizes) {
    require<DimensionMismatch>(blocks.size() == row_sizes.size(), "block_assemble: row count mismatch");
    std::vector<std::size_t> roff(row_sizes.size() + 1, 0), coff(col_sizes.size() + 1, 0);
    std::partial_sum(row_sizes.begin(), row_sizes.end(), roff.begin() + 1);
    std::partial_sum(col_sizes.begin(), col_sizes.end(), coff.begin() + 1);
    std::vector<Triplet> t;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        require<DimensionMismatch>(blocks[bi].size() == col_sizes.size(), "block_assemble: column count mismatch");
        for (std::size_t bj = 0; bj < col_sizes.size(); ++bj) {
            const SparseMatrix* B = blocks[bi][bj];
            if (!B) continue;
            require<DimensionMismatch>(B->nrows() == row_sizes[bi] && B->ncols() == col_sizes[bj],
                                       "block_assemble: block shape mismatch");
            for (std::size_t i = 0; i < B->nrows(); ++i)
                for (std::size_t k = B->row_offsets()[i]; k < B->row_offsets()[i + 1]; ++k)
                    t.push_back({roff[bi] + i, coff[bj] + B->col_indices()[k], B->values()[k]});
        }
    }
    return SparseMatrix::from_triplets(roff.back(), coff.back(), std::move(t));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require<DimensionMismatch>(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

NormEstimate spsd_norm_estimate(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                                std::size_t n, double tol, std::size_t maxit) {
    NormEstimate out;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vector w(n);
    double lambda = 0.0;
    for (std::size_t it = 1; it <= maxit; ++it) {
        apply(v, w);
        const double rq = dot(v, w);  // Rayleigh quotient, v has unit norm
        const double wn = norm2(w);
        out.iterations = it;
        if (wn == 0.0) {
            out.value = 0.0;
            out.converged = true;
            return out;
        }
        const bool done = it > 1 && std::abs(rq - lambda) <= tol * std::abs(rq);
        lambda = rq;
        if (done) {
            out.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    }
    out.value = lambda;
    return out;
}

NormEstimate norm2_estimate(const SparseMatrix& M, double tol, std::size_t maxit) {
    if (M.nnz() == 0) return {0.0, 0, true};
    Vector tmp(M.nrows());
    auto gram = [&](std::span<const double> x, std::span<double> y) {
        matvec(M, x, tmp);
        matvec_transpose(M, tmp, y);
    };
    NormEstimate e = spsd_norm_estimate(gram, M.ncols(), tol, maxit);
    e.value = std::sqrt(std::max(e.value, 0.0));
    return e;
}

double frobenius_norm(const SparseMatrix& M) {
    double s = 0.0;
    for (double v : M.values()) s += v * v;
    return std::sqrt(s);
}

double asymmetry(const SparseMatrix& M) {
    require<DimensionMismatch>(M.nrows() == M.ncols(), "asymmetry: matrix not square");
    double amax = 0.0;
    for (double v : M.values()) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return 0.0;
    const SparseMatrix T = transpose(M);
    const SparseMatrix D = add(M, T, 1.0, -1.0);
    double dmax = 0.0;
    for (double v : D.values()) dmax = std::max(dmax, std::abs(v));
    return dmax / amax;
}

} // namespace pess
