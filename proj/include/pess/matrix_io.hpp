#pragma once

#include "pess/sparse_matrix.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pess {

/// Coordinate or array, real or integer, general or symmetric.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

/// Coordinate real general, 1-based, 17 significant digits.
void write_matrix_market(const SparseMatrix& M, std::ostream& out);
void write_matrix_market(const SparseMatrix& M, const std::string& path);

struct ReportRecord {
    std::string process;
    std::string problem;
    std::size_t size = 0;
    std::size_t it = 0;
    double res = 0.0;
    double wall_seconds = 0.0;
    bool converged = false;
    std::vector<std::pair<std::string, std::string>> params;
};

enum class ReportFormat { kCsv, kJson };

ReportFormat report_format_from_path(const std::string& path);

/// "8.2852e-07": scientific, 4 digits after the point.
std::string format_res(double res);

void write_report(const std::vector<ReportRecord>& records, ReportFormat format, std::ostream& out);
void write_report(const std::vector<ReportRecord>& records, ReportFormat format, const std::string& path);

/// Parses what write_report(kCsv) emits.
std::vector<ReportRecord> read_report_csv(std::istream& in);

} // namespace pess
