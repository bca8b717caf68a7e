#include "pess/matrix_io.hpp"

#include "pess/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pess {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// next line that is neither blank nor a comment
bool data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%') continue;
        return true;
    }
    return false;
}

} // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    require<ParseError>(static_cast<bool>(std::getline(in, line)), "matrix market: empty input");
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    require<ParseError>(banner == "%%MatrixMarket" && lower(object) == "matrix",
                        "matrix market: malformed header '" + line + "'");
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    require<ParseError>(format == "coordinate" || format == "array", "matrix market: unknown format " + format);
    require<ParseError>(field == "real" || field == "integer" || field == "double",
                        "matrix market: unsupported field " + field);
    require<ParseError>(symmetry == "general" || symmetry == "symmetric",
                        "matrix market: unsupported symmetry " + symmetry);
    const bool sym = symmetry == "symmetric";

    require<ParseError>(data_line(in, line), "matrix market: missing size line");
    std::istringstream ss(line);
    long long rows = -1, cols = -1, entries = -1;
    ss >> rows >> cols;
    if (format == "coordinate") ss >> entries;
    require<ParseError>(!ss.fail() && rows >= 0 && cols >= 0, "matrix market: malformed size line");
    require<ParseError>(!sym || rows == cols, "matrix market: symmetric matrix must be square");
    const auto nr = static_cast<std::size_t>(rows), nc = static_cast<std::size_t>(cols);

    std::vector<Triplet> t;
    auto push = [&](std::size_t i, std::size_t j, double v) {
        t.push_back({i, j, v});
        if (sym && i != j) t.push_back({j, i, v});
    };
    if (format == "coordinate") {
        require<ParseError>(entries >= 0, "matrix market: malformed size line");
        t.reserve(static_cast<std::size_t>(entries) * (sym ? 2 : 1));
        for (long long k = 0; k < entries; ++k) {
            require<ParseError>(data_line(in, line), "matrix market: fewer entries than declared");
            std::istringstream es(line);
            long long i = 0, j = 0;
            double v = 0.0;
            es >> i >> j >> v;
            require<ParseError>(!es.fail(), "matrix market: malformed entry '" + line + "'");
            require<IndexOutOfRange>(i >= 1 && j >= 1 && i <= rows && j <= cols,
                                     "matrix market: entry index out of bounds");
            if (sym) require<ParseError>(i >= j, "matrix market: symmetric entry above the diagonal");
            push(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v);
        }
    } else {
        // column-major; symmetric stores the lower triangle
        for (std::size_t j = 0; j < nc; ++j)
            for (std::size_t i = sym ? j : 0; i < nr; ++i) {
                require<ParseError>(data_line(in, line), "matrix market: fewer entries than declared");
                std::istringstream es(line);
                double v = 0.0;
                es >> v;
                require<ParseError>(!es.fail(), "matrix market: malformed entry '" + line + "'");
                if (v != 0.0) push(i, j, v);
            }
    }
    return SparseMatrix::from_triplets(nr, nc, t);
}

SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    require<ParseError>(static_cast<bool>(in), "cannot open " + path);
    return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& M, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.nrows() << ' ' << M.ncols() << ' ' << M.nnz() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < M.nrows(); ++i)
        for (std::size_t k = M.row_offsets()[i]; k < M.row_offsets()[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", M.values()[k]);
            out << i + 1 << ' ' << M.col_indices()[k] + 1 << ' ' << buf << '\n';
        }
    require<Error>(static_cast<bool>(out), "matrix market: write failed");
}

void write_matrix_market(const SparseMatrix& M, const std::string& path) {
    std::ofstream out(path);
    require<Error>(static_cast<bool>(out), "cannot open " + path + " for writing");
    write_matrix_market(M, out);
}

ReportFormat report_format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos && lower(path.substr(dot)) == ".json") return ReportFormat::kJson;
    return ReportFormat::kCsv;
}

std::string format_res(double res) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", res);
    return buf;
}

namespace {

std::string params_field(const ReportRecord& r) {
    std::string s;
    for (const auto& [k, v] : r.params) {
        if (!s.empty()) s += ';';
        s += k + '=' + v;
    }
    return s;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += line[++i];
            else if (c == '"') quoted = false;
            else out.back() += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back() += c;
        }
    }
    return out;
}

} // namespace

void write_report(const std::vector<ReportRecord>& records, ReportFormat format, std::ostream& out) {
    if (format == ReportFormat::kCsv) {
        out << "process,problem,size,it,res,wall_seconds,params\n";
        char wall[32];
        for (const auto& r : records) {
            std::snprintf(wall, sizeof wall, "%.6f", r.wall_seconds);
            std::string params = params_field(r);
            if (!params.empty()) params += ';';
            params += std::string("converged=") + (r.converged ? "true" : "false");
            out << csv_quote(r.process) << ',' << csv_quote(r.problem) << ',' << r.size << ',' << r.it << ','
                << format_res(r.res) << ',' << wall << ',' << csv_quote(params) << '\n';
        }
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : records) {
            nlohmann::ordered_json p = nlohmann::ordered_json::object();
            for (const auto& [k, v] : r.params) p[k] = v;
            arr.push_back({{"process", r.process},
                           {"problem", r.problem},
                           {"size", r.size},
                           {"it", r.it},
                           {"res", format_res(r.res)},
                           {"wall_seconds", r.wall_seconds},
                           {"converged", r.converged},
                           {"params", p}});
        }
        out << arr.dump(2) << '\n';
    }
    require<Error>(static_cast<bool>(out), "report: write failed");
}

void write_report(const std::vector<ReportRecord>& records, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    require<Error>(static_cast<bool>(out), "cannot open " + path + " for writing");
    write_report(records, format, out);
}

std::vector<ReportRecord> read_report_csv(std::istream& in) {
    std::string line;
    require<ParseError>(std::getline(in, line) && line.rfind("process,problem,size,it,res,wall_seconds,params", 0) == 0,
                        "report: missing header");
    std::vector<ReportRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = csv_split(line);
        require<ParseError>(f.size() == 7, "report: expected 7 fields in '" + line + "'");
        ReportRecord r;
        r.process = f[0];
        r.problem = f[1];
        try {
            r.size = std::stoull(f[2]);
            r.it = std::stoull(f[3]);
            r.res = std::stod(f[4]);
            r.wall_seconds = std::stod(f[5]);
        } catch (const std::exception&) {
            throw ParseError("report: bad numeric field in '" + line + "'");
        }
        std::istringstream ps(f[6]);
        std::string kv;
        while (std::getline(ps, kv, ';')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
            if (k == "converged") r.converged = v == "true";
            else r.params.emplace_back(std::move(k), std::move(v));
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace pess
