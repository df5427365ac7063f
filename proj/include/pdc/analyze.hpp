#pragma once

#include "pdc/baselines.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pdc {

/// Numeric CSV with a header row. Blank lines and lines starting with '#'
/// are skipped; empty cells are kept as nullopt.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
    /// 1-based physical line of each row in the source.
    std::vector<int> lines;

    /// Throws InvalidArgument naming the source when `name` is absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/// Parse errors carry the source name and line number.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

enum class Target { mean, linear, logistic };

Target parse_target(const std::string& name);
std::string target_name(Target target);

struct AnalyzeConfig {
    std::string response;
    /// One or two prediction columns; two are combined with concat_scores.
    std::vector<std::string> predictions;
    Target target = Target::linear;
    double alpha = 0.1;
    /// Prepends a constant column named "Intercept" to the features.
    bool add_intercept = false;
};

struct AnalyzeRow {
    std::string coefficient;
    std::string method;
    double estimate = 0.0;
    double sd = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    /// sd / supervised sd for the same coefficient.
    double wr = 0.0;
    /// Non-empty when the method failed; numeric fields are NaN.
    std::string error;
};

struct AnalyzeResult {
    std::vector<std::string> coefficients;
    std::vector<std::string> methods;
    std::vector<AnalyzeRow> rows;
    Index n = 0;
    Index N = 0;

    const AnalyzeRow& at(const std::string& coefficient, const std::string& method) const;
};

/// Features are the columns of the labeled file other than the response and
/// the prediction columns (none for the mean target). Methods: supervised,
/// pdc (all prediction columns), ppi_pp and ppi (first prediction column),
/// all started from and evaluated at the supervised fit.
AnalyzeResult analyze_tables(const CsvTable& labeled, const CsvTable& unlabeled, const AnalyzeConfig& config);

/// coefficient,method,estimate,sd,ci_lo,ci_hi,wr after "# key=value" lines.
void write_analyze_csv(std::ostream& out, const AnalyzeResult& result,
                       const std::map<std::string, std::string>& echo);

/// One line per coefficient: estimate and SD per method, WR for the others.
void print_analyze_table(std::ostream& out, const AnalyzeResult& result);

}  // namespace pdc
