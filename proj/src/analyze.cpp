#include "pdc/analyze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace pdc {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string where(const CsvTable& t, std::size_t row) {
    return t.source + ":" + std::to_string(t.lines[row]);
}

double cell(const CsvTable& t, std::size_t row, std::size_t col) {
    const auto& v = t.rows[row][col];
    if (!v) {
        throw InvalidArgument(where(t, row) + ": missing value in column '" + t.header[col] + "'");
    }
    return *v;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw InvalidArgument(source + ": no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    table.source = source;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string> cells = split_line(t);
        if (!have_header) {
            for (const auto& name : cells) {
                if (name.empty()) {
                    throw InvalidArgument(source + ":" + std::to_string(line_no) + ": empty column name in header");
                }
                if (std::find(table.header.begin(), table.header.end(), name) != table.header.end()) {
                    throw InvalidArgument(source + ":" + std::to_string(line_no) + ": duplicate column '" + name +
                                          "'");
                }
                table.header.push_back(name);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw InvalidArgument(source + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(cells.size()));
        }
        std::vector<std::optional<double>> row;
        row.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string& c = cells[j];
            if (c.empty() || c == "NA" || c == "NaN" || c == "nan") {
                row.emplace_back();
                continue;
            }
            double v = 0.0;
            const char* begin = c.data();
            const char* end = begin + c.size();
            if (*begin == '+') ++begin;
            const auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
                throw InvalidArgument(source + ":" + std::to_string(line_no) + ": non-numeric value '" + c +
                                      "' in column '" + table.header[j] + "'");
            }
            row.emplace_back(v);
        }
        table.rows.push_back(std::move(row));
        table.lines.push_back(line_no);
    }
    if (!have_header) {
        throw InvalidArgument(source + ": no header row");
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open " + path);
    }
    return read_csv(in, path);
}

Target parse_target(const std::string& name) {
    if (name == "mean") return Target::mean;
    if (name == "linear") return Target::linear;
    if (name == "logistic") return Target::logistic;
    throw InvalidArgument("target must be mean, linear or logistic, got '" + name + "'");
}

std::string target_name(Target target) {
    switch (target) {
        case Target::mean:
            return "mean";
        case Target::linear:
            return "linear";
        default:
            return "logistic";
    }
}

const AnalyzeRow& AnalyzeResult::at(const std::string& coefficient, const std::string& method) const {
    for (const auto& r : rows) {
        if (r.coefficient == coefficient && r.method == method) return r;
    }
    throw InvalidArgument("no result for " + coefficient + " / " + method);
}

AnalyzeResult analyze_tables(const CsvTable& labeled, const CsvTable& unlabeled, const AnalyzeConfig& config) {
    if (config.predictions.empty() || config.predictions.size() > 2) {
        throw InvalidArgument("analyze: give one or two prediction columns");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw InvalidArgument("analyze: alpha must be in (0, 1)");
    }
    const std::size_t response = labeled.column(config.response);
    std::vector<std::size_t> pred_lab;
    std::vector<std::size_t> pred_unlab;
    for (const auto& name : config.predictions) {
        if (name == config.response) {
            throw InvalidArgument("analyze: prediction column equals the response column");
        }
        pred_lab.push_back(labeled.column(name));
        pred_unlab.push_back(unlabeled.column(name));
    }

    std::vector<std::string> features;
    if (config.target != Target::mean) {
        for (const auto& name : labeled.header) {
            if (name == config.response ||
                std::find(config.predictions.begin(), config.predictions.end(), name) != config.predictions.end()) {
                continue;
            }
            features.push_back(name);
        }
        if (features.empty() && !config.add_intercept) {
            throw InvalidArgument("analyze: no feature columns for a regression target");
        }
    }
    std::vector<std::size_t> feat_lab;
    std::vector<std::size_t> feat_unlab;
    for (const auto& name : features) {
        feat_lab.push_back(labeled.column(name));
        feat_unlab.push_back(unlabeled.column(name));
    }

    const Index offset = config.add_intercept && config.target != Target::mean ? 1 : 0;
    const Index p = static_cast<Index>(features.size()) + offset;
    const Index d = config.target == Target::mean ? 1 : p;
    const auto n = static_cast<Index>(labeled.rows.size());
    const auto N = static_cast<Index>(unlabeled.rows.size());
    if (n < d + 2) {
        throw InsufficientData(labeled.source + ": need at least " + std::to_string(d + 2) +
                               " labeled rows, found " + std::to_string(n));
    }
    if (N < 1) {
        throw InsufficientData(unlabeled.source + ": no unlabeled rows");
    }

    const auto k = static_cast<Index>(config.predictions.size());
    Matrix x(n, p);
    Vector y(n);
    Matrix preds(n, k);
    for (Index i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (offset) x(i, 0) = 1.0;
        for (std::size_t j = 0; j < feat_lab.size(); ++j) x(i, offset + static_cast<Index>(j)) = cell(labeled, r, feat_lab[j]);
        y[i] = cell(labeled, r, response);
        for (Index j = 0; j < k; ++j) preds(i, j) = cell(labeled, r, pred_lab[static_cast<std::size_t>(j)]);
        if (config.target == Target::logistic && y[i] != 0.0 && y[i] != 1.0) {
            throw InvalidArgument(where(labeled, r) + ": logistic response must be 0 or 1");
        }
    }
    Matrix xu(N, p);
    Matrix preds_u(N, k);
    for (Index i = 0; i < N; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (offset) xu(i, 0) = 1.0;
        for (std::size_t j = 0; j < feat_unlab.size(); ++j) {
            xu(i, offset + static_cast<Index>(j)) = cell(unlabeled, r, feat_unlab[j]);
        }
        for (Index j = 0; j < k; ++j) preds_u(i, j) = cell(unlabeled, r, pred_unlab[static_cast<std::size_t>(j)]);
    }

    const EstimatingFunction spec = config.target == Target::mean     ? mean_spec()
                                    : config.target == Target::linear ? linear_spec(p)
                                                                      : logistic_spec(p);
    LabeledDataset lab(x, y);
    const PredictiveScore all_cols = score_from_columns(spec, k);
    const PredictiveScore first_col = score_from_columns(spec, 1);
    const PdcProblem combined(lab, spec, BoundScore(all_cols, x, preds), BoundScore(all_cols, xu, preds_u));
    const PdcProblem single(lab, spec, BoundScore(first_col, x, preds.leftCols(1)),
                            BoundScore(first_col, xu, preds_u.leftCols(1)));

    AnalyzeResult result;
    result.n = n;
    result.N = N;
    if (config.target == Target::mean) {
        result.coefficients.push_back("Mean");
    } else {
        if (offset) result.coefficients.push_back("Intercept");
        result.coefficients.insert(result.coefficients.end(), features.begin(), features.end());
    }
    result.methods = {"supervised", "pdc", "ppi_pp", "ppi"};

    const Theta sup = supervised_fit(lab, spec);
    const OneStepOptions opts{sup};
    PdcConfig pdc_config;
    pdc_config.variance_at = sup;

    std::vector<double> sup_sd(static_cast<std::size_t>(d), kNaN);
    for (const auto& method : result.methods) {
        std::optional<PdcFit> fit;
        std::string error;
        try {
            if (method == "supervised") {
                fit = supervised_one_step(lab, spec, sup, opts);
            } else if (method == "pdc") {
                fit = pdc_one_step(combined, sup, pdc_config);
            } else if (method == "ppi_pp") {
                fit = ppi_pp_one_step(single, sup, opts);
            } else {
                fit = ppi_one_step(single, sup, opts);
            }
        } catch (const Error& e) {
            error = e.what();
        }
        for (Index c = 0; c < d; ++c) {
            AnalyzeRow row;
            row.coefficient = result.coefficients[static_cast<std::size_t>(c)];
            row.method = method;
            if (!fit) {
                row.estimate = row.sd = row.ci_lo = row.ci_hi = row.wr = kNaN;
                row.error = error;
            } else {
                Vector contrast = Vector::Zero(d);
                contrast[c] = 1.0;
                const ConfidenceInterval ci = confidence_interval(*fit, contrast, config.alpha);
                row.estimate = fit->theta_hat[c];
                row.sd = contrast_sd(*fit, contrast);
                row.ci_lo = ci.lower;
                row.ci_hi = ci.upper;
                if (method == "supervised") sup_sd[static_cast<std::size_t>(c)] = row.sd;
                const double base = sup_sd[static_cast<std::size_t>(c)];
                row.wr = base > 0.0 ? row.sd / base : kNaN;
            }
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

void write_analyze_csv(std::ostream& out, const AnalyzeResult& result,
                       const std::map<std::string, std::string>& echo) {
    for (const auto& [key, value] : echo) {
        out << "# " << key << '=' << value << '\n';
    }
    out << "coefficient,method,estimate,sd,ci_lo,ci_hi,wr\n";
    std::ostringstream line;
    line << std::setprecision(12);
    for (const auto& r : result.rows) {
        line.str("");
        line << r.coefficient << ',' << r.method << ',' << r.estimate << ',' << r.sd << ',' << r.ci_lo << ','
             << r.ci_hi << ',' << r.wr << '\n';
        out << line.str();
    }
}

void print_analyze_table(std::ostream& out, const AnalyzeResult& result) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3);
    s << std::left << std::setw(20) << "coefficient";
    for (const auto& m : result.methods) {
        s << std::right << std::setw(12) << (m + " est") << std::setw(10) << "SD";
        if (m != "supervised") s << std::setw(8) << "WR";
    }
    s << '\n';
    for (const auto& c : result.coefficients) {
        s << std::left << std::setw(20) << c << std::right;
        for (const auto& m : result.methods) {
            const AnalyzeRow& r = result.at(c, m);
            s << std::setw(12) << r.estimate << std::setw(10) << r.sd;
            if (m != "supervised") s << std::setw(8) << r.wr;
        }
        s << '\n';
    }
    s << "n = " << result.n << ", N = " << result.N << '\n';
    out << s.str();
}

}  // namespace pdc
