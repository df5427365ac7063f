#include "helpers.hpp"

#include "pdc/analyze.hpp"
#include "pdc/simbench.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pdc;

namespace {

CsvTable parse(const std::string& text, const std::string& name = "in.csv") {
    std::istringstream in(text);
    return read_csv(in, name);
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

// Labeled and unlabeled tables drawn from the simulation DGP with the
// Setting 5 predictor as column "pred".
std::pair<CsvTable, CsvTable> synthetic(std::uint64_t seed, Index n, Index N) {
    const sim::Beta beta{9.0, -1.0, -2.0, -2.0};
    const sim::Population pop = sim::generate_population(sim::DgpSpec{beta, n, N, seed});
    const auto model = sim::setting_models(sim::SettingSpec{5, 0.0}, beta)[0];
    Rng rng(0);
    const Vector pl = model.predict(pop.labeled.x(), rng);
    const Vector pu = model.predict(pop.unlabeled.x(), rng);
    std::ostringstream lab;
    lab.precision(17);
    lab << "x1,x2,x3,x4,y,pred\n";
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < 4; ++j) lab << pop.labeled.x()(i, j) << ',';
        lab << pop.labeled.y()[i] << ',' << pl[i] << '\n';
    }
    std::ostringstream unl;
    unl.precision(17);
    unl << "x1,x2,x3,x4,pred\n";
    for (Index i = 0; i < N; ++i) {
        for (Index j = 0; j < 4; ++j) unl << pop.unlabeled.x()(i, j) << ',';
        unl << pu[i] << '\n';
    }
    return {parse(lab.str(), "labeled.csv"), parse(unl.str(), "unlabeled.csv")};
}

}  // namespace

TEST_CASE("read_csv") {
    const CsvTable t = parse("# comment\n\na, b ,c\n1,2,3\n\n4,,6.5e1\n# trailing\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.lines == std::vector<int>{4, 6});
    CHECK(*t.rows[1][2] == 65.0);
    CHECK_FALSE(t.rows[1][1].has_value());
    CHECK(t.column("c") == 2);
    CHECK(t.has_column("b"));
    CHECK_FALSE(t.has_column("z"));

    CHECK(error_of([] { parse("a,b\n1,x\n"); }).find("in.csv:2") != std::string::npos);
    CHECK(error_of([] { parse("a,b\n1,2\n1,2,3\n"); }).find("in.csv:3") != std::string::npos);
    CHECK(error_of([] { parse("a,a\n1,2\n"); }).find("duplicate") != std::string::npos);
    CHECK_THROWS_AS(parse(""), InvalidArgument);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), InvalidArgument);
}

TEST_CASE("missing response cell is reported with its line number") {
    std::string text = "x,y,pred\n";
    for (int i = 0; i < 30; ++i) {
        // Header is line 1, so row i sits on line i + 2; line 17 lacks y.
        text += std::to_string(i) + "," + (i + 2 == 17 ? std::string() : std::to_string(2 * i)) + "," +
                std::to_string(2 * i + 1) + "\n";
    }
    const CsvTable lab = parse(text, "labeled.csv");
    const CsvTable unl = parse("x,pred\n1,2\n3,7\n", "unlabeled.csv");
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"pred"};
    const std::string msg = error_of([&] { analyze_tables(lab, unl, cfg); });
    CHECK(msg.find("labeled.csv:17") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
}

TEST_CASE("schema errors") {
    const CsvTable lab = parse("x,y,pred\n1,2,3\n2,3,4\n3,5,5\n4,4,4\n");
    const CsvTable unl = parse("x,pred\n1,2\n", "u.csv");
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"nope"};
    CHECK(error_of([&] { analyze_tables(lab, unl, cfg); }).find("nope") != std::string::npos);
    cfg.predictions = {"pred"};
    cfg.response = "missing";
    CHECK_THROWS_AS(analyze_tables(lab, unl, cfg), InvalidArgument);
    cfg.response = "y";
    const CsvTable unl_bad = parse("z,pred\n1,2\n", "u.csv");
    CHECK(error_of([&] { analyze_tables(lab, unl_bad, cfg); }).find("u.csv") != std::string::npos);

    // d = 2 with the intercept needs at least 4 labeled rows.
    cfg.add_intercept = true;
    CHECK_NOTHROW(analyze_tables(lab, unl, cfg));
    const CsvTable short_lab = parse("x,y,pred\n1,2,3\n2,3,4\n3,5,5\n");
    CHECK_THROWS_AS(analyze_tables(short_lab, unl, cfg), InsufficientData);

    cfg.target = Target::logistic;
    CHECK(error_of([&] { analyze_tables(lab, unl, cfg); }).find("0 or 1") != std::string::npos);
    cfg.predictions = {"pred", "pred", "pred"};
    CHECK_THROWS_AS(analyze_tables(lab, unl, cfg), InvalidArgument);
    CHECK_THROWS_AS(parse_target("poisson"), InvalidArgument);
    CHECK(target_name(parse_target("logistic")) == "logistic");
}

TEST_CASE("mean target gives a single-row table") {
    const CsvTable lab = parse("y,pred\n1,1\n2,1\n3,3\n4,3\n");
    const CsvTable unl = parse("pred\n3\n3\n");
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"pred"};
    cfg.target = Target::mean;
    const AnalyzeResult r = analyze_tables(lab, unl, cfg);
    CHECK(r.coefficients == std::vector<std::string>{"Mean"});
    CHECK(r.rows.size() == 4);
    CHECK(r.at("Mean", "supervised").estimate == 2.5);
    CHECK(r.at("Mean", "supervised").wr == 1.0);
    CHECK(r.at("Mean", "ppi").estimate == 3.5);
    CHECK(r.at("Mean", "supervised").sd == doctest::Approx(std::sqrt(1.25 / 4.0)));
}

TEST_CASE("synthetic Setting 5 data: PDC never widens any coefficient") {
    const auto [lab, unl] = synthetic(2024, 500, 2000);
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"pred"};
    const AnalyzeResult r = analyze_tables(lab, unl, cfg);
    CHECK(r.coefficients == std::vector<std::string>{"x1", "x2", "x3", "x4"});
    for (const auto& c : r.coefficients) {
        CHECK(r.at(c, "pdc").wr <= 1.0 + 1e-9);
        CHECK(r.at(c, "pdc").error.empty());
        const AnalyzeRow& s = r.at(c, "supervised");
        CHECK(s.ci_lo < s.estimate);
        CHECK(s.estimate < s.ci_hi);
    }

    cfg.add_intercept = true;
    const AnalyzeResult with_icpt = analyze_tables(lab, unl, cfg);
    CHECK(with_icpt.coefficients.front() == "Intercept");
    CHECK(with_icpt.coefficients.size() == 5);
}

TEST_CASE("two prediction columns feed PDC jointly") {
    const auto [lab1, unl1] = synthetic(7, 300, 900);
    // Append a second, noisier prediction column.
    auto widen = [](const CsvTable& t, std::uint64_t seed) {
        CsvTable out = t;
        out.header.push_back("pred2");
        Rng rng(seed);
        std::normal_distribution<double> normal(0.0, 3.0);
        const std::size_t pc = t.column("pred");
        for (auto& row : out.rows) row.push_back(*row[pc] + normal(rng));
        return out;
    };
    const CsvTable lab = widen(lab1, 1);
    const CsvTable unl = widen(unl1, 2);
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"pred", "pred2"};
    const AnalyzeResult two = analyze_tables(lab, unl, cfg);
    cfg.predictions = {"pred"};
    const AnalyzeResult one = analyze_tables(lab1, unl1, cfg);
    CHECK(two.coefficients == std::vector<std::string>{"x1", "x2", "x3", "x4"});
    CHECK(two.at("x1", "pdc").estimate != one.at("x1", "pdc").estimate);
    CHECK(two.at("x1", "ppi").estimate == one.at("x1", "ppi").estimate);
    for (const auto& c : two.coefficients) CHECK(two.at(c, "pdc").wr <= 1.0 + 1e-9);
}

TEST_CASE("analyze CSV output") {
    const CsvTable lab = parse("y,pred\n1,1\n2,1\n3,3\n4,3\n");
    const CsvTable unl = parse("pred\n3\n3\n");
    AnalyzeConfig cfg;
    cfg.response = "y";
    cfg.predictions = {"pred"};
    cfg.target = Target::mean;
    const AnalyzeResult r = analyze_tables(lab, unl, cfg);
    std::ostringstream out;
    write_analyze_csv(out, r, {{"target", "mean"}});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# target=mean");
    std::getline(in, line);
    CHECK(line == "coefficient,method,estimate,sd,ci_lo,ci_hi,wr");
    std::getline(in, line);
    CHECK(line.rfind("Mean,supervised,2.5,", 0) == 0);

    std::ostringstream table;
    print_analyze_table(table, r);
    CHECK(table.str().find("Mean") != std::string::npos);
}
