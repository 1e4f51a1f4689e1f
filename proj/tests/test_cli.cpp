#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "metricproto/cli.hpp"
#include "metricproto/dataset.hpp"
#include "metricproto/model_io.hpp"
#include "metricproto/models.hpp"
#include "metricproto/synthetic.hpp"

using namespace metricproto;

namespace {

int cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"metricproto"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("unknown subcommand exits 1") {
    CHECK(cli({"frobnicate"}) == 1);
    CHECK(cli({}) == 1);
}

TEST_CASE("list-families exits 0") {
    CHECK(cli({"list-families"}) == 0);
}

TEST_CASE("verify battery exits 0") {
    CHECK(cli({"verify"}) == 0);
}

TEST_CASE("fit and predict round trip on a CSV dataset") {
    write_file("cli_train.csv",
               "x1,x2,label\n0.1,0.2,1\n0.2,0.1,1\n0.15,0.3,1\n0.9,0.8,2\n0.8,0.95,2\n0.85,0.7,2\n"
               "0.05,0.1,1\n0.95,0.9,2\n");
    CHECK(cli({"fit", "--data", "cli_train.csv", "--model", "cli_model.json", "--classifier", "knn",
               "-k", "3"}) == 0);
    CHECK(cli({"predict", "--model", "cli_model.json", "--data", "cli_train.csv", "--out",
               "cli_pred.csv"}) == 0);
    const std::string out = read_file("cli_pred.csv");
    std::istringstream is(out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "x1,x2,label");
    std::vector<int> predicted;
    while (std::getline(is, line))
        predicted.push_back(std::stoi(line.substr(line.rfind(',') + 1)));
    CHECK(predicted == std::vector<int>{1, 1, 1, 2, 2, 2, 1, 2});
    std::remove("cli_train.csv");
    std::remove("cli_model.json");
    std::remove("cli_pred.csv");
}

TEST_CASE("persisted prototype model reproduces its training labels") {
    // Noiseless family, every point its own nucleus: the cell of a training
    // point contains at least that point, so prediction recovers its label.
    const auto spec = parse_family("noiseless:d=2");
    const auto data = sample(*spec, 60, 99);
    const auto model = fit_proto_nn(data, data.points, parse_metric("euclidean"));
    save_model("cli_proto.json", AnyModel{model});

    std::ostringstream csv;
    csv << "x1,x2,label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& v = *data.points[i].as_vec();
        csv << format_double(v[0]) << ',' << format_double(v[1]) << ',' << data.labels[i] << '\n';
    }
    write_file("cli_points.csv", csv.str());

    CHECK(cli({"predict", "--model", "cli_proto.json", "--data", "cli_points.csv", "--out",
               "cli_proto_pred.csv"}) == 0);
    std::istringstream is(read_file("cli_proto_pred.csv"));
    std::string line;
    std::getline(is, line);
    std::size_t i = 0;
    while (std::getline(is, line)) {
        CHECK(std::stoi(line.substr(line.rfind(',') + 1)) == data.labels[i]);
        ++i;
    }
    CHECK(i == data.size());
    std::remove("cli_proto.json");
    std::remove("cli_points.csv");
    std::remove("cli_proto_pred.csv");
}

TEST_CASE("fit validates inputs") {
    CHECK(cli({"fit", "--data", "missing.csv", "--model", "m.json"}) == 2);  // I/O error
    write_file("cli_bad.csv", "x1,label\n0.5,oops\n");
    CHECK(cli({"fit", "--data", "cli_bad.csv", "--model", "m.json"}) == 2);
    std::remove("cli_bad.csv");
    write_file("cli_tiny.csv", "x1,label\n0.5,1\n0.6,2\n");
    CHECK(cli({"fit", "--data", "cli_tiny.csv", "--model", "m.json", "--classifier", "nope"}) == 1);
    std::remove("cli_tiny.csv");
}

TEST_CASE("rates subcommand produces CSV and summary") {
    write_file("cli_cfg.json",
               R"json({"family":"margin:beta=1.0","classifier":"knn","metric":"euclidean",
                 "n_grid":[32,64,128],"k_schedule":"floor(pow(n,2/3))",
                 "trials":2,"test_points":500,"seed":17})json");
    CHECK(cli({"rates", "--config", "cli_cfg.json", "--out", "cli_rates.csv", "--summary",
               "cli_summary.json"}) == 0);
    std::istringstream is(read_file("cli_rates.csv"));
    std::string header;
    std::getline(is, header);
    CHECK(header == "n,trial,k,m,risk,bayes_risk,excess,stderr");
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 6);
    const std::string summary = read_file("cli_summary.json");
    CHECK(summary.find("\"slope\"") != std::string::npos);
    CHECK(summary.find("\"theoretical_exponent\"") != std::string::npos);
    CHECK(summary.find("\"mean_excess\"") != std::string::npos);

    CHECK(cli({"rates", "--config", "nope.json", "--out", "x.csv"}) == 2);
    write_file("cli_cfg_bad.json", "{\"family\":\"linear1d\"}");
    CHECK(cli({"rates", "--config", "cli_cfg_bad.json", "--out", "x.csv"}) == 1);
    std::remove("cli_cfg.json");
    std::remove("cli_cfg_bad.json");
    std::remove("cli_rates.csv");
    std::remove("cli_summary.json");
}

TEST_CASE("regression fit and truncated predict through the CLI") {
    std::ostringstream csv;
    csv << "x1,label\n";
    for (int i = 0; i < 50; ++i) csv << 0.01 * i << ',' << 0.5 + 0.01 * i << '\n';
    write_file("cli_reg.csv", csv.str());
    CHECK(cli({"fit", "--data", "cli_reg.csv", "--model", "cli_reg.json", "--classifier",
               "regressor", "--task", "regression"}) == 0);
    CHECK(cli({"predict", "--model", "cli_reg.json", "--data", "cli_reg.csv", "--out",
               "cli_reg_pred.csv", "--truncated"}) == 0);
    std::istringstream is(read_file("cli_reg_pred.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "x1,label");
    std::remove("cli_reg.csv");
    std::remove("cli_reg.json");
    std::remove("cli_reg_pred.csv");
}
