#include "metricproto/dataset.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace metricproto {

namespace {

[[noreturn]] void io_fail(const std::string& what) {
    throw std::ios_base::failure(what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

struct RawCsv {
    std::size_t dim = 0;
    bool has_label = false;
    std::vector<Point> points;
    std::vector<std::string> label_fields;
};

RawCsv read_rows(const std::string& path, const TableMetric* table) {
    std::ifstream in(path);
    if (!in) io_fail("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) io_fail("dataset '" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header.empty()) io_fail("dataset '" + path + "': empty header");

    RawCsv raw;
    raw.has_label = header.back() == "label";
    raw.dim = header.size() - (raw.has_label ? 1 : 0);
    if (raw.dim == 0) io_fail("dataset '" + path + "': no feature columns");
    for (std::size_t c = 0; c < raw.dim; ++c) {
        std::ostringstream expect;
        expect << "x" << (c + 1);
        if (header[c] != expect.str())
            io_fail("dataset '" + path + "': expected feature column '" + expect.str() + "', got '" +
                    header[c] + "'");
    }
    if (table && raw.dim != 1)
        io_fail("dataset '" + path + "': table metrics take a single symbol column x1");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            io_fail("dataset '" + path + "': row " + std::to_string(lineno) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(header.size()));
        if (table) {
            raw.points.push_back(table->point_for(fields[0]));
        } else {
            std::vector<double> coords(raw.dim);
            for (std::size_t c = 0; c < raw.dim; ++c)
                if (!parse_double(fields[c], coords[c]))
                    io_fail("dataset '" + path + "': bad numeric value '" + fields[c] + "' at row " +
                            std::to_string(lineno));
            raw.points.push_back(Point::vec(std::move(coords)));
        }
        if (raw.has_label) raw.label_fields.push_back(fields.back());
    }
    return raw;
}

} // namespace

LabeledDataset make_classification(std::vector<Point> points, std::vector<int> labels, int num_classes) {
    if (points.size() != labels.size())
        throw std::invalid_argument("dataset: points/labels size mismatch");
    if (num_classes < 1) throw std::invalid_argument("dataset: class count must be >= 1");
    for (const int y : labels)
        if (y < 1 || y > num_classes) throw std::invalid_argument("dataset: label out of range {1..M}");
    LabeledDataset d;
    d.points = std::move(points);
    d.labels = std::move(labels);
    d.num_classes = num_classes;
    return d;
}

LabeledDataset make_regression(std::vector<Point> points, std::vector<double> targets) {
    if (points.size() != targets.size())
        throw std::invalid_argument("dataset: points/targets size mismatch");
    for (const double y : targets)
        if (!std::isfinite(y)) throw std::invalid_argument("dataset: non-finite regression target");
    LabeledDataset d;
    d.points = std::move(points);
    d.targets = std::move(targets);
    d.num_classes = 0;
    return d;
}

LabeledDataset load_dataset_csv(const std::string& path, LabelMode mode, const TableMetric* table) {
    RawCsv raw = read_rows(path, table);
    if (!raw.has_label) io_fail("dataset '" + path + "': missing label column");

    std::vector<double> values(raw.label_fields.size());
    bool integral = true;
    for (std::size_t i = 0; i < raw.label_fields.size(); ++i) {
        if (!parse_double(raw.label_fields[i], values[i]))
            io_fail("dataset '" + path + "': bad label '" + raw.label_fields[i] + "'");
        if (values[i] != std::floor(values[i]) || values[i] < 1.0) integral = false;
    }
    const bool as_classification =
        mode == LabelMode::classification || (mode == LabelMode::automatic && integral);
    if (as_classification) {
        if (!integral)
            throw std::invalid_argument("dataset '" + path +
                                        "': classification labels must be integers >= 1");
        std::vector<int> labels(values.size());
        int max_label = 1;
        for (std::size_t i = 0; i < values.size(); ++i) {
            labels[i] = static_cast<int>(values[i]);
            max_label = std::max(max_label, labels[i]);
        }
        return make_classification(std::move(raw.points), std::move(labels), max_label);
    }
    return make_regression(std::move(raw.points), std::move(values));
}

std::vector<Point> load_points_csv(const std::string& path, const TableMetric* table) {
    return read_rows(path, table).points;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_predictions_csv(const std::string& path, std::span<const Point> points,
                          std::span<const double> predicted, bool integral_labels,
                          const TableMetric* table) {
    std::ofstream out(path);
    if (!out) io_fail("cannot write predictions to '" + path + "'");
    std::size_t dim = 1;
    if (!points.empty() && points.front().as_vec()) dim = points.front().as_vec()->size();
    for (std::size_t c = 0; c < dim; ++c) out << "x" << (c + 1) << ",";
    out << "label\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (const auto* v = points[i].as_vec()) {
            for (const double c : *v) out << format_double(c) << ",";
        } else if (const auto* id = points[i].as_cat()) {
            out << (table ? table->symbols()[static_cast<std::size_t>(*id)]
                          : std::to_string(*id))
                << ",";
        } else if (const auto* s = points[i].as_sym()) {
            out << *s << ",";
        }
        if (integral_labels)
            out << static_cast<long long>(predicted[i]) << "\n";
        else
            out << format_double(predicted[i]) << "\n";
    }
    if (!out) io_fail("error while writing '" + path + "'");
}

} // namespace metricproto
