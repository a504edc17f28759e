#include "projcvm/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "projcvm/errors.hpp"

namespace projcvm {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, const std::string& path, std::size_t line_no) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

SampleMatrix read_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool skip_first = header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (skip_first) {
            skip_first = false;
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        for (;;) {
            const std::size_t comma = rest.find(',');
            row.push_back(parse_field(rest.substr(0, comma), path, line_no));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && rows.front().size() != row.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    SampleMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index j = 0; j < out.cols(); ++j) {
            out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return out;
}

void write_csv(const std::string& path, const SampleMatrix& data) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    std::ostringstream line;
    line.precision(17);
    for (Index i = 0; i < data.rows(); ++i) {
        line.str("");
        for (Index j = 0; j < data.cols(); ++j) {
            if (j > 0) line << ',';
            line << data(i, j);
        }
        out << line.str() << '\n';
    }
}

}  // namespace projcvm
