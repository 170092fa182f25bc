#include "prf/output.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw ParameterError("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw ParameterError("CSV row width differs from the header");
    rows_.push_back(std::move(row));
}

void CsvTable::add_numeric_row(const std::vector<double>& row) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) {
        if (!std::isfinite(v)) throw NumericError("non-finite value in CSV output");
        cells.push_back(format_number(v));
    }
    add_row(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
    auto line = [&os](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(fields[i]);
        }
        os << "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

std::string gnuplot_script(const std::string& csv_path, const std::string& output_png, const std::string& title,
                           const std::vector<PlotSeries>& series, bool log_axes) {
    std::ostringstream os;
    os << "set datafile separator ','\n";
    os << "set terminal pngcairo size 900,650\n";
    os << "set output '" << output_png << "'\n";
    os << "set title '" << title << "'\n";
    os << "set key left bottom\n";
    if (log_axes) os << "set logscale xy 2\n";
    os << "plot ";
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i) os << ", \\\n     ";
        os << "'" << csv_path << "' every ::1 using " << series[i].x_column << ":" << series[i].y_column
           << " with linespoints title '" << series[i].title << "'";
    }
    os << "\n";
    return os.str();
}

}  // namespace prf
