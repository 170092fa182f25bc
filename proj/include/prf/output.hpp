#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace prf {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// RFC 4180 table: header row, CRLF line ends, fields quoted when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> row);
    // Numeric row; throws NumericError on a non-finite value.
    void add_numeric_row(const std::vector<double>& row);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }

    void write(std::ostream& os) const;
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(std::string_view field);

// A gnuplot script plotting columns of a CSV on log2-log2 axes.
struct PlotSeries {
    int x_column;  // 1-based
    int y_column;
    std::string title;
};
std::string gnuplot_script(const std::string& csv_path, const std::string& output_png, const std::string& title,
                           const std::vector<PlotSeries>& series, bool log_axes);

}  // namespace prf
