#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oritube::detail {

/// Numeric CSV with a header row. Lines starting with '#' are comments
/// (kept in `comments`), empty cells read as NaN.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;

    /// Column index or -1.
    int column(const std::string& name) const;
    /// Throws MissingColumn.
    int require(const std::string& name) const;
};

/// Throws MalformedCsv.
CsvTable read_csv(std::istream& in);

std::string trim(const std::string& s);

}  // namespace oritube::detail
