#include "oritube/detail/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "oritube/error.hpp"

namespace oritube::detail {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int CsvTable::require(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
    return c;
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            t.comments.push_back(trim(s.substr(1)));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (s.back() == ',') cells.emplace_back();
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size()) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected " << t.header.size() << " cells, found " << cells.size();
            throw Error(ErrorCode::MalformedCsv, msg.str());
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            if (c.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double v = 0.0;
            const char* end = c.data() + c.size();
            auto [ptr, ec] = std::from_chars(c.data(), end, v);
            if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << "line " << lineno << ": '" << c << "' is not a number";
                throw Error(ErrorCode::MalformedCsv, msg.str());
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw Error(ErrorCode::MalformedCsv, "no header row");
    return t;
}

}  // namespace oritube::detail
