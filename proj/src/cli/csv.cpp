#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

#include "spl/cli.hpp"
#include "spl/errors.hpp"

namespace spl::cli {

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    out_ << schema_line << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

void CsvWriter::separate() {
    if (filled_ == columns_) throw StateError("CsvWriter: too many values in row");
    if (filled_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double x) {
    separate();
    out_ << format_number(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long x) {
    separate();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
    separate();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw StateError("CsvWriter: incomplete row");
    out_ << "\n";
    filled_ = 0;
}

std::vector<double> read_potential_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read potential file " + path.string());
    std::vector<double> out;
    std::string line;
    std::optional<std::size_t> column;
    bool first = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            const auto it = std::find(cells.begin(), cells.end(), "V");
            if (it != cells.end()) {
                column = static_cast<std::size_t>(it - cells.begin());
                continue;
            }
            char* end = nullptr;
            std::strtod(cells.empty() ? "" : cells.back().c_str(), &end);
            if (cells.empty() || end == cells.back().c_str()) continue;  // header without V
        }
        const std::size_t c = column.value_or(cells.size() - 1);
        char* end = nullptr;
        const double x = c < cells.size() ? std::strtod(cells[c].c_str(), &end) : 0.0;
        if (c >= cells.size() || end == cells[c].c_str()) {
            std::ostringstream os;
            os << path.string() << ":" << lineno << ": no potential value";
            throw ConfigError(os.str());
        }
        out.push_back(x);
    }
    return out;
}

} // namespace spl::cli
