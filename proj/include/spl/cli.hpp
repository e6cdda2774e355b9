#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "spl/grids.hpp"

namespace spl::cli {

// Resolved run configuration: every known key has a value (its default
// until overridden by a config file or a flag). Keys are validated on set,
// values when they are read.
class RunConfig {
public:
    RunConfig();

    // Known keys with their defaults and one-line help, in output order.
    struct Key {
        const char* name;
        const char* value;
        const char* help;
    };
    static const std::vector<Key>& keys();

    void set(const std::string& key, const std::string& value);
    // key = value lines; blank lines and '#' comments are skipped.
    void load_file(const std::filesystem::path& path);
    void write(const std::filesystem::path& path) const;

    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;

private:
    std::map<std::string, std::string> values_;
};

inline constexpr const char* schema_line = "# spectral-potential-lab schema v1";

// CSV with the schema comment and a fixed header; numbers are written with
// 17 significant digits so reruns are byte-identical.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long long x);
    CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(std::size_t x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(const std::string& s);
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
    void end_row();

private:
    void separate();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

std::string format_number(double x);

// One value per data row: the column named V if there is a header, the last
// column otherwise. '#' lines are skipped.
std::vector<double> read_potential_csv(const std::filesystem::path& path);

GridPtr make_grid(const RunConfig& cfg);

void cmd_eig(const RunConfig& cfg);
void cmd_modes(const RunConfig& cfg);
void cmd_hessian_check(const RunConfig& cfg);
void cmd_optimize(const RunConfig& cfg);
void cmd_deficit(const RunConfig& cfg);

// 0 success, 2 configuration, 3 infeasible parameters, 4 solver failure.
int exit_code_for(const std::exception& e);

int run(int argc, char** argv);

} // namespace spl::cli
