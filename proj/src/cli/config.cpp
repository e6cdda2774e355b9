#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spl/cli.hpp"
#include "spl/errors.hpp"

namespace spl::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, s, "a number");
    return x;
}

long long parse_integer(const std::string& key, const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, s, "an integer");
    return x;
}

} // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
    static const std::vector<Key> k = {
        {"geometry", "interval", "interval | disk | polar"},
        {"a", "-1", "interval left end"},
        {"b", "1", "interval right end"},
        {"R", "1", "disk radius"},
        {"n", "auto", "interval/radial node count (auto: 2047 interval, 2048 disk, 4096 for modes and hessian-check)"},
        {"nr", "128", "polar radial cells"},
        {"ntheta", "128", "polar angular cells"},
        {"v0", "0.6", "mass fraction of the potential"},
        {"potential", "ball", "eig: ball | annulus | file"},
        {"potential_file", "", "eig: CSV holding the potential (column V, or the last column)"},
        {"delta", "0.05", "eig: L1 distance of the annulus potential"},
        {"deltas", "0.01,0.02,0.05", "optimize: distance constraints"},
        {"modes", "64", "modes: largest Fourier mode K"},
        {"g", "cos1,cos2,sin3", "hessian-check: perturbations cosK / sinK"},
        {"ts", "0.04,0.02,0.01", "hessian-check: decreasing finite-difference steps"},
        {"subslices", "8", "boundary samples per angular cell"},
        {"plan", "annulus:50:0.02:0.3,radial-random:50:0.02:0.3,polar-random:50:0.02:0.3,normal-deformation:50:0.01:0.08",
         "deficit: family:count:size_lo:size_hi entries"},
        {"seed", "20240601", "deficit: random seed"},
        {"tol", "1e-8", "eigen-solver relative residual tolerance"},
        {"solver_max_iter", "1000", "eigen-solver iteration cap"},
        {"max_iter", "100", "optimize: fixed-point iteration cap"},
        {"remark3", "false", "optimize: interval preset v0 = 0.6, deltas 0.1,0.2,0.4,0.8"},
        {"threads", "0", "OpenMP thread cap (0: SPL_THREADS or runtime default)"},
        {"out", "out", "output directory"},
    };
    return k;
}

RunConfig::RunConfig() {
    for (const auto& k : keys()) values_[k.name] = k.value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = trim(value);
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path.string() << ":" << lineno << ": malformed config key '" << t << "' (expected key = value)";
            throw ConfigError(os.str());
        }
        set(trim(t.substr(0, eq)), t.substr(eq + 1));
    }
}

void RunConfig::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << schema_line << "\n";
    for (const auto& k : keys()) out << k.name << " = " << values_.at(k.name) << "\n";
}

const std::string& RunConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_double(key, text(key)); }

int RunConfig::integer(const std::string& key) const {
    const long long x = parse_integer(key, text(key));
    if (x < -2147483647LL || x > 2147483647LL) bad_value(key, text(key), "an int");
    return static_cast<int>(x);
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
    const std::string& s = text(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE)
        bad_value(key, s, "a nonnegative integer");
    return x;
}

bool RunConfig::flag(const std::string& key) const {
    const std::string& s = text(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad_value(key, s, "true or false");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(parse_double(key, s));
    return out;
}

} // namespace spl::cli
