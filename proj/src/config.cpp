#include "polymerflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace polymerflow {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"run", {"seed", "workers", "out"}},
        {"sim",
         {"J", "T", "dt", "obs_stride", "modes", "grid", "u0", "tilt", "noise", "paths",
          "tail_budget", "energy"}},
        {"local_time", {"bin_width", "kernel_bandwidth"}},
        {"gibbs",
         {"beta", "sweeps", "chains", "pcn_step", "target_acceptance", "keep_max"}},
        {"kernel_check",
         {"t_values", "J_values", "grid_probe", "n_max_override", "quadrature_cells"}},
        {"pinned",
         {"draws", "modes", "grid", "probe_pairs", "tilt", "kernel_bandwidth",
          "shift_t1", "shift_t2", "shift_samples"}},
        {"i1", {"a_values"}},
        {"ldp",
         {"gamma", "c", "T_values", "samples", "dt", "coupling_mode", "coupling_T",
          "coupling_samples"}},
        {"sweep",
         {"J_values", "beta", "t_unit", "sweeps", "chains", "allow_mixed_h", "paths",
          "modes", "grid", "dt"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                throw ConfigError(lineno, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected key = value");
        if (section.empty()) throw ConfigError(lineno, "key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "empty key");
        if (!schema().at(section).count(key))
            throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]");
        if (cfg.values_[section].count(key))
            throw ConfigError(lineno, "duplicate key '" + key + "'");
        cfg.values_[section][key] = value;
        cfg.lines_[section + "." + key] = lineno;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

const std::string* Config::find(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void Config::bad_value(const std::string& section, const std::string& key,
                       const std::string& why) const {
    auto it = lines_.find(section + "." + key);
    throw ConfigError(it == lines_.end() ? 0 : it->second,
                      "[" + section + "] " + key + ": " + why);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double x = std::stod(*v, &used);
        if (used != v->size()) bad_value(section, key, "not a number: " + *v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(section, key, "not a number: " + *v);
    }
}

long Config::get_long(const std::string& section, const std::string& key,
                      long fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const long x = std::stol(*v, &used);
        if (used != v->size()) bad_value(section, key, "not an integer: " + *v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(section, key, "not an integer: " + *v);
    }
}

unsigned long long Config::get_u64(const std::string& section, const std::string& key,
                                   unsigned long long fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(*v, &used);
        if (used != v->size()) bad_value(section, key, "not an unsigned integer: " + *v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(section, key, "not an unsigned integer: " + *v);
    }
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return std::tolower(c);
    });
    if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
    if (s == "off" || s == "false" || s == "no" || s == "0") return false;
    bad_value(section, key, "expected on/off: " + *v);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_value(section, key, "empty list entry");
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) bad_value(section, key, "not a number: " + item);
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            bad_value(section, key, "not a number: " + item);
        }
    }
    if (out.empty()) bad_value(section, key, "empty list");
    return out;
}

}  // namespace polymerflow
