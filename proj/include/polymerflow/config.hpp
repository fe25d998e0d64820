#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace polymerflow {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line_) + ": " + what),
          line(line_) {}
};

// Flat "[section] key = value" text config. Every key must appear in the
// built-in schema; typos are hard errors, not silent defaults.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    unsigned long long get_u64(const std::string& section, const std::string& key,
                               unsigned long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return values_;
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::map<std::string, int> lines_;  // "section.key" -> line, for error reports

    const std::string* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void bad_value(const std::string& section, const std::string& key,
                                const std::string& why) const;
};

}  // namespace polymerflow
