#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

namespace polymerflow {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string file_digest(const std::filesystem::path& path);

// CSV with a frozen numeric format (17 significant digits, '.' decimal,
// '\n' line ends) so identical runs produce identical bytes.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, std::span<const std::string> header);
    void row(std::span<const double> values);
    void row(std::initializer_list<double> values);
    void close();

  private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

std::string format_number(double x);  // %.17g

struct RunManifest {
    std::string command;
    std::string code_version = kVersion;
    std::uint64_t master_seed = 0;
    int workers = 1;
    nlohmann::json config_snapshot;
    std::string started;
    std::string finished;
    std::map<std::string, std::string> output_digests;

    void record_output(const std::filesystem::path& path);
    void write(const std::filesystem::path& path) const;
};

std::string timestamp_utc();

}  // namespace polymerflow
