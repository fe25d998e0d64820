#include "polymerflow/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace polymerflow {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.data(), buf.size())));
    return hex;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::span<const std::string> header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw std::runtime_error("csv row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_number(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::close() { out_.close(); }

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::record_output(const std::filesystem::path& path) {
    output_digests[path.filename().string()] = file_digest(path);
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["code_version"] = code_version;
    j["master_seed"] = master_seed;
    j["workers"] = workers;
    j["config"] = config_snapshot;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = output_digests;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace polymerflow
