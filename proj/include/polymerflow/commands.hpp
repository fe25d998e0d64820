#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "polymerflow/config.hpp"

namespace polymerflow::cli {

struct RunContext {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 1;
    std::ostream* log = nullptr;
};

// Exit codes: 0 pass, 1 tolerance failure, 2 config error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitToleranceFailure = 1;
inline constexpr int kExitConfigError = 2;

int cmd_kernel_check(const Config& cfg, RunContext& ctx);
int cmd_free_sim(const Config& cfg, RunContext& ctx);
int cmd_pinned_check(const Config& cfg, RunContext& ctx);
int cmd_i1_curve(const Config& cfg, RunContext& ctx);
int cmd_ldp(const Config& cfg, RunContext& ctx);
int cmd_gibbs_sweep(const Config& cfg, RunContext& ctx);

// Shared helpers.
int resolve_workers(const Config& cfg, int cli_value);

}  // namespace polymerflow::cli
