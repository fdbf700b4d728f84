#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mergemine {

struct ProcOptions {
    std::string cwd;                      // empty = inherit
    std::optional<std::string> stdin_file;
    std::int64_t timeout_ms = -1;         // <0 = no timeout
    std::vector<std::string> extra_env;   // "KEY=VALUE" entries appended
};

struct ProcResult {
    int exit_code = -1;
    bool timed_out = false;
    bool signaled = false;
    std::string out;
    std::string err;
    std::int64_t elapsed_ms = 0;
};

// Runs argv[0] with the given arguments, capturing stdout/stderr.
// On timeout the whole process group is killed with SIGKILL.
// Throws ConfigError if the executable cannot be spawned at all.
ProcResult run_process(const std::vector<std::string>& argv,
                       const ProcOptions& opts = {});

}  // namespace mergemine
