#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fnfleet {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `program` (looked up on PATH unless it contains a slash) to
/// completion, feeding `input` on stdin. Throws std::system_error if it
/// cannot be started.
ProcessResult run_process(const std::string& program, const std::vector<std::string>& args,
                          std::string_view input = {});

} // namespace fnfleet
