#pragma once

#include <chrono>
#include <string>

namespace dv {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    bool timed_out = false;
};

// Runs `sh -c <command>`, writes stdin_data to the child's stdin, and reads
// stdout/stderr until EOF or the deadline. On timeout the child is killed.
// Throws Error only for spawn failures; protocol failures are reported via
// the result.
CommandResult run_command(const std::string& command, const std::string& stdin_data,
                          std::chrono::milliseconds timeout);

}  // namespace dv
