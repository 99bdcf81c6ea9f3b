#pragma once

namespace skate {

// Entry point for the skate tool. Exit codes: 0 success, 1 usage or config
// error, 2 runtime failure (including the failed-training sentinel).
int run_cli(int argc, const char* const* argv);

}  // namespace skate
