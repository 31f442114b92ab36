#pragma once

namespace owmm {

// Entry point of the `owmm` command line tool. Returns the process exit
// code: 0 success, 1 usage error, 2 infrastructure failure (I/O, network,
// ports), 3 validation failure (malformed or inconsistent data).
int run_cli(int argc, const char* const* argv);

}  // namespace owmm
