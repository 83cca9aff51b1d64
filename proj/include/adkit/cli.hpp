#pragma once

namespace adkit::cli {

// Full command-line entry point: parses `adkit <subcommand> --config <path>
// [--out <dir>] [--seed <n>]`, runs the requested stage (or the whole
// pipeline for `run`), and maps errors to exit codes: 0 on success, 2 for
// configuration and usage errors, 1 for everything else.
int run(int argc, const char* const* argv);

} // namespace adkit::cli
