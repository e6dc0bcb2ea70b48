#pragma once

#include <CLI11.hpp>

#include <pcreg/geom.hpp>

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace pcreg::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad flags
  kDataError = 2,  // unreadable or malformed input
  kNoResult = 3,   // inputs fine but nothing to produce (e.g. empty pair pool)
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  int exit_code = kOk;
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Declares --config on a subcommand (for help and validation). The file is
/// expanded by expand_config before parsing.
void add_config_option(CLI::App& sub);

/// Replaces `--config FILE` with the file's `key=value` lines as `--key=value`
/// arguments placed ahead of every other flag, so flags given on the command
/// line win. Blank lines and lines starting with '#' or ';' are skipped.
/// Throws FormatError for an unreadable file or a line without '='.
std::vector<std::string> expand_config(std::vector<std::string> args);

void add_register_command(CLI::App& app, Context& ctx);
void add_benchgen_command(CLI::App& app, Context& ctx);
void add_eval_command(CLI::App& app, Context& ctx);
void add_synth_command(CLI::App& app, Context& ctx);

// Dataset layout: <dir>/<sequence>/<frame:06d>.<ext>
std::filesystem::path frame_path(const std::filesystem::path& dir, const std::string& sequence,
                                 std::size_t frame, const std::string& ext);

/// Loads <dir>/<sequence>/<frame>.bin, falling back to .ply. The error names
/// the .bin path when neither exists.
PointCloud load_frame_cloud(const std::filesystem::path& dir, const std::string& sequence,
                            std::size_t frame);

/// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, const std::string& content, std::ostream& fallback);

}  // namespace pcreg::cli
