#include "pcreg/cli.hpp"

#include <pcreg/io.hpp>

#include <cstdio>

namespace pcreg::cli {

std::filesystem::path frame_path(const std::filesystem::path& dir, const std::string& sequence,
                                 std::size_t frame, const std::string& ext) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu", frame);
  return dir / sequence / (std::string(name) + ext);
}

PointCloud load_frame_cloud(const std::filesystem::path& dir, const std::string& sequence,
                            std::size_t frame) {
  const auto bin = frame_path(dir, sequence, frame, ".bin");
  if (std::filesystem::exists(bin)) return read_kitti_bin(bin);
  const auto ply = frame_path(dir, sequence, frame, ".ply");
  if (std::filesystem::exists(ply)) return read_ply(ply);
  throw FormatError(FormatErrorKind::io, bin.string(), 0, "cloud file not found (.bin or .ply)");
}

void emit(const std::string& path, const std::string& content, std::ostream& fallback) {
  if (path.empty()) {
    fallback << content;
  } else {
    write_file(path, content);
  }
}

void add_config_option(CLI::App& sub) {
  sub.add_option("--config", "Flat key=value file; flags override it");
}

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    std::size_t taken = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      taken = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      taken = 1;
    } else {
      continue;
    }
    const std::string text = read_file_text(file);
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
      const std::size_t nl = std::min(text.find('\n', pos), text.size());
      std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
      };
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
        throw FormatError(FormatErrorKind::syntax, file, line_no, "expected key=value");
      }
      std::string value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      from_file.push_back("--" + trim(line.substr(0, eq)) + "=" + value);
    }
    args.erase(args.begin() + std::ptrdiff_t(i), args.begin() + std::ptrdiff_t(i + taken));
    --i;
  }
  if (from_file.empty()) return args;
  // Ahead of the first flag, i.e. right after the subcommand names.
  std::size_t at = 1;
  while (at < args.size() && !args[at].starts_with("-")) ++at;
  args.insert(args.begin() + std::ptrdiff_t(at), from_file.begin(), from_file.end());
  return args;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point cloud registration: matching, robust estimation, benchmarks"};
  app.name("pcreg");
  app.require_subcommand(1);
  // A repeated option keeps its last value, which lets flags override the
  // config file entries placed before them.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Context ctx{out, err};
  add_register_command(app, ctx);
  add_benchgen_command(app, ctx);
  add_eval_command(app, ctx);
  add_synth_command(app, ctx);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<const char*> expanded;
    for (const auto& a : args) expanded.push_back(a.c_str());
    app.parse(int(expanded.size()), expanded.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return ctx.exit_code;
}

}  // namespace pcreg::cli
