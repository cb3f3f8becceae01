#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "config.hpp"
#include "experiments.hpp"
#include "raman/error.hpp"

namespace fs = std::filesystem;
using raman::cli::Config;
using raman::cli::RunContext;

namespace {

// 0 ok, 1 usage, 2 bad configuration, 3 computation failed, 4 I/O.
constexpr int kUsage = 1, kConfig = 2, kCompute = 3, kIo = 4;

int write_outputs(const fs::path& dir, const std::vector<raman::cli::OutputFile>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    fmt::print(stderr, "error: cannot create '{}': {}\n", dir.string(), ec.message());
    return kIo;
  }
  for (const auto& f : files) {
    const fs::path path = dir / f.name;
    std::ofstream out(path, std::ios::binary);
    out << f.content;
    if (!out) {
      fmt::print(stderr, "error: cannot write '{}'\n", path.string());
      return kIo;
    }
    fmt::print("wrote {}\n", path.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-photon Raman transitions in a trapped-ion qudit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool svg = false;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("-s,--set", overrides, "override one key (key=value), repeatable");
  app.add_option("--seed", seed, "random seed for synthetic data")->capture_default_str();
  app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  app.add_option("-j,--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--svg", svg, "also write SVG plots");

  bool show = false;
  auto* show_cmd = app.add_subcommand("show-config", "print the resolved configuration");
  show_cmd->callback([&] { show = true; });

  std::string chosen;
  for (const auto& cmd : raman::cli::commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->callback([&chosen, n = cmd.name] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  RunContext ctx;
  ctx.seed = seed;
  ctx.workers = workers;
  ctx.svg = svg;
  try {
    if (!config_path.empty()) ctx.config.load_file(config_path);
    ctx.config.apply_environment();
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw raman::Error(raman::ErrorKind::Config, "--set '" + kv + "': expected key=value");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
    raman::cli::validate_config(ctx.config);
  } catch (const raman::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }

  if (show) {
    for (const auto& key : ctx.config.keys()) fmt::print("{} = {}\n", key, ctx.config.str(key));
    return 0;
  }

  std::vector<raman::cli::OutputFile> files;
  try {
    for (const auto& cmd : raman::cli::commands())
      if (cmd.name == chosen) files = cmd.run(ctx);
  } catch (const raman::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.kind() == raman::ErrorKind::Config ? kConfig : kCompute;
  }
  return write_outputs(out_dir, files);
}
