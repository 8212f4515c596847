// spinbus command-line front end. Talks to the library only through the C API.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinbus/spinbus.h"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "both";
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

// Non-zero exit codes mirror spinbus_status values; 64 is a CLI usage error.
constexpr int kUsageExit = 64;

struct CliError {
  int code;
  std::string message;
};

ordered_json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) return ordered_json::object();
  if (path.ends_with(".toml")) throw CliError{SPINBUS_ERR_CONFIG, "TOML configs are not supported; use JSON"};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{SPINBUS_ERR_IO, "cannot open config '" + path + "'"};
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const json::exception& e) {
    throw CliError{SPINBUS_ERR_CONFIG, "config '" + path + "': " + e.what()};
  }
  // A manifest from an earlier run carries its resolved config.
  if (j.is_object() && j.contains("spinbus_manifest")) {
    if (j.value("command", "") != command) {
      throw CliError{SPINBUS_ERR_CONFIG, "manifest was written by '" + j.value("command", "") + "'"};
    }
    return j.at("config");
  }
  return j;
}

// --set a.b=value; value is read as JSON when it parses, else as a string.
void apply_override(ordered_json& config, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw CliError{kUsageExit, "--set expects key=value, got '" + item + "'"};
  std::string pointer = "/" + item.substr(0, eq);
  for (auto& c : pointer) {
    if (c == '.') c = '/';
  }
  const std::string text = item.substr(eq + 1);
  ordered_json value;
  try {
    value = ordered_json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  config[ordered_json::json_pointer(pointer)] = value;
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("SPINBUS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw CliError{kUsageExit, std::string("SPINBUS_THREADS must be a positive integer, got '") + env + "'"};
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

bool wanted(const std::string& name, const std::string& format) {
  const bool csv = name.ends_with(".csv");
  const bool js = name.ends_with(".json");
  if (format == "csv") return !js;
  if (format == "json") return !csv;
  return true;
}

void write_file(const fs::path& path, const char* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) throw CliError{SPINBUS_ERR_IO, "cannot write '" + path.string() + "'"};
}

int run(const std::string& command, const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  ordered_json config = load_config(opt.config_path, command);
  for (const auto& o : opt.overrides) apply_override(config, o);
  if (command == "ensemble") {
    if (!opt.seed) throw CliError{kUsageExit, "ensemble runs need --seed"};
    config["master_seed"] = *opt.seed;
  }
  const unsigned threads = resolve_threads(opt.threads);

  spinbus_run* handle = nullptr;
  const spinbus_status st = spinbus_run_command(command.c_str(), config.dump().c_str(), threads, &handle);
  if (st != SPINBUS_OK) throw CliError{st, std::string(spinbus_status_name(st)) + ": " + spinbus_last_error()};
  std::unique_ptr<spinbus_run, decltype(&spinbus_run_free)> guard(handle, spinbus_run_free);

  const fs::path out_dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliError{SPINBUS_ERR_IO, "cannot create '" + out_dir.string() + "': " + ec.message()};

  ordered_json written = ordered_json::array();
  for (std::size_t i = 0; i < spinbus_run_file_count(handle); ++i) {
    const std::string name = spinbus_run_file_name(handle, i);
    if (!wanted(name, opt.format)) continue;
    const char* data = nullptr;
    std::size_t size = 0;
    spinbus_run_file_content(handle, i, &data, &size);
    write_file(out_dir / name, data, size);
    written.push_back(name);
  }

  ordered_json warnings = ordered_json::array();
  for (std::size_t i = 0; i < spinbus_run_warning_count(handle); ++i) {
    warnings.push_back(spinbus_run_warning(handle, i));
    std::cerr << "warning: " << spinbus_run_warning(handle, i) << "\n";
  }
  const ordered_json resolved = ordered_json::parse(spinbus_run_resolved_config(handle));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ordered_json manifest;
  manifest["spinbus_manifest"] = 1;
  manifest["command"] = command;
  manifest["version"] = spinbus_version();
  manifest["config"] = resolved;
  manifest["seed"] = resolved.contains("master_seed") ? resolved.at("master_seed") : ordered_json(nullptr);
  manifest["threads"] = threads;
  manifest["format"] = opt.format;
  manifest["wall_time_seconds"] = wall;
  manifest["files"] = written;
  manifest["warnings"] = warnings;
  const std::string text = manifest.dump(2) + "\n";
  write_file(out_dir / "manifest.json", text.data(), text.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization of Heisenberg spin buses"};
  app.set_version_flag("--version", std::string(spinbus_version()));
  app.require_subcommand(1);

  Options opt;
  const char* descriptions[][2] = {
      {"spectrum", "spectrum of a chain or ring, with an optional field sweep"},
      {"effective", "local moments and effective qubit couplings"},
      {"ensemble", "disorder ensembles, flip fractions and sensitivity sweeps"},
      {"scaling", "finite-size scaling of energy, gap and end moment"},
      {"validate", "compare the bus-plus-qubits spectrum with the effective model"},
  };
  for (const auto& d : descriptions) {
    CLI::App* sub = app.add_subcommand(d[0], d[1]);
    sub->add_option("--config", opt.config_path, "JSON config file (or an earlier manifest.json)");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--format", opt.format, "which tables to write")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads (env SPINBUS_THREADS; default: all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--set", opt.overrides, "override a config key, e.g. --set n_sites=7");
    if (std::string(d[0]) == "ensemble") {
      sub->add_option("--seed", opt.seed, "master seed (required)")->required();
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return SPINBUS_ERR_INTERNAL;
  }
}
