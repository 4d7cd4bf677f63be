#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "interlace/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

struct Subcommand {
  std::string name;
  std::string help;
  std::vector<std::string> keys;  // parameter names, underscores
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> s = {
      {"capacity", "equilibrium measure and capacity of a vertex set", {"set", "support_cap"}},
      {"sample", "sample random interlacements in a window",
       {"u", "window", "mode", "safety_radius", "replicas", "eps", "p_site", "p_bond", "write_sets", "support_cap"}},
      {"analyze", "cluster statistics of sampled configurations",
       {"u", "window", "mode", "safety_radius", "replicas", "eps", "p_site", "p_bond", "target", "adjacency", "L",
        "slab", "k", "support_cap"}},
      {"renorm-check", "seed-event and recursive-event frequencies",
       {"L0", "l0", "n", "u", "p", "eps", "replicas", "separation", "support_cap"}},
      {"estimate", "finite-size threshold estimates and crossing curves",
       {"what", "eps", "L", "u_min", "u_max", "u_step", "replicas", "tolerance", "support_cap"}},
      {"resistance", "effective resistance profiles",
       {"u", "law", "N_max", "N_grid", "replicas", "graph", "support_cap"}},
  };
  return s;
}

std::string flag_name(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

json parse_scalar(const std::string& text) {
  // keep numbers typed so the manifest config stays readable
  try {
    json v = json::parse(text);
    if (v.is_number() || v.is_boolean()) return v;
  } catch (const json::exception&) {
  }
  return text;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random interlacements experiments"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::optional<std::string> seed, threads, dim;
  std::string out_dir = ".";
  std::string config_path;
  bool schema = false;
  app.add_option("--seed", seed, "master seed (required for every run)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--dim", dim, "lattice dimension (>= 3)");
  app.add_option("--out-dir", out_dir, "directory for CSV and manifest outputs");
  app.add_option("--config", config_path, "JSON file with parameters; flags override it");
  app.add_flag("--schema", schema, "print the CSV column documentation and exit");

  std::map<std::string, std::map<std::string, std::optional<std::string>>> values;
  std::map<std::string, std::vector<std::string>> probes;
  std::map<std::string, std::string> out_file;
  std::map<std::string, CLI::App*> subs;
  for (const auto& sc : subcommands()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    subs[sc.name] = sub;
    auto& slot = values[sc.name];
    for (const auto& key : sc.keys) sub->add_option(flag_name(key), slot[key]);
    if (sc.name == "sample") sub->add_option("--probe", probes[sc.name], "probe set x,y,z;x,y,z (repeatable)");
    sub->add_option("--out", out_file[sc.name], "path for the main CSV table");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationExit;
  }

  if (schema) {
    std::cout << interlace::csv_schema();
    return 0;
  }
  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  if (command.empty()) {
    std::cerr << app.help();
    return kValidationExit;
  }

  json params = json::object();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "config: cannot read " << config_path << "\n";
      return kValidationExit;
    }
    try {
      params = json::parse(f);
    } catch (const json::exception& e) {
      std::cerr << "config: " << e.what() << "\n";
      return kValidationExit;
    }
    if (!params.is_object()) {
      std::cerr << "config: must be a JSON object\n";
      return kValidationExit;
    }
  }
  if (seed) params["seed"] = parse_scalar(*seed);
  if (threads) params["threads"] = parse_scalar(*threads);
  if (dim) params["dim"] = parse_scalar(*dim);
  for (const auto& [key, value] : values[command]) {
    if (value) params[key] = parse_scalar(*value);
  }
  if (!probes[command].empty()) params["probe"] = probes[command];

  const auto start = std::chrono::steady_clock::now();
  interlace::RunRecord record;
  try {
    record = interlace::run_experiment(command, params);
  } catch (const interlace::ValidationError& e) {
    std::cerr << "invalid parameter " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kRuntimeExit;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<fs::path> written;
  try {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < record.outputs.size(); ++i) {
      fs::path path = fs::path(out_dir) / record.outputs[i].name;
      if (i == 0 && !out_file[command].empty()) path = out_file[command];
      written.push_back(path);
      write_file(path, record.outputs[i].content);
    }
    const fs::path manifest = fs::path(out_dir) / (command + "_manifest.json");
    written.push_back(manifest);
    write_file(manifest, interlace::run_manifest(record, seconds).dump(2) + "\n");
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    std::cerr << "output failed: " << e.what() << "\n";
    return kRuntimeExit;
  }

  std::cout << record.stdout_text;
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}
