// ionjc command line: run a config, emit a preset, or validate a config.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "ionjc/ionjc.h"

namespace {

int report(ionjc_status status) {
  if (status == IONJC_OK) return 0;
  std::fprintf(stderr, "%s\n", ionjc_last_error_json());
  return ionjc_exit_code(status);
}

struct ConfigHandle {
  ionjc_config* ptr = nullptr;
  ~ConfigHandle() { ionjc_config_destroy(ptr); }
};

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ConfigHandle cfg;
  if (auto s = ionjc_config_load(config_path.c_str(), &cfg.ptr); s != IONJC_OK) return report(s);
  char* summary = nullptr;
  if (auto s = ionjc_run(cfg.ptr, out_dir.c_str(), &summary); s != IONJC_OK) return report(s);
  std::printf("%s\n", summary);
  ionjc_string_free(summary);
  return 0;
}

int cmd_preset(const std::string& name, bool emit, bool list) {
  if (list) {
    char* names = nullptr;
    if (auto s = ionjc_preset_names(&names); s != IONJC_OK) return report(s);
    std::printf("%s\n", names);
    ionjc_string_free(names);
    return 0;
  }
  ConfigHandle cfg;
  if (auto s = ionjc_config_preset(name.c_str(), &cfg.ptr); s != IONJC_OK) return report(s);
  if (emit) {
    char* text = nullptr;
    if (auto s = ionjc_config_serialize(cfg.ptr, &text); s != IONJC_OK) return report(s);
    std::fputs(text, stdout);
    ionjc_string_free(text);
  } else {
    std::printf("preset %s is valid; pass --emit-config to print it\n", name.c_str());
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  ConfigHandle cfg;
  if (auto s = ionjc_config_load(config_path.c_str(), &cfg.ptr); s != IONJC_OK) return report(s);
  std::printf("{\"status\":\"ok\",\"config\":\"%s\"}\n", config_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Jaynes-Cummings dynamics of a trapped ion"};
  app.set_version_flag("--version", std::string(ionjc_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", preset_name;
  bool emit = false, list = false;

  auto* run = app.add_subcommand("run", "Run a config and write CSV/JSON artifacts");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory");

  auto* pre = app.add_subcommand("preset", "Print a named parameter set");
  auto* name_opt = pre->add_option("--name", preset_name, "fig2, fig3-weak, fig3-strong or fig4");
  pre->add_flag("--emit-config", emit, "Print the preset as a config file");
  pre->add_flag("--list", list, "List preset names")->excludes(name_opt);

  auto* val = app.add_subcommand("validate", "Parse and validate a config");
  val->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir);
  if (pre->parsed()) {
    if (!list && preset_name.empty()) {
      std::fprintf(stderr, "{\"status\":\"error\",\"kind\":\"InvalidArgument\",\"message\":\"--name is required\"}\n");
      return 2;
    }
    return cmd_preset(preset_name, emit, list);
  }
  return cmd_validate(config_path);
}
