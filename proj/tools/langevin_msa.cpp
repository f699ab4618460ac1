#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lmsa/errors.hpp"
#include "lmsa/harness.hpp"

namespace {

// Flags replace any same-named entry from the config file.
void override_entry(lmsa::ConfigEntries& entries, const std::string& key, const std::string& value) {
  std::erase_if(entries, [&](const auto& e) { return e.first == key; });
  entries.emplace_back(key, value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Langevin Monte Carlo sampler and mean-square analysis harness"};
  app.set_help_flag("--help", "Print this help message and exit");

  std::string mode, config_path;
  std::string potential, d, h, replicas, steps, time, seed, out, eps, workers;
  std::vector<std::string> sets;
  app.add_option("mode", mode,
                 "sweep-dim | sweep-step | verify-orders | verify-contraction | bounds-report | "
                 "lower-bound-check | sample");
  app.add_option("--config", config_path, "key=value config file, or a previous output file");
  app.add_option("--potential", potential, "f1, f2, f1(10), quadratic(1,4), quadratic(m=1,L=4,d=16)");
  app.add_option("--d", d, "dimension list, e.g. 2,8,32");
  app.add_option("--h", h, "step size list, e.g. 0.1,0.2");
  app.add_option("--replicas", replicas, "number of independent chains M");
  app.add_option("--steps", steps, "horizon K in iterations");
  app.add_option("--time", time, "horizon T; K = ceil(T/h)");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out, "output path (default stdout)");
  app.add_option("--eps", eps, "accuracy list for mixing times");
  app.add_option("--workers", workers, "worker threads (0 = all cores); results do not depend on it");
  app.add_option("--set", sets, "any config key as key=value (repeatable)");
  CLI11_PARSE(app, argc, argv);

  try {
    lmsa::ConfigEntries entries;
    if (!config_path.empty()) entries = lmsa::read_config_file(config_path);
    if (!mode.empty()) override_entry(entries, "mode", mode);
    const std::pair<const char*, const std::string*> flags[] = {
        {"potential", &potential}, {"d", &d},       {"h", &h},     {"replicas", &replicas},
        {"steps", &steps},         {"time", &time}, {"seed", &seed}, {"out", &out},
        {"eps", &eps},             {"workers", &workers}};
    for (const auto& [key, value] : flags) {
      if (!value->empty()) override_entry(entries, key, *value);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw lmsa::ConfigError("--set: expected key=value, got '" + s + "'");
      override_entry(entries, s.substr(0, eq), s.substr(eq + 1));
    }

    std::vector<std::string> warnings;
    const auto cfg = lmsa::make_config(entries, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const auto t0 = std::chrono::steady_clock::now();
    const auto report = lmsa::run_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (cfg.out.empty()) {
      std::cout << report.text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw lmsa::ConfigError("out: cannot write '" + cfg.out + "'");
      f << report.text;
      for (const auto& c : report.checks) {
        std::cerr << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
      }
    }
    std::fprintf(stderr, "%s finished in %.1f s\n", lmsa::to_string(cfg.mode).c_str(), secs);
    return report.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
