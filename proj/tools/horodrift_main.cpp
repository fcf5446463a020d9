#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "horodrift/error.hpp"
#include "horodrift/harness.hpp"

namespace {

using namespace horodrift;

void apply_config_file(harness::ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse_error", "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  cfg = harness::ExperimentConfig::parse(ss.str());
}

void print_records(const harness::RunOutcome& out, const std::string& format) {
  if (format == "csv") {
    std::cout << "space,quantity,value,stderr,n,method,version\n";
    for (const auto& r : out.records) {
      std::cout << r.config.value("space", "") << "," << r.quantity << "," << r.value
                << "," << r.stderr_ << "," << r.n << "," << r.method << "," << r.version
                << "\n";
    }
    return;
  }
  for (const auto& r : out.records) std::cout << r.to_json().dump() << "\n";
}

int run_command(harness::ExperimentConfig cfg) {
  harness::ResultStore store;
  harness::ResultStore* sp = nullptr;
  if (!cfg.out.empty()) {
    store = harness::ResultStore(cfg.out);
    sp = &store;
  }
  auto out = harness::run(cfg, sp);
  if (out.cached) std::cerr << "cached: true\n";
  print_records(out, cfg.format);
  return 0;
}

void list_spaces() {
  std::cout << "catalog spaces (grammar: factors joined by 'x'):\n"
            << "  euclidean:<n>      flat cover R^n, n <= 8\n"
            << "  h2                 hyperbolic half-plane\n"
            << "  h2xh2              product of two hyperbolic planes\n"
            << "  euclidean:<m>xh2   flat times hyperbolic\n\n"
            << "exact invariants:\n";
  std::printf("  %-16s %8s %8s %8s %8s\n", "space", "ell", "h", "v", "lambda");
  for (const auto& name : {"euclidean:2", "h2", "h2xh2", "euclidean:1xh2"}) {
    const auto s = geometry::ModelSpace::parse(name);
    std::printf("  %-16s %8.4f %8.4f %8.4f %8.4f\n", name, s.known_drift(),
                s.known_entropy(), s.known_volume_entropy(), s.known_lambda());
  }
  std::cout << "\ngroups: z:<d> (d <= 2), free:<k> (2 <= k <= 8)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"horodrift: drift, entropy and spectral invariants of Brownian motion "
               "on model Riemannian covers"};
  app.require_subcommand(1);

  harness::ExperimentConfig cfg;
  std::string config_file;
  std::string store_path;
  std::string space_filter;
  std::string format = "md";
  std::uint64_t st_seed = 0;
  int st_threads = 0;
  bool st_quick = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "config file (key = value lines)");
    sub->add_option("--space", cfg.space, "space or group id");
    sub->add_option("--quantity", cfg.quantity, "quantity to estimate");
    sub->add_option("--T", cfg.T, "time horizon");
    sub->add_option("--dt", cfg.dt, "euler step");
    sub->add_option("--paths", cfg.paths, "number of Monte Carlo paths/samples");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--horofunction", cfg.horofunction, "horofunction spec string");
    sub->add_option("--out", cfg.out, "result store path (append)");
    sub->add_option("--format", cfg.format, "output format: json|csv");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  };

  auto* sub_spaces = app.add_subcommand("spaces", "list the catalog");
  auto* sub_run = app.add_subcommand("run", "run one experiment");
  add_common(sub_run);
  auto* sub_check = app.add_subcommand("check", "full invariant set and inequality verdicts");
  add_common(sub_check);
  auto* sub_group = app.add_subcommand("group", "discrete word-metric drift/entropy report");
  sub_group->add_option("--group", cfg.space, "group id (z:<d> or free:<k>)");
  sub_group->add_option("--out", cfg.out, "result store path (append)");
  sub_group->add_option("--format", cfg.format, "output format: json|csv");
  auto* sub_report = app.add_subcommand("report", "assemble a report from a store");
  sub_report->add_option("--store", store_path, "store path")->required();
  sub_report->add_option("--space", space_filter, "restrict to one space id");
  sub_report->add_option("--format", format, "md|csv|json");
  auto* sub_selftest = app.add_subcommand("selftest", "reduced invariant suite (< 60 s)");
  sub_selftest->add_option("--seed", st_seed, "master seed");
  sub_selftest->add_option("--threads", st_threads, "worker threads (0 = auto)");
  sub_selftest->add_flag("--quick", st_quick, "extra-reduced sample counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_spaces->parsed()) {
      list_spaces();
      return 0;
    }
    if (sub_run->parsed() || sub_check->parsed() || sub_group->parsed()) {
      CLI::App* active = sub_run->parsed() ? sub_run
                         : sub_check->parsed() ? sub_check
                                               : sub_group;
      if (!config_file.empty()) {
        harness::ExperimentConfig merged;
        apply_config_file(merged, config_file);
        // CLI flags override file values
        auto was_set = [&](const char* name) {
          const auto* opt = active->get_option_no_throw(name);
          return opt && opt->count() > 0;
        };
        if (was_set("--space") || was_set("--group")) merged.space = cfg.space;
        if (was_set("--quantity")) merged.quantity = cfg.quantity;
        if (was_set("--T")) merged.T = cfg.T;
        if (was_set("--dt")) merged.dt = cfg.dt;
        if (was_set("--paths")) merged.paths = cfg.paths;
        if (was_set("--seed")) merged.seed = cfg.seed;
        if (was_set("--horofunction")) merged.horofunction = cfg.horofunction;
        if (was_set("--out")) merged.out = cfg.out;
        if (was_set("--format")) merged.format = cfg.format;
        if (was_set("--threads")) merged.threads = cfg.threads;
        cfg = merged;
      }
      if (sub_check->parsed()) cfg.quantity = "check";
      if (sub_group->parsed()) cfg.quantity = "group_report";
      return run_command(cfg);
    }
    if (sub_report->parsed()) {
      harness::ResultStore store(store_path);
      std::cout << harness::report(store, space_filter, format);
      return 0;
    }
    if (sub_selftest->parsed()) {
      const auto res = harness::selftest(st_seed, st_threads, st_quick);
      for (const auto& item : res.items)
        std::printf("[%s] %s%s%s\n", item.pass ? "PASS" : "FAIL", item.name.c_str(),
                    item.info.empty() ? "" : " :: ", item.info.c_str());
      std::printf("selftest: %zu items, %s, %.1f s\n", res.items.size(),
                  res.all_pass ? "all pass" : "FAILURES", res.wall_ms / 1000.0);
      return res.all_pass ? 0 : 1;
    }
  } catch (const Error& e) {
    nlohmann::json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
