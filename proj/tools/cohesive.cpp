// Command-line front end: check | cohomology | solve | transfer | regularize.
// Reports are written beside the input (or into --out-dir) as
// <stem>.<command>.json. Exit codes: 0 ok, 2 validation, 3 tolerance.
#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "cohesive/commands.hpp"

namespace fs = std::filesystem;
using namespace cohesive;

namespace {

struct Options {
  std::vector<std::string> paths;
  std::string seed;
  std::string out_dir;
  std::string profile = "default";
  int order = 0;
  bool batch = false;
};

std::string report_path(const std::string& input, const std::string& command,
                        const std::string& out_dir) {
  const fs::path in(input);
  const std::string file = in.stem().string() + "." + command + ".json";
  if (out_dir.empty()) return (in.parent_path() / file).string();
  return (fs::path(out_dir) / file).string();
}

int run_one(const std::string& command, const std::string& path, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult res;
  try {
    const Instance inst = load_instance(path);
    const ToleranceProfile tols = ToleranceProfile::named(opt.profile);
    if (command == "check") {
      res = cmd_check(inst, tols);
    } else if (command == "cohomology") {
      res = cmd_cohomology(inst, tols);
    } else if (command == "solve") {
      if (opt.seed.empty()) throw std::invalid_argument("solve: --seed is required");
      res = cmd_solve(inst, opt.seed, opt.order, tols);
    } else if (command == "transfer") {
      if (opt.seed.empty()) throw std::invalid_argument("transfer: --seed names the series");
      res = cmd_transfer(inst, opt.seed, tols);
    } else if (command == "regularize") {
      res = cmd_regularize(inst, tols);
    } else {
      throw std::invalid_argument("unknown command " + command);
    }
  } catch (const FlatnessViolation& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 3;
  }

  const auto t1 = std::chrono::steady_clock::now();
  res.report["timing_ms"] =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0;

  const std::string out = report_path(path, command, opt.out_dir);
  write_file(out, res.report.dump(2) + "\n");
  std::cout << path << ": " << command << " -> " << out << " (exit " << res.exit_code
            << ")\n";
  if (res.exit_code == 3 && res.report["results"].contains("failure")) {
    const auto& f = res.report["results"]["failure"];
    std::cerr << path << ": worst residual " << f["worst_residual"] << " at index "
              << f["at_index"] << "\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deformation engine for cohesive-module models"};
  app.require_subcommand(1);

  Options opt;
  std::string command;
  for (const std::string name : {"check", "cohomology", "solve", "transfer", "regularize"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("paths", opt.paths, "instance file(s)")->required();
    sub->add_option("--seed", opt.seed, "seed (solve) or series (transfer) name");
    sub->add_option("--order", opt.order, "truncation order override");
    sub->add_option("--out-dir", opt.out_dir, "directory for reports");
    sub->add_option("--tolerance-profile", opt.profile, "default | strict | loose");
    sub->add_flag("--batch", opt.batch, "fan out across files with independent workers");
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  if (opt.paths.size() > 1 && !opt.batch) {
    std::cerr << "multiple inputs need --batch\n";
    return 2;
  }

  int worst = 0;
  if (opt.batch && opt.paths.size() > 1) {
    std::vector<std::future<int>> jobs;
    for (const auto& p : opt.paths)
      jobs.push_back(std::async(std::launch::async,
                                [&, p] { return run_one(command, p, opt); }));
    for (auto& j : jobs) worst = std::max(worst, j.get());
  } else {
    for (const auto& p : opt.paths) worst = std::max(worst, run_one(command, p, opt));
  }
  return worst;
}
