// regenerates the seeded benchmark suites under scenarios/. the checked-in
// files are this tool's output; rerun it only when the generator changes.

#include <cstdio>
#include <filesystem>

#include "CLI11.hpp"

#include "mlai/scenario.hpp"

namespace fs = std::filesystem;
using namespace mlai;

int main(int argc, char** argv) {
  CLI::App app{"generate a seeded re-identification benchmark suite"};

  SuiteOptions opts;
  std::string out_dir;
  bool easy = false;
  app.add_option("--out", out_dir, "directory for the .scn files")->required();
  app.add_option("--count", opts.count, "number of scenarios (default 60)")
      ->check(CLI::PositiveNumber);
  app.add_option("--base-seed", opts.base_seed, "suite base seed (default 1000)");
  app.add_option("--prefix", opts.name_prefix, "scenario name prefix (default case)");
  app.add_flag("--easy", easy, "no distractor identities");

  CLI11_PARSE(app, argc, argv);

  opts.with_distractor = !easy;
  std::vector<Scenario> suite = make_benchmark_suite(opts);

  fs::create_directories(out_dir);
  for (const auto& s : suite) save_scenario(s, fs::path(out_dir) / (s.name + ".scn"));
  std::printf("wrote %zu scenarios to %s\n", suite.size(), out_dir.c_str());
  return 0;
}
