/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pote/harness.hpp"

namespace {

using namespace pote;

std::optional<std::uint64_t> opt_seed(const CLI::Option* opt, std::uint64_t value) {
  return opt->count() > 0 ? std::optional<std::uint64_t>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pote: attested-block consensus simulator and verifier"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one scenario and write records.jsonl and summary.json");
  std::string run_scenario;
  std::string run_out;
  std::uint64_t run_seed = 0;
  run->add_option("--scenario", run_scenario, "Scenario JSON file")->required();
  auto* run_seed_opt = run->add_option("--seed", run_seed, "Seed (defaults to the scenario's)");
  run->add_option("--out", run_out, "Output directory")->required();

  // sweep-latency
  auto* sl = app.add_subcommand("sweep-latency", "Median commit latency per validator count");
  std::vector<std::uint32_t> counts;
  std::string sl_scenario;
  std::uint64_t sl_seed = 1;
  std::uint64_t sl_rounds = 10;
  bool sl_serial = false;
  sl->add_option("--counts", counts, "Ascending validator counts, comma separated")
      ->required()
      ->delimiter(',');
  sl->add_option("--scenario", sl_scenario, "Base scenario (default: calibrated latency model)");
  sl->add_option("--seed", sl_seed, "Seed");
  sl->add_option("--rounds", sl_rounds, "Rounds per run for the calibrated model");
  sl->add_flag("--serial", sl_serial, "Run points one after another");

  // sweep-tps
  auto* st = app.add_subcommand("sweep-tps", "Throughput by processing time or block size");
  std::string mode_name;
  std::vector<double> points;
  std::uint64_t st_seed = 1;
  st->add_option("--mode", mode_name, "by_processing_time | by_block_size")->required();
  st->add_option("--points", points, "Commit times in ms or block sizes, comma separated")
      ->required()
      ->delimiter(',');
  st->add_option("--seed", st_seed, "Seed");

  // verify
  auto* vf = app.add_subcommand("verify", "Check a block against a registry and round context");
  std::string block_path, registry_path, context_path, cert_path;
  vf->add_option("--block", block_path, "Encoded block")->required();
  vf->add_option("--registry", registry_path, "Registry JSON")->required();
  vf->add_option("--context", context_path, "Round context JSON")->required();
  vf->add_option("--certificate", cert_path, "Encoded finality certificate");

  // counters
  auto* ct = app.add_subcommand("counters", "Per-validator operation counts");
  std::string ct_scenario;
  std::uint64_t ct_seed = 0;
  ct->add_option("--scenario", ct_scenario, "Scenario JSON file")->required();
  auto* ct_seed_opt = ct->add_option("--seed", ct_seed, "Seed (defaults to the scenario's)");

  // make-fixture
  auto* mf = app.add_subcommand("make-fixture", "Write a sealed block and its verification inputs");
  std::string mf_out;
  std::uint64_t mf_seed = 7;
  mf->add_option("--out", mf_out, "Output directory")->required();
  mf->add_option("--seed", mf_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : harness::kExitConfig;
  }

  try {
    if (*run) {
      return harness::cmd_run(run_scenario, opt_seed(run_seed_opt, run_seed), run_out, std::cout,
                              std::cerr);
    }
    if (*sl) {
      const auto base = sl_scenario.empty() ? sim::calibrated_latency_scenario(3, sl_rounds)
                                            : sim::load_scenario(sl_scenario);
      std::cout << harness::latency_table(harness::sweep_latency(counts, base, sl_seed, !sl_serial));
      return harness::kExitOk;
    }
    if (*st) {
      const auto mode = harness::tps_mode_from_string(mode_name);
      if (!mode) {
        std::cerr << "--mode must be by_processing_time or by_block_size\n";
        return harness::kExitConfig;
      }
      std::cout << harness::tps_table(harness::sweep_tps(*mode, points, st_seed));
      return harness::kExitOk;
    }
    if (*vf) {
      std::optional<std::filesystem::path> cert;
      if (!cert_path.empty()) cert = cert_path;
      return harness::cmd_verify(block_path, registry_path, context_path, cert, std::cout,
                                 std::cerr);
    }
    if (*ct) {
      return harness::cmd_counters(ct_scenario, opt_seed(ct_seed_opt, ct_seed), std::cout,
                                   std::cerr);
    }
    if (*mf) {
      harness::make_fixture(mf_out, mf_seed);
      std::cout << "wrote fixture to " << mf_out << '\n';
      return harness::kExitOk;
    }
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return harness::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return harness::kExitReject;
  }
  return harness::kExitOk;
}
