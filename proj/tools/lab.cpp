// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chemlab/cli/commands.hpp"
#include "chemlab/diagnostics/stats.hpp"
#include "chemlab/probe/probe.hpp"
#include "chemlab/training/optimizer.hpp"
#include "chemlab/util/alloc.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

int fail(int code, const std::string& what) {
  std::fprintf(stderr, "lab: %s\n", what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace chemlab;
  CLI::App app{"chemlab experiment driver"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  bool resume = false;
  cli::SynthOptions synth;
  std::string synth_out;

  auto* synth_cmd = app.add_subcommand("synth", "write synthetic drug-like SMILES");
  synth_cmd->add_option("--count", synth.count, "molecules to generate")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--max-heavy", synth.max_heavy, "largest heavy-atom count")->check(CLI::Range(4, 50));
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--out", synth_out, "output file")->required();

  std::vector<CLI::App*> configured;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"preprocess", "filter, sample and pair the corpus"},
           {"train", "train a model and write a run directory"},
           {"diagnose", "evaluate saved checkpoints on the test pairs"},
           {"probe", "score pooled descriptors on property datasets"},
           {"report", "summarize a run"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    if (name != "report") {
      sub->add_option("--out", out, "output directory override");
    }
    if (name == "train") {
      sub->add_flag("--resume", resume, "continue from latest.ckpt");
    }
    configured.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  tune_allocator();
  const auto out_dir = out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
  try {
    if (synth_cmd->parsed()) {
      synth.out = synth_out;
      cli::cmd_synth(synth);
      return kOk;
    }
    const auto cfg = cli::load_config(config);
    const auto* sub = app.get_subcommands().front();
    const auto& name = sub->get_name();
    if (name == "preprocess") {
      cli::cmd_preprocess(cfg, out_dir);
    } else if (name == "train") {
      const auto s = cli::cmd_train(cfg, out_dir, resume);
      std::printf("%s\n", nlohmann::json(s).dump().c_str());
    } else if (name == "diagnose") {
      cli::cmd_diagnose(cfg, out_dir);
    } else if (name == "probe") {
      cli::cmd_probe(cfg, out_dir);
    } else {
      std::fputs(cli::cmd_report(cfg).c_str(), stdout);
    }
  } catch (const cli::ConfigError& e) {
    return fail(kConfigError, e.what());
  } catch (const train::DivergenceDetected& e) {
    return fail(kNumericError, e.what());
  } catch (const train::NonFiniteGradient& e) {
    return fail(kNumericError, e.what());
  } catch (const diag::DegenerateSample& e) {
    return fail(kNumericError, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfigError, e.what());
  } catch (const std::exception& e) {
    return fail(kDataError, e.what());
  }
  return kOk;
}
