// skitrack: track, evaluate, simulate and weights subcommands.

#include <iostream>

#include <CLI11.hpp>

#include "skitrack/app.hpp"
#include "skitrack/errors.hpp"

namespace app = skitrack::app;

int main(int argc, char** argv) {
  CLI::App cli{"Single-object tracking pipeline with reattempt and incremental template updates"};
  cli.require_subcommand(1);

  // track
  auto* track = cli.add_subcommand("track", "Run the tracker over a manifest or a synthetic suite");
  std::string config_file, preset, ablate, backend, endpoint, manifest, suite, out_dir;
  std::uint64_t seed = 0;
  std::size_t variants = 100, jobs = 1;
  int timeout_ms = 10000;
  double search_factor = 0, itu_threshold = 0, conf_threshold = 0, low_threshold = 0;
  int update_interval = 0, itu_gap = 0;
  track->add_option("--config", config_file, "JSON run config (CLI flags win)");
  track->add_option("--preset", preset, "baseline | finetuned | ours");
  track->add_option("--ablate", ablate, "e.g. reattempt=off,itu=off");
  track->add_option("--backend", backend, "scripted | external");
  track->add_option("--endpoint", endpoint, "unix:<path> | tcp:<host>:<port> | exec:<command>");
  track->add_option("--manifest", manifest, "dataset manifest JSON");
  track->add_option("--suite", suite, "all | cs | occ | sc | mix");
  track->add_option("--variants", variants, "scripts per family for --suite");
  track->add_option("--seed", seed, "seed for scripted runs");
  track->add_option("--jobs", jobs, "sequences tracked in parallel");
  track->add_option("--timeout-ms", timeout_ms, "external localizer reply timeout");
  track->add_option("--out", out_dir, "output directory");
  track->add_option("--search-factor", search_factor);
  track->add_option("--update-interval", update_interval);
  track->add_option("--conf-threshold", conf_threshold);
  track->add_option("--itu-threshold", itu_threshold);
  track->add_option("--itu-gap", itu_gap);
  track->add_option("--reattempt-threshold", low_threshold);

  // evaluate
  auto* evaluate = cli.add_subcommand("evaluate", "Score prediction files against a manifest");
  std::vector<std::string> pred_specs;
  std::string eval_manifest, eval_out = "report";
  evaluate->add_option("--pred", pred_specs, "[name=]directory, repeatable (one column each)")->required();
  evaluate->add_option("--manifest", eval_manifest, "dataset manifest JSON")->required();
  evaluate->add_option("--out", eval_out, "report directory");

  // simulate
  auto* simulate = cli.add_subcommand("simulate", "Write a synthetic scenario suite and its manifest");
  app::SimulateOptions sim;
  simulate->add_option("--suite", sim.suite, "all | cs | occ | sc | mix");
  simulate->add_option("--seed", sim.seed)->required();
  simulate->add_option("--variants", sim.variants, "scripts per family");
  std::string sim_out = "scenarios";
  simulate->add_option("--out", sim_out, "output directory");

  // weights
  auto* weights = cli.add_subcommand("weights", "Print per-discipline sampling weights");
  app::WeightsOptions wopt;
  std::string weights_manifest;
  weights->add_option("--manifest", weights_manifest, "dataset manifest JSON");
  weights->add_option("--counts", wopt.counts, "TAG=N,... instead of a manifest");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::kInvalidInvocation;
  }

  try {
    if (*track) {
      app::RunConfig cfg;
      if (!config_file.empty()) cfg = app::load_run_config(config_file);
      if (track->count("--preset")) {
        cfg.preset = preset;
        app::apply_preset(preset, cfg.tracker);
      }
      if (track->count("--ablate")) app::apply_ablation(ablate, cfg.tracker);
      if (track->count("--backend")) cfg.backend = backend;
      if (track->count("--endpoint")) cfg.endpoint = endpoint;
      if (track->count("--manifest")) cfg.manifest = manifest;
      if (track->count("--suite")) cfg.suite = suite;
      if (track->count("--variants")) cfg.variants = variants;
      if (track->count("--seed")) cfg.seed = seed;
      if (track->count("--jobs")) cfg.jobs = jobs;
      if (track->count("--timeout-ms")) cfg.timeout_ms = timeout_ms;
      if (track->count("--out")) cfg.out_dir = out_dir;
      if (track->count("--search-factor")) cfg.tracker.search_factor = search_factor;
      if (track->count("--update-interval")) cfg.tracker.update_interval = update_interval;
      if (track->count("--conf-threshold")) cfg.tracker.conf_threshold = conf_threshold;
      if (track->count("--itu-threshold")) cfg.tracker.itu_conf_threshold = itu_threshold;
      if (track->count("--itu-gap")) cfg.tracker.itu_min_gap = itu_gap;
      if (track->count("--reattempt-threshold")) cfg.tracker.reattempt_conf_threshold = low_threshold;
      return app::cmd_track(cfg, std::cerr);
    }
    if (*evaluate) {
      app::EvaluateOptions opt;
      opt.manifest = eval_manifest;
      opt.out_dir = eval_out;
      for (const auto& spec : pred_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
          std::filesystem::path dir(spec);
          opt.predictions.emplace_back(dir.filename().empty() ? dir.parent_path().filename().string()
                                                               : dir.filename().string(),
                                       dir);
        } else {
          opt.predictions.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
        }
      }
      return app::cmd_evaluate(opt, std::cout);
    }
    if (*simulate) {
      sim.out_dir = sim_out;
      return app::cmd_simulate(sim, std::cerr);
    }
    if (*weights) {
      wopt.manifest = weights_manifest;
      return app::cmd_weights(wopt, std::cout);
    }
  } catch (const skitrack::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kInvalidInvocation;
  }
  return app::kInvalidInvocation;
}
