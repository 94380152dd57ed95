#include "skitrack/app.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "skitrack/dataset.hpp"
#include "skitrack/errors.hpp"
#include "skitrack/evaluation.hpp"
#include "skitrack/io.hpp"
#include "skitrack/scripted_localizer.hpp"
#include "skitrack/synth.hpp"
#include "skitrack/text.hpp"
#include "skitrack/wire.hpp"

namespace fs = std::filesystem;

namespace skitrack::app {
namespace {

constexpr double kGroundTruthWorldNoise = 0.02;

struct Job {
  std::string id;
  std::string discipline;
  std::unique_ptr<FrameSource> frames;
  GroundTruth gt;
  std::optional<ScriptedWorld> world;
  std::string setup_error;
};

struct JobResult {
  std::vector<StepOutput> outputs;
  std::string error;
};

bool parse_switch(const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("expected on/off, got '" + value + "'");
}

ScriptedWorld world_from_groundtruth(const GroundTruth& gt, std::uint64_t seed) {
  ScriptedWorld world;
  world.noise_rel = kGroundTruthWorldNoise;
  world.seed = seed;
  BBox last{};
  for (const auto& b : gt) {
    if (b) last = *b;
    world.gt.push_back(last);
    world.visible.push_back(b.has_value());
  }
  return world;
}

std::vector<Job> jobs_from_suite(const RunConfig& cfg) {
  std::vector<Job> jobs;
  for (const auto& script : synth::scenario_suite(*cfg.seed, cfg.suite, cfg.variants)) {
    auto generated = synth::generate_world(script);
    Job job;
    job.id = script.id;
    job.discipline = script.discipline;
    job.frames = std::make_unique<BlankFrameSource>(script.frame_dims, script.length);
    job.gt = generated.record.gt;
    job.world = std::move(generated.world);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::vector<Job> jobs_from_manifest(const RunConfig& cfg) {
  const Manifest manifest = load_manifest(cfg.manifest);
  std::vector<Job> jobs;
  std::uint64_t index = 0;
  for (const auto& rec : manifest.sequences) {
    Job job;
    job.id = rec.id;
    job.discipline = rec.discipline;
    job.gt = rec.gt;
    try {
      if (rec.frame_source.starts_with("synth:")) {
        const auto script_path = manifest.root / rec.frame_source.substr(6);
        const auto script = synth::script_from_json(nlohmann::json::parse(read_file(script_path)));
        auto generated = synth::generate_world(script);
        job.frames = std::make_unique<BlankFrameSource>(script.frame_dims, script.length);
        if (cfg.backend == "scripted") job.world = std::move(generated.world);
      } else {
        auto frames = std::make_unique<PpmDirectorySource>(manifest.root / rec.frame_source);
        if (frames->size() != rec.frame_count)
          throw DatasetError(fmt::format("{} frames on disk, manifest says {}", frames->size(), rec.frame_count));
        job.frames = std::move(frames);
        if (cfg.backend == "scripted") job.world = world_from_groundtruth(rec.gt, *cfg.seed * 1000003u + index);
      }
    } catch (const std::exception& e) {
      job.setup_error = e.what();
    }
    ++index;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

JobResult run_job(const Job& job, const RunConfig& cfg) {
  JobResult result;
  try {
    if (!job.setup_error.empty()) throw Error(job.setup_error);
    if (job.gt.empty() || !job.gt.front()) throw DatasetError("first frame has no ground truth");
    std::unique_ptr<Localizer> backend;
    if (cfg.backend == "scripted") {
      backend = std::make_unique<ScriptedLocalizer>(*job.world);
    } else {
      backend = std::make_unique<wire::ExternalLocalizer>(wire::connect(cfg.endpoint),
                                                          std::chrono::milliseconds(cfg.timeout_ms));
    }
    result.outputs = run_sequence(*job.frames, *job.gt.front(), cfg.tracker, *backend);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

std::string variant_name(const RunConfig& cfg) { return cfg.preset.empty() ? "tracker" : cfg.preset; }

std::vector<std::pair<std::string, std::int64_t>> parse_counts(const std::string& text) {
  std::vector<std::pair<std::string, std::int64_t>> counts;
  for (auto part : split(text, ',')) {
    part = trim(part);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ConfigError("counts must look like TAG=N");
    const auto n = parse_number(part.substr(eq + 1));
    if (!n || *n != std::floor(*n)) throw ConfigError("count for " + std::string(part.substr(0, eq)) + " is not an integer");
    counts.emplace_back(std::string(trim(part.substr(0, eq))), static_cast<std::int64_t>(*n));
  }
  return counts;
}

}  // namespace

void apply_preset(const std::string& preset, TrackerConfig& config) {
  if (preset.empty()) return;
  if (preset == "baseline" || preset == "finetuned") {
    config.reattempt_enabled = false;
    config.itu_enabled = false;
  } else if (preset == "ours") {
    config.reattempt_enabled = true;
    config.itu_enabled = true;
  } else {
    throw ConfigError("unknown preset '" + preset + "' (baseline, finetuned, ours)");
  }
}

void apply_ablation(const std::string& spec, TrackerConfig& config) {
  for (auto item : split(spec, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("ablation must look like name=on|off");
    const std::string name(trim(item.substr(0, eq)));
    const bool on = parse_switch(std::string(trim(item.substr(eq + 1))));
    if (name == "reattempt") config.reattempt_enabled = on;
    else if (name == "itu") config.itu_enabled = on;
    else throw ConfigError("unknown ablation '" + name + "' (reattempt, itu)");
  }
}

nlohmann::ordered_json tracker_config_json(const TrackerConfig& c) {
  nlohmann::ordered_json j;
  j["search_factor"] = c.search_factor;
  j["search_size"] = c.search_size;
  j["template_factor"] = c.template_factor;
  j["template_size"] = c.template_size;
  j["update_interval"] = c.update_interval;
  j["conf_threshold"] = c.conf_threshold;
  j["itu_conf_threshold"] = c.itu_conf_threshold;
  j["itu_min_gap"] = c.itu_min_gap;
  j["reattempt_conf_threshold"] = c.reattempt_conf_threshold;
  j["reattempt_area_threshold"] = c.reattempt_area_threshold;
  j["reattempt_frame_coverage"] = c.reattempt_frame_coverage;
  j["reattempt_enabled"] = c.reattempt_enabled;
  j["itu_enabled"] = c.itu_enabled;
  return j;
}

void merge_tracker_config(const nlohmann::json& j, TrackerConfig& c) {
  if (!j.is_object()) throw ConfigError("tracker config must be an object");
  try {
    c.search_factor = j.value("search_factor", c.search_factor);
    c.search_size = j.value("search_size", c.search_size);
    c.template_factor = j.value("template_factor", c.template_factor);
    c.template_size = j.value("template_size", c.template_size);
    c.update_interval = j.value("update_interval", c.update_interval);
    c.conf_threshold = j.value("conf_threshold", c.conf_threshold);
    c.itu_conf_threshold = j.value("itu_conf_threshold", c.itu_conf_threshold);
    c.itu_min_gap = j.value("itu_min_gap", c.itu_min_gap);
    c.reattempt_conf_threshold = j.value("reattempt_conf_threshold", c.reattempt_conf_threshold);
    c.reattempt_area_threshold = j.value("reattempt_area_threshold", c.reattempt_area_threshold);
    c.reattempt_frame_coverage = j.value("reattempt_frame_coverage", c.reattempt_frame_coverage);
    c.reattempt_enabled = j.value("reattempt_enabled", c.reattempt_enabled);
    c.itu_enabled = j.value("itu_enabled", c.itu_enabled);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad tracker config: ") + e.what());
  }
}

void RunConfig::validate() const {
  tracker.validate();
  if (backend != "scripted" && backend != "external") throw ConfigError("backend must be scripted or external");
  if (backend == "external" && endpoint.empty()) throw ConfigError("external backend needs --endpoint");
  if (backend == "scripted" && !seed) throw ConfigError("scripted runs need --seed");
  if (manifest.empty() == suite.empty()) throw ConfigError("give exactly one of --manifest or --suite");
  if (!suite.empty() && backend != "scripted") throw ConfigError("scenario suites run on the scripted backend only");
  if (!suite.empty() && !seed) throw ConfigError("suites need --seed");
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (timeout_ms < 1) throw ConfigError("timeout must be positive");
}

void merge_run_config(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (j.contains("preset")) {
      c.preset = j["preset"].get<std::string>();
      apply_preset(c.preset, c.tracker);
    }
    if (j.contains("tracker")) merge_tracker_config(j["tracker"], c.tracker);
    c.backend = j.value("backend", c.backend);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.manifest = j.value("manifest", c.manifest);
    c.suite = j.value("suite", c.suite);
    c.variants = j.value("variants", c.variants);
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    c.jobs = j.value("jobs", c.jobs);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config not found: " + path.string());
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  RunConfig c;
  merge_run_config(j, c);
  return c;
}

nlohmann::ordered_json run_config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["preset"] = c.preset;
  j["backend"] = c.backend;
  j["endpoint"] = c.endpoint;
  j["manifest"] = c.manifest;
  j["suite"] = c.suite;
  j["variants"] = c.variants;
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  j["jobs"] = c.jobs;
  j["timeout_ms"] = c.timeout_ms;
  j["tracker"] = tracker_config_json(c.tracker);
  return j;
}

int cmd_track(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidInvocation;
  }

  std::vector<Job> jobs;
  try {
    jobs = cfg.suite.empty() ? jobs_from_manifest(cfg) : jobs_from_suite(cfg);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidInvocation;
  }

  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = run_job(jobs[i], cfg);
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(cfg.jobs, std::max<std::size_t>(jobs.size(), 1));
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  std::size_t failed = 0;
  std::vector<SequenceScores> scored;
  std::vector<std::string> ids;
  try {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const Job& job = jobs[i];
      const JobResult& r = results[i];
      if (!r.error.empty()) {
        ++failed;
        log << "sequence " << job.id << " failed: " << r.error << '\n';
        continue;
      }
      ids.push_back(job.id);
      write_file(cfg.out_dir / "predictions" / (job.id + ".txt"), format_predictions(r.outputs));
      write_file(cfg.out_dir / "telemetry" / (job.id + ".jsonl"), format_telemetry(r.outputs));

      std::vector<FramePrediction> preds;
      preds.reserve(r.outputs.size());
      for (const auto& o : r.outputs) preds.push_back({o.bbox, o.confidence});
      scored.push_back({job.id, job.discipline, score_frames(preds, align_groundtruth(preds.size(), job.gt))});
    }

    auto manifest = run_config_json(cfg);
    manifest["sequences"] = ids;
    write_file(cfg.out_dir / "run_manifest.json", manifest.dump(2) + "\n");

    // Sequences whose ground truth is empty past frame 0 cannot be scored.
    std::erase_if(scored, [](const SequenceScores& s) {
      return std::none_of(s.frames.begin(), s.frames.end(), [](const FrameScore& f) { return f.gt_present; });
    });
    if (!scored.empty()) {
      const std::vector<NamedReport> variants{{variant_name(cfg), aggregate_report(scored)}};
      write_file(cfg.out_dir / "report.json", report_json(variants));
      write_file(cfg.out_dir / "report.txt", render_table(variants));
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kPartialFailure;
  }

  log << fmt::format("tracked {}/{} sequences into {}\n", jobs.size() - failed, jobs.size(), cfg.out_dir.string());
  return failed == 0 ? kSuccess : kPartialFailure;
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
  if (opt.predictions.empty()) {
    log << "error: no prediction directories given\n";
    return kInvalidInvocation;
  }
  Manifest manifest;
  try {
    manifest = load_manifest(opt.manifest);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidInvocation;
  }

  bool partial = false;
  std::vector<NamedReport> variants;
  for (const auto& [name, dir] : opt.predictions) {
    std::vector<SequenceScores> scored;
    for (const auto& rec : manifest.sequences) {
      fs::path file = dir / (rec.id + ".txt");
      if (!fs::exists(file)) file = dir / "predictions" / (rec.id + ".txt");
      if (!fs::exists(file)) continue;
      try {
        const auto preds = load_predictions(file);
        scored.push_back({rec.id, rec.discipline, score_frames(preds, align_groundtruth(preds.size(), rec.gt))});
      } catch (const Error& e) {
        partial = true;
        log << name << ": sequence " << rec.id << ": " << e.what() << '\n';
      }
    }
    if (scored.empty()) {
      log << "error: " << name << ": no predictions overlap the manifest\n";
      return kPartialFailure;
    }
    try {
      variants.emplace_back(name, aggregate_report(scored));
    } catch (const Error& e) {
      log << "error: " << name << ": " << e.what() << '\n';
      return kPartialFailure;
    }
  }

  try {
    write_file(opt.out_dir / "report.json", report_json(variants));
    const std::string table = render_table(variants);
    write_file(opt.out_dir / "report.txt", table);
    log << table;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kPartialFailure;
  }
  return partial ? kPartialFailure : kSuccess;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
  std::vector<synth::ScenarioScript> suite;
  try {
    suite = synth::scenario_suite(opt.seed, opt.suite, opt.variants);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidInvocation;
  }
  try {
    std::vector<ManifestEntry> entries;
    for (const auto& script : suite) {
      const auto generated = synth::generate_world(script);
      const std::string script_rel = "scenarios/" + script.id + ".json";
      const std::string gt_rel = "gt/" + script.id + ".txt";
      write_file(opt.out_dir / script_rel, synth::to_json(script).dump(2) + "\n");
      write_groundtruth(opt.out_dir / gt_rel, generated.record.gt);
      entries.push_back({script.id, script.discipline, script.length, script.frame_dims, gt_rel, "synth:" + script_rel});
    }
    write_file(opt.out_dir / "manifest.json", manifest_json(entries));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kPartialFailure;
  }
  log << fmt::format("wrote {} scenarios to {}\n", suite.size(), opt.out_dir.string());
  return kSuccess;
}

int cmd_weights(const WeightsOptions& opt, std::ostream& out) {
  std::vector<std::pair<std::string, std::int64_t>> rows;
  try {
    if (!opt.counts.empty() == !opt.manifest.empty()) throw ConfigError("give exactly one of --manifest or --counts");
    if (!opt.counts.empty()) {
      rows = parse_counts(opt.counts);
    } else {
      const auto counts = count_frames(load_manifest(opt.manifest).sequences);
      rows.assign(counts.begin(), counts.end());
    }
    if (rows.empty()) throw DatasetError("empty manifest");
  } catch (const Error& e) {
    out << "error: " << e.what() << '\n';
    return kInvalidInvocation;
  }

  SamplingWeights weights;
  try {
    DisciplineCounts counts;
    for (const auto& [tag, n] : rows) counts[tag] = n;
    weights = compute_sampling_weights(counts);
  } catch (const Error& e) {
    out << "error: " << e.what() << '\n';
    return kPartialFailure;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  out << fmt::format("{:<12}{:>12}{:>10}\n", "Discipline", "Samples", "Weight");
  for (const auto& [tag, n] : rows) out << fmt::format("{:<12}{:>12}{:>10.3f}\n", tag, n, weights.at(tag));
  return kSuccess;
}

}  // namespace skitrack::app
