#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "skitrack/app.hpp"
#include "skitrack/dataset.hpp"
#include "skitrack/errors.hpp"
#include "skitrack/text.hpp"

using namespace skitrack;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("skitrack-app-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult cli(const std::string& args, const fs::path& workdir) {
  const auto log = workdir / "cli.log";
  const std::string cmd = "cd '" + workdir.string() + "' && '" + SKITRACK_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, fs::exists(log) ? read_file(log) : ""};
}

// Writes every file below `dir` as one string, paths included.
std::string snapshot(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += fs::relative(f, dir).string() + "\n" + read_file(f);
  return out;
}

std::string fmt_box(double x) { return format_number(x) + ",10,20,20,1\n"; }

// Five-frame sequences whose predictions either match the ground truth
// exactly or miss it entirely, all at confidence 1.
void write_eval_fixture(const fs::path& dir, const std::vector<std::tuple<std::string, std::string, bool>>& seqs) {
  std::vector<ManifestEntry> entries;
  fs::create_directories(dir / "pred");
  for (const auto& [id, tag, hit] : seqs) {
    GroundTruth gt;
    std::string preds;
    for (int t = 0; t < 5; ++t) {
      gt.push_back(BBox{10.0 * t, 10, 20, 20});
      if (t > 0) preds += hit ? fmt_box(10.0 * t) : "200,200,20,20,1\n";
    }
    write_groundtruth(dir / (id + ".txt"), gt);
    write_file(dir / "pred" / (id + ".txt"), preds);
    entries.push_back({id, tag, 5, {320, 240}, id + ".txt", "frames/" + id});
  }
  write_file(dir / "manifest.json", manifest_json(entries));
}

}  // namespace

TEST_CASE("presets and ablations map onto the two switches") {
  TrackerConfig c;
  app::apply_preset("baseline", c);
  CHECK_FALSE(c.reattempt_enabled);
  CHECK_FALSE(c.itu_enabled);
  app::apply_preset("ours", c);
  CHECK(c.reattempt_enabled);
  CHECK(c.itu_enabled);
  app::apply_preset("finetuned", c);
  CHECK_FALSE(c.reattempt_enabled);
  app::apply_ablation("reattempt=on, itu=off", c);
  CHECK(c.reattempt_enabled);
  CHECK_FALSE(c.itu_enabled);
  CHECK_THROWS_AS(app::apply_preset("turbo", c), ConfigError);
  CHECK_THROWS_AS(app::apply_ablation("warp=on", c), ConfigError);
  CHECK_THROWS_AS(app::apply_ablation("itu", c), ConfigError);
}

TEST_CASE("tracker config JSON round-trips and merges") {
  TrackerConfig c;
  c.update_interval = 150;
  c.itu_enabled = false;
  TrackerConfig back;
  app::merge_tracker_config(nlohmann::json::parse(app::tracker_config_json(c).dump()), back);
  CHECK(back == c);

  TrackerConfig partial;
  app::merge_tracker_config(nlohmann::json::parse(R"({"search_factor": 4.0})"), partial);
  CHECK(partial.search_factor == 4.0);
  CHECK(partial.update_interval == 200);
}

TEST_CASE("run config validation") {
  app::RunConfig r;
  r.suite = "cs";
  CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("seed"), ConfigError);
  r.seed = 1;
  CHECK_NOTHROW(r.validate());
  r.manifest = "m.json";
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r.suite.clear();
  r.backend = "external";
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r.endpoint = "unix:/tmp/x";
  CHECK_NOTHROW(r.validate());
  r.tracker.search_factor = -1;
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("cli: invalid invocations exit 2") {
  const auto dir = scratch("invalid");
  auto r = cli("track --manifest nope.json --seed 1", dir);
  CHECK(r.code == 2);
  CHECK(r.output.find("manifest not found") != std::string::npos);
  CHECK(cli("track --suite cs", dir).code == 2);          // no seed
  CHECK(cli("track --bogus", dir).code == 2);
  CHECK(cli("", dir).code == 2);
  CHECK(cli("weights", dir).code == 2);
  CHECK(cli("track --suite cs --seed 1 --preset turbo", dir).code == 2);
}

TEST_CASE("cli: weights") {
  const auto dir = scratch("weights");
  auto r = cli("weights --counts AL=114575,FS=53389,JP=20536", dir);
  CHECK(r.code == 0);
  CHECK(r.output ==
        "Discipline       Samples    Weight\n"
        "AL                114575     1.000\n"
        "FS                 53389     2.146\n"
        "JP                 20536     5.579\n");
  r = cli("weights --counts JP=12", dir);
  CHECK(r.code == 0);
  CHECK(r.output.find("1.000") != std::string::npos);

  REQUIRE(cli("simulate --suite sc --seed 2 --variants 3 --out sims", dir).code == 0);
  r = cli("weights --manifest sims/manifest.json", dir);
  CHECK(r.code == 0);
  CHECK(r.output.find("AL                   300     1.000") != std::string::npos);
}

TEST_CASE("cli: simulate is idempotent per seed") {
  const auto dir = scratch("simulate");
  REQUIRE(cli("simulate --suite all --seed 7 --variants 2 --out a", dir).code == 0);
  REQUIRE(cli("simulate --suite all --seed 7 --variants 2 --out b", dir).code == 0);
  CHECK(snapshot(dir / "a") == snapshot(dir / "b"));
  REQUIRE(cli("simulate --suite cs --seed 7 --variants 2 --out c", dir).code == 0);
  const auto m = load_manifest(dir / "c" / "manifest.json");
  REQUIRE(m.sequences.size() == 2);
  for (const auto& s : m.sequences) CHECK(s.id.rfind("cs-", 0) == 0);
}

TEST_CASE("cli: track writes predictions, telemetry and a run manifest") {
  const auto dir = scratch("track");
  write_file(dir / "run.json", R"({"seed": 3, "tracker": {"update_interval": 150, "itu_min_gap": 40}})");
  const auto r = cli("track --config run.json --suite occ --variants 2 --update-interval 120 --out run", dir);
  REQUIRE(r.code == 0);
  for (const auto* id : {"occ-001", "occ-002"}) {
    CHECK(fs::exists(dir / "run" / "predictions" / (std::string(id) + ".txt")));
    CHECK(fs::exists(dir / "run" / "telemetry" / (std::string(id) + ".jsonl")));
  }
  const auto manifest = nlohmann::json::parse(read_file(dir / "run" / "run_manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["tracker"]["update_interval"] == 120);  // flag beats file
  CHECK(manifest["tracker"]["itu_min_gap"] == 40);       // file beats default
  CHECK(manifest["tracker"]["search_factor"] == 5.0);    // default
  CHECK(manifest["sequences"].size() == 2);

  const auto preds = split(read_file(dir / "run" / "predictions" / "occ-001.txt"), '\n');
  CHECK(std::count_if(preds.begin(), preds.end(), [](auto s) { return !s.empty(); }) == 299);
  const auto first = nlohmann::json::parse(split(read_file(dir / "run" / "telemetry" / "occ-001.jsonl"), '\n')[0]);
  CHECK(first["frame"] == 1);
  CHECK(first.contains("reattempted"));
  CHECK(first.contains("update_cause"));

  // Re-running from the written run manifest reproduces the predictions.
  REQUIRE(cli("track --config run/run_manifest.json --out rerun", dir).code == 0);
  CHECK(snapshot(dir / "run" / "predictions") == snapshot(dir / "rerun" / "predictions"));
}

TEST_CASE("cli: a failing sequence does not stop the run") {
  const auto dir = scratch("partial");
  REQUIRE(cli("simulate --suite occ --seed 1 --variants 2 --out sims", dir).code == 0);
  fs::remove(dir / "sims" / "scenarios" / "occ-001.json");
  const auto r = cli("track --manifest sims/manifest.json --seed 1 --out run", dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("occ-001") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "run" / "predictions" / "occ-001.txt"));
  CHECK(fs::exists(dir / "run" / "predictions" / "occ-002.txt"));
}

TEST_CASE("cli: external backend through the sidecar") {
  const auto dir = scratch("external");
  REQUIRE(cli("simulate --suite occ --seed 1 --variants 1 --out sims", dir).code == 0);
  const std::string endpoint = std::string("exec:") + SKITRACK_ECHO_SIDECAR + " echo";
  auto r = cli("track --manifest sims/manifest.json --backend external --endpoint '" + endpoint + "' --out run", dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "run" / "predictions" / "occ-001.txt"));

  r = cli("track --manifest sims/manifest.json --backend external --endpoint unix:/nonexistent/sock --out dead", dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("localizer unavailable") != std::string::npos);
}

TEST_CASE("cli: evaluate golden reports") {
  const auto dir = scratch("evaluate");

  SUBCASE("one perfect and one empty-overlap sequence pool to 0.5") {
    write_eval_fixture(dir, {{"a", "AL", true}, {"b", "JP", false}});
    const auto r = cli("evaluate --pred run=pred --manifest manifest.json --out rep", dir);
    CHECK(r.code == 0);
    CHECK(read_file(dir / "rep" / "report.txt") ==
          "Discipline Metric             run\n"
          "All        F1-score         0.500\n"
          "           Precision        0.500\n"
          "           Recall           0.500\n"
          "Alpine     F1-score         1.000\n"
          "           Precision        1.000\n"
          "           Recall           1.000\n"
          "Jumping    F1-score         0.000\n"
          "           Precision        0.000\n"
          "           Recall           0.000\n");
    const auto report = nlohmann::json::parse(read_file(dir / "rep" / "report.json"));
    CHECK(report.dump().find("\"a\"") != std::string::npos);
  }
  SUBCASE("identical sequences in every discipline give identical rows") {
    write_eval_fixture(dir, {{"a", "AL", true}, {"b", "JP", true}, {"c", "FS", true}});
    const auto r = cli("evaluate --pred pred --manifest manifest.json --out rep", dir);
    CHECK(r.code == 0);
    const auto table = read_file(dir / "rep" / "report.txt");
    CHECK(table.find("0.000") == std::string::npos);
    CHECK(table.find("Freestyle  F1-score         1.000") != std::string::npos);
  }
  SUBCASE("no overlapping predictions") {
    write_eval_fixture(dir, {{"a", "AL", true}});
    fs::remove(dir / "pred" / "a.txt");
    CHECK(cli("evaluate --pred pred --manifest manifest.json --out rep", dir).code == 1);
  }
}
