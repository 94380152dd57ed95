#include "skitrack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "skitrack/errors.hpp"
#include "skitrack/text.hpp"

namespace skitrack {

bool is_known_discipline(const std::string& tag) { return tag == "AL" || tag == "JP" || tag == "FS"; }

SamplingWeights compute_sampling_weights(const DisciplineCounts& counts) {
  if (counts.empty()) throw DatasetError("empty dataset");
  std::int64_t max_count = 0;
  for (const auto& [tag, n] : counts) {
    if (n < 1) throw DatasetError("empty discipline: " + tag);
    max_count = std::max(max_count, n);
  }
  SamplingWeights weights;
  for (const auto& [tag, n] : counts) weights[tag] = static_cast<double>(max_count) / static_cast<double>(n);
  return weights;
}

DatasetSplit split_dataset(const std::vector<SequenceRecord>& records, const SplitFractions& fractions,
                           std::uint64_t seed) {
  const std::array<double, 3> f{fractions.train, fractions.val, fractions.test};
  if (std::any_of(f.begin(), f.end(), [](double x) { return !(x >= 0.0); }))
    throw DatasetError("split fractions must be non-negative");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw DatasetError("split fractions must sum to 1");
  if (records.empty()) throw DatasetError("insufficient sequences");
  const auto needed = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [](double x) { return x > 0.0; }));

  std::map<std::string, std::vector<std::size_t>> by_discipline;
  for (std::size_t i = 0; i < records.size(); ++i) by_discipline[records[i].discipline].push_back(i);

  std::mt19937_64 rng(seed);
  DatasetSplit split;
  std::array<std::vector<SequenceRecord>*, 3> parts{&split.train, &split.val, &split.test};
  for (auto& [tag, indices] : by_discipline) {
    const std::size_t n = indices.size();
    if (n < needed) throw DatasetError("insufficient sequences for discipline " + tag);
    std::shuffle(indices.begin(), indices.end(), rng);

    std::array<long, 3> take{std::lround(f[0] * n), std::lround(f[1] * n), 0};
    take[2] = static_cast<long>(n) - take[0] - take[1];
    if (take[2] < 0) {
      take[0] += take[2];
      take[2] = 0;
    }
    // Every partition asked for gets at least one sequence.
    for (std::size_t p = 0; p < 3; ++p) {
      if (f[p] > 0.0 && take[p] == 0) {
        const auto donor = std::max_element(take.begin(), take.end()) - take.begin();
        --take[donor];
        ++take[p];
      }
    }
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      for (long k = 0; k < take[p]; ++k) parts[p]->push_back(records[indices[cursor++]]);
    }
  }
  return split;
}

WeightedSampler::WeightedSampler(const std::vector<SequenceRecord>& records, const SamplingWeights& weights,
                                 std::size_t batch_size, std::uint64_t seed)
    : rng_(seed), batch_size_(batch_size) {
  if (records.empty()) throw DatasetError("empty dataset");
  if (batch_size == 0) throw DatasetError("batch size must be >= 1");
  std::vector<double> w;
  w.reserve(records.size());
  for (const auto& r : records) {
    const auto it = weights.find(r.discipline);
    if (it == weights.end()) throw DatasetError("no sampling weight for discipline " + r.discipline);
    ids_.push_back(r.id);
    w.push_back(it->second);
  }
  pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

const std::string& WeightedSampler::next() { return ids_[pick_(rng_)]; }

std::vector<std::string> WeightedSampler::next_batch() {
  std::vector<std::string> batch;
  batch.reserve(batch_size_);
  for (std::size_t i = 0; i < batch_size_; ++i) batch.push_back(next());
  return batch;
}

GroundTruth parse_groundtruth(const std::string& text) {
  GroundTruth gt;
  const auto lines = split(text, '\n');
  // Blank lines are only tolerated at the end of the file.
  std::size_t last = lines.size();
  while (last > 0 && trim(lines[last - 1]).empty()) --last;
  for (std::size_t i = 0; i < last; ++i) {
    const std::size_t lineno = i + 1;
    const auto fields = split(trim(lines[i]), ',');
    if (fields.size() != 4) throw ParseError(lineno, "expected 4 comma-separated values, got " + std::to_string(fields.size()));
    std::array<double, 4> v{};
    int nans = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto parsed = parse_number(fields[k]);
      if (!parsed) throw ParseError(lineno, "not a number: '" + std::string(trim(fields[k])) + "'");
      v[k] = *parsed;
      if (std::isnan(v[k])) ++nans;
      else if (!std::isfinite(v[k])) throw ParseError(lineno, "non-finite value");
    }
    if (nans == 4) {
      gt.emplace_back(std::nullopt);
      continue;
    }
    if (nans != 0) throw ParseError(lineno, "partially missing box");
    if (v[2] < 0.0 || v[3] < 0.0) throw ParseError(lineno, "negative box size");
    gt.emplace_back(BBox{v[0], v[1], v[2], v[3]});
  }
  return gt;
}

GroundTruth load_groundtruth(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DatasetError("ground truth not found: " + path.string());
  try {
    return parse_groundtruth(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void write_groundtruth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::string out;
  for (const auto& b : gt) {
    if (!b) {
      out += "NaN,NaN,NaN,NaN\n";
      continue;
    }
    out += format_number(b->x) + ',' + format_number(b->y) + ',' + format_number(b->w) + ',' + format_number(b->h) + '\n';
  }
  write_file(path, out);
}

Manifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw DatasetError("manifest not found: " + path.string());
  const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("sequences") || !doc["sequences"].is_array())
    throw DatasetError("invalid manifest: " + path.string());

  Manifest manifest;
  manifest.root = path.parent_path();
  for (const auto& s : doc["sequences"]) {
    SequenceRecord r;
    try {
      r.id = s.at("id").get<std::string>();
      r.discipline = s.at("discipline").get<std::string>();
      r.frame_count = s.at("frames").get<std::size_t>();
      r.frame_dims = {s.at("width").get<int>(), s.at("height").get<int>()};
      r.frame_source = s.value("source", std::string{});
      const auto gt_rel = s.at("gt").get<std::string>();
      r.gt = load_groundtruth(manifest.root / gt_rel);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("invalid manifest entry: " + std::string(e.what()));
    }
    if (!is_known_discipline(r.discipline)) throw DatasetError("unknown discipline '" + r.discipline + "' in " + r.id);
    if (r.frame_dims.width < 1 || r.frame_dims.height < 1) throw DatasetError("bad frame size for " + r.id);
    if (r.gt.size() != r.frame_count)
      throw DatasetError("sequence " + r.id + ": " + std::to_string(r.gt.size()) + " ground-truth lines for " +
                         std::to_string(r.frame_count) + " frames");
    manifest.sequences.push_back(std::move(r));
  }
  return manifest;
}

std::string manifest_json(const std::vector<ManifestEntry>& entries) {
  nlohmann::ordered_json seqs = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["discipline"] = e.discipline;
    j["frames"] = e.frames;
    j["width"] = e.dims.width;
    j["height"] = e.dims.height;
    j["gt"] = e.gt_path;
    j["source"] = e.source;
    seqs.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["sequences"] = std::move(seqs);
  return doc.dump(2) + "\n";
}

DisciplineCounts count_frames(const std::vector<SequenceRecord>& records) {
  DisciplineCounts counts;
  for (const auto& r : records) counts[r.discipline] += static_cast<std::int64_t>(r.frame_count);
  return counts;
}

}  // namespace skitrack
