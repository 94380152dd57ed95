#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "skitrack/geometry.hpp"

namespace skitrack {

/// Per-frame ground truth; nullopt marks an absent target.
using GroundTruth = std::vector<std::optional<BBox>>;

struct SequenceRecord {
  std::string id;
  std::string discipline;  // AL | JP | FS
  std::size_t frame_count = 0;
  FrameDims frame_dims;
  GroundTruth gt;
  std::string frame_source;  // directory path, or "synth:<script path>"
};

bool is_known_discipline(const std::string& tag);

/// Discipline tag -> number of training samples.
using DisciplineCounts = std::map<std::string, std::int64_t>;
/// Discipline tag -> sampling weight (>= 1, the largest discipline gets 1).
using SamplingWeights = std::map<std::string, double>;

/// Inverse-frequency weights: w_i = max(N) / N_i.
/// Throws DatasetError("empty discipline") when any count is below 1.
SamplingWeights compute_sampling_weights(const DisciplineCounts& counts);

struct SplitFractions {
  double train = 0.54;
  double val = 0.06;
  double test = 0.40;
};

struct DatasetSplit {
  std::vector<SequenceRecord> train;
  std::vector<SequenceRecord> val;
  std::vector<SequenceRecord> test;
};

/// Stratified by discipline, whole sequences only, seeded shuffle.
DatasetSplit split_dataset(const std::vector<SequenceRecord>& records, const SplitFractions& fractions,
                           std::uint64_t seed);

/// Draws sequence ids with replacement, each record weighted by its
/// discipline's weight.
class WeightedSampler {
 public:
  WeightedSampler(const std::vector<SequenceRecord>& records, const SamplingWeights& weights,
                  std::size_t batch_size, std::uint64_t seed);

  const std::string& next();
  std::vector<std::string> next_batch();

 private:
  std::vector<std::string> ids_;
  std::discrete_distribution<std::size_t> pick_;
  std::mt19937_64 rng_;
  std::size_t batch_size_;
};

/// One "x,y,w,h" line per frame; "NaN,NaN,NaN,NaN" marks an absent target.
/// Throws ParseError carrying the offending line number.
GroundTruth parse_groundtruth(const std::string& text);
GroundTruth load_groundtruth(const std::filesystem::path& path);
void write_groundtruth(const std::filesystem::path& path, const GroundTruth& gt);

/// A sequence listed in a manifest, with paths resolved against the
/// manifest's directory and its ground truth loaded.
struct Manifest {
  std::filesystem::path root;
  std::vector<SequenceRecord> sequences;
};

/// Reads {"sequences":[{"id","discipline","frames","width","height","gt","source"}]}.
/// Throws DatasetError("manifest not found: ...") for a missing file.
Manifest load_manifest(const std::filesystem::path& path);

struct ManifestEntry {
  std::string id;
  std::string discipline;
  std::size_t frames = 0;
  FrameDims dims;
  std::string gt_path;  // relative to the manifest
  std::string source;
};

std::string manifest_json(const std::vector<ManifestEntry>& entries);

/// Number of frames per discipline, the sample counts for weighting.
DisciplineCounts count_frames(const std::vector<SequenceRecord>& records);

}  // namespace skitrack
