#pragma once

#include <memory>

#include "skitrack/geometry.hpp"
#include "skitrack/image.hpp"

namespace skitrack {

/// Backend-owned template contents (pixels, embedding, or nothing at all).
class TemplatePayload {
 public:
  virtual ~TemplatePayload() = default;
};

struct TemplateRef {
  std::size_t source_frame = 0;
  CropSpec crop;
  std::shared_ptr<const TemplatePayload> payload;
};

struct LocalizerResult {
  BBox bbox_local;  // in search-crop output coordinates, may exceed the crop
  double confidence = 0.0;
};

/// The seam where a target-localization model plugs in.
class Localizer {
 public:
  virtual ~Localizer() = default;

  virtual TemplateRef make_template(const Frame& frame, const CropSpec& crop) = 0;

  virtual LocalizerResult localize(const TemplateRef& initial_template,
                                   const TemplateRef& dynamic_template,
                                   const CropSpec& search_crop, const Frame& frame) = 0;
};

/// Throws ProtocolViolation when the result breaks the LocalizerResult
/// invariants (non-finite box, negative size, confidence outside [0,1]).
void validate_result(const LocalizerResult& result);

}  // namespace skitrack
