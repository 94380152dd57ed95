#pragma once

// Localizer wire protocol, version 1.
//
// Every message is a 4-byte big-endian length followed by that many bytes
// of UTF-8 JSON. The client opens with {"proto":1,"role":"client"} and the
// sidecar answers {"proto":1,"role":"localizer","name":...}. Each request
// carries the two templates and the search crop as raw RGB images; each
// reply carries a normalised [cx,cy,w,h] box and a score.

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skitrack/localizer.hpp"

namespace skitrack::wire {

using Json = nlohmann::ordered_json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxMessageBytes = 256u << 20;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Bidirectional byte stream to a sidecar.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
  /// Blocks until `n` bytes arrive. Throws LocalizerUnavailable on
  /// timeout or end of stream.
  virtual std::vector<std::uint8_t> read_exact(std::size_t n, std::chrono::milliseconds timeout) = 0;
};

/// Opens a stream from an endpoint string:
///   unix:<path>          local stream socket
///   tcp:<host>:<port>    TCP connection
///   exec:<command line>  spawns the command and talks over its stdin/stdout
std::unique_ptr<ByteStream> connect(const std::string& endpoint);

/// This process's stdin/stdout, for sidecars speaking over stdio.
std::unique_ptr<ByteStream> stdio_stream();

std::vector<std::uint8_t> frame_message(const Json& body);
void send_message(ByteStream& stream, const Json& body);
Json receive_message(ByteStream& stream, std::chrono::milliseconds timeout);

Json encode_image(const Image& image);
Image decode_image(const Json& json);

/// Converts a normalised [cx,cy,w,h] reply box into crop-local pixels.
BBox reply_box_to_local(double cx, double cy, double w, double h, int out_size);

/// Parses and validates a reply. Throws ProtocolViolation on any breach,
/// including a mismatched id or an "error" reply.
LocalizerResult parse_reply(const Json& reply, std::int64_t expected_id, int out_size);

struct ImagePayload final : TemplatePayload {
  explicit ImagePayload(Image img) : image(std::move(img)) {}
  Image image;
};

/// Client side of the protocol. One request is in flight at a time.
class ExternalLocalizer final : public Localizer {
 public:
  ExternalLocalizer(std::unique_ptr<ByteStream> stream,
                    std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

  TemplateRef make_template(const Frame& frame, const CropSpec& crop) override;
  LocalizerResult localize(const TemplateRef& initial_template, const TemplateRef& dynamic_template,
                           const CropSpec& search_crop, const Frame& frame) override;

  const std::string& sidecar_name() const { return name_; }

 private:
  std::unique_ptr<ByteStream> stream_;
  std::chrono::milliseconds timeout_;
  std::string name_;
  std::int64_t next_id_ = 1;
};

}  // namespace skitrack::wire
