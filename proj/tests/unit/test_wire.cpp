#include <doctest.h>

#include <cmath>
#include <deque>
#include <fstream>
#include <random>

#include "skitrack/errors.hpp"
#include "skitrack/text.hpp"
#include "skitrack/tracker.hpp"
#include "skitrack/wire.hpp"

using namespace skitrack;
using wire::Json;

namespace {

// In-memory peer: serves queued replies, captures what the client writes.
class MemoryStream final : public wire::ByteStream {
 public:
  void queue(const std::string& json_text) {
    const auto framed = wire::frame_message(Json::parse(json_text));
    incoming.insert(incoming.end(), framed.begin(), framed.end());
  }
  void write_all(std::span<const std::uint8_t> bytes) override { written.insert(written.end(), bytes.begin(), bytes.end()); }
  std::vector<std::uint8_t> read_exact(std::size_t n, std::chrono::milliseconds) override {
    if (incoming.size() < n) throw LocalizerUnavailable("timed out waiting for reply");
    std::vector<std::uint8_t> out(incoming.begin(), incoming.begin() + static_cast<long>(n));
    incoming.erase(incoming.begin(), incoming.begin() + static_cast<long>(n));
    return out;
  }
  std::deque<std::uint8_t> incoming;
  std::vector<std::uint8_t> written;
};

std::vector<std::uint8_t> raw_frame(const std::string& text) {
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

std::string echo_endpoint(const std::string& mode) { return std::string("exec:") + SKITRACK_ECHO_SIDECAR + " " + mode; }

}  // namespace

TEST_CASE("base64 matches the RFC 4648 vectors") {
  auto enc = [](std::string_view s) {
    return wire::base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foob") == "Zm9vYg==");
  CHECK(enc("fooba") == "Zm9vYmE=");
  CHECK(enc("foobar") == "Zm9vYmFy");

  std::mt19937 rng(1);
  for (int len = 0; len < 64; ++len) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    REQUIRE(wire::base64_decode(wire::base64_encode(bytes)) == bytes);
  }
  CHECK_THROWS_AS(wire::base64_decode("abc"), ProtocolViolation);
  CHECK_THROWS_AS(wire::base64_decode("a=bc"), ProtocolViolation);
}

TEST_CASE("messages are length-prefixed big-endian") {
  Json j;
  j["a"] = 1;
  CHECK(wire::frame_message(j) == raw_frame(R"({"a":1})"));
}

TEST_CASE("golden transcript: client bytes and parsed reply") {
  std::ifstream in(std::string(SKITRACK_FIXTURES) + "/wire/transcript1.jsonl");
  REQUIRE(in);
  std::vector<std::pair<std::string, std::string>> transcript;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    transcript.emplace_back(j["dir"], j["text"]);
  }
  REQUIRE(transcript.size() == 4);

  auto stream = std::make_unique<MemoryStream>();
  MemoryStream* peer = stream.get();
  peer->queue(transcript[1].second);
  peer->queue(transcript[3].second);

  auto pixels = std::make_shared<Image>(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) pixels->rgb[(y * 4 + x) * 3 + c] = static_cast<std::uint8_t>(10 * y + x + 100 * c);
  const Frame frame{0, {4, 4}, pixels};

  wire::ExternalLocalizer client(std::move(stream));
  CHECK(client.sidecar_name() == "echo");
  const auto tmpl = client.make_template(frame, CropSpec{2, 2, 4, 2, {4, 4}});
  const auto result = client.localize(tmpl, tmpl, CropSpec{2, 2, 4, 4, {4, 4}}, frame);

  auto expected = raw_frame(transcript[0].second);
  const auto request = raw_frame(transcript[2].second);
  expected.insert(expected.end(), request.begin(), request.end());
  CHECK(peer->written == expected);

  // [0.5,0.5,0.25,0.25] on a 4 px crop.
  CHECK(result.bbox_local == BBox{1.5, 1.5, 1.0, 1.0});
  CHECK(result.confidence == 0.9);
}

TEST_CASE("reply validation") {
  CHECK(wire::parse_reply(Json::parse(R"({"id":3,"bbox":[0.5,0.5,0.25,0.25],"score":0.9})"), 3, 320).bbox_local ==
        BBox{120, 120, 80, 80});
  CHECK_THROWS_WITH_AS(wire::parse_reply(Json::parse(R"({"id":3,"bbox":[0.5,0.5,0.25,0.25],"score":1.3})"), 3, 320),
                       doctest::Contains("protocol violation"), ProtocolViolation);
  CHECK_THROWS_AS(wire::parse_reply(Json::parse(R"({"id":4,"bbox":[0.5,0.5,0.25,0.25],"score":0.5})"), 3, 320),
                  ProtocolViolation);
  CHECK_THROWS_AS(wire::parse_reply(Json::parse(R"({"id":3,"bbox":[0.5,0.5,0.25],"score":0.5})"), 3, 320),
                  ProtocolViolation);
  CHECK_THROWS_AS(wire::parse_reply(Json::parse(R"({"id":3,"bbox":[0.5,"x",0.25,0.1],"score":0.5})"), 3, 320),
                  ProtocolViolation);
  CHECK_THROWS_AS(wire::parse_reply(Json::parse(R"({"id":3,"error":"boom"})"), 3, 320), ProtocolViolation);
  CHECK_THROWS_AS(wire::parse_reply(Json::parse(R"({"id":3,"bbox":[0.5,0.5,-0.25,0.25],"score":0.5})"), 3, 320),
                  ProtocolViolation);
}

TEST_CASE("property: the client never hands out an invalid result") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> any(-3.0, 3.0);
  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    Json reply;
    reply["id"] = 1;
    reply["bbox"] = {any(rng), any(rng), any(rng), any(rng)};
    reply["score"] = any(rng);
    try {
      const auto r = wire::parse_reply(reply, 1, 320);
      REQUIRE(r.confidence >= 0.0);
      REQUIRE(r.confidence <= 1.0);
      REQUIRE(r.bbox_local.w >= 0.0);
      REQUIRE(r.bbox_local.h >= 0.0);
      ++accepted;
    } catch (const ProtocolViolation&) {
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("truncated or oversized frames") {
  MemoryStream s;
  s.incoming = {0, 0, 0, 10, '{'};
  CHECK_THROWS_AS(wire::receive_message(s, std::chrono::milliseconds(10)), LocalizerUnavailable);
  MemoryStream big;
  big.incoming = {0xff, 0xff, 0xff, 0xff};
  CHECK_THROWS_AS(wire::receive_message(big, std::chrono::milliseconds(10)), ProtocolViolation);
}

TEST_CASE("live sidecar over exec") {
  const Frame frame{1, {1280, 720}, nullptr};
  const CropSpec crop = make_crop({100, 100, 40, 40}, 5.0, 320, {1280, 720});

  SUBCASE("echo") {
    wire::ExternalLocalizer client(wire::connect(echo_endpoint("echo")));
    const auto tmpl = client.make_template(frame, make_crop({100, 100, 40, 40}, 2.0, 128, {1280, 720}));
    const auto r = client.localize(tmpl, tmpl, crop, frame);
    CHECK(r.bbox_local == BBox{120, 120, 80, 80});
    CHECK(r.confidence == 0.9);
    const auto r2 = client.localize(tmpl, tmpl, crop, frame);
    CHECK(r2.bbox_local == r.bbox_local);
  }
  SUBCASE("score out of range") {
    wire::ExternalLocalizer client(wire::connect(echo_endpoint("bad-score")));
    const auto tmpl = client.make_template(frame, crop);
    CHECK_THROWS_WITH_AS(client.localize(tmpl, tmpl, crop, frame), doctest::Contains("protocol violation"),
                         ProtocolViolation);
  }
  SUBCASE("silent sidecar times out") {
    wire::ExternalLocalizer client(wire::connect(echo_endpoint("silent")), std::chrono::milliseconds(200));
    const auto tmpl = client.make_template(frame, crop);
    CHECK_THROWS_WITH_AS(client.localize(tmpl, tmpl, crop, frame), doctest::Contains("localizer unavailable"),
                         LocalizerUnavailable);
  }
  SUBCASE("malformed reply") {
    wire::ExternalLocalizer client(wire::connect(echo_endpoint("garbage")));
    const auto tmpl = client.make_template(frame, crop);
    CHECK_THROWS_AS(client.localize(tmpl, tmpl, crop, frame), ProtocolViolation);
  }
  SUBCASE("wrong protocol version") {
    CHECK_THROWS_WITH_AS(wire::ExternalLocalizer(wire::connect(echo_endpoint("proto2"))),
                         doctest::Contains("unsupported protocol"), ProtocolViolation);
  }
  SUBCASE("dead sidecar") {
    CHECK_THROWS_AS(wire::ExternalLocalizer(wire::connect("exec:/nonexistent/sidecar"), std::chrono::milliseconds(2000)),
                    LocalizerUnavailable);
  }
  SUBCASE("unreachable socket") {
    CHECK_THROWS_AS(wire::connect("unix:/nonexistent/sock"), LocalizerUnavailable);
  }
}

TEST_CASE("end-to-end tracking against the echo sidecar") {
  // Independent geometry: the echo box is a quarter of the search crop,
  // centred on it, so each frame's box keeps the previous centre with
  // side 5 * sqrt(w*h) / 4, clipped to the frame.
  const FrameDims dims{1280, 720};
  wire::ExternalLocalizer client(wire::connect(echo_endpoint("echo")));
  const BBox first{620, 340, 40, 40};
  const auto outputs = run_sequence(BlankFrameSource(dims, 100), first, {}, client);
  REQUIRE(outputs.size() == 99);

  BBox prev = first;
  for (const auto& o : outputs) {
    const double cx = prev.x + prev.w / 2, cy = prev.y + prev.h / 2;
    const double s = 5.0 * std::sqrt(prev.w * prev.h) / 4.0;
    const double x0 = std::clamp(cx - s / 2, 0.0, 1280.0), x1 = std::clamp(cx + s / 2, 0.0, 1280.0);
    const double y0 = std::clamp(cy - s / 2, 0.0, 720.0), y1 = std::clamp(cy + s / 2, 0.0, 720.0);
    const BBox expected{x0, y0, x1 - x0, y1 - y0};
    REQUIRE(o.bbox.x == doctest::Approx(expected.x).epsilon(1e-9));
    REQUIRE(o.bbox.y == doctest::Approx(expected.y).epsilon(1e-9));
    REQUIRE(o.bbox.w == doctest::Approx(expected.w).epsilon(1e-9));
    REQUIRE(o.bbox.h == doctest::Approx(expected.h).epsilon(1e-9));
    REQUIRE(o.confidence == 0.9);
    REQUIRE_FALSE(o.reattempted);
    prev = o.bbox;
  }
}
