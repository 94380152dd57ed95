#include "skitrack/wire.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include "skitrack/errors.hpp"

namespace skitrack::wire {
namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

// Stream over a pair of file descriptors (equal for sockets). Optionally
// owns a child process spawned for exec: endpoints.
class FdStream final : public ByteStream {
 public:
  FdStream(int read_fd, int write_fd, pid_t child = -1) : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

  ~FdStream() override {
    ::close(read_fd_);
    if (write_fd_ != read_fd_) ::close(write_fd_);
    if (child_ > 0) {
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;

  void write_all(std::span<const std::uint8_t> bytes) override {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw LocalizerUnavailable(errno_text("write failed"));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::vector<std::uint8_t> read_exact(std::size_t n, std::chrono::milliseconds timeout) override {
    std::vector<std::uint8_t> out(n);
    std::size_t done = 0;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (done < n) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw LocalizerUnavailable("timed out waiting for reply");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw LocalizerUnavailable(errno_text("poll failed"));
      }
      if (ready == 0) throw LocalizerUnavailable("timed out waiting for reply");
      const ssize_t got = ::read(read_fd_, out.data() + done, n - done);
      if (got < 0) {
        if (errno == EINTR) continue;
        throw LocalizerUnavailable(errno_text("read failed"));
      }
      if (got == 0) throw LocalizerUnavailable("connection closed");
      done += static_cast<std::size_t>(got);
    }
    return out;
  }

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
};

std::unique_ptr<ByteStream> connect_unix(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) throw LocalizerUnavailable("socket path too long");
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw LocalizerUnavailable(errno_text("socket"));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const auto message = errno_text("connect " + path);
    ::close(fd);
    throw LocalizerUnavailable(message);
  }
  return std::make_unique<FdStream>(fd, fd);
}

std::unique_ptr<ByteStream> connect_tcp(const std::string& host_port) {
  const auto colon = host_port.rfind(':');
  if (colon == std::string::npos) throw ConfigError("tcp endpoint needs host:port");
  const std::string host = host_port.substr(0, colon);
  const std::string port = host_port.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr)
    throw LocalizerUnavailable("cannot resolve " + host_port);
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw LocalizerUnavailable("cannot connect to " + host_port);
  return std::make_unique<FdStream>(fd, fd);
}

std::unique_ptr<ByteStream> spawn(const std::string& command) {
  // A sidecar that dies mid-write must surface as an error, not a signal.
  std::signal(SIGPIPE, SIG_IGN);
  std::array<int, 2> to_child{};
  std::array<int, 2> from_child{};
  if (::pipe2(to_child.data(), O_CLOEXEC) != 0) throw LocalizerUnavailable(errno_text("pipe"));
  if (::pipe2(from_child.data(), O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw LocalizerUnavailable(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw LocalizerUnavailable(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdStream>(from_child[0], to_child[1], pid);
}

double require_number(const Json& j, const char* what) {
  if (!j.is_number()) throw ProtocolViolation(std::string(what) + " is not a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ProtocolViolation(std::string(what) + " is not finite");
  return v;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolViolation("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = decode_char(c);
      if (d < 0 || pad > 0) throw ProtocolViolation("invalid base64");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::unique_ptr<ByteStream> connect(const std::string& endpoint) {
  if (endpoint.starts_with("unix:")) return connect_unix(endpoint.substr(5));
  if (endpoint.starts_with("tcp:")) return connect_tcp(endpoint.substr(4));
  if (endpoint.starts_with("exec:")) return spawn(endpoint.substr(5));
  throw ConfigError("unknown endpoint scheme: " + endpoint);
}

std::unique_ptr<ByteStream> stdio_stream() { return std::make_unique<FdStream>(STDIN_FILENO, STDOUT_FILENO); }

std::vector<std::uint8_t> frame_message(const Json& body) {
  const std::string text = body.dump();
  if (text.size() > kMaxMessageBytes) throw ProtocolViolation("message too large");
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

void send_message(ByteStream& stream, const Json& body) { stream.write_all(frame_message(body)); }

Json receive_message(ByteStream& stream, std::chrono::milliseconds timeout) {
  const auto header = stream.read_exact(4, timeout);
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n > kMaxMessageBytes) throw ProtocolViolation("message length " + std::to_string(n) + " too large");
  const auto body = stream.read_exact(n, timeout);
  Json parsed = Json::parse(body.begin(), body.end(), nullptr, false);
  if (parsed.is_discarded()) throw ProtocolViolation("reply is not valid JSON");
  return parsed;
}

Json encode_image(const Image& image) {
  Json j;
  j["w"] = image.width;
  j["h"] = image.height;
  j["rgb"] = base64_encode(image.rgb);
  return j;
}

Image decode_image(const Json& json) {
  if (!json.is_object() || !json.contains("w") || !json.contains("h") || !json.contains("rgb"))
    throw ProtocolViolation("image must carry w, h and rgb");
  if (!json["w"].is_number_integer() || !json["h"].is_number_integer() || !json["rgb"].is_string())
    throw ProtocolViolation("image fields have wrong types");
  Image image;
  image.width = json["w"].get<int>();
  image.height = json["h"].get<int>();
  image.rgb = base64_decode(json["rgb"].get<std::string>());
  if (image.width < 0 || image.height < 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw ProtocolViolation("image payload size does not match w*h*3");
  return image;
}

BBox reply_box_to_local(double cx, double cy, double w, double h, int out_size) {
  const double s = out_size;
  return {(cx - w / 2.0) * s, (cy - h / 2.0) * s, w * s, h * s};
}

LocalizerResult parse_reply(const Json& reply, std::int64_t expected_id, int out_size) {
  if (!reply.is_object()) throw ProtocolViolation("reply is not an object");
  if (reply.contains("error")) {
    const auto& e = reply["error"];
    throw ProtocolViolation("sidecar error: " + (e.is_string() ? e.get<std::string>() : e.dump()));
  }
  if (!reply.contains("id") || !reply["id"].is_number_integer() || reply["id"].get<std::int64_t>() != expected_id)
    throw ProtocolViolation("reply id does not match request " + std::to_string(expected_id));
  if (!reply.contains("bbox") || !reply["bbox"].is_array() || reply["bbox"].size() != 4)
    throw ProtocolViolation("bbox must be an array of four numbers");
  if (!reply.contains("score")) throw ProtocolViolation("missing score");
  const auto& b = reply["bbox"];
  LocalizerResult result;
  result.bbox_local = reply_box_to_local(require_number(b[0], "bbox[0]"), require_number(b[1], "bbox[1]"),
                                         require_number(b[2], "bbox[2]"), require_number(b[3], "bbox[3]"), out_size);
  result.confidence = require_number(reply["score"], "score");
  validate_result(result);
  return result;
}

ExternalLocalizer::ExternalLocalizer(std::unique_ptr<ByteStream> stream, std::chrono::milliseconds timeout)
    : stream_(std::move(stream)), timeout_(timeout) {
  if (!stream_) throw ConfigError("external localizer needs a stream");
  Json hello;
  hello["proto"] = kProtocolVersion;
  hello["role"] = "client";
  send_message(*stream_, hello);
  const Json answer = receive_message(*stream_, timeout_);
  if (!answer.is_object()) throw ProtocolViolation("handshake reply is not an object");
  if (answer.contains("error"))
    throw ProtocolViolation("handshake rejected: " + answer["error"].dump());
  if (answer.value("proto", -1) != kProtocolVersion) throw ProtocolViolation("unsupported protocol");
  if (answer.value("role", std::string{}) != "localizer") throw ProtocolViolation("peer is not a localizer");
  name_ = answer.value("name", std::string{});
}

TemplateRef ExternalLocalizer::make_template(const Frame& frame, const CropSpec& crop) {
  auto payload = std::make_shared<const ImagePayload>(sample_crop(frame.pixels.get(), crop));
  return {frame.index, crop, std::move(payload)};
}

LocalizerResult ExternalLocalizer::localize(const TemplateRef& initial_template, const TemplateRef& dynamic_template,
                                            const CropSpec& search_crop, const Frame& frame) {
  auto image_of = [](const TemplateRef& t) -> const Image& {
    const auto* p = dynamic_cast<const ImagePayload*>(t.payload.get());
    if (p == nullptr) throw ConfigError("template was not built by the external localizer");
    return p->image;
  };
  const std::int64_t id = next_id_++;
  Json request;
  request["id"] = id;
  request["init_template"] = encode_image(image_of(initial_template));
  request["dyn_template"] = encode_image(image_of(dynamic_template));
  request["search"] = encode_image(sample_crop(frame.pixels.get(), search_crop));
  send_message(*stream_, request);
  return parse_reply(receive_message(*stream_, timeout_), id, search_crop.out_size);
}

}  // namespace skitrack::wire
