// Test double for a localizer sidecar speaking wire protocol v1 over stdio.
//
//   echo_sidecar [mode]
//     echo      answer every request with bbox [0.5,0.5,0.25,0.25], score 0.9
//     bad-score answer with score 1.3
//     silent    complete the handshake, then never answer
//     garbage   answer requests with a body that is not JSON
//     proto2    claim protocol version 2 in the handshake

#include <chrono>
#include <string>
#include <thread>

#include "skitrack/errors.hpp"
#include "skitrack/wire.hpp"

using skitrack::wire::Json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  auto stream = skitrack::wire::stdio_stream();
  const auto forever = std::chrono::hours(1);
  try {
    const Json hello = skitrack::wire::receive_message(*stream, forever);
    Json answer;
    if (hello.value("proto", -1) != 1) {
      answer["error"] = "unsupported protocol";
      skitrack::wire::send_message(*stream, answer);
      return 0;
    }
    answer["proto"] = mode == "proto2" ? 2 : 1;
    answer["role"] = "localizer";
    answer["name"] = "echo";
    skitrack::wire::send_message(*stream, answer);

    while (true) {
      const Json request = skitrack::wire::receive_message(*stream, forever);
      if (mode == "silent") continue;
      if (mode == "garbage") {
        const std::string junk = "not json";
        std::vector<std::uint8_t> bytes{0, 0, 0, static_cast<std::uint8_t>(junk.size())};
        bytes.insert(bytes.end(), junk.begin(), junk.end());
        stream->write_all(bytes);
        continue;
      }
      Json reply;
      reply["id"] = request.value("id", -1);
      try {
        for (const char* key : {"init_template", "dyn_template", "search"})
          skitrack::wire::decode_image(request.at(key));
      } catch (const std::exception& e) {
        reply["error"] = e.what();
        skitrack::wire::send_message(*stream, reply);
        continue;
      }
      reply["bbox"] = {0.5, 0.5, 0.25, 0.25};
      reply["score"] = mode == "bad-score" ? 1.3 : 0.9;
      skitrack::wire::send_message(*stream, reply);
    }
  } catch (const skitrack::Error&) {
    return 0;  // client went away
  }
}
