// Scriptable worker for protocol tests. Scores with the toy formula in
// oracles.hpp; block count is read from the shipped graph, not the code text.
//
//   fake_worker [mode] [n]
//     normal     answer every request
//     wrong-id   answer with id + 1000
//     silent     never answer
//     malformed  answer with a non-JSON line
//     error      answer with an error record
//     crash      exit without answering request n (default 1)
//     slow       sleep n ms before every answer
//     no-hello   exit immediately
//     bad-version  announce protocol version 99
#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "oracles.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "normal";
  const long n = argc > 2 ? std::stol(argv[2]) : 1;

  if (mode == "no-hello") return 0;
  std::cout << json{{"type", "hello"},
                    {"protocol_version", mode == "bad-version" ? 99 : 1},
                    {"name", "fake-" + mode}}
                   .dump()
            << std::endl;

  long served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception&) {
      std::cout << json{{"type", "error"}, {"id", -1}, {"message", "bad json"}}.dump()
                << std::endl;
      continue;
    }
    if (req.value("type", "") == "shutdown") return 0;
    ++served;
    const auto id = req.at("id").get<std::int64_t>();
    if (mode == "silent") continue;
    if (mode == "crash" && served == n) return 1;
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(n));
    if (mode == "malformed") {
      std::cout << "{not json" << std::endl;
      continue;
    }
    if (mode == "error") {
      std::cout << json{{"type", "error"}, {"id", id}, {"message", "out of memory"}}.dump()
                << std::endl;
      continue;
    }
    int blocks = 0;
    for (const auto& node : req.at("graph").at("nodes")) {
      if (node.at("kind") == "st_block") ++blocks;
    }
    json reply{{"type", "result"},
               {"id", mode == "wrong-id" ? id + 1000 : id},
               {"mae", oracle::toy_mae(req.at("code").get<std::string>())},
               {"inference_time", oracle::toy_time(blocks)}};
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
