#include <cstdio>
#include <iostream>
#include <memory>

#include "core/config.hpp"
#include "core/env.hpp"
#include "core/error.hpp"
#include "core/harness.hpp"
#include "core/solvers.hpp"
#include "core/tasks.hpp"
#include "json.hpp"

namespace dsk {

namespace {

using nlohmann::json;

void reply(const json& j) {
  std::cout << j.dump() << "\n";
  std::cout.flush();
}

// The oracle side keeps its own mirror of the episode: the engine is
// deterministic, so stepping the mirror with the actions it emitted keeps it
// in lockstep with the evaluator's world without ever parsing the frames.
struct OracleServer {
  std::unique_ptr<Env> env;
  std::unique_ptr<OraclePolicy> oracle;

  void reset(const std::string& task, uint64_t seed, Split split) {
    TaskInstance inst = instantiate(task, seed, split);
    env = std::make_unique<Env>(inst);
    oracle = std::make_unique<OraclePolicy>(inst);
  }

  json act() {
    json out;
    out["type"] = "act";
    if (!env) fail(Errc::protocol, "obs before reset");
    OraclePolicy::Result r = oracle->act(*env);
    auto a = r.action.as_array();
    out["action"] = {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    if (!r.phase.empty()) out["phase"] = r.phase;
    if (!r.solver_kind.empty()) out["solver"] = r.solver_kind;
    env->step(r.action);
    return out;
  }
};

struct RandomServer {
  std::unique_ptr<Rng> rng;
  void reset(const std::string& task, uint64_t seed) {
    rng = std::make_unique<Rng>(Rng::hash_mix(seed ^ Rng::hash_str(task) ^ 0xbadbeef));
  }
  json act() {
    const Config& cfg = config();
    if (!rng) fail(Errc::protocol, "obs before reset");
    json out;
    out["type"] = "act";
    out["action"] = {rng->uniform(-cfg.max_translation, cfg.max_translation),
                     rng->uniform(-cfg.max_translation, cfg.max_translation),
                     rng->uniform(-cfg.max_translation, cfg.max_translation),
                     rng->uniform(-cfg.max_rotation, cfg.max_rotation),
                     rng->uniform(-cfg.max_rotation, cfg.max_rotation),
                     rng->uniform(-cfg.max_rotation, cfg.max_rotation),
                     rng->uniform(-1.0, 1.0)};
    return out;
  }
};

}  // namespace

void serve_policy(const std::string& kind) {
  if (kind != "oracle" && kind != "random" && kind != "zero")
    fail(Errc::invalid_arg, "unknown policy kind: " + kind);
  OracleServer oracle;
  RandomServer random;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::exception& e) {
      json err;
      err["type"] = "error";
      err["message"] = std::string("bad json: ") + e.what();
      reply(err);
      continue;
    }
    std::string type = msg.value("type", "");
    try {
      if (type == "hello") {
        json r;
        r["type"] = "ready";
        reply(r);
      } else if (type == "reset") {
        std::string task = msg.at("task").get<std::string>();
        uint64_t seed = msg.at("seed").get<uint64_t>();
        Split split = parse_split(msg.value("split", "train"));
        if (kind == "oracle") oracle.reset(task, seed, split);
        if (kind == "random") random.reset(task, seed);
        json r;
        r["type"] = "ready";
        reply(r);
      } else if (type == "obs") {
        if (kind == "oracle") {
          reply(oracle.act());
        } else if (kind == "random") {
          reply(random.act());
        } else {
          json r;
          r["type"] = "act";
          r["action"] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0};
          reply(r);
        }
      } else if (type == "bye") {
        return;
      } else {
        json err;
        err["type"] = "error";
        err["message"] = "unknown message type: " + type;
        reply(err);
      }
    } catch (const std::exception& e) {
      json err;
      err["type"] = "error";
      err["message"] = e.what();
      reply(err);
    }
  }
}

}  // namespace dsk
