#pragma once

#include <memory>
#include <set>
#include <string>

#include "core/episode.hpp"
#include "core/env.hpp"
#include "core/solvers.hpp"

namespace dsk {

struct StepObservation {
  const Image* base = nullptr;  // present when the policy wants frames
  const Image* hand = nullptr;
  bool first = false;           // first step of the episode
};

// What a policy hands back each step, plus context the recorder can use.
struct PolicyAction {
  Action action;
  std::string phase;        // step-level annotation (empty -> derived)
  std::string solver_kind;  // skill solver in charge, for episode stats
  bool gave_up = false;
  std::string fail_reason;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const TaskInstance& inst) { (void)inst; }
  virtual PolicyAction act(Env& env, const StepObservation& obs) = 0;
  virtual bool wants_frames() const { return false; }
};

class OracleRunner : public Policy {
 public:
  void begin_episode(const TaskInstance& inst) override;
  PolicyAction act(Env& env, const StepObservation& obs) override;
  OraclePolicy* oracle() { return oracle_.get(); }

 private:
  std::unique_ptr<OraclePolicy> oracle_;
};

class RandomPolicy : public Policy {
 public:
  void begin_episode(const TaskInstance& inst) override;
  PolicyAction act(Env& env, const StepObservation& obs) override;

 private:
  std::unique_ptr<Rng> rng_;
};

class ZeroPolicy : public Policy {
 public:
  PolicyAction act(Env& env, const StepObservation& obs) override;
};

struct RunOptions {
  bool record = false;
  int max_steps = 0;  // 0: config default
};

struct RunResult {
  bool success = false;
  bool failure = false;
  int steps = 0;
  double total_reward = 0;
  std::string fail_reason;
  std::set<std::string> solver_kinds;
  EpisodeRecord record;  // populated when options.record
};

RunResult run_episode(const TaskInstance& instance, Policy& policy, const RunOptions& opts);

// Sub-task annotation template for the active predicate.
std::string subtask_label(const Predicate* node, const TaskInstance& inst);

}  // namespace dsk
