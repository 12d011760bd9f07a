#pragma once

#include "core/instance.hpp"

namespace dsk {

// One episode's live state: the world plus its predicate tree, with latched
// success/failure. Owns value copies, so parallel episodes are independent.
class Env {
 public:
  explicit Env(TaskInstance instance);

  void reset();

  struct StepResult {
    double reward = 0;
    bool success = false;  // latched root success
    bool failure = false;  // absorbed root failure
    bool done = false;
  };

  StepResult step(const Action& a);

  const WorldState& state() const { return world_; }
  const WorldState& prev_state() const { return prev_; }
  const Predicate& tree() const { return tree_; }
  Predicate& tree_for_scheduling() { return tree_; }
  const TaskInstance& instance() const { return instance_; }
  bool succeeded() const { return success_; }
  bool failed() const { return tree_.failed(); }
  double last_reward() const { return last_reward_; }

 private:
  TaskInstance instance_;
  WorldState world_;
  WorldState prev_;
  Predicate tree_;
  bool success_ = false;
  double last_reward_ = 0;
};

}  // namespace dsk
