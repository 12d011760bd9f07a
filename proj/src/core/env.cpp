#include "core/env.hpp"

namespace dsk {

Env::Env(TaskInstance instance) : instance_(std::move(instance)) { reset(); }

void Env::reset() {
  world_ = reset_world(instance_.initial_state);
  prev_ = world_;
  tree_ = instance_.tree;
  success_ = false;
  capture_baselines(tree_, world_);
  EvalResult r = evaluate(tree_, world_, world_);
  last_reward_ = r.reward;
  success_ = r.success;
}

Env::StepResult Env::step(const Action& a) {
  prev_ = world_;
  world_ = dsk::step(prev_, a);
  EvalResult r = evaluate(tree_, prev_, world_);
  last_reward_ = r.reward;
  success_ = success_ || r.success;
  StepResult out;
  out.reward = r.reward;
  out.success = success_;
  out.failure = tree_.failed();
  out.done = out.success || out.failure;
  return out;
}

}  // namespace dsk
