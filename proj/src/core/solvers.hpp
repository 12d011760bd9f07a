#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/env.hpp"
#include "core/instance.hpp"
#include "core/planner.hpp"
#include "core/predicates.hpp"

namespace dsk {

struct SolveStep {
  enum class State { running, done, failed };
  Action action;
  State state = State::running;
  std::string phase;   // short annotation label, e.g. "moving towards red cube"
  std::string reason;  // failure diagnostics
};

// A skill solver is a pure function of the world state plus its fixed
// parameters. Plan caches are memoization only: discarding the solver and
// rebuilding it mid-episode reproduces the remaining action sequence.
class SkillSolver {
 public:
  virtual ~SkillSolver() = default;
  virtual SolveStep act(const WorldState& s) = 0;
  virtual std::string kind() const = 0;
};

struct SolverContext {
  uint64_t seed = 0;
  const std::map<std::string, std::string>* descriptions = nullptr;

  std::string describe(const std::string& id) const {
    if (descriptions) {
      auto it = descriptions->find(id);
      if (it != descriptions->end()) return it->second;
    }
    return id;
  }
};

// Greedy choice of the next predicate to work on: first unfinished child of a
// Sequence, nearest-to-EE pending child of a Set. nullptr when the tree is
// solved (or only failed nodes remain).
const Predicate* next_predicate(const Predicate& tree, const WorldState& s);

// Scripted predicate -> solver mapping. Throws Errc::invalid_arg for nodes
// that have no solver (logical nodes, constraints).
std::unique_ptr<SkillSolver> solver_for(const Predicate& p, const SolverContext& ctx);

// The scripted expert: schedules predicates, instantiates skill solvers and
// emits one action per step. All decisions derive from the current state, so
// reconstructing the policy mid-episode does not change the outcome.
class OraclePolicy {
 public:
  explicit OraclePolicy(const TaskInstance& instance);

  struct Result {
    Action action;
    bool tree_done = false;
    bool gave_up = false;
    std::string fail_reason;
    std::string solver_kind;
    std::string phase;
    const Predicate* active = nullptr;
  };

  Result act(Env& env);

  // Drops every cached solver/plan; used to exercise the statelessness
  // contract in tests.
  void reset_solvers();

  const std::set<std::string>& solver_kinds_used() const { return kinds_used_; }

 private:
  SolverContext ctx_;
  std::map<std::string, std::unique_ptr<SkillSolver>> cache_;
  std::set<std::string> kinds_used_;
  std::vector<int> current_path_;  // committed predicate; avoids greedy flip-flop
  bool has_current_ = false;
  int evictions_ = 0;
  int stall_steps_ = 0;
  int failures_ = 0;
};

}  // namespace dsk
