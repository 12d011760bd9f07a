#include "core/runner.hpp"

#include <cstdio>

#include "core/config.hpp"
#include "core/tasks.hpp"

namespace dsk {

namespace {

std::string describe(const TaskInstance& inst, const std::string& id) {
  auto it = inst.descriptions.find(id);
  return it != inst.descriptions.end() ? it->second : id;
}

int leaves_done(const Predicate& tree) {
  int n = 0;
  for (const auto& rep : tree_report(tree))
    if (rep.node->children.empty() && rep.node->done()) ++n;
  return n;
}

}  // namespace

std::string subtask_label(const Predicate* node, const TaskInstance& inst) {
  if (!node) return "task complete";
  const Predicate& p = *node;
  auto obj = [&](size_t i) {
    return i < p.objects.size() ? describe(inst, p.objects[i]) : std::string("object");
  };
  auto base = [&](size_t i) {
    return i < p.bases.size() ? describe(inst, p.bases[i]) : std::string("target");
  };
  char buf[160];
  switch (p.kind) {
    case PredKind::ee_at_pos:
    case PredKind::ee_at_pose:
      return "move the end-effector to the goal pose";
    case PredKind::at_pos:
      return "move " + obj(0) + " to its target position";
    case PredKind::at_pose:
      return "move " + obj(0) + " to its target pose";
    case PredKind::on_top:
      return "put " + obj(0) + " on " + base(0);
    case PredKind::inside:
      return "put " + obj(0) + " in " + base(0);
    case PredKind::touch:
      if (p.touch_mode == TouchMode::push) return "push " + obj(0) + " away";
      if (p.touch_mode == TouchMode::topple) return "topple " + obj(0);
      return "touch " + obj(0);
    case PredKind::touched_gently:
      return "touch " + obj(0);
    case PredKind::touch_pushed:
      return "push " + obj(0) + " away";
    case PredKind::hit:
      return "throw " + obj(0) + " at " + base(0);
    case PredKind::topple_structure:
      return "topple the structure";
    case PredKind::push_progress:
      return "push " + obj(0) + " towards " + base(0);
    case PredKind::rotated_by:
      std::snprintf(buf, sizeof buf, "rotate %s %.0f degrees %s", obj(0).c_str(), p.angle_deg,
                    p.direction > 0 ? "anti-clockwise" : "clockwise");
      if (p.restore) return std::string("rotate ") + obj(0) + " back to its original yaw";
      return buf;
    case PredKind::balanced:
      return "balance the scale";
    case PredKind::trace_goals:
      return "trace the goals in order";
    case PredKind::not_touching:
      return "avoid the obstacles";
    case PredKind::picked:
      return "pick up " + obj(0);
    default:
      return "complete the task";
  }
}

void OracleRunner::begin_episode(const TaskInstance& inst) {
  oracle_ = std::make_unique<OraclePolicy>(inst);
}

PolicyAction OracleRunner::act(Env& env, const StepObservation&) {
  OraclePolicy::Result r = oracle_->act(env);
  PolicyAction out;
  out.action = r.action;
  out.phase = r.phase;
  out.solver_kind = r.solver_kind;
  out.gave_up = r.gave_up;
  out.fail_reason = r.fail_reason;
  return out;
}

void RandomPolicy::begin_episode(const TaskInstance& inst) {
  rng_ = std::make_unique<Rng>(
      Rng::hash_mix(inst.seed ^ Rng::hash_str(inst.task.name) ^ 0xbadbeef));
}

PolicyAction RandomPolicy::act(Env&, const StepObservation&) {
  const Config& cfg = config();
  PolicyAction out;
  out.action.translation = {rng_->uniform(-cfg.max_translation, cfg.max_translation),
                            rng_->uniform(-cfg.max_translation, cfg.max_translation),
                            rng_->uniform(-cfg.max_translation, cfg.max_translation)};
  out.action.rotation = {rng_->uniform(-cfg.max_rotation, cfg.max_rotation),
                         rng_->uniform(-cfg.max_rotation, cfg.max_rotation),
                         rng_->uniform(-cfg.max_rotation, cfg.max_rotation)};
  out.action.grip = rng_->uniform(-1, 1);
  return out;
}

PolicyAction ZeroPolicy::act(Env&, const StepObservation&) {
  PolicyAction out;
  out.action.grip = -1;
  return out;
}

RunResult run_episode(const TaskInstance& instance, Policy& policy, const RunOptions& opts) {
  const Config& cfg = config();
  int max_steps = opts.max_steps > 0 ? opts.max_steps : cfg.episode_timeout;
  bool render = opts.record || policy.wants_frames();

  Env env(instance);
  policy.begin_episode(instance);

  RunResult result;
  EpisodeRecord& rec = result.record;
  Camera cam_base = base_camera();
  Camera cam_hand = hand_camera();
  if (opts.record) {
    rec.meta.task = instance.task.name;
    rec.meta.level = level_name(instance.task.level);
    rec.meta.seed = instance.seed;
    rec.meta.split = split_name(instance.split);
    rec.meta.prompt = instance.prompt;
    rec.meta.predicates = to_text(instance.tree);
    rec.cameras = {cam_base, cam_hand};
    for (const auto& asset : instance.assets) rec.prompt_assets.push_back(asset.image);
  }

  std::string task_text = prompt_text(instance);
  int done_leaves = leaves_done(env.tree());
  bool done = env.succeeded();
  double total_reward = 0;
  int steps = 0;

  while (!done && steps < max_steps) {
    StepObservation obs;
    obs.first = steps == 0;
    Image frame_base, frame_hand;
    RenderOutput full_base, full_hand;
    if (render) {
      if (opts.record) {
        full_base = render_full(env.state(), cam_base);
        full_hand = render_full(env.state(), cam_hand);
        frame_base = full_base.image;
        frame_hand = full_hand.image;
      } else {
        frame_base = render_frame(env.state(), cam_base);
        frame_hand = render_frame(env.state(), cam_hand);
      }
      obs.base = &frame_base;
      obs.hand = &frame_hand;
    }

    const Predicate* active = next_predicate(env.tree(), env.state());
    std::string subtask = subtask_label(active, instance);

    PolicyAction pa = policy.act(env, obs);
    if (pa.gave_up) {
      result.fail_reason = pa.fail_reason.empty() ? "policy gave up" : pa.fail_reason;
      break;
    }
    if (!pa.solver_kind.empty()) result.solver_kinds.insert(pa.solver_kind);

    Env::StepResult sr = env.step(pa.action);
    total_reward += sr.reward;
    ++steps;

    if (opts.record) {
      std::array<double, 7> ad = pa.action.as_array();
      std::array<float, 7> af;
      for (int j = 0; j < 7; ++j) af[j] = float(ad[j]);
      rec.actions.push_back(af);
      rec.rewards.push_back(float(sr.reward));
      rec.success_flags.push_back(sr.success ? 1 : 0);
      rec.frames_base.push_back(std::move(frame_base));
      rec.frames_hand.push_back(std::move(frame_hand));
      std::vector<BoxLabel> step_boxes = full_base.boxes;
      step_boxes.insert(step_boxes.end(), full_hand.boxes.begin(), full_hand.boxes.end());
      rec.boxes.push_back(std::move(step_boxes));
      std::string phase = pa.phase.empty() ? "working on " + subtask : pa.phase;
      rec.annotations.push_back({task_text, subtask, phase});

      int now_done = leaves_done(env.tree());
      if (now_done > done_leaves) {
        rec.keystep_indices.push_back(steps - 1);
        rec.keystep_images.push_back(render_frame(env.state(), cam_base));
      }
      done_leaves = now_done;
    }

    done = sr.done;
    result.success = sr.success;
    result.failure = sr.failure;
  }

  result.steps = steps;
  result.total_reward = total_reward;
  if (opts.record) {
    rec.meta.success = result.success;
    rec.meta.length = steps;
  }
  return result;
}

}  // namespace dsk
