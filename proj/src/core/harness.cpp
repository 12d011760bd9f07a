#include "core/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "core/b64.hpp"
#include "core/config.hpp"
#include "core/episode.hpp"
#include "core/error.hpp"
#include "core/subprocess.hpp"
#include "core/tasks.hpp"
#include "json.hpp"

namespace dsk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ppm_bytes(const Image& im) {
  std::string out = "P6\n" + std::to_string(im.w) + " " + std::to_string(im.h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(im.rgb.data()), im.rgb.size());
  return out;
}

json prompt_json(const TaskInstance& inst) {
  json j;
  j["text"] = prompt_text(inst);
  json segs = json::array();
  for (const auto& seg : inst.prompt) {
    json s;
    switch (seg.type) {
      case PromptSegment::Type::text:
        s["type"] = "text";
        s["text"] = seg.text;
        break;
      case PromptSegment::Type::obj_image: s["type"] = "obj_image"; break;
      case PromptSegment::Type::tex_image: s["type"] = "tex_image"; break;
      case PromptSegment::Type::keystep: s["type"] = "keystep"; break;
      case PromptSegment::Type::scene_image: s["type"] = "scene_image"; break;
    }
    if (seg.type != PromptSegment::Type::text) {
      s["ref"] = seg.ref;
      if (seg.asset_index >= 0 && seg.asset_index < int(inst.assets.size()))
        s["image"] = b64_encode(ppm_bytes(inst.assets[size_t(seg.asset_index)].image));
    }
    segs.push_back(s);
  }
  j["segments"] = segs;
  return j;
}

// External policy over the line-delimited stdio protocol.
class SubprocessPolicy : public Policy {
 public:
  explicit SubprocessPolicy(std::string command) : command_(std::move(command)) { start(); }

  bool wants_frames() const override { return true; }

  void begin_episode(const TaskInstance& inst) override {
    if (!proc_ || !proc_->running()) start();
    prompt_ = prompt_json(inst);
    json reset;
    reset["type"] = "reset";
    reset["task"] = inst.task.name;
    reset["seed"] = inst.seed;
    reset["split"] = split_name(inst.split);
    send(reset);
    expect_ready();
    step_ = 0;
  }

  PolicyAction act(Env& env, const StepObservation& obs) override {
    json msg;
    msg["type"] = "obs";
    msg["step"] = step_;
    if (obs.first) msg["prompt"] = prompt_;
    json frames;
    if (obs.base) frames["base"] = b64_encode(ppm_bytes(*obs.base));
    if (obs.hand) frames["hand"] = b64_encode(ppm_bytes(*obs.hand));
    msg["frames"] = frames;
    const Pose& ee = env.state().ee.pose;
    msg["proprio"] = {
        {"ee_pose",
         {ee.position.x, ee.position.y, ee.position.z, ee.orientation.w, ee.orientation.x,
          ee.orientation.y, ee.orientation.z}},
        {"grip", env.state().ee.suction_on ? 1.0 : -1.0}};
    send(msg);
    json reply = recv();
    if (reply.value("type", "") != "act")
      fail(Errc::protocol, "expected act message, got: " + reply.dump());
    if (!reply.contains("action") || !reply.at("action").is_array() ||
        reply.at("action").size() != 7)
      fail(Errc::protocol, "action must be an array of 7 scalars");
    std::array<double, 7> a{};
    for (int i = 0; i < 7; ++i) {
      a[size_t(i)] = reply.at("action").at(i).get<double>();
      if (!std::isfinite(a[size_t(i)])) fail(Errc::protocol, "non-finite action component");
    }
    PolicyAction out;
    out.action = Action::from_array(a);
    out.phase = reply.value("phase", "");
    out.solver_kind = reply.value("solver", "");
    ++step_;
    return out;
  }

  void restart() { start(); }

 private:
  void start() {
    proc_ = std::make_unique<Subprocess>(command_);
    json hello;
    hello["type"] = "hello";
    hello["action_dim"] = 7;
    hello["cameras"] = {"base", "hand"};
    send(hello);
    expect_ready();
  }

  void send(const json& j) {
    if (!proc_->write_line(j.dump())) fail(Errc::protocol, "policy subprocess pipe closed");
  }

  json recv() {
    auto line = proc_->read_line(config().protocol_timeout_ms);
    if (!line) fail(Errc::protocol, "policy subprocess timed out or closed the stream");
    try {
      return json::parse(*line);
    } catch (const json::exception& e) {
      fail(Errc::protocol, std::string("malformed protocol line: ") + e.what());
    }
  }

  void expect_ready() {
    json r = recv();
    if (r.value("type", "") != "ready")
      fail(Errc::protocol, "expected ready message, got: " + r.dump());
  }

  std::string command_;
  std::unique_ptr<Subprocess> proc_;
  json prompt_;
  int step_ = 0;
};

std::unique_ptr<Policy> make_policy(const std::string& spec) {
  if (spec == "oracle") return std::make_unique<OracleRunner>();
  if (spec == "random") return std::make_unique<RandomPolicy>();
  if (spec == "zero") return std::make_unique<ZeroPolicy>();
  if (spec.rfind("cmd:", 0) == 0) return std::make_unique<SubprocessPolicy>(spec.substr(4));
  fail(Errc::invalid_arg, "unknown policy spec: " + spec);
}

struct EpisodeOutcome {
  std::string task;
  uint64_t seed = 0;
  bool ran = false;
  bool success = false;
  double total_reward = 0;
  int steps = 0;
  std::string error;
};

Metrics::Row aggregate(const std::string& name, const std::vector<const EpisodeOutcome*>& eps) {
  Metrics::Row row;
  row.task = name;
  row.episodes = int(eps.size());
  if (eps.empty()) return row;
  double suc = 0, ar = 0, len = 0;
  for (const auto* e : eps) {
    suc += e->success ? 1 : 0;
    ar += e->total_reward;
    len += e->steps;
  }
  row.success_rate = 100.0 * suc / double(eps.size());
  row.ar = ar / double(eps.size());
  row.mean_length = len / double(eps.size());
  row.rs = row.mean_length > 0 ? row.ar / row.mean_length : 0.0;
  return row;
}

Metrics build_metrics(const std::vector<EpisodeOutcome>& outcomes) {
  Metrics m;
  std::vector<const EpisodeOutcome*> all;
  std::map<std::string, std::vector<const EpisodeOutcome*>> by_task;
  for (const auto& e : outcomes) {
    all.push_back(&e);
    by_task[e.task].push_back(&e);
  }
  m.overall = aggregate("overall", all);
  for (const auto& [task, eps] : by_task) m.per_task.push_back(aggregate(task, eps));
  return m;
}

}  // namespace

std::vector<std::string> expand_task_selector(const std::string& selector) {
  std::vector<std::string> out;
  if (selector == "all" || selector.empty()) {
    for (const auto& t : task_list()) out.push_back(t.id.name);
    return out;
  }
  if (selector == "L0" || selector == "L1" || selector == "L2" || selector == "l0" ||
      selector == "l1" || selector == "l2") {
    Level lvl = parse_level(selector);
    for (const auto& t : task_list())
      if (t.id.level == lvl) out.push_back(t.id.name);
    return out;
  }
  size_t pos = 0;
  while (pos <= selector.size()) {
    size_t comma = selector.find(',', pos);
    if (comma == std::string::npos) comma = selector.size();
    std::string name = selector.substr(pos, comma - pos);
    if (!name.empty()) {
      find_task(name);  // validates
      out.push_back(name);
    }
    pos = comma + 1;
  }
  if (out.empty()) fail(Errc::invalid_arg, "empty task selector");
  return out;
}

Metrics evaluate(const std::string& policy_spec, const EvalOptions& opts) {
  if (opts.seed_hi < opts.seed_lo) fail(Errc::invalid_arg, "bad seed range");
  struct Job {
    std::string task;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& t : opts.tasks)
    for (uint64_t s = opts.seed_lo; s <= opts.seed_hi; ++s) jobs.push_back({t, s});
  std::vector<EpisodeOutcome> outcomes(jobs.size());

  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  int workers = std::max(1, opts.workers);

  auto worker_fn = [&]() {
    std::unique_ptr<Policy> policy = make_policy(policy_spec);
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      EpisodeOutcome& out = outcomes[i];
      out.task = jobs[i].task;
      out.seed = jobs[i].seed;
      try {
        TaskInstance inst = instantiate(jobs[i].task, jobs[i].seed, opts.split);
        RunOptions ro;
        ro.record = !opts.record_dir.empty();
        ro.max_steps = opts.max_steps;
        RunResult r = run_episode(inst, *policy, ro);
        out.ran = true;
        out.success = r.success;
        out.total_reward = r.total_reward;
        out.steps = r.steps;
        if (ro.record) {
          std::string dir =
              opts.record_dir + "/" + jobs[i].task + "/traj_" + std::to_string(jobs[i].seed);
          write_episode(dir, r.record);
        }
      } catch (const std::exception& e) {
        out.ran = true;
        out.success = false;
        out.error = e.what();
        std::lock_guard<std::mutex> lk(log_mutex);
        std::fprintf(stderr, "[eval] %s seed %llu failed: %s\n", jobs[i].task.c_str(),
                     (unsigned long long)jobs[i].seed, e.what());
        // a crashed external policy must not poison later episodes
        if (auto* sp = dynamic_cast<SubprocessPolicy*>(policy.get())) {
          try {
            sp->restart();
          } catch (const std::exception&) {
            policy = make_policy(policy_spec);
          }
        }
      }
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
  for (auto& t : pool) t.join();
  return build_metrics(outcomes);
}

std::string metrics_to_json(const Metrics& m) {
  auto row_json = [](const Metrics::Row& r) {
    json j;
    j["task"] = r.task;
    j["episodes"] = r.episodes;
    j["success_rate"] = r.success_rate;
    j["ar"] = r.ar;
    j["rs"] = r.rs;
    j["mean_length"] = r.mean_length;
    return j;
  };
  json j;
  j["overall"] = row_json(m.overall);
  json arr = json::array();
  for (const auto& r : m.per_task) arr.push_back(row_json(r));
  j["per_task"] = arr;
  return j.dump(2);
}

std::string metrics_to_table(const Metrics& m) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-24s %8s %8s %10s %8s %8s\n", "task", "eps", "suc%", "AR",
                "R/S", "len");
  out += line;
  auto add = [&](const Metrics::Row& r) {
    std::snprintf(line, sizeof line, "%-24s %8d %8.1f %10.3f %8.3f %8.1f\n", r.task.c_str(),
                  r.episodes, r.success_rate, r.ar, r.rs, r.mean_length);
    out += line;
  };
  for (const auto& r : m.per_task) add(r);
  add(m.overall);
  return out;
}

GenReport generate(const std::vector<std::string>& tasks, uint64_t seed_lo, uint64_t seed_hi,
                   Split split, const std::string& out_dir, int workers) {
  if (seed_hi < seed_lo) fail(Errc::invalid_arg, "bad seed range");
  struct Job {
    std::string task;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& t : tasks)
    for (uint64_t s = seed_lo; s <= seed_hi; ++s) jobs.push_back({t, s});

  std::vector<std::string> errors(jobs.size());
  std::vector<char> wrote(jobs.size(), 0);
  std::atomic<size_t> next{0};
  std::mutex log_mutex;

  auto worker_fn = [&]() {
    OracleRunner oracle;
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      try {
        TaskInstance inst = instantiate(jobs[i].task, jobs[i].seed, split);
        RunOptions ro;
        ro.record = true;
        RunResult r = run_episode(inst, oracle, ro);
        if (!r.success) {
          errors[i] = jobs[i].task + "/" + std::to_string(jobs[i].seed) + ": oracle failed" +
                      (r.fail_reason.empty() ? "" : " (" + r.fail_reason + ")");
          continue;
        }
        std::string dir =
            out_dir + "/" + jobs[i].task + "/traj_" + std::to_string(jobs[i].seed);
        write_episode(dir, r.record);
        wrote[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = jobs[i].task + "/" + std::to_string(jobs[i].seed) + ": " + e.what();
        std::lock_guard<std::mutex> lk(log_mutex);
        std::fprintf(stderr, "[gen-data] %s\n", errors[i].c_str());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker_fn);
  for (auto& t : pool) t.join();

  GenReport rep;
  rep.attempted = int(jobs.size());
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (wrote[i]) ++rep.written;
    else {
      ++rep.discarded;
      rep.failures.push_back(errors[i]);
    }
  }
  return rep;
}

std::string report_to_json(const GenReport& r) {
  json j;
  j["attempted"] = r.attempted;
  j["written"] = r.written;
  j["discarded"] = r.discarded;
  j["failures"] = r.failures;
  return j.dump(2);
}

std::string stats_json(const std::string& dataset_dir) {
  if (!fs::exists(dataset_dir)) fail(Errc::io, "no such directory: " + dataset_dir);
  double mins[7], maxs[7], sums[7];
  for (int i = 0; i < 7; ++i) {
    mins[i] = 1e18;
    maxs[i] = -1e18;
    sums[i] = 0;
  }
  int64_t total_steps = 0;
  std::map<std::string, std::vector<int>> lengths;
  int episodes = 0, skipped = 0;

  std::vector<fs::path> traj_dirs;
  for (const auto& task_entry : fs::directory_iterator(dataset_dir)) {
    if (!task_entry.is_directory()) continue;
    if (task_entry.path().filename().string().rfind("traj_", 0) == 0) {
      traj_dirs.push_back(task_entry.path());
      continue;
    }
    for (const auto& ep : fs::directory_iterator(task_entry.path()))
      if (ep.is_directory() && ep.path().filename().string().rfind("traj_", 0) == 0)
        traj_dirs.push_back(ep.path());
  }
  std::sort(traj_dirs.begin(), traj_dirs.end());

  for (const auto& dir : traj_dirs) {
    try {
      Tensor actions = read_cskt(dir.string() + "/actions.cskt");
      if (actions.dtype != 0 || actions.dims.size() != 2 || actions.dims[1] != 7)
        fail(Errc::integrity, "bad actions tensor");
      json meta = json::parse(std::ifstream(dir.string() + "/meta.json"));
      const float* a = reinterpret_cast<const float*>(actions.payload.data());
      uint32_t n = actions.dims[0];
      for (uint32_t i = 0; i < n; ++i)
        for (int d = 0; d < 7; ++d) {
          double v = a[size_t(i) * 7 + d];
          mins[d] = std::min(mins[d], v);
          maxs[d] = std::max(maxs[d], v);
          sums[d] += v;
        }
      total_steps += n;
      lengths[meta.at("task").get<std::string>()].push_back(int(n));
      ++episodes;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[stats] skipping %s: %s\n", dir.string().c_str(), e.what());
      ++skipped;
    }
  }
  if (episodes == 0) fail(Errc::io, "no readable episodes under " + dataset_dir);

  json j;
  j["episodes"] = episodes;
  j["skipped"] = skipped;
  j["total_steps"] = total_steps;
  const char* dim_names[7] = {"dx", "dy", "dz", "droll", "dpitch", "dyaw", "grip"};
  json dims;
  for (int d = 0; d < 7; ++d) {
    json jd;
    jd["min"] = total_steps ? mins[d] : 0.0;
    jd["max"] = total_steps ? maxs[d] : 0.0;
    jd["mean"] = total_steps ? sums[d] / double(total_steps) : 0.0;
    dims[dim_names[d]] = jd;
  }
  j["action_dims"] = dims;
  json per_task;
  for (const auto& [task, lens] : lengths) {
    int lo = *std::min_element(lens.begin(), lens.end());
    int hi = *std::max_element(lens.begin(), lens.end());
    double mean = 0;
    for (int v : lens) mean += v;
    mean /= double(lens.size());
    json jt;
    jt["episodes"] = int(lens.size());
    jt["min_length"] = lo;
    jt["max_length"] = hi;
    jt["mean_length"] = mean;
    per_task[task] = jt;
  }
  j["per_task"] = per_task;
  return j.dump(2);
}

InspectReport inspect_dataset(const std::string& dir) {
  if (!fs::exists(dir)) fail(Errc::io, "no such directory: " + dir);
  InspectReport rep;
  std::vector<fs::path> traj_dirs;
  if (fs::exists(dir + "/meta.json")) {
    traj_dirs.push_back(dir);
  } else {
    for (const auto& entry : fs::recursive_directory_iterator(dir))
      if (entry.is_directory() && entry.path().filename().string().rfind("traj_", 0) == 0)
        traj_dirs.push_back(entry.path());
    std::sort(traj_dirs.begin(), traj_dirs.end());
  }
  for (const auto& d : traj_dirs) {
    ++rep.episodes;
    try {
      read_episode(d.string());
      ++rep.ok;
    } catch (const std::exception& e) {
      rep.errors.push_back(d.string() + ": " + e.what());
    }
  }
  return rep;
}

std::string inspect_to_json(const InspectReport& r) {
  json j;
  j["episodes"] = r.episodes;
  j["ok"] = r.ok;
  j["errors"] = r.errors;
  return j.dump(2);
}

}  // namespace dsk
