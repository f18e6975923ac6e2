#include "mrbt/expert.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>

namespace mrbt {

namespace {

struct PoseKey {
  Coord pos;
  int dir;
  bool operator<(const PoseKey& o) const {
    if (pos.x != o.pos.x) return pos.x < o.pos.x;
    if (pos.y != o.pos.y) return pos.y < o.pos.y;
    return dir < o.dir;
  }
};

// BFS over (position, direction) with moves {left, right, forward}.
std::optional<std::vector<int>> route(const EnvState& s,
                                      const std::function<bool(Coord, int)>& is_target) {
  std::map<PoseKey, std::pair<PoseKey, int>> parent;
  std::deque<PoseKey> queue;
  PoseKey start{s.agent_pos, s.agent_dir};
  parent[start] = {start, -1};
  queue.push_back(start);
  while (!queue.empty()) {
    PoseKey cur = queue.front();
    queue.pop_front();
    if (is_target(cur.pos, cur.dir)) {
      std::vector<int> actions;
      PoseKey k = cur;
      while (!(k.pos == start.pos && k.dir == start.dir)) {
        auto [pk, a] = parent[k];
        actions.push_back(a);
        k = pk;
      }
      std::reverse(actions.begin(), actions.end());
      return actions;
    }
    auto try_push = [&](PoseKey nk, int action) {
      if (parent.count(nk)) return;
      parent[nk] = {cur, action};
      queue.push_back(nk);
    };
    try_push({cur.pos, (cur.dir + 3) & 3}, kActLeft);
    try_push({cur.pos, (cur.dir + 1) & 3}, kActRight);
    Coord fwd{cur.pos.x + dir_delta(cur.dir).x, cur.pos.y + dir_delta(cur.dir).y};
    if (s.cell_walkable(fwd)) try_push({fwd, cur.dir}, kActForward);
  }
  return std::nullopt;
}

struct Driver {
  const SpaceBundle& bundle;
  Trace trace;
  EnvState state;

  Driver(const SpaceBundle& b, const EnvState& s0, const Task& task) : bundle(b), state(s0) {
    trace.task = task;
    trace.states.push_back(s0);
  }

  void act(int a) {
    DynamicsConfig dyn;
    state = step_env(state, a, dyn);
    trace.actions.push_back(a);
    trace.states.push_back(state);
  }

  void follow(const std::vector<int>& actions) {
    for (int a : actions) act(a);
  }

  void goto_facing(Coord cell) {
    auto r = route(state, [&](Coord p, int d) {
      Coord fwd{p.x + dir_delta(d).x, p.y + dir_delta(d).y};
      return fwd == cell;
    });
    if (!r) throw std::runtime_error("expert: no route to face target cell");
    follow(*r);
  }

  void goto_cell(Coord cell) {
    auto r = route(state, [&](Coord p, int) { return p == cell; });
    if (!r) throw std::runtime_error("expert: no route to target cell");
    follow(*r);
  }

  // Rotates until the front cell can hold a dropped key, then drops.
  void drop_somewhere() {
    for (int i = 0; i < 4; ++i) {
      if (state.cell_empty_floor(state.front())) {
        act(kActDrop);
        return;
      }
      act(kActLeft);
    }
    throw std::runtime_error("expert: nowhere to drop the key");
  }

  Coord key_cell(int color) const {
    int k = state.key_of_color(color);
    if (k < 0 || state.keys[k].where != KeyWhere::OnGrid)
      throw std::runtime_error("expert: key not on the grid");
    return state.keys[k].pos;
  }

  Coord door_cell(int color) const {
    int d = state.layout->door_of_color(color);
    if (d < 0) throw std::runtime_error("expert: no door of that color");
    return state.layout->doors[d].pos;
  }
};

}  // namespace

Trace run_expert(const SpaceBundle& bundle, const EnvState& s0, const Task& task,
                 ExpertStyle style) {
  Driver d(bundle, s0, task);
  const std::string& space = bundle.space.name;

  if (style == ExpertStyle::ScanFirst) {
    d.act(kActLeft);
    d.act(kActRight);
  }

  if (space == "doorkey") {
    int yellow = color_index("yellow");
    d.goto_facing(d.key_cell(yellow));
    d.act(kActPickup);
    d.goto_facing(d.door_cell(yellow));
    d.act(kActToggle);
    if (style == ExpertStyle::DropKey) d.drop_somewhere();
    d.goto_cell(s0.layout->goal);
  } else if (space == "lockedroom") {
    int kc = task.bindings.at("key_color");
    int rc = task.bindings.at("room_color");
    d.goto_facing(d.door_cell(rc));
    d.act(kActToggle);
    d.goto_facing(d.key_cell(kc));
    d.act(kActPickup);
    d.goto_facing(d.door_cell(kc));
    d.act(kActToggle);
    if (style == ExpertStyle::DropKey) d.drop_somewhere();
    d.goto_cell(s0.layout->goal);
  } else if (space == "dronesupplier") {
    int bc = task.bindings.at("box_color");
    int dc = task.bindings.at("door_color");
    int b = s0.layout->box_of_color(bc);
    Coord box_pos = s0.layout->boxes[b].pos;
    d.goto_facing(box_pos);
    d.act(kActToggle);
    d.act(kActPickup);
    d.goto_facing(d.door_cell(dc));
    d.act(kActToggle);
  } else {
    throw std::invalid_argument("no expert for space: " + space);
  }

  if (!task_complete(task, d.state, bundle.schema))
    throw std::runtime_error("expert failed to complete the task");
  if (static_cast<int>(d.trace.actions.size()) > bundle.space.max_steps)
    throw std::runtime_error("expert exceeded the step budget");
  return std::move(d.trace);
}

std::vector<Trace> collect_expert_demos(const SpaceBundle& bundle, ExpertStyle style, int n,
                                        std::uint64_t seed) {
  RngStream rng = RngStream::seeded(seed, 0xde305);
  std::vector<Trace> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto [s0, task] = bundle.generator->sample(rng);
    out.push_back(run_expert(bundle, s0, task, style));
  }
  return out;
}

std::vector<Trace> collect_random_demos(const SpaceBundle& bundle, int n, int length,
                                        std::uint64_t seed) {
  RngStream rng = RngStream::seeded(seed, 0xa4d03);
  DynamicsConfig dyn;
  std::vector<Trace> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto [s0, task] = bundle.generator->sample(rng);
    Trace t;
    t.task = task;
    t.states.push_back(s0);
    EnvState s = s0;
    for (int step = 0; step < length; ++step) {
      int a = rng.below_int(kNumGridActions);
      s = step_env(s, a, dyn);
      t.actions.push_back(a);
      t.states.push_back(s);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace mrbt
