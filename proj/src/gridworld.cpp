#include "mrbt/gridworld.hpp"

#include <array>
#include <stdexcept>

namespace mrbt {

const std::vector<std::string>& grid_action_names() {
  static const std::vector<std::string> names = {"left",   "right", "forward", "pickup",
                                                 "drop",   "toggle", "done"};
  return names;
}

std::string grid_action_name(int a) {
  const auto& names = grid_action_names();
  if (a < 0 || a >= static_cast<int>(names.size())) return "?";
  return names[a];
}

Coord dir_delta(int dir) {
  switch (dir & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

int Layout::door_at(Coord c) const {
  for (size_t i = 0; i < doors.size(); ++i) {
    if (doors[i].pos == c) return static_cast<int>(i);
  }
  return -1;
}

int Layout::door_of_color(int color) const {
  for (size_t i = 0; i < doors.size(); ++i) {
    if (doors[i].color == color) return static_cast<int>(i);
  }
  return -1;
}

int Layout::box_at(Coord c) const {
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].pos == c) return static_cast<int>(i);
  }
  return -1;
}

int Layout::box_of_color(int color) const {
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].color == color) return static_cast<int>(i);
  }
  return -1;
}

void Layout::seal() {
  std::uint64_t h = hash_mix(0x6c3a, width);
  h = hash_mix(h, height);
  for (std::uint8_t w : walls) h = hash_mix(h, w);
  h = hash_mix(h, goal.x);
  h = hash_mix(h, goal.y);
  for (const auto& d : doors) {
    h = hash_mix(h, d.pos.x);
    h = hash_mix(h, d.pos.y);
    h = hash_mix(h, d.color);
  }
  for (const auto& b : boxes) {
    h = hash_mix(h, b.pos.x);
    h = hash_mix(h, b.pos.y);
    h = hash_mix(h, b.color);
    h = hash_mix(h, b.key_color);
  }
  fp = h;
}

int EnvState::carried_color() const {
  for (const KeyState& k : keys) {
    if (k.where == KeyWhere::Carried) return k.color;
  }
  return -1;
}

int EnvState::key_of_color(int color) const {
  for (size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].color == color) return static_cast<int>(i);
  }
  return -1;
}

bool EnvState::cell_walkable(Coord c) const {
  const Layout& L = *layout;
  if (L.wall_at(c)) return false;
  int d = L.door_at(c);
  if (d >= 0 && doors[d] != kDoorOpen) return false;
  for (const KeyState& k : keys) {
    if (k.where == KeyWhere::OnGrid && k.pos == c) return false;
  }
  int b = L.box_at(c);
  if (b >= 0 && boxes_present[b]) return false;
  return true;
}

bool EnvState::cell_empty_floor(Coord c) const {
  const Layout& L = *layout;
  if (L.wall_at(c)) return false;
  if (L.door_at(c) >= 0) return false;
  if (L.goal == c) return false;
  if (agent_pos == c) return false;
  for (const KeyState& k : keys) {
    if (k.where == KeyWhere::OnGrid && k.pos == c) return false;
  }
  int b = L.box_at(c);
  if (b >= 0 && boxes_present[b]) return false;
  return true;
}

bool EnvState::operator==(const EnvState& o) const {
  return layout->fp == o.layout->fp && agent_pos == o.agent_pos && agent_dir == o.agent_dir &&
         doors == o.doors && keys == o.keys && boxes_present == o.boxes_present;
}

std::uint64_t EnvState::hash() const {
  std::uint64_t h = hash_mix(0x57a7e, layout->fp);
  h = hash_mix(h, agent_pos.x);
  h = hash_mix(h, agent_pos.y);
  h = hash_mix(h, agent_dir);
  for (std::int8_t d : doors) h = hash_mix(h, static_cast<int>(d));
  for (const KeyState& k : keys) {
    h = hash_mix(h, k.color);
    h = hash_mix(h, static_cast<int>(k.where));
    h = hash_mix(h, k.pos.x);
    h = hash_mix(h, k.pos.y);
    h = hash_mix(h, k.box);
  }
  for (std::uint8_t b : boxes_present) h = hash_mix(h, b);
  return h;
}

EnvState step_env(const EnvState& s, int action, const DynamicsConfig& dyn, RngStream* rng) {
  if (action < 0 || action >= kNumGridActions)
    throw std::invalid_argument("action id out of range");
  EnvState n = s;
  const Layout& L = *s.layout;
  Coord tgt = s.front();

  switch (action) {
    case kActLeft:
      n.agent_dir = (s.agent_dir + 3) & 3;
      break;
    case kActRight:
      n.agent_dir = (s.agent_dir + 1) & 3;
      break;
    case kActForward:
      if (s.cell_walkable(tgt)) n.agent_pos = tgt;
      break;
    case kActPickup: {
      if (s.carried_color() >= 0) break;
      for (KeyState& k : n.keys) {
        if (k.where == KeyWhere::OnGrid && k.pos == tgt) {
          k.where = KeyWhere::Carried;
          k.pos = kNowhere;
          break;
        }
      }
      break;
    }
    case kActDrop: {
      int cc = s.carried_color();
      if (cc < 0) break;
      if (!s.cell_empty_floor(tgt)) break;
      for (KeyState& k : n.keys) {
        if (k.where == KeyWhere::Carried) {
          k.where = KeyWhere::OnGrid;
          k.pos = tgt;
          break;
        }
      }
      break;
    }
    case kActToggle: {
      int d = L.door_at(tgt);
      if (d >= 0) {
        if (n.doors[d] == kDoorOpen) {
          n.doors[d] = kDoorClosed;
        } else if (n.doors[d] == kDoorClosed) {
          n.doors[d] = kDoorOpen;
        } else if (n.doors[d] == kDoorLocked && s.carried_color() == L.doors[d].color) {
          n.doors[d] = kDoorOpen;
        }
        break;
      }
      int b = L.box_at(tgt);
      if (b >= 0 && n.boxes_present[b]) {
        n.boxes_present[b] = 0;
        for (KeyState& k : n.keys) {
          if (k.where == KeyWhere::Hidden && k.box == b) {
            k.where = KeyWhere::OnGrid;
            k.pos = tgt;
            k.box = -1;
          }
        }
      }
      break;
    }
    case kActDone:
      break;
  }

  // Carried keys occasionally slip to a free neighboring cell.
  if (dyn.stochastic && rng && n.carried_color() >= 0 && rng->bernoulli(dyn.drop_prob)) {
    std::array<Coord, 4> around = {Coord{n.agent_pos.x + 1, n.agent_pos.y},
                                   Coord{n.agent_pos.x, n.agent_pos.y + 1},
                                   Coord{n.agent_pos.x - 1, n.agent_pos.y},
                                   Coord{n.agent_pos.x, n.agent_pos.y - 1}};
    std::vector<Coord> free;
    for (Coord c : around) {
      if (n.cell_empty_floor(c)) free.push_back(c);
    }
    if (!free.empty()) {
      Coord where = free[rng->below_int(static_cast<int>(free.size()))];
      for (KeyState& k : n.keys) {
        if (k.where == KeyWhere::Carried) {
          k.where = KeyWhere::OnGrid;
          k.pos = where;
          break;
        }
      }
    }
  }
  return n;
}

std::string render(const EnvState& s) {
  const Layout& L = *s.layout;
  std::vector<std::string> rows(L.height, std::string(L.width, '.'));
  for (int y = 0; y < L.height; ++y) {
    for (int x = 0; x < L.width; ++x) {
      if (L.walls[y * L.width + x]) rows[y][x] = '#';
    }
  }
  if (L.goal != kNowhere) rows[L.goal.y][L.goal.x] = 'G';
  for (size_t i = 0; i < L.doors.size(); ++i) {
    char c = s.doors[i] == kDoorOpen ? 'O' : (s.doors[i] == kDoorClosed ? '+' : 'L');
    rows[L.doors[i].pos.y][L.doors[i].pos.x] = c;
  }
  for (size_t i = 0; i < L.boxes.size(); ++i) {
    if (s.boxes_present[i]) rows[L.boxes[i].pos.y][L.boxes[i].pos.x] = 'B';
  }
  for (const KeyState& k : s.keys) {
    if (k.where == KeyWhere::OnGrid) rows[k.pos.y][k.pos.x] = 'k';
  }
  const char agent_chars[] = {'>', 'v', '<', '^'};
  rows[s.agent_pos.y][s.agent_pos.x] = agent_chars[s.agent_dir & 3];
  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

GridView::GridView(const EnvState& s, const EnvSchema& schema) : s_(s) {
  resolvers_.reserve(schema.predicates.size());
  for (const PredicateDecl& p : schema.predicates) {
    if (p.name == "agent_pos") {
      resolvers_.push_back(Which::AgentPos);
    } else if (p.name == "key_pos") {
      resolvers_.push_back(Which::KeyPos);
    } else if (p.name == "door_pos") {
      resolvers_.push_back(Which::DoorPos);
    } else if (p.name == "door_state") {
      resolvers_.push_back(Which::DoorState);
    } else if (p.name == "goal_pos") {
      resolvers_.push_back(Which::GoalPos);
    } else if (p.name == "box_pos") {
      resolvers_.push_back(Which::BoxPos);
    } else if (p.name == "carrying") {
      resolvers_.push_back(Which::Carrying);
    } else {
      throw std::invalid_argument("no grid resolver for predicate: " + p.name);
    }
  }
}

Value GridView::predicate(int pred_index, int color) const {
  const Layout& L = *s_.layout;
  switch (resolvers_.at(pred_index)) {
    case Which::AgentPos:
      return Value::of_coord(s_.agent_pos);
    case Which::KeyPos: {
      int k = s_.key_of_color(color);
      if (k < 0) return Value::of_coord(kNowhere);
      const KeyState& ks = s_.keys[k];
      if (ks.where != KeyWhere::OnGrid || ks.pos == s_.agent_pos)
        return Value::of_coord(kNowhere);
      return Value::of_coord(ks.pos);
    }
    case Which::DoorPos: {
      int d = L.door_of_color(color);
      if (d < 0 || L.doors[d].pos == s_.agent_pos) return Value::of_coord(kNowhere);
      return Value::of_coord(L.doors[d].pos);
    }
    case Which::DoorState: {
      int d = L.door_of_color(color);
      if (d < 0 || L.doors[d].pos == s_.agent_pos) return Value::of_int(kAbsent);
      return Value::of_int(s_.doors[d]);
    }
    case Which::GoalPos:
      if (L.goal == kNowhere || L.goal == s_.agent_pos) return Value::of_coord(kNowhere);
      return Value::of_coord(L.goal);
    case Which::BoxPos: {
      int b = L.box_of_color(color);
      if (b < 0 || !s_.boxes_present[b] || L.boxes[b].pos == s_.agent_pos)
        return Value::of_coord(kNowhere);
      return Value::of_coord(L.boxes[b].pos);
    }
    case Which::Carrying:
      return Value::of_int(s_.carried_color() == color ? 1 : 0);
  }
  return Value::of_int(kAbsent);
}

namespace {

EnvSchema base_schema(const std::string& name, int grid_size) {
  EnvSchema s;
  s.name = name;
  s.grid_size = grid_size;
  s.actions = grid_action_names();
  s.predicates = {
      {"agent_pos", PredKind::Coord2, false},
      {"key_pos", PredKind::Coord2, true},
      {"door_pos", PredKind::Coord2, true},
      {"door_state", PredKind::Scalar, true},
  };
  return s;
}

}  // namespace

EnvSchema make_doorkey_schema(int grid_size) {
  EnvSchema s = base_schema("doorkey", grid_size);
  s.predicates.push_back({"goal_pos", PredKind::Coord2, false});
  s.validate();
  return s;
}

EnvSchema make_lockedroom_schema(int grid_size) {
  EnvSchema s = base_schema("lockedroom", grid_size);
  s.predicates.push_back({"goal_pos", PredKind::Coord2, false});
  s.validate();
  return s;
}

EnvSchema make_dronesupplier_schema(int grid_size) {
  EnvSchema s = base_schema("dronesupplier", grid_size);
  s.predicates.push_back({"box_pos", PredKind::Coord2, true});
  s.predicates.push_back({"carrying", PredKind::Scalar, true});
  s.validate();
  return s;
}

}  // namespace mrbt
