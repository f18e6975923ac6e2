#include "mrbt/task_space.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace mrbt {

std::set<std::string> TaskSpace::task_var_names() const {
  std::set<std::string> out;
  for (const auto& v : variables) out.insert(v.name);
  for (const auto& d : derived) out.insert(d.first);
  return out;
}

long TaskSpace::variant_count() const {
  long n = 1;
  for (const auto& v : variables) n *= static_cast<long>(v.domain.size());
  return n;
}

std::string TaskSpace::instantiate_mission(const TaskBindings& b) const {
  std::string out;
  const std::string& t = mission_template;
  size_t i = 0;
  while (i < t.size()) {
    if (t[i] == '{') {
      size_t e = t.find('}', i);
      if (e == std::string::npos) throw std::logic_error("unterminated placeholder in mission");
      std::string var = t.substr(i + 1, e - i - 1);
      auto it = b.find(var);
      if (it == b.end()) throw std::invalid_argument("mission placeholder not bound: " + var);
      out += color_name(it->second);
      i = e + 1;
    } else {
      out += t[i++];
    }
  }
  return out;
}

namespace {

std::vector<std::string> mission_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> build_vocab(const std::string& mission_template) {
  std::set<std::string> words;
  for (const auto& w : mission_words(mission_template)) words.insert(w);
  for (auto c : kColorNames) words.insert(std::string(c));
  return {words.begin(), words.end()};
}

}  // namespace

std::vector<int> TaskSpace::encode_mission(const std::string& mission) const {
  std::vector<int> out;
  for (const auto& w : mission_words(mission)) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), w);
    if (it != vocab.end() && *it == w) {
      out.push_back(static_cast<int>(it - vocab.begin()));
    } else {
      out.push_back(-1);
    }
  }
  return out;
}

std::uint64_t Task::hash() const {
  std::uint64_t h = 0x7a5c;
  for (const auto& [k, v] : bindings) {
    h = hash_str(h, k);
    h = hash_mix(h, v);
  }
  return h;
}

bool task_complete(const Task& t, const EnvState& s, const EnvSchema& schema) {
  GridView view(s, schema);
  for (const Formula& g : t.goals) {
    if (!eval_formula(g, view, t.bindings)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// map parsing

ParsedMap parse_map(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("empty map");
  size_t w = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != w) throw std::invalid_argument("ragged map rows");
  }

  ParsedMap pm;
  Layout& L = pm.layout;
  L.width = static_cast<int>(w);
  L.height = static_cast<int>(rows.size());
  L.walls.assign(w * rows.size(), 0);
  for (int y = 0; y < L.height; ++y) {
    for (int x = 0; x < L.width; ++x) {
      char c = rows[y][x];
      Coord at{x, y};
      switch (c) {
        case '#': L.walls[y * L.width + x] = 1; break;
        case '.': break;
        case 'G': L.goal = at; break;
        case '@': pm.agent = at; pm.agent_dir = 0; break;
        case '>': pm.agent = at; pm.agent_dir = 0; break;
        case 'v': pm.agent = at; pm.agent_dir = 1; break;
        case '<': pm.agent = at; pm.agent_dir = 2; break;
        case '^': pm.agent = at; pm.agent_dir = 3; break;
        default:
          if (c >= 'a' && c < 'a' + kNumColors) {
            L.doors.push_back({at, c - 'a'});
          } else if (c >= 'A' && c < 'A' + kNumColors) {
            L.boxes.push_back({at, c - 'A', -1});
          } else {
            throw std::invalid_argument(std::string("unknown map character '") + c + "'");
          }
      }
    }
  }
  L.seal();
  return pm;
}

// ---------------------------------------------------------------------------
// DoorKey: two rooms split by a wall with a yellow locked door; the yellow
// key and the agent start on the left, the goal is fixed on the right.

namespace {

struct DoorKeyInit {
  int door_y;
  Coord key;
  Coord agent;
  int dir;
};

class DoorKeyGenerator : public EpisodeGenerator {
 public:
  DoorKeyGenerator(int size, TaskSpace space, EnvSchema schema)
      : size_(size), space_(std::move(space)), schema_(std::move(schema)) {
    split_ = size_ / 2;
    if (size_ == 8) {
      // compact training family
      for (int door_y : {2, 5}) {
        for (Coord key : {Coord{2, 2}, Coord{2, 5}}) {
          for (auto [agent, dir] : {std::pair<Coord, int>{{1, 1}, 0},
                                    std::pair<Coord, int>{{1, 6}, 3}}) {
            inits_.push_back({door_y, key, agent, dir});
          }
        }
      }
    } else {
      std::vector<Coord> left;
      for (int x = 1; x < split_; ++x) {
        for (int y = 1; y <= size_ - 2; ++y) left.push_back({x, y});
      }
      for (int door_y = 1; door_y <= size_ - 2; ++door_y) {
        for (Coord key : left) {
          for (Coord agent : left) {
            if (agent == key) continue;
            for (int dir = 0; dir < 4; ++dir) inits_.push_back({door_y, key, agent, dir});
          }
        }
      }
    }
  }

  long init_count() const override { return static_cast<long>(inits_.size()); }

  std::pair<EnvState, Task> init_at(long idx) const override {
    if (idx < 0 || idx >= init_count()) throw std::out_of_range("init index");
    const DoorKeyInit& ii = inits_[idx];
    auto L = std::make_shared<Layout>();
    L->width = L->height = size_;
    L->walls.assign(size_ * size_, 0);
    for (int i = 0; i < size_; ++i) {
      L->walls[0 * size_ + i] = 1;
      L->walls[(size_ - 1) * size_ + i] = 1;
      L->walls[i * size_ + 0] = 1;
      L->walls[i * size_ + size_ - 1] = 1;
    }
    for (int y = 1; y <= size_ - 2; ++y) L->walls[y * size_ + split_] = 1;
    L->walls[ii.door_y * size_ + split_] = 0;
    L->doors.push_back({{split_, ii.door_y}, color_index("yellow")});
    L->goal = {size_ - 2, size_ - 2};
    L->seal();

    EnvState s;
    s.layout = L;
    s.agent_pos = ii.agent;
    s.agent_dir = ii.dir;
    s.doors = {kDoorLocked};
    s.keys = {{color_index("yellow"), KeyWhere::OnGrid, ii.key, -1}};

    Task t;
    t.bindings = {};
    t.mission = space_.instantiate_mission(t.bindings);
    t.goals = space_.goals;
    t.encoding = space_.encode_mission(t.mission);
    return {std::move(s), std::move(t)};
  }

 private:
  int size_;
  int split_;
  TaskSpace space_;
  EnvSchema schema_;
  std::vector<DoorKeyInit> inits_;
};

// ---------------------------------------------------------------------------
// LockedRoom. Full scale: six colored rooms off a central corridor; the key
// to the locked room sits in another room behind a closed door. Mini scale:
// two rooms, colors assigned per task binding.

class LockedRoomGenerator : public EpisodeGenerator {
 public:
  LockedRoomGenerator(int size, TaskSpace space, EnvSchema schema)
      : size_(size), space_(std::move(space)), schema_(std::move(schema)) {
    for (int kc = 0; kc < kNumColors; ++kc) {
      for (int rc = 0; rc < kNumColors; ++rc) {
        if (kc != rc) bindings_.push_back({kc, rc});
      }
    }
    starts_mini_ = {{{4, 2}, 1}, {{4, 6}, 3}};
  }

  long init_count() const override {
    if (size_ == 9) return static_cast<long>(bindings_.size() * starts_mini_.size());
    return static_cast<long>(bindings_.size()) * 4;
  }

  std::pair<EnvState, Task> init_at(long idx) const override {
    if (idx < 0 || idx >= init_count()) throw std::out_of_range("init index");
    if (size_ == 9) return mini_init(idx);
    return full_init(idx);
  }

 private:
  std::pair<EnvState, Task> mini_init(long idx) const {
    auto [kc, rc] = bindings_[idx / starts_mini_.size()];
    auto [apos, adir] = starts_mini_[idx % starts_mini_.size()];

    auto L = std::make_shared<Layout>();
    int n = size_;
    L->width = L->height = n;
    L->walls.assign(n * n, 0);
    auto wall = [&](int x, int y) { L->walls[y * n + x] = 1; };
    for (int i = 0; i < n; ++i) {
      wall(i, 0);
      wall(i, n - 1);
      wall(0, i);
      wall(n - 1, i);
    }
    // left room {1,2}x{3,4,5}, right room {6,7}x{3,4,5}
    for (int y = 2; y <= 6; ++y) {
      wall(3, y);
      wall(5, y);
    }
    for (int x = 1; x <= 2; ++x) {
      wall(x, 2);
      wall(x, 6);
    }
    for (int x = 6; x <= 7; ++x) {
      wall(x, 2);
      wall(x, 6);
    }
    L->walls[4 * n + 3] = 0;
    L->walls[4 * n + 5] = 0;
    L->doors.push_back({{3, 4}, rc});  // keyroom door
    L->doors.push_back({{5, 4}, kc});  // locked door
    L->goal = {7, 4};
    L->seal();

    EnvState s;
    s.layout = L;
    s.agent_pos = apos;
    s.agent_dir = adir;
    s.doors = {kDoorClosed, kDoorLocked};
    s.keys = {{kc, KeyWhere::OnGrid, {1, 4}, -1}};
    return {std::move(s), make_lr_task(kc, rc)};
  }

  std::pair<EnvState, Task> full_init(long idx) const {
    auto [kc, rc] = bindings_[idx / 4];
    int adir = static_cast<int>(idx % 4);

    int n = size_;
    auto L = std::make_shared<Layout>();
    L->width = L->height = n;
    L->walls.assign(n * n, 0);
    auto wall = [&](int x, int y) { L->walls[y * n + x] = 1; };
    for (int i = 0; i < n; ++i) {
      wall(i, 0);
      wall(i, n - 1);
      wall(0, i);
      wall(n - 1, i);
    }
    for (int y = 1; y <= n - 2; ++y) {
      wall(6, y);
      wall(12, y);
    }
    for (int x = 1; x <= 5; ++x) {
      wall(x, 6);
      wall(x, 12);
    }
    for (int x = 13; x <= 17; ++x) {
      wall(x, 6);
      wall(x, 12);
    }
    // room colors top to bottom: left red/green/blue, right purple/yellow/grey
    const int room_color[6] = {0, 1, 2, 3, 4, 5};
    const Coord door_pos[6] = {{6, 3}, {6, 9}, {6, 15}, {12, 3}, {12, 9}, {12, 15}};
    const Coord center[6] = {{3, 3}, {3, 9}, {3, 15}, {15, 3}, {15, 9}, {15, 15}};
    int locked_i = -1;
    int keyroom_i = -1;
    for (int i = 0; i < 6; ++i) {
      L->walls[door_pos[i].y * n + door_pos[i].x] = 0;
      L->doors.push_back({door_pos[i], room_color[i]});
      if (room_color[i] == kc) locked_i = i;
      if (room_color[i] == rc) keyroom_i = i;
    }
    L->goal = center[locked_i];
    L->seal();

    EnvState s;
    s.layout = L;
    s.agent_pos = {9, 9};
    s.agent_dir = adir;
    s.doors.assign(6, kDoorClosed);
    s.doors[locked_i] = kDoorLocked;
    s.keys = {{kc, KeyWhere::OnGrid, center[keyroom_i], -1}};
    return {std::move(s), make_lr_task(kc, rc)};
  }

  Task make_lr_task(int kc, int rc) const {
    Task t;
    t.bindings = {{"key_color", kc}, {"room_color", rc}, {"door_color", kc}};
    t.mission = space_.instantiate_mission(t.bindings);
    t.goals = space_.goals;
    t.encoding = space_.encode_mission(t.mission);
    return t;
  }

  int size_;
  TaskSpace space_;
  EnvSchema schema_;
  std::vector<std::pair<int, int>> bindings_;  // (key_color, room_color)
  std::vector<std::pair<Coord, int>> starts_mini_;
};

// ---------------------------------------------------------------------------
// DroneSupplier: street map with locked house doors and boxes; the key for
// the target door is hidden inside the target box. No goal tile; the task
// ends when the right door is open.

const char* kDroneMap25 = R"(#########################
#.......................#
#.#####...#####...#####.#
#.#...#...#...#...#...#.#
#.#...#...#...#...#...#.#
#.#...#...#...#...#...#.#
#.##a##...##b##...##c##.#
#.......................#
#.......................#
#.......................#
#...A.......@.......E...#
#.......................#
#.......B...C...........#
#.......................#
#...............D.......#
#.......................#
#.......F...............#
#.......................#
#.##d##...##e##...##f##.#
#.#...#...#...#...#...#.#
#.#...#...#...#...#...#.#
#.#...#...#...#...#...#.#
#.#####...#####...#####.#
#.......................#
#########################)";

const char* kDroneMap10 = R"(##########
#........#
#.##a##..#
#.#...#..#
#.##b##..#
#........#
#..A..B..#
#..@..C..#
#.##c##..#
##########)";

class DroneSupplierGenerator : public EpisodeGenerator {
 public:
  DroneSupplierGenerator(int size, TaskSpace space, EnvSchema schema)
      : space_(std::move(space)), schema_(std::move(schema)) {
    map_ = parse_map(size == 10 ? kDroneMap10 : kDroneMap25);
    for (const auto& b : map_.layout.boxes) box_colors_.push_back(b.color);
    for (const auto& d : map_.layout.doors) door_colors_.push_back(d.color);
    std::sort(box_colors_.begin(), box_colors_.end());
    box_colors_.erase(std::unique(box_colors_.begin(), box_colors_.end()), box_colors_.end());
    std::sort(door_colors_.begin(), door_colors_.end());
  }

  long init_count() const override {
    return static_cast<long>(box_colors_.size() * door_colors_.size());
  }

  std::pair<EnvState, Task> init_at(long idx) const override {
    if (idx < 0 || idx >= init_count()) throw std::out_of_range("init index");
    int bc = box_colors_[idx / door_colors_.size()];
    int dc = door_colors_[idx % door_colors_.size()];

    auto L = std::make_shared<Layout>(map_.layout);
    for (auto& b : L->boxes) b.key_color = -1;
    int target_box = L->box_of_color(bc);
    L->boxes[target_box].key_color = dc;
    L->seal();

    EnvState s;
    s.layout = L;
    s.agent_pos = map_.agent;
    s.agent_dir = map_.agent_dir;
    s.doors.assign(L->doors.size(), kDoorLocked);
    s.keys = {{dc, KeyWhere::Hidden, kNowhere, target_box}};
    s.boxes_present.assign(L->boxes.size(), 1);

    Task t;
    t.bindings = {{"box_color", bc}, {"door_color", dc}};
    t.mission = space_.instantiate_mission(t.bindings);
    t.goals = space_.goals;
    t.encoding = space_.encode_mission(t.mission);
    return {std::move(s), std::move(t)};
  }

 private:
  TaskSpace space_;
  EnvSchema schema_;
  ParsedMap map_;
  std::vector<int> box_colors_;
  std::vector<int> door_colors_;
};

TaskSpace finish_space(TaskSpace s, const EnvSchema& schema) {
  s.vocab = build_vocab(s.mission_template);
  std::set<std::string> vars = s.task_var_names();
  for (const auto& g : s.goal_texts) s.goals.push_back(parse_formula(g, schema, vars));
  return s;
}

}  // namespace

SpaceBundle make_task_space(const std::string& name, int scale) {
  if (name == "doorkey") {
    int size = scale == 0 ? 16 : scale;
    if (size < 6 || size > 20 || size % 2 != 0)
      throw std::invalid_argument("doorkey scale must be an even size in [6, 20]");
    EnvSchema schema = make_doorkey_schema(size);
    TaskSpace sp;
    sp.name = name;
    sp.grid_size = size;
    sp.max_steps = size >= 16 ? 500 : (size >= 8 ? 100 : 60);
    sp.mission_template = "pick up the yellow key, open the yellow door and go to the goal";
    sp.goal_texts = {"goal_pos == -1"};
    sp = finish_space(std::move(sp), schema);
    auto gen = std::make_shared<DoorKeyGenerator>(size, sp, schema);
    return {std::move(sp), std::move(schema), std::move(gen)};
  }
  if (name == "lockedroom") {
    int size = scale == 0 ? 19 : scale;
    if (size != 9 && size != 19)
      throw std::invalid_argument("lockedroom scale must be 9 or 19");
    EnvSchema schema = make_lockedroom_schema(size);
    TaskSpace sp;
    sp.name = name;
    sp.grid_size = size;
    sp.max_steps = size == 19 ? 190 : 120;
    sp.mission_template =
        "get the {key_color} key from the {room_color} room, unlock the {door_color} door "
        "and go to the goal";
    sp.variables = {{"key_color", {0, 1, 2, 3, 4, 5}}, {"room_color", {0, 1, 2, 3, 4, 5}}};
    sp.derived = {{"door_color", "key_color"}};
    sp.goal_texts = {"goal_pos == -1"};
    sp = finish_space(std::move(sp), schema);
    auto gen = std::make_shared<LockedRoomGenerator>(size, sp, schema);
    return {std::move(sp), std::move(schema), std::move(gen)};
  }
  if (name == "dronesupplier") {
    int size = scale == 0 ? 25 : scale;
    if (size != 10 && size != 25)
      throw std::invalid_argument("dronesupplier scale must be 10 or 25");
    EnvSchema schema = make_dronesupplier_schema(size);
    TaskSpace sp;
    sp.name = name;
    sp.grid_size = size;
    sp.max_steps = size == 25 ? 500 : 150;
    sp.mission_template = "open the {box_color} box, take the key and open the {door_color} door";
    sp.variables = {{"box_color", {0, 1, 2, 3, 4, 5}}, {"door_color", {0, 1, 2, 3, 4, 5}}};
    sp.goal_texts = {"door_state[door_color] == OPEN || door_state[door_color] == -1"};
    sp = finish_space(std::move(sp), schema);
    auto gen = std::make_shared<DroneSupplierGenerator>(size, sp, schema);
    return {std::move(sp), std::move(schema), std::move(gen)};
  }
  throw std::invalid_argument("unknown task space: " + name);
}

std::vector<std::string> known_spaces() { return {"doorkey", "lockedroom", "dronesupplier"}; }

}  // namespace mrbt
