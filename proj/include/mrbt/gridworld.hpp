#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mrbt/formula.hpp"
#include "mrbt/schema.hpp"
#include "mrbt/util.hpp"

namespace mrbt {

// Primitive action set shared by all grid spaces. Order fixes action ids
// and mask bit positions.
inline constexpr int kActLeft = 0;
inline constexpr int kActRight = 1;
inline constexpr int kActForward = 2;
inline constexpr int kActPickup = 3;
inline constexpr int kActDrop = 4;
inline constexpr int kActToggle = 5;
inline constexpr int kActDone = 6;
inline constexpr int kNumGridActions = 7;

const std::vector<std::string>& grid_action_names();
std::string grid_action_name(int a);

// Facing directions: 0 east (+x), 1 south (+y), 2 west, 3 north.
Coord dir_delta(int dir);

// Static part of an episode: walls and object placements that never move.
struct Layout {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;  // row-major, 1 = wall
  Coord goal = kNowhere;

  struct DoorSlot {
    Coord pos;
    int color = 0;
  };
  struct BoxSlot {
    Coord pos;
    int color = 0;
    int key_color = -1;  // color of the key hidden inside, -1 if empty
  };
  std::vector<DoorSlot> doors;
  std::vector<BoxSlot> boxes;
  std::uint64_t fp = 0;

  bool in_bounds(Coord c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  bool wall_at(Coord c) const { return !in_bounds(c) || walls[c.y * width + c.x] != 0; }
  int door_at(Coord c) const;
  int door_of_color(int color) const;
  int box_at(Coord c) const;
  int box_of_color(int color) const;
  void seal();  // recomputes fp; call after construction
};

enum class KeyWhere : std::uint8_t { OnGrid, Carried, Hidden };

struct KeyState {
  int color = 0;
  KeyWhere where = KeyWhere::OnGrid;
  Coord pos = kNowhere;  // valid iff OnGrid
  int box = -1;          // valid iff Hidden
  bool operator==(const KeyState&) const = default;
};

struct EnvState {
  std::shared_ptr<const Layout> layout;
  Coord agent_pos = kNowhere;
  int agent_dir = 0;
  std::vector<std::int8_t> doors;          // parallel to layout->doors
  std::vector<KeyState> keys;
  std::vector<std::uint8_t> boxes_present; // parallel to layout->boxes

  Coord front() const { return {agent_pos.x + dir_delta(agent_dir).x,
                                agent_pos.y + dir_delta(agent_dir).y}; }
  int carried_color() const;
  int key_of_color(int color) const;  // index into keys, -1 if none
  bool cell_walkable(Coord c) const;
  bool cell_empty_floor(Coord c) const;  // valid target for dropping a key

  bool operator==(const EnvState& o) const;
  std::uint64_t hash() const;
};

struct DynamicsConfig {
  bool stochastic = false;
  double drop_prob = 0.05;  // per-step chance of fumbling a carried key
};

// One environment transition. `rng` is consulted only on the stochastic
// path and may be null for deterministic dynamics.
EnvState step_env(const EnvState& s, int action, const DynamicsConfig& dyn,
                  RngStream* rng = nullptr);

std::string render(const EnvState& s);

// Formula predicate adapter. Objects in the agent's cell are occluded:
// their position and state predicates report absent (-1) while the agent
// stands on them.
class GridView : public PredicateView {
 public:
  GridView(const EnvState& s, const EnvSchema& schema);
  Value predicate(int pred_index, int color) const override;

 private:
  enum class Which { AgentPos, KeyPos, DoorPos, DoorState, GoalPos, BoxPos, Carrying };
  const EnvState& s_;
  std::vector<Which> resolvers_;
};

// Schema used by DoorKey and LockedRoom; DroneSupplier adds box predicates.
EnvSchema make_doorkey_schema(int grid_size);
EnvSchema make_lockedroom_schema(int grid_size);
EnvSchema make_dronesupplier_schema(int grid_size);

}  // namespace mrbt
