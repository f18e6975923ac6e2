#include <doctest.h>

#include <memory>

#include "mrbt/gridworld.hpp"
#include "mrbt/task_space.hpp"

using namespace mrbt;

namespace {

const char* kRoomMap =
    "#######\n"
    "#.....#\n"
    "#.>...#\n"
    "#..e..#\n"
    "#....G#\n"
    "#######\n";

struct Fixture {
  std::shared_ptr<Layout> layout;
  EnvState state;

  explicit Fixture(const char* map) {
    ParsedMap pm = parse_map(map);
    layout = std::make_shared<Layout>(pm.layout);
    state.layout = layout;
    state.agent_pos = pm.agent;
    state.agent_dir = pm.agent_dir;
    state.doors.assign(layout->doors.size(), kDoorClosed);
    state.boxes_present.assign(layout->boxes.size(), 1);
  }

  void add_key(int color, Coord pos) {
    state.keys.push_back({color, KeyWhere::OnGrid, pos, -1});
  }
};

}  // namespace

TEST_CASE("map parsing") {
  ParsedMap pm = parse_map(kRoomMap);
  CHECK(pm.layout.width == 7);
  CHECK(pm.layout.height == 6);
  CHECK(pm.agent == Coord{2, 2});
  CHECK(pm.agent_dir == 0);
  CHECK(pm.layout.goal == Coord{5, 4});
  REQUIRE(pm.layout.doors.size() == 1);
  CHECK(pm.layout.doors[0].pos == Coord{3, 3});
  CHECK(pm.layout.doors[0].color == color_index("yellow"));
  CHECK(pm.layout.wall_at(Coord{0, 0}));
  CHECK_FALSE(pm.layout.wall_at(Coord{1, 1}));
  CHECK(pm.layout.wall_at(Coord{-1, 2}));  // out of bounds counts as wall
  CHECK(pm.layout.fp != 0);

  CHECK(parse_map("#####\n#.C.#\n#.@.#\n#####\n").layout.boxes[0].color == color_index("blue"));
  for (auto [glyph, dir] : {std::pair{'>', 0}, {'v', 1}, {'<', 2}, {'^', 3}}) {
    std::string m = "###\n#" + std::string(1, glyph) + "#\n###\n";
    CHECK(parse_map(m).agent_dir == dir);
  }

  CHECK_THROWS_AS((void)parse_map(""), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_map("##\n###\n"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_map("###\n#z#\n###\n"), std::invalid_argument);
}

TEST_CASE("movement and turning") {
  Fixture f(kRoomMap);
  EnvState s = f.state;

  EnvState l = step_env(s, kActLeft, {});
  CHECK(l.agent_dir == 3);
  CHECK(l.agent_pos == s.agent_pos);
  EnvState r = step_env(s, kActRight, {});
  CHECK(r.agent_dir == 1);
  EnvState rr = step_env(step_env(step_env(r, kActRight, {}), kActRight, {}), kActRight, {});
  CHECK(rr.agent_dir == 0);

  EnvState fwd = step_env(s, kActForward, {});
  CHECK(fwd.agent_pos == Coord{3, 2});

  // walls block
  EnvState up = step_env(step_env(step_env(s, kActLeft, {}), kActForward, {}), kActForward, {});
  CHECK(up.agent_pos == Coord{2, 1});

  // done and blocked moves leave the state identical
  CHECK(step_env(s, kActDone, {}) == s);
  CHECK_THROWS_AS((void)step_env(s, -1, {}), std::invalid_argument);
  CHECK_THROWS_AS((void)step_env(s, kNumGridActions, {}), std::invalid_argument);
}

TEST_CASE("keys block walking and pickup needs facing") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{3, 2});
  EnvState s = f.state;

  CHECK(step_env(s, kActForward, {}).agent_pos == s.agent_pos);

  EnvState picked = step_env(s, kActPickup, {});
  REQUIRE(picked.carried_color() == color_index("yellow"));
  CHECK(picked.keys[0].where == KeyWhere::Carried);
  CHECK(picked.keys[0].pos == kNowhere);
  // the cell is free again
  CHECK(step_env(picked, kActForward, {}).agent_pos == Coord{3, 2});

  // pickup with nothing in front is a no-op
  EnvState idle = step_env(picked, kActPickup, {});
  CHECK(idle == picked);

  // a second key cannot be picked up while one is carried
  Fixture g(kRoomMap);
  g.add_key(color_index("yellow"), Coord{3, 2});
  g.add_key(color_index("red"), Coord{4, 2});
  EnvState two = step_env(g.state, kActPickup, {});
  EnvState fwd = step_env(two, kActForward, {});
  REQUIRE(fwd.agent_pos == Coord{3, 2});
  EnvState tryagain = step_env(fwd, kActPickup, {});
  CHECK(tryagain.keys[1].where == KeyWhere::OnGrid);
  CHECK(tryagain.carried_color() == color_index("yellow"));
}

TEST_CASE("drop requires empty floor in front") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{3, 2});
  EnvState carrying = step_env(f.state, kActPickup, {});

  EnvState dropped = step_env(carrying, kActDrop, {});
  CHECK(dropped.carried_color() == -1);
  CHECK(dropped.keys[0].where == KeyWhere::OnGrid);
  CHECK(dropped.keys[0].pos == Coord{3, 2});

  // facing a wall: no drop
  EnvState facing_wall = step_env(step_env(carrying, kActLeft, {}), kActForward, {});
  REQUIRE(facing_wall.agent_pos == Coord{2, 1});
  REQUIRE(facing_wall.front() == Coord{2, 0});
  EnvState still = step_env(facing_wall, kActDrop, {});
  CHECK(still.carried_color() == color_index("yellow"));

  // the goal cell is not a drop target either
  EnvState s = carrying;
  for (int a : {kActForward, kActForward, kActRight, kActForward, kActForward, kActLeft})
    s = step_env(s, a, {});
  REQUIRE(s.agent_pos == Coord{4, 4});
  REQUIRE(s.front() == s.layout->goal);
  CHECK(step_env(s, kActDrop, {}).carried_color() == color_index("yellow"));

  // drop with empty hands is a no-op
  CHECK(step_env(f.state, kActDrop, {}) == f.state);
}

TEST_CASE("doors toggle, lock and block") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{1, 1});  // parked out of the way
  EnvState s = f.state;
  // stand north of the door at (3,3), facing south
  s.agent_pos = Coord{3, 2};
  s.agent_dir = 1;

  SUBCASE("closed doors block and open on toggle") {
    CHECK(step_env(s, kActForward, {}).agent_pos == s.agent_pos);
    EnvState open = step_env(s, kActToggle, {});
    CHECK(open.doors[0] == kDoorOpen);
    CHECK(step_env(open, kActForward, {}).agent_pos == Coord{3, 3});
    EnvState closed = step_env(open, kActToggle, {});
    CHECK(closed.doors[0] == kDoorClosed);
  }

  SUBCASE("locked doors need the matching key") {
    s.doors[0] = kDoorLocked;
    EnvState still = step_env(s, kActToggle, {});
    CHECK(still.doors[0] == kDoorLocked);

    EnvState wrong = s;
    wrong.keys.push_back({color_index("red"), KeyWhere::Carried, kNowhere, -1});
    CHECK(step_env(wrong, kActToggle, {}).doors[0] == kDoorLocked);

    EnvState right = s;
    right.keys[0] = {color_index("yellow"), KeyWhere::Carried, kNowhere, -1};
    EnvState unlocked = step_env(right, kActToggle, {});
    CHECK(unlocked.doors[0] == kDoorOpen);
    CHECK(unlocked.carried_color() == color_index("yellow"));  // key is kept
  }
}

TEST_CASE("boxes block walking and reveal their key on toggle") {
  Fixture f("#####\n#.C.#\n#.^.#\n#####\n");
  f.state.keys.push_back({color_index("purple"), KeyWhere::Hidden, kNowhere, 0});
  EnvState s = f.state;
  REQUIRE(s.layout->boxes.size() == 1);

  CHECK(step_env(s, kActForward, {}).agent_pos == s.agent_pos);
  CHECK(step_env(s, kActPickup, {}) == s);  // boxes are not picked up

  EnvState opened = step_env(s, kActToggle, {});
  CHECK(opened.boxes_present[0] == 0);
  CHECK(opened.keys[0].where == KeyWhere::OnGrid);
  CHECK(opened.keys[0].pos == s.layout->boxes[0].pos);
  CHECK(opened.keys[0].box == -1);
  // the revealed key now blocks the cell instead
  CHECK(step_env(opened, kActForward, {}).agent_pos == s.agent_pos);
  // toggling the empty space does nothing further
  CHECK(step_env(opened, kActToggle, {}) == opened);
}

TEST_CASE("state hashing distinguishes dynamic content") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{3, 2});
  EnvState a = f.state;
  EnvState b = step_env(a, kActRight, {});
  EnvState c = step_env(a, kActPickup, {});
  CHECK(a.hash() == f.state.hash());
  CHECK_FALSE(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() != c.hash());
  EnvState d = a;
  d.doors[0] = kDoorOpen;
  CHECK(a.hash() != d.hash());
}

TEST_CASE("grid view occludes whatever the agent stands on") {
  EnvSchema schema = make_doorkey_schema(7);
  int p_agent = schema.predicate_index("agent_pos");
  int p_key = schema.predicate_index("key_pos");
  int p_door_pos = schema.predicate_index("door_pos");
  int p_door_state = schema.predicate_index("door_state");
  int p_goal = schema.predicate_index("goal_pos");
  int yellow = color_index("yellow");

  Fixture f(kRoomMap);
  f.add_key(yellow, Coord{3, 2});
  EnvState s = f.state;
  s.doors[0] = kDoorOpen;

  SUBCASE("plain readings away from the agent") {
    GridView v(s, schema);
    CHECK(v.predicate(p_agent, -1).c == Coord{2, 2});
    CHECK(v.predicate(p_key, yellow).c == Coord{3, 2});
    CHECK(v.predicate(p_door_pos, yellow).c == Coord{3, 3});
    CHECK(v.predicate(p_door_state, yellow).i == kDoorOpen);
    CHECK(v.predicate(p_goal, -1).c == Coord{5, 4});
    // colors with no matching object read absent
    CHECK(v.predicate(p_key, color_index("red")).is_absent_coord());
    CHECK(v.predicate(p_door_state, color_index("red")).i == kAbsent);
  }

  SUBCASE("standing on the open door hides it") {
    EnvState on = s;
    on.agent_pos = Coord{3, 3};
    on.agent_dir = 1;
    GridView v(on, schema);
    CHECK(v.predicate(p_door_pos, yellow).is_absent_coord());
    CHECK(v.predicate(p_door_state, yellow).i == kAbsent);
    // stepping off restores the reading
    EnvState off = step_env(on, kActForward, {});
    REQUIRE(off.agent_pos == Coord{3, 4});
    GridView v2(off, schema);
    CHECK(v2.predicate(p_door_state, yellow).i == kDoorOpen);
  }

  SUBCASE("standing on the goal hides it") {
    EnvState on = s;
    on.agent_pos = s.layout->goal;
    GridView v(on, schema);
    CHECK(v.predicate(p_goal, -1).is_absent_coord());
  }

  SUBCASE("carried keys read as absent positions") {
    EnvState carrying = step_env(s, kActPickup, {});
    GridView v(carrying, schema);
    CHECK(v.predicate(p_key, yellow).is_absent_coord());
  }

  SUBCASE("carrying predicate reports the held color") {
    EnvSchema drone = make_dronesupplier_schema(7);
    int p_carry = drone.predicate_index("carrying");
    Fixture g("#####\n#.C.#\n#.^.#\n#####\n");
    g.state.keys.push_back({yellow, KeyWhere::Hidden, kNowhere, 0});
    GridView before(g.state, drone);
    CHECK(before.predicate(p_carry, yellow).i == 0);
    CHECK(before.predicate(drone.predicate_index("box_pos"), color_index("blue")).c ==
          Coord{2, 1});
    // hidden keys have no position
    CHECK(before.predicate(drone.predicate_index("key_pos"), yellow).is_absent_coord());

    EnvState carrying = g.state;
    carrying.keys[0] = {yellow, KeyWhere::Carried, kNowhere, -1};
    GridView after(carrying, drone);
    CHECK(after.predicate(p_carry, yellow).i == 1);
    CHECK(after.predicate(p_carry, color_index("red")).i == 0);
  }
}

TEST_CASE("render shows agent, objects and door states") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{1, 1});
  std::string out = render(f.state);
  CHECK(out.find('>') != std::string::npos);
  CHECK(out.find('k') != std::string::npos);
  CHECK(out.find('+') != std::string::npos);
  CHECK(out.find('G') != std::string::npos);
  f.state.doors[0] = kDoorOpen;
  CHECK(render(f.state).find('O') != std::string::npos);
  f.state.doors[0] = kDoorLocked;
  CHECK(render(f.state).find('L') != std::string::npos);
}

TEST_CASE("stochastic dynamics fumble carried keys at the configured rate") {
  Fixture f(kRoomMap);
  f.add_key(color_index("yellow"), Coord{3, 2});
  EnvState carrying = step_env(f.state, kActPickup, {});
  REQUIRE(carrying.carried_color() >= 0);

  DynamicsConfig dyn;
  dyn.stochastic = true;

  SUBCASE("deterministic dynamics never slip") {
    EnvState s = carrying;
    for (int i = 0; i < 200; ++i) s = step_env(s, kActDone, {});
    CHECK(s.carried_color() == color_index("yellow"));
  }

  SUBCASE("empirical slip frequency matches the configured probability") {
    RngStream rng = RngStream::seeded(17, 0x51ee);
    const int trials = 10000;
    int drops = 0;
    for (int i = 0; i < trials; ++i) {
      EnvState n = step_env(carrying, kActDone, dyn, &rng);
      if (n.carried_color() < 0) {
        ++drops;
        // the key lands on an adjacent free cell
        REQUIRE(n.keys[0].where == KeyWhere::OnGrid);
        CHECK(manhattan(n.keys[0].pos, n.agent_pos) == 1);
        CHECK(carrying.cell_empty_floor(n.keys[0].pos));
      }
    }
    double rate = static_cast<double>(drops) / trials;
    CHECK(rate == doctest::Approx(dyn.drop_prob).epsilon(0.2));  // within +-0.01
  }

  SUBCASE("no slip when every neighboring cell is blocked") {
    Fixture boxed("###\n#@#\n###\n");
    boxed.state.keys.push_back({color_index("yellow"), KeyWhere::Carried, kNowhere, -1});
    RngStream rng = RngStream::seeded(18, 0x51ee);
    EnvState s = boxed.state;
    for (int i = 0; i < 300; ++i) {
      s = step_env(s, kActDone, dyn, &rng);
      REQUIRE(s.carried_color() == color_index("yellow"));
    }
  }

  SUBCASE("empty handed steps never consume randomness") {
    RngStream a = RngStream::seeded(19, 0x51ee);
    RngStream b = RngStream::seeded(19, 0x51ee);
    EnvState s = f.state;
    for (int i = 0; i < 50; ++i) s = step_env(s, kActRight, dyn, &a);
    CHECK(a.next_u64() == b.next_u64());
  }
}
