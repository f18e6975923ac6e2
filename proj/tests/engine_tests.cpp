#include <doctest.h>

#include "mrbt/expert.hpp"
#include "mrbt/mrbt_template.hpp"
#include "mrbt/spec_file.hpp"
#include "mrbt/task_space.hpp"
#include "mrbt/util.hpp"
#include "support/reference_bt.hpp"

using namespace mrbt;

namespace {

std::string asset(const std::string& name) {
  return std::string(MRBT_SOURCE_DIR) + "/assets/" + name;
}

std::vector<SubtaskSpec> load_subtasks(const std::string& file, const SpaceBundle& bundle) {
  return MrbtSpecFile::load(asset(file)).parse_subtasks(bundle.schema,
                                                       bundle.space.task_var_names());
}

std::vector<ActionMask> template_leaf_masks(const Mrbt& tree) {
  std::vector<ActionMask> masks;
  for (int i = 0; i < tree.leaf_count(); ++i) masks.push_back(tree.leaf(i).mask);
  return masks;
}

}  // namespace

TEST_CASE("mbrm transition table") {
  EnvSchema schema = make_doorkey_schema(6);
  ActionMask full = ActionMask::full(schema);

  SUBCASE("condition machine rewards entry and exit of Success") {
    Mbrm c = make_condition_mbrm(0, 1.0, -1.0, full);
    CHECK(c.initial_state() == Status::Failure);
    auto [u1, r1] = c.step(Status::Failure, LabelAssignment::of({0}));
    CHECK(u1 == Status::Success);
    CHECK(r1 == doctest::Approx(1.0));
    auto [u2, r2] = c.step(Status::Success, LabelAssignment::of({0}));
    CHECK(u2 == Status::Success);
    CHECK(r2 == doctest::Approx(0.0));
    auto [u3, r3] = c.step(Status::Success, LabelAssignment::none());
    CHECK(u3 == Status::Failure);
    CHECK(r3 == doctest::Approx(-1.0));
    auto [u4, r4] = c.step(Status::Failure, LabelAssignment::none());
    CHECK(u4 == Status::Failure);
    CHECK(r4 == doctest::Approx(0.0));
  }

  SUBCASE("navigation machine falls back to Running, not Failure") {
    Mbrm nav = make_navigation_mbrm(1, 0.1, -0.1, full);
    CHECK(nav.initial_state() == Status::Running);
    auto [u1, r1] = nav.step(Status::Running, LabelAssignment::of({1}));
    CHECK(u1 == Status::Success);
    CHECK(r1 == doctest::Approx(0.1));
    auto [u2, r2] = nav.step(Status::Success, LabelAssignment::none());
    CHECK(u2 == Status::Running);
    CHECK(r2 == doctest::Approx(-0.1));
  }

  SUBCASE("interaction machine is inert") {
    Mbrm in = make_interaction_mbrm(full);
    auto [u, r] = in.step(Status::Running, LabelAssignment::of({0, 1}));
    CHECK(u == Status::Running);
    CHECK(r == doctest::Approx(0.0));
  }
}

TEST_CASE("structure metrics closed form") {
  for (int k = 1; k <= 8; ++k) {
    StructureMetrics m = structure_metrics(k);
    CHECK(m.behaviors == 1 + 5 * k);
    CHECK(m.rm_states == 6 * k);
    CHECK(m.rm_edges == 12 * k);
  }
  CHECK_THROWS_AS((void)structure_metrics(0), std::invalid_argument);
}

TEST_CASE("template construction properties for k in 1..5") {
  SpaceBundle bundle = make_task_space("doorkey", 8);
  auto subtasks = load_subtasks("doorkey.mrbt", bundle);
  REQUIRE(subtasks.size() == 3);
  for (int k = 1; k <= 5; ++k) {
    std::vector<SubtaskSpec> sts;
    for (int i = 0; i < k; ++i) sts.push_back(subtasks[i % subtasks.size()]);
    Mrbt tree = build_template(sts, bundle.schema, {});
    CHECK(tree.node_count() == 1 + 5 * k);
    CHECK(tree.leaf_count() == 3 * k);
    CHECK(tree.num_formulas() == 2 * k);
    for (int i = 0; i < k; ++i) {
      // depth first leaf order: condition, navigation, interaction per subtask
      CHECK(tree.leaf(condition_leaf_id(i)).kind == MbrmKind::Condition);
      CHECK(tree.leaf(condition_leaf_id(i)).rho == psi_formula_id(i));
      CHECK(tree.leaf(condition_leaf_id(i)).mask == ActionMask::full(bundle.schema));
      CHECK(tree.leaf(navigation_leaf_id(i)).kind == MbrmKind::Navigation);
      CHECK(tree.leaf(navigation_leaf_id(i)).rho == phi_formula_id(i));
      CHECK(tree.leaf(interaction_leaf_id(i)).kind == MbrmKind::Interaction);
      CHECK_FALSE(tree.leaf(interaction_leaf_id(i)).rho.has_value());
    }
  }
}

TEST_CASE("engine matches the naive reference on every state and label combination") {
  SpaceBundle bundle = make_task_space("doorkey", 8);
  auto all = load_subtasks("doorkey.mrbt", bundle);
  std::vector<SubtaskSpec> sts = {all[0], all[1]};  // k = 2
  RewardSettings rewards;
  Mrbt tree = build_template(sts, bundle.schema, rewards);
  mrbt_test::ReferenceTemplateBt ref(2, template_leaf_masks(tree), rewards);

  // reachable states: condition in {Success, Failure}, navigation in
  // {Success, Running}, interaction always Running
  const Status cond_states[] = {Status::Success, Status::Failure};
  const Status nav_states[] = {Status::Success, Status::Running};
  int combos = 0;
  for (Status c0 : cond_states) {
    for (Status n0 : nav_states) {
      for (Status c1 : cond_states) {
        for (Status n1 : nav_states) {
          std::vector<Status> assign = {c0, n0, Status::Running, c1, n1, Status::Running};
          for (std::uint64_t bits = 0; bits < 16; ++bits) {
            LabelAssignment sigma;
            for (int f = 0; f < 4; ++f) {
              if ((bits >> f) & 1) sigma.add(f);
            }
            tree.set_assignment(assign);
            ref.state() = assign;
            TickResult got = tree.tick(sigma);
            mrbt_test::ReferenceTick want = ref.tick(sigma);
            REQUIRE(got.ticked == want.ticked);
            REQUIRE(got.reward == doctest::Approx(want.reward));
            REQUIRE(got.mask == want.mask);
            REQUIRE(got.root_status == want.root);
            ++combos;
          }
        }
      }
    }
  }
  CHECK(combos == 16 * 16);
}

TEST_CASE("engine matches the reference across stateful random walks") {
  SpaceBundle bundle = make_task_space("doorkey", 8);
  auto sts = load_subtasks("doorkey.mrbt", bundle);
  RewardSettings rewards;
  Mrbt tree = build_template(sts, bundle.schema, rewards);
  mrbt_test::ReferenceTemplateBt ref(3, template_leaf_masks(tree), rewards);

  RngStream rng = RngStream::seeded(7, 0x7e57);
  tree.reset();
  ref.reset();
  for (int t = 0; t < 500; ++t) {
    LabelAssignment sigma;
    for (int f = 0; f < 6; ++f) {
      if (rng.bernoulli(0.4)) sigma.add(f);
    }
    TickResult got = tree.tick(sigma);
    mrbt_test::ReferenceTick want = ref.tick(sigma);
    REQUIRE(got.ticked == want.ticked);
    REQUIRE(got.reward == doctest::Approx(want.reward));
    REQUIRE(got.mask == want.mask);
    REQUIRE(got.root_status == want.root);
  }
}

TEST_CASE("non-ticked leaves keep their state") {
  SpaceBundle bundle = make_task_space("doorkey", 8);
  auto sts = load_subtasks("doorkey.mrbt", bundle);
  Mrbt tree = build_template(sts, bundle.schema, {});
  tree.reset();
  // make subtask 1's navigation Success, then fail subtask 0 again: the
  // tick stops at subtask 0, leaving subtask 1's leaves untouched
  TickResult first = tree.tick(LabelAssignment::of({0, 3}));
  CHECK(first.ticked == std::vector<int>{0, 3, 4, 5});
  CHECK(tree.leaf_state(navigation_leaf_id(1)) == Status::Success);
  TickResult res = tree.tick(LabelAssignment::none());
  CHECK(res.ticked == std::vector<int>{0, 1});
  CHECK(tree.leaf_state(navigation_leaf_id(1)) == Status::Success);
}

TEST_CASE("invalid tree specs are rejected") {
  EnvSchema schema = make_doorkey_schema(6);
  ActionMask full = ActionMask::full(schema);
  CHECK_THROWS_AS(Mrbt(BtNodeSpec::sequence({}), 2), std::invalid_argument);
  // leaf rho beyond the declared formula count
  auto leaf = BtNodeSpec::leaf(make_condition_mbrm(5, 1.0, -1.0, full));
  CHECK_THROWS_AS(Mrbt(BtNodeSpec::sequence({leaf}), 2), std::invalid_argument);
  // composite without machine children is fine only via leaves
  auto ok = BtNodeSpec::fallback({BtNodeSpec::leaf(make_interaction_mbrm(full))});
  Mrbt tree(ok, 1);
  CHECK(tree.leaf_count() == 1);
}

TEST_CASE("reactive backtracking when the key is dropped") {
  SpaceBundle bundle = make_task_space("lockedroom", 9);
  auto sts = load_subtasks("lockedroom.mrbt", bundle);
  Mrbt tree = build_template(sts, bundle.schema, {});

  auto [s, task] = bundle.generator->init_at(0);
  // the first enumerated mini task starts at (4,2) facing south
  REQUIRE(s.agent_pos == Coord{4, 2});

  tree.reset();
  auto drive = [&](int action) {
    s = step_env(s, action, {});
    GridView view(s, bundle.schema);
    return tree.tick(label(sts, view, task.bindings));
  };
  GridView v0(s, bundle.schema);
  tree.tick(label(sts, v0, task.bindings));

  // south to the corridor row, turn west, open the key-room door, walk to
  // the key and pick it up
  drive(kActForward);
  drive(kActForward);
  drive(kActRight);
  TickResult opened = drive(kActToggle);
  CHECK(opened.reward == doctest::Approx(1.0));  // door subtask completes
  drive(kActForward);
  drive(kActForward);
  TickResult picked = drive(kActPickup);
  CHECK(picked.reward == doctest::Approx(1.0));  // key subtask completes
  CHECK(tree.leaf_state(condition_leaf_id(1)) == Status::Success);

  // drop it again: the completion is lost on this very tick
  TickResult dropped = drive(kActDrop);
  CHECK(dropped.reward == doctest::Approx(-1.0));
  CHECK(tree.leaf_state(condition_leaf_id(1)) == Status::Failure);
  // still next to the key, so its interaction behavior is in control and
  // the mask already steers back toward re-collecting it
  CHECK(dropped.mask == sts[1].interact_mask);

  // walking away loses progress too: control reverts to the navigation
  // behavior and its mask
  TickResult away1 = drive(kActLeft);
  TickResult away2 = drive(kActLeft);
  TickResult away3 = drive(kActForward);
  CHECK(away1.mask == sts[1].interact_mask);
  CHECK(away2.mask == sts[1].interact_mask);
  CHECK(away3.reward == doctest::Approx(-0.1));
  CHECK(away3.mask == sts[1].nav_mask);
}
