#include <doctest.h>

#include "mrbt/formula.hpp"
#include "mrbt/gridworld.hpp"
#include "mrbt/mbrm.hpp"

using namespace mrbt;

namespace {

const EnvSchema& doorkey_schema() {
  static EnvSchema s = make_doorkey_schema(8);
  return s;
}

const std::set<std::string>& lr_vars() {
  static std::set<std::string> v = {"key_color", "room_color", "door_color"};
  return v;
}

Formula parse_dk(const std::string& text) {
  return parse_formula(text, doorkey_schema(), {});
}

// Fixed-value view for evaluation tests.
class StubView : public PredicateView {
 public:
  StubView(const EnvSchema& schema) : schema_(schema) {}

  void set(const std::string& pred, int color, Value v) {
    values_[{schema_.predicate_index(pred), color}] = v;
  }
  Value predicate(int pred_index, int color) const override {
    auto it = values_.find({pred_index, color});
    if (it != values_.end()) return it->second;
    return Value::of_int(kAbsent);
  }

 private:
  const EnvSchema& schema_;
  std::map<std::pair<int, int>, Value> values_;
};

}  // namespace

TEST_CASE("formula print/parse round trip is structural identity") {
  const char* texts[] = {
      "true",
      "false",
      "key_pos[yellow] == -1",
      "door_state[yellow] == OPEN || door_state[yellow] == -1",
      "manhattan(agent_pos, key_pos[yellow]) <= 1 || key_pos[yellow] == -1",
      "goal_pos == (6, 6)",
      "!(door_state[yellow] == LOCKED) && agent_pos != (1, 1)",
      "door_state[yellow] == CLOSED -> manhattan(agent_pos, door_pos[yellow]) >= 2",
      "goal_pos == -1 -> (door_state[yellow] == OPEN -> true)",
  };
  for (const char* text : texts) {
    CAPTURE(text);
    Formula f = parse_dk(text);
    Formula again = parse_dk(f.str());
    CHECK(f.equals(again));
  }
}

TEST_CASE("door state and color tags survive printing") {
  Formula f = parse_dk("door_state[yellow] == OPEN");
  CHECK(f.str().find("OPEN") != std::string::npos);
  Formula g = parse_dk("door_state[yellow] == 0");
  // same value, plain spelling; both parse to the same semantics
  StubView view(doorkey_schema());
  view.set("door_state", 4, Value::of_int(kDoorOpen));
  CHECK(eval_formula(f, view, {}));
  CHECK(eval_formula(g, view, {}));
}

TEST_CASE("operator precedence and associativity") {
  // || binds tighter than ->, && tighter than ||
  Formula f = parse_dk("false && true || true");
  StubView view(doorkey_schema());
  CHECK(eval_formula(f, view, {}));
  Formula g = parse_dk("false || true && false");
  CHECK_FALSE(eval_formula(g, view, {}));
  // implication is right associative: a -> b -> c == a -> (b -> c)
  Formula h = parse_dk("true -> false -> false");
  CHECK(eval_formula(h, view, {}));
  Formula n = parse_dk("!true || true");
  CHECK(eval_formula(n, view, {}));
}

TEST_CASE("task variables index predicates through bindings") {
  EnvSchema schema = make_lockedroom_schema(9);
  Formula f = parse_formula("door_state[room_color] == OPEN", schema, lr_vars());
  StubView view(schema);
  view.set("door_state", 1, Value::of_int(kDoorOpen));
  view.set("door_state", 2, Value::of_int(kDoorLocked));
  CHECK(eval_formula(f, view, {{"room_color", 1}}));
  CHECK_FALSE(eval_formula(f, view, {{"room_color", 2}}));
  CHECK_THROWS_WITH_AS((void)eval_formula(f, view, {}),
                       "unbound task variable: room_color", std::runtime_error);
}

TEST_CASE("coordinate comparisons and manhattan evaluation") {
  StubView view(doorkey_schema());
  view.set("agent_pos", -1, Value::of_coord({2, 3}));
  view.set("key_pos", 4, Value::of_coord({4, 3}));
  CHECK(eval_formula(parse_dk("manhattan(agent_pos, key_pos[yellow]) == 2"), view, {}));
  CHECK(eval_formula(parse_dk("agent_pos == (2, 3)"), view, {}));
  CHECK(eval_formula(parse_dk("agent_pos != (3, 3)"), view, {}));
  CHECK_FALSE(eval_formula(parse_dk("agent_pos == -1"), view, {}));
  view.set("agent_pos", -1, Value::of_coord(kNowhere));
  CHECK(eval_formula(parse_dk("agent_pos == -1"), view, {}));
}

TEST_CASE("parse errors carry position and reject ill-typed input") {
  auto bad = [&](const std::string& text) {
    CAPTURE(text);
    CHECK_THROWS_AS((void)parse_dk(text), ParseError);
  };
  bad("");
  bad("key_pos[yellow] ==");
  bad("nonsense_pred == -1");
  bad("agent_pos <= (2, 2)");        // coords only support == and !=
  bad("agent_pos == 3");             // coord vs int only against -1
  bad("key_pos == -1");              // missing color index
  bad("agent_pos[red] == -1");       // not color indexed
  bad("manhattan(agent_pos) == 1");  // arity
  bad("manhattan(1, 2) == 1");       // needs coordinate arguments
  bad("door_state[door_color] == OPEN");  // unknown task var without binding set
  bad("key_pos[yellow] == -1 &&");
  bad("(agent_pos == (1, 2)");
  bad("agent_pos @ (1, 2)");

  try {
    (void)parse_dk("key_pos[yellow] ==\n  $");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).size() > 0);
  }
}

TEST_CASE("referenced predicates are reported") {
  Formula f = parse_dk("manhattan(agent_pos, key_pos[yellow]) <= 1 || door_state[yellow] == OPEN");
  auto preds = f.referenced_predicates(doorkey_schema());
  CHECK(preds == std::set<std::string>{"agent_pos", "key_pos", "door_state"});
}

TEST_CASE("formula ids stay within the 64-bit label budget") {
  LabelAssignment l;
  CHECK_THROWS_AS(l.add(64), std::out_of_range);
  l.add(0);
  l.add(63);
  CHECK(l.contains(63));
  CHECK_FALSE(l.contains(1));
  CHECK(l.ids() == std::vector<int>{0, 63});
}
