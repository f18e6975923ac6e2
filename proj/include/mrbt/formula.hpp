#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbt/schema.hpp"

namespace mrbt {

// Binding of task variables (e.g. door_color) to color indices.
using TaskBindings = std::map<std::string, int>;

// Read-only view of environment state used by formula evaluation.
// predicate() returns the current value of schema predicate `pred_index`,
// specialized to `color` when the predicate is color-indexed (-1 otherwise).
class PredicateView {
 public:
  virtual ~PredicateView() = default;
  virtual Value predicate(int pred_index, int color) const = 0;
};

enum class NodeKind {
  True,
  False,
  And,
  Or,
  Not,
  Implies,
  Cmp,
  Manhattan,
  PredRef,
  TaskVarRef,
  IntConst,
  CoordConst,
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

// Pretty-print hint for integer constants so parse(print(f)) is structural
// identity even for symbolic literals.
enum class IntTag { Plain, Door, Color, Bool };

struct FormulaNode {
  NodeKind kind = NodeKind::True;
  int lhs = -1;
  int rhs = -1;
  CmpOp cmp = CmpOp::Eq;
  int value = 0;
  IntTag tag = IntTag::Plain;
  Coord coord{};
  int pred = -1;            // PredRef: schema predicate index
  std::string name;         // PredRef / TaskVarRef name
  int index_color = -1;     // PredRef: literal color index
  std::string index_var;    // PredRef: task variable used as color index
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg), line(line), col(col) {}
  int line;
  int col;
};

class Formula {
 public:
  Formula() = default;
  Formula(std::vector<FormulaNode> nodes, int root)
      : nodes_(std::move(nodes)), root_(root) {}

  bool valid() const { return root_ >= 0; }
  int root() const { return root_; }
  const std::vector<FormulaNode>& nodes() const { return nodes_; }
  const FormulaNode& node(int i) const { return nodes_.at(i); }

  std::string str() const;
  bool equals(const Formula& other) const;  // structural identity
  bool operator==(const Formula& o) const { return equals(o); }

  // Predicate names referenced anywhere in the formula.
  std::set<std::string> referenced_predicates(const EnvSchema& schema) const;

 private:
  std::vector<FormulaNode> nodes_;
  int root_ = -1;
};

// Parses one formula. Unknown predicates/variables, arity errors and type
// mismatches throw ParseError with position info. `task_vars` lists the
// task-space variable names that may appear as operands or color indices.
Formula parse_formula(const std::string& text, const EnvSchema& schema,
                      const std::set<std::string>& task_vars);

Formula formula_true();
Formula formula_false();

bool eval_formula(const Formula& f, const PredicateView& state,
                  const TaskBindings& bindings);

}  // namespace mrbt
