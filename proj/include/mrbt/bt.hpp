#pragma once

#include <optional>
#include <vector>

#include "mrbt/mbrm.hpp"

namespace mrbt {

enum class BtNodeType { Sequence, Fallback, Leaf };

// Declarative tree description consumed by the Mrbt constructor.
struct BtNodeSpec {
  BtNodeType type = BtNodeType::Leaf;
  std::vector<BtNodeSpec> children;
  std::optional<Mbrm> machine;

  static BtNodeSpec sequence(std::vector<BtNodeSpec> cs) {
    return BtNodeSpec{BtNodeType::Sequence, std::move(cs), std::nullopt};
  }
  static BtNodeSpec fallback(std::vector<BtNodeSpec> cs) {
    return BtNodeSpec{BtNodeType::Fallback, std::move(cs), std::nullopt};
  }
  static BtNodeSpec leaf(Mbrm m) { return BtNodeSpec{BtNodeType::Leaf, {}, std::move(m)}; }
};

struct TickResult {
  std::vector<int> ticked;  // leaf ids in tick order
  double reward = 0.0;
  ActionMask mask;          // mask of the last ticked leaf
  Status root_status = Status::Running;
};

// Behavior tree whose leaves are MBRMs. Composites are memoryless: each
// tick re-evaluates children left to right, so an earlier child regaining
// control preempts later ones. Leaf automaton states persist across ticks;
// leaves not reached by a tick keep their state.
class Mrbt {
 public:
  Mrbt() = default;
  Mrbt(const BtNodeSpec& root, int num_formulas);

  int leaf_count() const { return static_cast<int>(leaves_.size()); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int num_formulas() const { return num_formulas_; }

  const Mbrm& leaf(int id) const { return leaves_.at(id); }
  Status leaf_state(int id) const { return state_.at(id); }
  void set_leaf_state(int id, Status u) { state_.at(id) = u; }
  const std::vector<Status>& assignment() const { return state_; }
  void set_assignment(const std::vector<Status>& a);

  void reset();
  TickResult tick(const LabelAssignment& sigma);

 private:
  struct Node {
    BtNodeType type = BtNodeType::Leaf;
    std::vector<int> children;
    int leaf_id = -1;
  };

  int build(const BtNodeSpec& spec);
  Status tick_node(int node, const LabelAssignment& sigma, TickResult& out);

  std::vector<Node> nodes_;
  std::vector<Mbrm> leaves_;
  std::vector<Status> state_;
  int root_ = -1;
  int num_formulas_ = 0;
};

}  // namespace mrbt
