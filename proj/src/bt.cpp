#include "mrbt/bt.hpp"

#include <stdexcept>

namespace mrbt {

Mrbt::Mrbt(const BtNodeSpec& root, int num_formulas) : num_formulas_(num_formulas) {
  root_ = build(root);
  if (leaves_.empty()) throw std::invalid_argument("tree has no leaves");
  int mask_size = leaves_.front().mask.size();
  for (const Mbrm& m : leaves_) {
    if (m.mask.size() != mask_size)
      throw std::invalid_argument("leaves disagree on action set size");
    if (m.rho && (*m.rho < 0 || *m.rho >= num_formulas_))
      throw std::invalid_argument("leaf formula id out of range");
  }
  reset();
}

int Mrbt::build(const BtNodeSpec& spec) {
  Node n;
  n.type = spec.type;
  if (spec.type == BtNodeType::Leaf) {
    if (!spec.machine) throw std::invalid_argument("leaf node without an MBRM");
    if (!spec.children.empty()) throw std::invalid_argument("leaf node with children");
    n.leaf_id = static_cast<int>(leaves_.size());
    leaves_.push_back(*spec.machine);
  } else {
    if (spec.children.empty()) throw std::invalid_argument("composite node without children");
    if (spec.machine) throw std::invalid_argument("composite node with an MBRM");
  }
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(n));
  for (const BtNodeSpec& c : spec.children) {
    int cid = build(c);
    nodes_[id].children.push_back(cid);
  }
  return id;
}

void Mrbt::set_assignment(const std::vector<Status>& a) {
  if (a.size() != state_.size()) throw std::invalid_argument("assignment size mismatch");
  state_ = a;
}

void Mrbt::reset() {
  state_.resize(leaves_.size());
  for (size_t i = 0; i < leaves_.size(); ++i) state_[i] = leaves_[i].initial_state();
}

Status Mrbt::tick_node(int node, const LabelAssignment& sigma, TickResult& out) {
  const Node& n = nodes_[node];
  switch (n.type) {
    case BtNodeType::Leaf: {
      auto [next, r] = leaves_[n.leaf_id].step(state_[n.leaf_id], sigma);
      state_[n.leaf_id] = next;
      out.ticked.push_back(n.leaf_id);
      out.reward += r;
      return next;
    }
    case BtNodeType::Sequence: {
      for (int c : n.children) {
        Status s = tick_node(c, sigma, out);
        if (s != Status::Success) return s;
      }
      return Status::Success;
    }
    case BtNodeType::Fallback: {
      for (int c : n.children) {
        Status s = tick_node(c, sigma, out);
        if (s != Status::Failure) return s;
      }
      return Status::Failure;
    }
  }
  return Status::Failure;
}

TickResult Mrbt::tick(const LabelAssignment& sigma) {
  TickResult out;
  out.root_status = tick_node(root_, sigma, out);
  out.mask = leaves_[out.ticked.back()].mask;
  return out;
}

}  // namespace mrbt
