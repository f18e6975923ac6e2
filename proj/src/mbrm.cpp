#include "mrbt/mbrm.hpp"

namespace mrbt {

std::string status_name(Status s) {
  switch (s) {
    case Status::Success: return "Success";
    case Status::Running: return "Running";
    case Status::Failure: return "Failure";
  }
  return "?";
}

std::pair<Status, double> Mbrm::step(Status u, const LabelAssignment& sigma) const {
  switch (kind) {
    case MbrmKind::Condition: {
      bool sat = rho && sigma.contains(*rho);
      Status next = sat ? Status::Success : Status::Failure;
      double r = 0.0;
      if (u != Status::Success && next == Status::Success) r = reward_on_true;
      if (u == Status::Success && next != Status::Success) r = penalty_on_lost;
      return {next, r};
    }
    case MbrmKind::Navigation: {
      bool sat = rho && sigma.contains(*rho);
      Status next = sat ? Status::Success : Status::Running;
      double r = 0.0;
      if (u != Status::Success && next == Status::Success) r = reward_on_true;
      if (u == Status::Success && next != Status::Success) r = penalty_on_lost;
      return {next, r};
    }
    case MbrmKind::Interaction:
      // MB(false): runs until preempted, never emits reward
      return {Status::Running, 0.0};
  }
  return {Status::Running, 0.0};
}

Mbrm make_condition_mbrm(int formula_id, double reward, double penalty, ActionMask mask,
                         std::string name) {
  Mbrm m;
  m.kind = MbrmKind::Condition;
  m.rho = formula_id;
  m.reward_on_true = reward;
  m.penalty_on_lost = penalty;
  m.mask = mask;
  m.name = std::move(name);
  return m;
}

Mbrm make_navigation_mbrm(int formula_id, double reward, double penalty, ActionMask mask,
                          std::string name) {
  Mbrm m;
  m.kind = MbrmKind::Navigation;
  m.rho = formula_id;
  m.reward_on_true = reward;
  m.penalty_on_lost = penalty;
  m.mask = mask;
  m.name = std::move(name);
  return m;
}

Mbrm make_interaction_mbrm(ActionMask mask, std::string name) {
  Mbrm m;
  m.kind = MbrmKind::Interaction;
  m.rho = std::nullopt;
  m.mask = mask;
  m.name = std::move(name);
  return m;
}

}  // namespace mrbt
