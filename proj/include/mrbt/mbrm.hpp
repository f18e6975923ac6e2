#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbt/schema.hpp"

namespace mrbt {

// Node return status, which doubles as the MBRM state space U.
enum class Status : std::uint8_t { Success, Running, Failure };

std::string status_name(Status s);

// Set of formula ids currently satisfied (sigma). Formula ids are indices
// into the tree's formula list L.
class LabelAssignment {
 public:
  LabelAssignment() = default;

  static LabelAssignment none() { return LabelAssignment(); }
  static LabelAssignment of(std::initializer_list<int> ids) {
    LabelAssignment l;
    for (int i : ids) l.add(i);
    return l;
  }

  void add(int id) {
    if (id < 0 || id >= 64) throw std::out_of_range("formula id out of range");
    bits_ |= std::uint64_t(1) << id;
  }
  bool contains(int id) const {
    return id >= 0 && id < 64 && ((bits_ >> id) & 1u);
  }
  std::uint64_t bits() const { return bits_; }
  bool operator==(const LabelAssignment&) const = default;

  std::vector<int> ids() const {
    std::vector<int> out;
    for (int i = 0; i < 64; ++i) {
      if (contains(i)) out.push_back(i);
    }
    return out;
  }

 private:
  std::uint64_t bits_ = 0;
};

enum class MbrmKind { Condition, Navigation, Interaction };

// Minimal behavioral reward machine: a 3-state automaton over {Success,
// Running, Failure} attached to one tree leaf. Carries a tracked formula
// (absent for Interaction machines), a reward profile and an action mask.
struct Mbrm {
  MbrmKind kind = MbrmKind::Interaction;
  std::optional<int> rho;  // tracked formula id
  double reward_on_true = 0.0;
  double penalty_on_lost = 0.0;
  ActionMask mask;
  std::string name;

  Status initial_state() const {
    switch (kind) {
      case MbrmKind::Condition: return Status::Failure;
      case MbrmKind::Navigation: return Status::Running;
      case MbrmKind::Interaction: return Status::Running;
    }
    return Status::Running;
  }

  // One automaton step under label assignment sigma from state u.
  // Returns the next state and the reward emitted by this transition.
  std::pair<Status, double> step(Status u, const LabelAssignment& sigma) const;
};

Mbrm make_condition_mbrm(int formula_id, double reward, double penalty, ActionMask mask,
                         std::string name = "");
Mbrm make_navigation_mbrm(int formula_id, double reward, double penalty, ActionMask mask,
                          std::string name = "");
Mbrm make_interaction_mbrm(ActionMask mask, std::string name = "");

}  // namespace mrbt
