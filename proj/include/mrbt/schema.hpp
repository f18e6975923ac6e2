#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mrbt/util.hpp"

namespace mrbt {

inline constexpr int kNumColors = 6;
inline constexpr std::array<std::string_view, kNumColors> kColorNames = {
    "red", "green", "blue", "purple", "yellow", "grey"};

int color_index(std::string_view name);  // -1 if unknown
std::string color_name(int index);

// Door state values as exposed to formulas; -1 means absent or occluded.
inline constexpr int kDoorOpen = 0;
inline constexpr int kDoorClosed = 1;
inline constexpr int kDoorLocked = 2;
inline constexpr int kAbsent = -1;

struct Coord {
  int x = -1;
  int y = -1;
  bool operator==(const Coord&) const = default;
};

inline constexpr Coord kNowhere{-1, -1};

inline int manhattan(Coord a, Coord b) {
  int dx = a.x - b.x;
  int dy = a.y - b.y;
  return (dx < 0 ? -dx : dx) + (dy < 0 ? -dy : dy);
}

// Runtime value of a formula operand.
struct Value {
  enum class Kind { Int, Coord } kind = Kind::Int;
  int i = 0;
  Coord c{};

  static Value of_int(int v) { return Value{Kind::Int, v, {}}; }
  static Value of_coord(Coord v) { return Value{Kind::Coord, 0, v}; }
  bool is_absent_coord() const { return kind == Kind::Coord && c == kNowhere; }
};

enum class PredKind { Scalar, Coord2 };

struct PredicateDecl {
  std::string name;
  PredKind kind = PredKind::Scalar;
  bool color_indexed = false;
};

// Declares the observable surface of an environment: named state predicates
// and the ordered primitive action set (order fixes mask bit positions).
struct EnvSchema {
  std::string name;
  std::vector<PredicateDecl> predicates;
  std::vector<std::string> actions;
  int grid_size = 0;

  int predicate_index(std::string_view n) const;
  int action_index(std::string_view n) const;
  const PredicateDecl& predicate(int i) const { return predicates.at(i); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  void validate() const;
  std::uint64_t fingerprint() const;
};

// Fixed-width bitset over a schema's action list.
class ActionMask {
 public:
  ActionMask() = default;
  ActionMask(std::uint32_t bits, int n) : bits_(bits), n_(n) {}

  static ActionMask none(const EnvSchema& s) { return ActionMask(0, s.num_actions()); }
  static ActionMask full(const EnvSchema& s) {
    int n = s.num_actions();
    return ActionMask(n >= 32 ? ~std::uint32_t(0) : ((std::uint32_t(1) << n) - 1), n);
  }
  static ActionMask from_names(const EnvSchema& s, const std::vector<std::string>& names);

  bool test(int a) const { return a >= 0 && a < n_ && (bits_ >> a) & 1u; }
  void set(int a) {
    if (a < 0 || a >= n_) throw std::out_of_range("action index out of range");
    bits_ |= std::uint32_t(1) << a;
  }
  int count() const;
  int size() const { return n_; }
  bool empty() const { return bits_ == 0; }
  std::uint32_t bits() const { return bits_; }
  bool operator==(const ActionMask&) const = default;

  std::string to_bitstring() const;  // e.g. "1110010", index 0 first
  std::vector<std::string> names(const EnvSchema& s) const;
  std::vector<int> indices() const;

 private:
  std::uint32_t bits_ = 0;
  int n_ = 0;
};

}  // namespace mrbt
