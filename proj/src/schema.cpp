#include "mrbt/schema.hpp"

#include <set>

namespace mrbt {

int color_index(std::string_view name) {
  for (int i = 0; i < kNumColors; ++i) {
    if (kColorNames[i] == name) return i;
  }
  return -1;
}

std::string color_name(int index) {
  if (index < 0 || index >= kNumColors) throw std::out_of_range("bad color index");
  return std::string(kColorNames[index]);
}

int EnvSchema::predicate_index(std::string_view n) const {
  for (size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int EnvSchema::action_index(std::string_view n) const {
  for (size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == n) return static_cast<int>(i);
  }
  return -1;
}

void EnvSchema::validate() const {
  if (actions.empty()) throw std::invalid_argument("schema has no actions");
  if (actions.size() > 32) throw std::invalid_argument("schema has too many actions");
  std::set<std::string> seen;
  for (const auto& a : actions) {
    if (!seen.insert(a).second) throw std::invalid_argument("duplicate action name: " + a);
  }
  seen.clear();
  for (const auto& p : predicates) {
    if (!seen.insert(p.name).second)
      throw std::invalid_argument("duplicate predicate name: " + p.name);
  }
}

std::uint64_t EnvSchema::fingerprint() const {
  std::uint64_t h = hash_str(0x5c4eea, name);
  for (const auto& p : predicates) {
    h = hash_str(h, p.name);
    h = hash_mix(h, static_cast<int>(p.kind));
    h = hash_mix(h, p.color_indexed ? 1 : 0);
  }
  for (const auto& a : actions) h = hash_str(h, a);
  return hash_mix(h, grid_size);
}

ActionMask ActionMask::from_names(const EnvSchema& s, const std::vector<std::string>& names) {
  ActionMask m = ActionMask::none(s);
  for (const auto& n : names) {
    int idx = s.action_index(n);
    if (idx < 0) throw std::invalid_argument("unknown action in mask: " + n);
    m.set(idx);
  }
  return m;
}

int ActionMask::count() const {
  int c = 0;
  for (int i = 0; i < n_; ++i) {
    if (test(i)) ++c;
  }
  return c;
}

std::string ActionMask::to_bitstring() const {
  std::string out;
  out.reserve(n_);
  for (int i = 0; i < n_; ++i) out.push_back(test(i) ? '1' : '0');
  return out;
}

std::vector<std::string> ActionMask::names(const EnvSchema& s) const {
  std::vector<std::string> out;
  for (int i = 0; i < n_ && i < s.num_actions(); ++i) {
    if (test(i)) out.push_back(s.actions[i]);
  }
  return out;
}

std::vector<int> ActionMask::indices() const {
  std::vector<int> out;
  for (int i = 0; i < n_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

}  // namespace mrbt
