#include "mrbt/spec_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mrbt/util.hpp"

namespace mrbt {

std::vector<SubtaskSpec> MrbtSpecFile::parse_subtasks(
    const EnvSchema& schema, const std::set<std::string>& task_vars) const {
  if (subtasks.empty()) throw std::invalid_argument("spec file lists no subtasks");
  std::vector<SubtaskSpec> out;
  std::uint64_t fp = schema.fingerprint();
  for (const Entry& e : subtasks) {
    SubtaskSpec st;
    st.name = e.name;
    st.schema_fp = fp;
    try {
      st.psi = parse_formula(e.psi_text, schema, task_vars);
    } catch (const ParseError& pe) {
      throw ParseError("subtask '" + e.name + "' completion formula: " + pe.what(), pe.line,
                       pe.col);
    }
    try {
      st.phi = parse_formula(e.phi_text, schema, task_vars);
    } catch (const ParseError& pe) {
      throw ParseError("subtask '" + e.name + "' progress formula: " + pe.what(), pe.line,
                       pe.col);
    }
    st.nav_mask = ActionMask::from_names(schema, e.mask_nav);
    st.interact_mask = ActionMask::from_names(schema, e.mask_interact);
    out.push_back(std::move(st));
  }
  return out;
}

std::string MrbtSpecFile::to_text() const {
  std::ostringstream os;
  os << "space: " << space_name << "\n";
  if (!generator_id.empty()) os << "generator: " << generator_id << "\n";
  if (iterations > 0) os << "iterations: " << iterations << "\n";
  os << "verified: " << (verified ? "true" : "false") << "\n";
  os << "rewards: " << rewards.condition_reward << ' ' << rewards.condition_penalty << ' '
     << rewards.navigation_reward << ' ' << rewards.navigation_penalty << ' '
     << rewards.task_bonus << "\n";
  for (const Entry& e : subtasks) {
    os << "\nsubtask: " << e.name << "\n";
    os << "psi: " << e.psi_text << "\n";
    os << "phi: " << e.phi_text << "\n";
    os << "mask_nav:";
    for (const auto& a : e.mask_nav) os << ' ' << a;
    os << "\nmask_interact:";
    for (const auto& a : e.mask_interact) os << ' ' << a;
    os << "\n";
  }
  return os.str();
}

MrbtSpecFile MrbtSpecFile::from_text(const std::string& text) {
  MrbtSpecFile f;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Entry* cur = nullptr;
  auto need_entry = [&](const std::string& what) -> Entry& {
    if (!cur)
      throw std::runtime_error("line " + std::to_string(lineno) + ": '" + what +
                               "' before any 'subtask:' line");
    return *cur;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 'key: value'");
    std::string key = trim(s.substr(0, colon));
    std::string val = trim(s.substr(colon + 1));
    if (key == "space") {
      f.space_name = val;
    } else if (key == "generator") {
      f.generator_id = val;
    } else if (key == "iterations") {
      f.iterations = std::stoi(val);
    } else if (key == "verified") {
      f.verified = (val == "true" || val == "1");
    } else if (key == "rewards") {
      auto parts = split_ws(val);
      if (parts.size() != 5)
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": rewards needs 5 numbers");
      f.rewards.condition_reward = std::stod(parts[0]);
      f.rewards.condition_penalty = std::stod(parts[1]);
      f.rewards.navigation_reward = std::stod(parts[2]);
      f.rewards.navigation_penalty = std::stod(parts[3]);
      f.rewards.task_bonus = std::stod(parts[4]);
    } else if (key == "subtask") {
      f.subtasks.push_back(Entry{val, "", "", {}, {}});
      cur = &f.subtasks.back();
    } else if (key == "psi") {
      need_entry(key).psi_text = val;
    } else if (key == "phi") {
      need_entry(key).phi_text = val;
    } else if (key == "mask_nav") {
      need_entry(key).mask_nav = split_ws(val);
    } else if (key == "mask_interact") {
      need_entry(key).mask_interact = split_ws(val);
    } else {
      throw std::runtime_error("line " + std::to_string(lineno) + ": unknown key '" + key +
                               "'");
    }
  }
  if (f.space_name.empty()) throw std::runtime_error("spec file missing 'space:' line");
  return f;
}

void MrbtSpecFile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spec file: " + path);
  out << to_text();
}

MrbtSpecFile MrbtSpecFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

}  // namespace mrbt
