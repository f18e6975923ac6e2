#include "mrbt/trace.hpp"

#include <ostream>
#include <sstream>

namespace mrbt {

void annotate_labels(Trace& trace, const std::vector<SubtaskSpec>& subtasks,
                     const EnvSchema& schema) {
  trace.labels.clear();
  trace.labels.reserve(trace.states.size());
  for (const EnvState& s : trace.states) {
    GridView view(s, schema);
    trace.labels.push_back(label(subtasks, view, trace.task.bindings).ids());
  }
}

namespace {

std::vector<int> relevant_colors(const EnvState& s) {
  std::vector<int> out;
  auto add = [&](int c) {
    for (int x : out) {
      if (x == c) return;
    }
    out.push_back(c);
  };
  for (const auto& d : s.layout->doors) add(d.color);
  for (const auto& k : s.keys) add(k.color);
  for (const auto& b : s.layout->boxes) add(b.color);
  return out;
}

void print_value(std::ostream& os, const Value& v) {
  if (v.kind == Value::Kind::Coord) {
    if (v.c == kNowhere) {
      os << "-1";
    } else {
      os << '(' << v.c.x << ',' << v.c.y << ')';
    }
  } else {
    os << v.i;
  }
}

}  // namespace

std::string trace_to_text(const Trace& trace, const EnvSchema& schema,
                          const std::vector<SubtaskSpec>& subtasks) {
  std::ostringstream os;
  os << "mission: " << trace.task.mission << "\n";
  for (const auto& [k, v] : trace.task.bindings) {
    os << "binding: " << k << " = " << color_name(v) << "\n";
  }
  for (size_t t = 0; t < trace.states.size(); ++t) {
    const EnvState& s = trace.states[t];
    GridView view(s, schema);
    os << "step " << t << ":";
    std::vector<int> colors = relevant_colors(s);
    for (size_t p = 0; p < schema.predicates.size(); ++p) {
      const PredicateDecl& d = schema.predicates[p];
      if (d.color_indexed) {
        for (int c : colors) {
          os << ' ' << d.name << '[' << color_name(c) << "]=";
          print_value(os, view.predicate(static_cast<int>(p), c));
        }
      } else {
        os << ' ' << d.name << '=';
        print_value(os, view.predicate(static_cast<int>(p), -1));
      }
    }
    os << "\n  labels:";
    if (t < trace.labels.size()) {
      bool any = false;
      for (int id : trace.labels[t]) {
        int st = id / 2;
        const char* which = (id % 2 == 0) ? "psi" : "phi";
        std::string nm = st < static_cast<int>(subtasks.size()) ? subtasks[st].name
                                                                : std::to_string(st);
        os << ' ' << which << '(' << nm << ')';
        any = true;
      }
      if (!any) os << " none";
    }
    os << "\n";
    if (t < trace.actions.size()) {
      os << "  action: " << grid_action_name(trace.actions[t]) << "\n";
    }
  }
  return os.str();
}

bool replay_matches(const Trace& trace) {
  if (trace.states.empty()) return false;
  if (trace.actions.size() + 1 != trace.states.size()) return false;
  DynamicsConfig dyn;
  EnvState s = trace.states.front();
  for (size_t t = 0; t < trace.actions.size(); ++t) {
    s = step_env(s, trace.actions[t], dyn);
    if (!(s == trace.states[t + 1])) return false;
  }
  return true;
}

void write_debug_trace_csv(std::ostream& os, const std::vector<DebugTickRow>& rows) {
  os << "t,ticked,reward,mask,root_status\n";
  for (const auto& r : rows) {
    os << r.t << ",\"";
    for (size_t i = 0; i < r.ticked.size(); ++i) {
      if (i) os << ' ';
      os << r.ticked[i];
    }
    os << "\"," << r.reward << ',' << r.mask_bits << ',' << status_name(r.root_status) << "\n";
  }
}

void write_episode_csv(std::ostream& os, const std::vector<EpisodeRow>& rows) {
  os << "t,action,reward,mask,done\n";
  for (const auto& r : rows) {
    os << r.t << ',' << (r.action >= 0 ? grid_action_name(r.action) : std::string("-")) << ','
       << r.reward << ',' << r.mask_bits << ',' << (r.done ? 1 : 0) << "\n";
  }
}

}  // namespace mrbt
