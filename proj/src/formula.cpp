#include "mrbt/formula.hpp"

#include <cctype>
#include <sstream>

namespace mrbt {

namespace {

enum class Tok {
  End,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Arrow,
  Or,
  And,
  Not,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Int,
  Ident,
};

struct Token {
  Tok kind = Tok::End;
  int value = 0;
  std::string text;
  int line = 1;
  int col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) advance(1);
      Token t;
      t.line = line;
      t.col = col;
      if (pos >= src.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src[pos];
      auto two = [&](char a, char b) {
        return c == a && pos + 1 < src.size() && src[pos + 1] == b;
      };
      if (two('-', '>')) {
        t.kind = Tok::Arrow;
        advance(2);
      } else if (two('|', '|')) {
        t.kind = Tok::Or;
        advance(2);
      } else if (two('&', '&')) {
        t.kind = Tok::And;
        advance(2);
      } else if (two('=', '=')) {
        t.kind = Tok::Eq;
        advance(2);
      } else if (two('!', '=')) {
        t.kind = Tok::Ne;
        advance(2);
      } else if (two('<', '=')) {
        t.kind = Tok::Le;
        advance(2);
      } else if (two('>', '=')) {
        t.kind = Tok::Ge;
        advance(2);
      } else if (c == '<') {
        t.kind = Tok::Lt;
        advance(1);
      } else if (c == '>') {
        t.kind = Tok::Gt;
        advance(1);
      } else if (c == '!') {
        t.kind = Tok::Not;
        advance(1);
      } else if (c == '(') {
        t.kind = Tok::LParen;
        advance(1);
      } else if (c == ')') {
        t.kind = Tok::RParen;
        advance(1);
      } else if (c == '[') {
        t.kind = Tok::LBracket;
        advance(1);
      } else if (c == ']') {
        t.kind = Tok::RBracket;
        advance(1);
      } else if (c == ',') {
        t.kind = Tok::Comma;
        advance(1);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos + 1 < src.size() &&
                  std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
        size_t start = pos;
        if (c == '-') advance(1);
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) advance(1);
        t.kind = Tok::Int;
        t.text = src.substr(start, pos - start);
        t.value = std::stoi(t.text);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
          advance(1);
        }
        t.kind = Tok::Ident;
        t.text = src.substr(start, pos - start);
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      out.push_back(t);
    }
  }
};

enum class OpType { Int, Coord };

struct Parser {
  const EnvSchema& schema;
  const std::set<std::string>& task_vars;
  std::vector<Token> toks;
  size_t i = 0;
  std::vector<FormulaNode> nodes;

  const Token& cur() const { return toks[i]; }
  const Token& peek(size_t k) const { return toks[std::min(i + k, toks.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col);
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
    throw ParseError(msg, t.line, t.col);
  }

  void expect(Tok k, const std::string& what) {
    if (cur().kind != k) fail("expected " + what);
    ++i;
  }

  int add(FormulaNode n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size() - 1);
  }

  bool coord_literal_ahead() const {
    // '(' INT ',' distinguishes a coordinate literal from a grouped formula
    return cur().kind == Tok::LParen && peek(1).kind == Tok::Int && peek(2).kind == Tok::Comma;
  }

  // --- operands -------------------------------------------------------

  std::pair<int, OpType> parse_operand() {
    const Token& t = cur();
    if (t.kind == Tok::Int) {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::IntConst;
      n.value = t.value;
      return {add(n), OpType::Int};
    }
    if (coord_literal_ahead()) {
      ++i;  // (
      int x = cur().value;
      expect(Tok::Int, "integer");
      expect(Tok::Comma, "','");
      int y = cur().value;
      expect(Tok::Int, "integer");
      expect(Tok::RParen, "')'");
      FormulaNode n;
      n.kind = NodeKind::CoordConst;
      n.coord = Coord{x, y};
      return {add(n), OpType::Coord};
    }
    if (t.kind != Tok::Ident) fail("expected operand");

    if (t.text == "manhattan") {
      ++i;
      expect(Tok::LParen, "'('");
      auto [a, ta] = parse_operand();
      if (ta != OpType::Coord) fail_at(t, "manhattan expects coordinate arguments");
      expect(Tok::Comma, "','");
      auto [b, tb] = parse_operand();
      if (tb != OpType::Coord) fail_at(t, "manhattan expects coordinate arguments");
      expect(Tok::RParen, "')'");
      FormulaNode n;
      n.kind = NodeKind::Manhattan;
      n.lhs = a;
      n.rhs = b;
      return {add(n), OpType::Int};
    }

    if (t.text == "OPEN" || t.text == "CLOSED" || t.text == "LOCKED") {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::IntConst;
      n.tag = IntTag::Door;
      n.value = t.text == "OPEN" ? kDoorOpen : (t.text == "CLOSED" ? kDoorClosed : kDoorLocked);
      return {add(n), OpType::Int};
    }

    int ci = color_index(t.text);
    if (ci >= 0) {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::IntConst;
      n.tag = IntTag::Color;
      n.value = ci;
      return {add(n), OpType::Int};
    }

    int pi = schema.predicate_index(t.text);
    if (pi >= 0) {
      ++i;
      const PredicateDecl& decl = schema.predicate(pi);
      FormulaNode n;
      n.kind = NodeKind::PredRef;
      n.pred = pi;
      n.name = t.text;
      if (cur().kind == Tok::LBracket) {
        if (!decl.color_indexed)
          fail_at(t, "predicate '" + t.text + "' does not take a color index");
        ++i;
        const Token& idx = cur();
        if (idx.kind != Tok::Ident) fail("expected color name or task variable");
        int c = color_index(idx.text);
        if (c >= 0) {
          n.index_color = c;
        } else if (task_vars.count(idx.text)) {
          n.index_var = idx.text;
        } else {
          fail("unknown color or task variable '" + idx.text + "'");
        }
        ++i;
        expect(Tok::RBracket, "']'");
      } else if (decl.color_indexed) {
        fail_at(t, "predicate '" + t.text + "' requires a color index");
      }
      return {add(n), decl.kind == PredKind::Coord2 ? OpType::Coord : OpType::Int};
    }

    if (task_vars.count(t.text)) {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::TaskVarRef;
      n.name = t.text;
      return {add(n), OpType::Int};
    }

    fail_at(t, "unknown identifier '" + t.text + "'");
  }

  // --- boolean layer --------------------------------------------------

  static bool is_cmp(Tok k) {
    return k == Tok::Eq || k == Tok::Ne || k == Tok::Lt || k == Tok::Le || k == Tok::Gt ||
           k == Tok::Ge;
  }

  int parse_comparison() {
    const Token& at = cur();
    auto [lhs, tl] = parse_operand();
    if (!is_cmp(cur().kind)) fail("expected comparison operator");
    Tok op = cur().kind;
    const Token& op_tok = cur();
    ++i;
    auto [rhs, tr] = parse_operand();

    CmpOp c = CmpOp::Eq;
    switch (op) {
      case Tok::Eq: c = CmpOp::Eq; break;
      case Tok::Ne: c = CmpOp::Ne; break;
      case Tok::Lt: c = CmpOp::Lt; break;
      case Tok::Le: c = CmpOp::Le; break;
      case Tok::Gt: c = CmpOp::Gt; break;
      case Tok::Ge: c = CmpOp::Ge; break;
      default: break;
    }

    bool eq_like = (c == CmpOp::Eq || c == CmpOp::Ne);
    if (tl == OpType::Coord && tr == OpType::Coord) {
      if (!eq_like)
        fail_at(op_tok, "ordering comparison is not defined for coordinates");
    } else if (tl != tr) {
      // coordinate vs integer: only the absence test `== -1` / `!= -1`
      int const_side = (tl == OpType::Int) ? lhs : rhs;
      const FormulaNode& cn = nodes[const_side];
      bool sentinel = cn.kind == NodeKind::IntConst && cn.value == -1 && cn.tag == IntTag::Plain;
      if (!sentinel || !eq_like)
        fail_at(op_tok, "cannot compare coordinate with integer (only '== -1' is allowed)");
    }

    (void)at;
    FormulaNode n;
    n.kind = NodeKind::Cmp;
    n.cmp = c;
    n.lhs = lhs;
    n.rhs = rhs;
    return add(n);
  }

  int parse_atom() {
    const Token& t = cur();
    if (t.kind == Tok::Ident && t.text == "true") {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::True;
      return add(n);
    }
    if (t.kind == Tok::Ident && t.text == "false") {
      ++i;
      FormulaNode n;
      n.kind = NodeKind::False;
      return add(n);
    }
    if (t.kind == Tok::LParen && !coord_literal_ahead()) {
      ++i;
      int f = parse_implies();
      expect(Tok::RParen, "')'");
      return f;
    }
    return parse_comparison();
  }

  int parse_unary() {
    if (cur().kind == Tok::Not) {
      ++i;
      int c = parse_unary();
      FormulaNode n;
      n.kind = NodeKind::Not;
      n.lhs = c;
      return add(n);
    }
    return parse_atom();
  }

  int parse_and() {
    int lhs = parse_unary();
    while (cur().kind == Tok::And) {
      ++i;
      int rhs = parse_unary();
      FormulaNode n;
      n.kind = NodeKind::And;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
    return lhs;
  }

  int parse_or() {
    int lhs = parse_and();
    while (cur().kind == Tok::Or) {
      ++i;
      int rhs = parse_and();
      FormulaNode n;
      n.kind = NodeKind::Or;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
    return lhs;
  }

  int parse_implies() {
    int lhs = parse_or();
    if (cur().kind == Tok::Arrow) {
      ++i;
      int rhs = parse_implies();
      FormulaNode n;
      n.kind = NodeKind::Implies;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
    return lhs;
  }
};

// precedence: -> 1, || 2, && 3, ! 4, atoms 5
int prec_of(NodeKind k) {
  switch (k) {
    case NodeKind::Implies: return 1;
    case NodeKind::Or: return 2;
    case NodeKind::And: return 3;
    case NodeKind::Not: return 4;
    default: return 5;
  }
}

void print_operand(const Formula& f, int id, std::ostream& os) {
  const FormulaNode& n = f.node(id);
  switch (n.kind) {
    case NodeKind::IntConst:
      switch (n.tag) {
        case IntTag::Door:
          os << (n.value == kDoorOpen ? "OPEN" : (n.value == kDoorClosed ? "CLOSED" : "LOCKED"));
          break;
        case IntTag::Color:
          os << color_name(n.value);
          break;
        default:
          os << n.value;
          break;
      }
      break;
    case NodeKind::CoordConst:
      os << '(' << n.coord.x << ", " << n.coord.y << ')';
      break;
    case NodeKind::TaskVarRef:
      os << n.name;
      break;
    case NodeKind::PredRef:
      os << n.name;
      if (n.index_color >= 0) {
        os << '[' << color_name(n.index_color) << ']';
      } else if (!n.index_var.empty()) {
        os << '[' << n.index_var << ']';
      }
      break;
    case NodeKind::Manhattan:
      os << "manhattan(";
      print_operand(f, n.lhs, os);
      os << ", ";
      print_operand(f, n.rhs, os);
      os << ')';
      break;
    default:
      throw std::logic_error("print_operand: not an operand node");
  }
}

const char* cmp_text(CmpOp c) {
  switch (c) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "==";
}

void print_node(const Formula& f, int id, int ctx_prec, std::ostream& os) {
  const FormulaNode& n = f.node(id);
  int p = prec_of(n.kind);
  bool parens = p < ctx_prec;
  if (parens) os << '(';
  switch (n.kind) {
    case NodeKind::True: os << "true"; break;
    case NodeKind::False: os << "false"; break;
    case NodeKind::Implies:
      print_node(f, n.lhs, 2, os);
      os << " -> ";
      print_node(f, n.rhs, 1, os);
      break;
    case NodeKind::Or:
      print_node(f, n.lhs, 2, os);
      os << " || ";
      print_node(f, n.rhs, 3, os);
      break;
    case NodeKind::And:
      print_node(f, n.lhs, 3, os);
      os << " && ";
      print_node(f, n.rhs, 4, os);
      break;
    case NodeKind::Not:
      os << '!';
      print_node(f, n.lhs, 5, os);
      break;
    case NodeKind::Cmp:
      print_operand(f, n.lhs, os);
      os << ' ' << cmp_text(n.cmp) << ' ';
      print_operand(f, n.rhs, os);
      break;
    default:
      throw std::logic_error("print_node: operand node at boolean position");
  }
  if (parens) os << ')';
}

bool nodes_equal(const Formula& a, int ia, const Formula& b, int ib) {
  const FormulaNode& x = a.node(ia);
  const FormulaNode& y = b.node(ib);
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case NodeKind::True:
    case NodeKind::False:
      return true;
    case NodeKind::Not:
      return nodes_equal(a, x.lhs, b, y.lhs);
    case NodeKind::And:
    case NodeKind::Or:
    case NodeKind::Implies:
    case NodeKind::Manhattan:
      return nodes_equal(a, x.lhs, b, y.lhs) && nodes_equal(a, x.rhs, b, y.rhs);
    case NodeKind::Cmp:
      return x.cmp == y.cmp && nodes_equal(a, x.lhs, b, y.lhs) && nodes_equal(a, x.rhs, b, y.rhs);
    case NodeKind::IntConst:
      return x.value == y.value && x.tag == y.tag;
    case NodeKind::CoordConst:
      return x.coord == y.coord;
    case NodeKind::PredRef:
      return x.pred == y.pred && x.index_color == y.index_color && x.index_var == y.index_var;
    case NodeKind::TaskVarRef:
      return x.name == y.name;
  }
  return false;
}

Value eval_operand(const Formula& f, int id, const PredicateView& s, const TaskBindings& m) {
  const FormulaNode& n = f.node(id);
  switch (n.kind) {
    case NodeKind::IntConst:
      return Value::of_int(n.value);
    case NodeKind::CoordConst:
      return Value::of_coord(n.coord);
    case NodeKind::TaskVarRef: {
      auto it = m.find(n.name);
      if (it == m.end()) throw std::runtime_error("unbound task variable: " + n.name);
      return Value::of_int(it->second);
    }
    case NodeKind::PredRef: {
      int color = n.index_color;
      if (!n.index_var.empty()) {
        auto it = m.find(n.index_var);
        if (it == m.end()) throw std::runtime_error("unbound task variable: " + n.index_var);
        color = it->second;
      }
      return s.predicate(n.pred, color);
    }
    case NodeKind::Manhattan: {
      Value a = eval_operand(f, n.lhs, s, m);
      Value b = eval_operand(f, n.rhs, s, m);
      return Value::of_int(manhattan(a.c, b.c));
    }
    default:
      throw std::logic_error("eval_operand: not an operand node");
  }
}

bool eval_cmp(CmpOp op, const Value& a, const Value& b) {
  if (a.kind == Value::Kind::Coord && b.kind == Value::Kind::Coord) {
    bool eq = a.c == b.c;
    return op == CmpOp::Eq ? eq : !eq;
  }
  if (a.kind != b.kind) {
    // absence test against -1
    const Value& cv = a.kind == Value::Kind::Coord ? a : b;
    bool absent = cv.is_absent_coord();
    return op == CmpOp::Eq ? absent : !absent;
  }
  switch (op) {
    case CmpOp::Eq: return a.i == b.i;
    case CmpOp::Ne: return a.i != b.i;
    case CmpOp::Lt: return a.i < b.i;
    case CmpOp::Le: return a.i <= b.i;
    case CmpOp::Gt: return a.i > b.i;
    case CmpOp::Ge: return a.i >= b.i;
  }
  return false;
}

bool eval_node(const Formula& f, int id, const PredicateView& s, const TaskBindings& m) {
  const FormulaNode& n = f.node(id);
  switch (n.kind) {
    case NodeKind::True: return true;
    case NodeKind::False: return false;
    case NodeKind::Not: return !eval_node(f, n.lhs, s, m);
    case NodeKind::And: return eval_node(f, n.lhs, s, m) && eval_node(f, n.rhs, s, m);
    case NodeKind::Or: return eval_node(f, n.lhs, s, m) || eval_node(f, n.rhs, s, m);
    case NodeKind::Implies: return !eval_node(f, n.lhs, s, m) || eval_node(f, n.rhs, s, m);
    case NodeKind::Cmp:
      return eval_cmp(n.cmp, eval_operand(f, n.lhs, s, m), eval_operand(f, n.rhs, s, m));
    default:
      throw std::logic_error("eval_node: operand node at boolean position");
  }
}

void collect_preds(const Formula& f, int id, const EnvSchema& schema, std::set<std::string>& out) {
  const FormulaNode& n = f.node(id);
  if (n.kind == NodeKind::PredRef) out.insert(schema.predicate(n.pred).name);
  if (n.lhs >= 0) collect_preds(f, n.lhs, schema, out);
  if (n.rhs >= 0) collect_preds(f, n.rhs, schema, out);
}

}  // namespace

std::string Formula::str() const {
  if (!valid()) return "<invalid>";
  std::ostringstream os;
  print_node(*this, root_, 0, os);
  return os.str();
}

bool Formula::equals(const Formula& other) const {
  if (!valid() || !other.valid()) return valid() == other.valid();
  return nodes_equal(*this, root_, other, other.root_);
}

std::set<std::string> Formula::referenced_predicates(const EnvSchema& schema) const {
  std::set<std::string> out;
  if (valid()) collect_preds(*this, root_, schema, out);
  return out;
}

Formula parse_formula(const std::string& text, const EnvSchema& schema,
                      const std::set<std::string>& task_vars) {
  Lexer lex(text);
  Parser p{schema, task_vars, lex.run()};
  int root = p.parse_implies();
  if (p.cur().kind != Tok::End) p.fail("unexpected trailing input");
  return Formula(std::move(p.nodes), root);
}

Formula formula_true() {
  FormulaNode n;
  n.kind = NodeKind::True;
  return Formula({n}, 0);
}

Formula formula_false() {
  FormulaNode n;
  n.kind = NodeKind::False;
  return Formula({n}, 0);
}

bool eval_formula(const Formula& f, const PredicateView& state, const TaskBindings& bindings) {
  if (!f.valid()) throw std::logic_error("eval of invalid formula");
  return eval_node(f, f.root(), state, bindings);
}

}  // namespace mrbt
