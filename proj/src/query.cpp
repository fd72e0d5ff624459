#include "trajsynth/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "trajsynth/dataset_io.hpp"
#include "trajsynth/predicates.hpp"

namespace trajsynth {

namespace {

Query make(Node n) { return std::make_shared<const Node>(std::move(n)); }

Query binary(Kind k, Query l, Query r) {
  if (!l || !r) throw QueryError("binary operator needs two operands");
  Node n;
  n.kind = k;
  n.left = std::move(l);
  n.right = std::move(r);
  return make(std::move(n));
}

Query unary(Kind k, Query c) {
  if (!c) throw QueryError("unary operator needs an operand");
  Node n;
  n.kind = k;
  n.left = std::move(c);
  return make(std::move(n));
}

bool is_binary(Kind k) { return k == Kind::Seq || k == Kind::And || k == Kind::Or; }

// Rebuilds q bottom-up, applying f to each leaf.
Query map_leaves(const Query& q, const std::function<Query(const Query&)>& f) {
  if (q->kind == Kind::Pred || q->kind == Kind::PredHole) return f(q);
  Node n = *q;
  n.left = map_leaves(q->left, f);
  if (q->right) n.right = map_leaves(q->right, f);
  if (n.left == q->left && n.right == q->right) return q;
  return make(std::move(n));
}

// Like map_leaves, also passing the parity of enclosing Neg nodes.
Query map_leaves_parity(const Query& q, const std::function<Query(const Query&, bool)>& f, bool odd = false) {
  if (q->kind == Kind::Pred || q->kind == Kind::PredHole) return f(q, odd);
  const bool inner = q->kind == Kind::Neg ? !odd : odd;
  Node n = *q;
  n.left = map_leaves_parity(q->left, f, inner);
  if (q->right) n.right = map_leaves_parity(q->right, f, inner);
  if (n.left == q->left && n.right == q->right) return q;
  return make(std::move(n));
}

void visit_leaves(const Query& q, const std::function<void(const Node&)>& f) {
  if (q->kind == Kind::Pred || q->kind == Kind::PredHole) {
    f(*q);
    return;
  }
  visit_leaves(q->left, f);
  if (q->right) visit_leaves(q->right, f);
}

}  // namespace

Query pred(std::string name, std::vector<char> vars) {
  Node n;
  n.name = std::move(name);
  n.vars = std::move(vars);
  return make(std::move(n));
}

Query pred_fixed(std::string name, double theta, std::vector<char> vars) {
  Node n;
  n.name = std::move(name);
  n.vars = std::move(vars);
  n.param = ParamKind::Fixed;
  n.theta = theta;
  return make(std::move(n));
}

Query pred_hole(std::string name, int hole, std::vector<char> vars) {
  Node n;
  n.name = std::move(name);
  n.vars = std::move(vars);
  n.param = ParamKind::Hole;
  n.hole = hole;
  return make(std::move(n));
}

Query pred_hole_node(int hole) {
  Node n;
  n.kind = Kind::PredHole;
  n.hole = hole;
  return make(std::move(n));
}

Query seq(Query l, Query r) { return binary(Kind::Seq, std::move(l), std::move(r)); }
Query conj(Query l, Query r) { return binary(Kind::And, std::move(l), std::move(r)); }
Query disj(Query l, Query r) { return binary(Kind::Or, std::move(l), std::move(r)); }
Query star(Query q) { return unary(Kind::Star, std::move(q)); }
Query neg(Query q) { return unary(Kind::Neg, std::move(q)); }

Query iterate(Query q, int k) {
  if (k < 1) throw QueryError("iteration count must be >= 1");
  Node n;
  n.kind = Kind::Iterate;
  n.left = std::move(q);
  n.k = k;
  return make(std::move(n));
}

Query dashv(Query q, int a, int b) {
  if (a < 0 || a > b) throw QueryError("window needs 0 <= a <= b");
  Node n;
  n.kind = Kind::Dashv;
  n.left = std::move(q);
  n.a = a;
  n.b = b;
  return make(std::move(n));
}

Query seq_all(const std::vector<Query>& parts) {
  if (parts.empty()) throw QueryError("empty sequence");
  Query q = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) q = seq(q, parts[i]);
  return q;
}

Holes holes(const Query& q) {
  Holes h;
  std::set<int> seen;
  visit_leaves(q, [&](const Node& n) {
    if (n.kind == Kind::PredHole) {
      if (seen.insert(n.hole).second) h.predicate.push_back(n.hole);
    } else if (n.param == ParamKind::Hole) {
      if (seen.insert(n.hole).second) h.parameter.push_back(n.hole);
    }
  });
  return h;
}

std::vector<int> hole_order(const Query& q) { return holes(q).parameter; }
bool is_sketch(const Query& q) { return holes(q).predicate.empty(); }

bool is_complete(const Query& q) {
  auto h = holes(q);
  return h.predicate.empty() && h.parameter.empty();
}

int max_hole_id(const Query& q) {
  int m = 0;
  visit_leaves(q, [&](const Node& n) {
    if (n.kind == Kind::PredHole || n.param == ParamKind::Hole) m = std::max(m, n.hole);
  });
  return m;
}

Query fill(const Query& q, int h, const Query& production) {
  bool found = false, kind_ok = true;
  // Fresh ids for holes inside the production.
  int next = max_hole_id(q);
  std::map<int, int> fresh;
  Query prod = map_leaves(production, [&](const Query& leaf) {
    if (leaf->kind != Kind::PredHole && leaf->param != ParamKind::Hole) return leaf;
    auto it = fresh.find(leaf->hole);
    if (it == fresh.end()) it = fresh.emplace(leaf->hole, ++next).first;
    Node n = *leaf;
    n.hole = it->second;
    return make(std::move(n));
  });
  Query out = map_leaves(q, [&](const Query& leaf) {
    if (leaf->kind == Kind::PredHole && leaf->hole == h) {
      found = true;
      return prod;
    }
    if (leaf->kind == Kind::Pred && leaf->param == ParamKind::Hole && leaf->hole == h) {
      found = true;
      kind_ok = false;
    }
    return leaf;
  });
  if (!kind_ok) throw QueryError("hole ??" + std::to_string(h) + " is a parameter hole");
  if (!found) throw QueryError("hole ??" + std::to_string(h) + " not found");
  return out;
}

Query fill(const Query& q, int h, double value) {
  bool found = false, kind_ok = true;
  Query out = map_leaves(q, [&](const Query& leaf) {
    if (leaf->kind == Kind::Pred && leaf->param == ParamKind::Hole && leaf->hole == h) {
      found = true;
      Node n = *leaf;
      n.param = ParamKind::Fixed;
      n.theta = value;
      n.hole = 0;
      return make(std::move(n));
    }
    if (leaf->kind == Kind::PredHole && leaf->hole == h) {
      found = true;
      kind_ok = false;
    }
    return leaf;
  });
  if (!kind_ok) throw QueryError("hole ??" + std::to_string(h) + " is a predicate hole");
  if (!found) throw QueryError("hole ??" + std::to_string(h) + " not found");
  return out;
}

Query substitute(const Query& sketch, const std::vector<double>& theta) {
  auto h = holes(sketch);
  if (!h.predicate.empty()) throw QueryError("substitute needs a sketch");
  if (h.parameter.size() != theta.size())
    throw QueryError("parameter vector has " + std::to_string(theta.size()) + " entries, sketch has " +
                     std::to_string(h.parameter.size()) + " holes");
  std::map<int, double> val;
  for (std::size_t i = 0; i < theta.size(); ++i) val[h.parameter[i]] = theta[i];
  return map_leaves_parity(sketch, [&](const Query& leaf, bool odd) {
    if (leaf->kind != Kind::Pred || leaf->param != ParamKind::Hole) return leaf;
    Node n = *leaf;
    n.param = ParamKind::Fixed;
    n.theta = odd ? -val.at(leaf->hole) : val.at(leaf->hole);
    n.hole = 0;
    return make(std::move(n));
  });
}

Query desugar(const Query& q) {
  if (q->kind == Kind::Pred || q->kind == Kind::PredHole) return q;
  if (q->kind == Kind::Iterate) {
    Query body = desugar(q->left);
    return seq_all(std::vector<Query>(static_cast<std::size_t>(q->k), body));
  }
  Node n = *q;
  n.left = desugar(q->left);
  if (q->right) n.right = desugar(q->right);
  return make(std::move(n));
}

Query renumber_holes(const Query& q) {
  std::map<int, int> ids;
  int next = 0;
  return map_leaves(q, [&](const Query& leaf) {
    if (leaf->kind != Kind::PredHole && leaf->param != ParamKind::Hole) return leaf;
    auto it = ids.find(leaf->hole);
    if (it == ids.end()) it = ids.emplace(leaf->hole, ++next).first;
    Node n = *leaf;
    n.hole = it->second;
    return make(std::move(n));
  });
}

namespace {

bool same_rec(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Pred:
      if (a.name != b.name || a.vars != b.vars || a.param != b.param) return false;
      if (a.param == ParamKind::Fixed && !(a.theta == b.theta)) return false;
      if (a.param == ParamKind::Hole && a.hole != b.hole) return false;
      return true;
    case Kind::PredHole:
      return a.hole == b.hole;
    case Kind::Iterate:
      if (a.k != b.k) return false;
      break;
    case Kind::Dashv:
      if (a.a != b.a || a.b != b.b) return false;
      break;
    default:
      break;
  }
  if (!same_rec(*a.left, *b.left)) return false;
  if (is_binary(a.kind)) return same_rec(*a.right, *b.right);
  return true;
}

}  // namespace

bool same_query(const Query& a, const Query& b) {
  return same_rec(*renumber_holes(a), *renumber_holes(b));
}

int predicate_count(const Query& q) {
  switch (q->kind) {
    case Kind::Pred:
    case Kind::PredHole:
      return 1;
    case Kind::Iterate:
      return q->k * predicate_count(q->left);
    default:
      return predicate_count(q->left) + (q->right ? predicate_count(q->right) : 0);
  }
}

int parameter_count(const Query& q) { return static_cast<int>(holes(q).parameter.size()); }

int node_count(const Query& q) {
  if (!q->left) return 1;
  return 1 + node_count(q->left) + (q->right ? node_count(q->right) : 0);
}

void validate(const Query& q, const Registry& reg) {
  switch (q->kind) {
    case Kind::Pred: {
      auto def = reg.get(q->name);
      if (static_cast<int>(q->vars.size()) != def->arity)
        throw QueryError(q->name + ": expects " + std::to_string(def->arity) + " variables");
      std::set<char> distinct(q->vars.begin(), q->vars.end());
      if (distinct.size() != q->vars.size()) throw QueryError(q->name + ": repeated variable");
      for (char c : q->vars)
        if (c < 'A' || c > 'Z') throw QueryError(q->name + ": variables are capital letters");
      if (def->parameterized && q->param == ParamKind::Unparameterized)
        throw QueryError(q->name + ": parameter missing");
      if (!def->parameterized && q->param != ParamKind::Unparameterized)
        throw QueryError(q->name + ": takes no parameter");
      return;
    }
    case Kind::PredHole:
      return;
    case Kind::Iterate:
      if (q->k < 1) throw QueryError("iteration count must be >= 1");
      break;
    case Kind::Dashv:
      if (q->a < 0 || q->a > q->b) throw QueryError("window needs 0 <= a <= b");
      break;
    default:
      break;
  }
  validate(q->left, reg);
  if (q->right) validate(q->right, reg);
}

// ---------------------------------------------------------------- printing

namespace {

int level(const Query& q) {
  switch (q->kind) {
    case Kind::Seq:
      return 0;
    case Kind::And:
    case Kind::Or:
      return 1;
    case Kind::Neg:
    case Kind::Star:
    case Kind::Iterate:
    case Kind::Dashv:
      return 2;
    default:
      return 3;
  }
}

std::string print_at(const Query& q, int min_level);

std::string raw(const Query& q) {
  switch (q->kind) {
    case Kind::Pred: {
      std::string s = q->name;
      if (q->param == ParamKind::Fixed) s += "[" + format_double(q->theta) + "]";
      if (q->param == ParamKind::Hole) s += "[?]";
      if (!q->vars.empty()) {
        s += "(";
        for (std::size_t i = 0; i < q->vars.size(); ++i) {
          if (i) s += ",";
          s += q->vars[i];
        }
        s += ")";
      }
      return s;
    }
    case Kind::PredHole:
      return "??";
    case Kind::Seq:
      return print_at(q->left, 0) + " ; " + print_at(q->right, 1);
    case Kind::And:
    case Kind::Or: {
      // Equal precedence; a mixed operand still gets parentheses for readability.
      const bool mixed = level(q->left) == 1 && q->left->kind != q->kind;
      return print_at(q->left, mixed ? 2 : 1) + (q->kind == Kind::And ? " & " : " | ") + print_at(q->right, 2);
    }
    case Kind::Neg:
      return "!" + print_at(q->left, 2);
    case Kind::Star:
      return print_at(q->left, 3) + "*";
    case Kind::Iterate:
      return print_at(q->left, 3) + "^" + std::to_string(q->k);
    case Kind::Dashv:
      return print_at(q->left, 3) + "^{⊣[" + std::to_string(q->a) + "," + std::to_string(q->b) + "]}";
  }
  return {};
}

std::string print_at(const Query& q, int min_level) {
  std::string s = raw(q);
  return level(q) < min_level ? "(" + s + ")" : s;
}

// ----------------------------------------------------------------- parsing

class Parser {
 public:
  explicit Parser(const std::string& t) : t_(t) {}

  Query parse() {
    Query q = query();
    skip();
    if (p_ != t_.size()) fail("unexpected input");
    return q;
  }

 private:
  const std::string& t_;
  std::size_t p_ = 0;
  int next_hole_ = 0;

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, p_); }

  void skip() {
    while (p_ < t_.size() && (t_[p_] == ' ' || t_[p_] == '\t' || t_[p_] == '\n' || t_[p_] == '\r')) ++p_;
  }

  bool eat(const std::string& s) {
    skip();
    if (t_.compare(p_, s.size(), s) == 0) {
      p_ += s.size();
      return true;
    }
    return false;
  }

  void expect(const std::string& s) {
    if (!eat(s)) fail("expected '" + s + "'");
  }

  int integer() {
    skip();
    int v = 0;
    auto res = std::from_chars(t_.data() + p_, t_.data() + t_.size(), v);
    if (res.ec != std::errc()) fail("expected integer");
    p_ = static_cast<std::size_t>(res.ptr - t_.data());
    return v;
  }

  double number() {
    skip();
    std::size_t start = p_;
    if (p_ < t_.size() && t_[p_] == '+') ++start, ++p_;
    std::size_t end = p_;
    while (end < t_.size() && (std::isdigit(static_cast<unsigned char>(t_[end])) || t_[end] == '.' ||
                               t_[end] == 'e' || t_[end] == 'E' || t_[end] == '-' || t_[end] == '+'))
      ++end;
    double v = 0;
    auto res = std::from_chars(t_.data() + start, t_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != t_.data() + end) fail("expected number");
    p_ = end;
    return v;
  }

  Query query() {
    Query q = term();
    while (eat(";")) q = seq(q, term());
    return q;
  }

  Query term() {
    Query q = factor();
    for (;;) {
      if (eat("&")) q = conj(q, factor());
      else if (eat("|")) q = disj(q, factor());
      else return q;
    }
  }

  Query factor() {
    if (eat("!")) return neg(factor());
    Query a = atom();
    skip();
    if (eat("*")) return star(a);
    if (eat("^")) {
      if (eat("{")) {
        if (!eat("⊣") && !eat("-|")) fail("expected window operator");
        expect("[");
        int lo = integer();
        expect(",");
        int hi = integer();
        expect("]");
        expect("}");
        if (lo < 0 || lo > hi) fail("window needs 0 <= a <= b");
        return dashv(a, lo, hi);
      }
      int k = integer();
      if (k < 1) fail("iteration count must be >= 1");
      return iterate(a, k);
    }
    return a;
  }

  Query atom() {
    skip();
    if (eat("??")) return pred_hole_node(++next_hole_);
    if (eat("(")) {
      Query q = query();
      expect(")");
      return q;
    }
    if (p_ >= t_.size() || !(std::isalpha(static_cast<unsigned char>(t_[p_])) || t_[p_] == '_'))
      fail("expected predicate name");
    std::size_t s = p_;
    while (p_ < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[p_])) || t_[p_] == '_')) ++p_;
    Node n;
    n.name = t_.substr(s, p_ - s);
    if (eat("[")) {
      if (eat("?")) {
        n.param = ParamKind::Hole;
        n.hole = ++next_hole_;
      } else {
        n.param = ParamKind::Fixed;
        n.theta = number();
      }
      expect("]");
    }
    if (eat("(")) {
      do {
        skip();
        if (p_ >= t_.size() || t_[p_] < 'A' || t_[p_] > 'Z') fail("expected variable letter");
        n.vars.push_back(t_[p_++]);
      } while (eat(","));
      expect(")");
    }
    return make(std::move(n));
  }
};

}  // namespace

std::string print_query(const Query& q) { return raw(q); }

Query parse_query(const std::string& text) { return Parser(text).parse(); }

// --------------------------------------------------------------------- STL

StlPtr stl_atom(Query q) {
  auto s = std::make_shared<Stl>();
  s->op = Stl::Op::Atom;
  s->atom = std::move(q);
  return s;
}

StlPtr stl_not(StlPtr f) {
  auto s = std::make_shared<Stl>();
  s->op = Stl::Op::Not;
  s->lhs = std::move(f);
  return s;
}

StlPtr stl_and(StlPtr f, StlPtr g) {
  auto s = std::make_shared<Stl>();
  s->op = Stl::Op::And;
  s->lhs = std::move(f);
  s->rhs = std::move(g);
  return s;
}

StlPtr stl_until(StlPtr f, StlPtr g, int a, int b) {
  if (a < 0 || a > b) throw QueryError("until window needs 0 <= a <= b");
  auto s = std::make_shared<Stl>();
  s->op = Stl::Op::Until;
  s->lhs = std::move(f);
  s->rhs = std::move(g);
  s->a = a;
  s->b = b;
  return s;
}

Query translate_stl(const StlPtr& f) {
  switch (f->op) {
    case Stl::Op::Atom:
      return f->atom;
    case Stl::Op::Not:
      return neg(translate_stl(f->lhs));
    case Stl::Op::And:
      return conj(translate_stl(f->lhs), translate_stl(f->rhs));
    case Stl::Op::Until:
      return seq(dashv(translate_stl(f->lhs), f->a, f->b), translate_stl(f->rhs));
  }
  throw QueryError("bad formula");
}

}  // namespace trajsynth
