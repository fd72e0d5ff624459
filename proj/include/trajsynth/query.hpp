#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace trajsynth {

class Registry;

enum class Kind { Pred, PredHole, Seq, And, Or, Star, Neg, Iterate, Dashv };
enum class ParamKind { Unparameterized, Fixed, Hole };

struct Node;
using Query = std::shared_ptr<const Node>;

// Immutable AST node. Children are shared between versions, so every
// operation below returns a new tree and leaves its input untouched.
struct Node {
  Kind kind = Kind::Pred;
  // Pred
  std::string name;
  std::vector<char> vars;  // variable letters, 'A' binds object 0
  ParamKind param = ParamKind::Unparameterized;
  double theta = 0;  // Fixed
  int hole = 0;      // Hole / PredHole id
  // Composite
  Query left, right;  // unary operators use `left`
  int k = 0;          // Iterate
  int a = 0, b = 0;   // Dashv, in frames
};

struct QueryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SyntaxError : std::invalid_argument {
  std::size_t position;
  SyntaxError(const std::string& msg, std::size_t pos)
      : std::invalid_argument(msg + " at position " + std::to_string(pos)), position(pos) {}
};

// Constructors
Query pred(std::string name, std::vector<char> vars = {});
Query pred_fixed(std::string name, double theta, std::vector<char> vars = {});
Query pred_hole(std::string name, int hole, std::vector<char> vars = {});
Query pred_hole_node(int hole);
Query seq(Query l, Query r);
Query conj(Query l, Query r);
Query disj(Query l, Query r);
Query star(Query q);
Query neg(Query q);
Query iterate(Query q, int k);
Query dashv(Query q, int a, int b);
// Left-associated sequence of one or more queries.
Query seq_all(const std::vector<Query>& parts);

struct Holes {
  std::vector<int> predicate;  // H_phi, AST order
  std::vector<int> parameter;  // H_theta, AST order
};
Holes holes(const Query& q);
// Parameter hole ids left to right; coordinate i of a parameter vector fills hole_order[i].
std::vector<int> hole_order(const Query& q);
bool is_sketch(const Query& q);
bool is_complete(const Query& q);
int max_hole_id(const Query& q);

// Replaces hole h with a production (predicate hole) or a real (parameter
// hole). New holes inside the production receive fresh ids.
Query fill(const Query& q, int h, const Query& production);
Query fill(const Query& q, int h, double value);
// Fills every parameter hole from theta in hole order. Under an odd number of
// Neg nodes a coordinate is the threshold of the negated predicate, so the
// written threshold is -theta_i; this keeps Q_theta antitone in every
// coordinate.
Query substitute(const Query& sketch, const std::vector<double>& theta);
// Replaces every Iterate node by repeated sequencing.
Query desugar(const Query& q);
// Renumbers holes 1, 2, ... in AST order.
Query renumber_holes(const Query& q);

// Structural equality with hole ids compared by position.
bool same_query(const Query& a, const Query& b);
// Number of predicate leaves after desugaring Iterate.
int predicate_count(const Query& q);
// Parameter holes after desugaring (a hole under Iterate counts once).
int parameter_count(const Query& q);
int node_count(const Query& q);

// Checks arity, parameter kinds and Neg/Iterate/Dashv constraints.
void validate(const Query& q, const Registry& reg);

Query parse_query(const std::string& text);
std::string print_query(const Query& q);

// Signal temporal logic fragment and its translation into queries.
struct Stl;
using StlPtr = std::shared_ptr<const Stl>;
struct Stl {
  enum class Op { Atom, Not, And, Until } op = Op::Atom;
  Query atom;  // Atom
  StlPtr lhs, rhs;
  int a = 0, b = 0;  // Until window, in frames
};
StlPtr stl_atom(Query q);
StlPtr stl_not(StlPtr f);
StlPtr stl_and(StlPtr f, StlPtr g);
StlPtr stl_until(StlPtr f, StlPtr g, int a, int b);
Query translate_stl(const StlPtr& f);

}  // namespace trajsynth
