#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xdrs {

// Box identifiers and variables are kept as their surface strings ("b3", "x1").
using BoxId = std::string;

enum class Sort { Entity, Event, Time, State };

char sort_prefix(Sort s);
std::optional<Sort> sort_of(std::string_view variable);
bool is_variable(std::string_view token);
bool is_box_id(std::string_view token);

// Logic operators. NOT/POS/NEC take one box, IMP/DIS/DUP take two.
bool is_operator_label(std::string_view label);
int operator_arity(std::string_view label);
inline constexpr const char* kOperatorLabels[] = {"NOT", "POS", "NEC", "IMP", "DIS", "DUP"};

struct Argument {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string text;  // constants are stored without quotes

  static Argument variable(std::string name) { return {Kind::Variable, std::move(name)}; }
  static Argument constant(std::string value) { return {Kind::Constant, std::move(value)}; }
  bool is_variable() const { return kind == Kind::Variable; }
  std::string surface() const;  // quoted for constants

  friend bool operator==(const Argument&, const Argument&) = default;
};

struct Unary {
  std::string predicate;
  std::string variable;
  friend bool operator==(const Unary&, const Unary&) = default;
};

struct Binary {
  std::string role;
  Argument first;
  Argument second;
  friend bool operator==(const Binary&, const Binary&) = default;
};

struct Operator {
  std::string label;
  std::vector<BoxId> boxes;
  friend bool operator==(const Operator&, const Operator&) = default;
};

struct Condition {
  std::variant<Unary, Binary, Operator> body;
  int id = 0;  // clause-line ordinal in the source file; 0 when synthesized

  bool is_unary() const { return std::holds_alternative<Unary>(body); }
  bool is_binary() const { return std::holds_alternative<Binary>(body); }
  bool is_operator() const { return std::holds_alternative<Operator>(body); }
  // Variables mentioned by the condition, in argument order.
  std::vector<std::string> variables() const;
};

struct Box {
  BoxId id;
  std::vector<std::string> referents;
  std::vector<Condition> conditions;
  bool presupposed = false;
};

// Discourse relation between two boxes; `host` is the box whose condition
// list displays it.
struct Relation {
  std::string label;
  BoxId host;
  BoxId first;
  BoxId second;
  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Drs {
  std::vector<Box> boxes;
  std::vector<Relation> relations;
  BoxId top;

  const Box* find(std::string_view id) const;
  Box* find(std::string_view id);
  std::size_t condition_count() const;
  std::size_t referent_count() const;
};

// Structural view of a Drs: parent links and variable accessibility.
class DrsStructure {
 public:
  explicit DrsStructure(const Drs& drs);

  // Parent box via an operator or a hosted relation; nullopt for top and
  // presupposed boxes.
  std::optional<BoxId> parent(const BoxId& box) const;
  // Boxes whose referents are visible from `box`: itself, its ancestors,
  // and for the second box of IMP/DUP or a relation, the first box.
  std::vector<BoxId> accessible_from(const BoxId& box) const;
  // Children in condition order (operators first by position, then hosted relations).
  std::vector<BoxId> children(const BoxId& box) const;
  bool dominates(const BoxId& ancestor, const BoxId& box) const;

 private:
  const Drs* drs_;
  std::vector<std::pair<BoxId, BoxId>> parent_;       // child -> parent
  std::vector<std::pair<BoxId, BoxId>> left_sibling_;  // second box -> first box
};

// Gold alignment between an input token (1-based, as in CoNLL-U) and the
// clause line that introduced a condition.
struct TokenAlignment {
  int token = 0;
  int clause = 0;
  bool head = false;
  friend bool operator==(const TokenAlignment&, const TokenAlignment&) = default;
};

// Throws xdrs::Error when any structural invariant is violated:
// unknown box references, duplicate referents, cycles, disconnected
// boxes, multiply-parented boxes and unbound variables.
void validate(const Drs& drs);

}  // namespace xdrs
