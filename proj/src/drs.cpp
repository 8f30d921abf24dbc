#include "xdrs/drs.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "xdrs/error.hpp"

namespace xdrs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::UnknownOperator: return "UnknownOperator";
    case ErrorKind::CyclicStructure: return "CyclicStructure";
    case ErrorKind::InvalidDrs: return "InvalidDrs";
    case ErrorKind::AmbiguousMerge: return "AmbiguousMerge";
    case ErrorKind::MalformedSequence: return "MalformedSequence";
    case ErrorKind::MalformedTree: return "MalformedTree";
    case ErrorKind::MalformedConllu: return "MalformedConllu";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PairingError: return "PairingError";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::UnsupportedFeatureCombination: return "UnsupportedFeatureCombination";
    case ErrorKind::TruncatedOutput: return "TruncatedOutput";
    case ErrorKind::InternalContractViolation: return "InternalContractViolation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NumericError: return "NumericError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::UnsupportedFeatureCombination:
      return 2;
    case ErrorKind::NumericError:
    case ErrorKind::ShapeError:
    case ErrorKind::InternalContractViolation:
      return 4;
    default:
      return 3;
  }
}

char sort_prefix(Sort s) {
  switch (s) {
    case Sort::Entity: return 'x';
    case Sort::Event: return 'e';
    case Sort::Time: return 't';
    case Sort::State: return 's';
  }
  return 'x';
}

std::optional<Sort> sort_of(std::string_view variable) {
  if (!is_variable(variable)) return std::nullopt;
  switch (variable.front()) {
    case 'x': return Sort::Entity;
    case 'e': return Sort::Event;
    case 't': return Sort::Time;
    case 's': return Sort::State;
  }
  return std::nullopt;
}

namespace {

bool prefixed_number(std::string_view token, std::string_view prefixes) {
  if (token.size() < 2 || prefixes.find(token.front()) == std::string_view::npos) return false;
  return std::all_of(token.begin() + 1, token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool clean_label(std::string_view label) {
  if (label.empty()) return false;
  return std::none_of(label.begin(), label.end(), [](unsigned char c) {
    return std::isspace(c) != 0 || c == '(' || c == ')' || c == '"';
  });
}

}  // namespace

bool is_variable(std::string_view token) { return prefixed_number(token, "xets"); }
bool is_box_id(std::string_view token) { return prefixed_number(token, "b"); }

bool is_operator_label(std::string_view label) {
  return std::any_of(std::begin(kOperatorLabels), std::end(kOperatorLabels),
                     [&](const char* op) { return label == op; });
}

int operator_arity(std::string_view label) {
  if (label == "NOT" || label == "POS" || label == "NEC") return 1;
  if (label == "IMP" || label == "DIS" || label == "DUP") return 2;
  return 0;
}

std::string Argument::surface() const {
  return kind == Kind::Constant ? "\"" + text + "\"" : text;
}

std::vector<std::string> Condition::variables() const {
  std::vector<std::string> out;
  if (const auto* u = std::get_if<Unary>(&body)) {
    out.push_back(u->variable);
  } else if (const auto* b = std::get_if<Binary>(&body)) {
    if (b->first.is_variable()) out.push_back(b->first.text);
    if (b->second.is_variable()) out.push_back(b->second.text);
  }
  return out;
}

const Box* Drs::find(std::string_view id) const {
  for (const auto& b : boxes)
    if (b.id == id) return &b;
  return nullptr;
}

Box* Drs::find(std::string_view id) {
  for (auto& b : boxes)
    if (b.id == id) return &b;
  return nullptr;
}

std::size_t Drs::condition_count() const {
  std::size_t n = 0;
  for (const auto& b : boxes) n += b.conditions.size();
  return n;
}

std::size_t Drs::referent_count() const {
  std::size_t n = 0;
  for (const auto& b : boxes) n += b.referents.size();
  return n;
}

// ---------------------------------------------------------------------------

namespace {

const BoxId* lookup(const std::vector<std::pair<BoxId, BoxId>>& table, const BoxId& key) {
  for (const auto& [k, v] : table)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace

DrsStructure::DrsStructure(const Drs& drs) : drs_(&drs) {
  auto link = [&](const BoxId& child, const BoxId& parent) {
    if (lookup(parent_, child))
      fail(ErrorKind::InvalidDrs, "box " + child + " is embedded more than once");
    parent_.emplace_back(child, parent);
  };
  for (const auto& box : drs.boxes) {
    for (const auto& c : box.conditions) {
      const auto* op = std::get_if<Operator>(&c.body);
      if (!op) continue;
      for (const auto& b : op->boxes) link(b, box.id);
      if (op->boxes.size() == 2 && (op->label == "IMP" || op->label == "DUP"))
        left_sibling_.emplace_back(op->boxes[1], op->boxes[0]);
    }
  }
  for (const auto& r : drs.relations) {
    link(r.first, r.host);
    link(r.second, r.host);
    left_sibling_.emplace_back(r.second, r.first);
  }
}

std::optional<BoxId> DrsStructure::parent(const BoxId& box) const {
  if (const auto* p = lookup(parent_, box)) return *p;
  return std::nullopt;
}

std::vector<BoxId> DrsStructure::accessible_from(const BoxId& box) const {
  std::vector<BoxId> out;
  std::optional<BoxId> cur = box;
  std::size_t guard = 0;
  while (cur && guard++ <= parent_.size() + 1) {
    out.push_back(*cur);
    if (const auto* l = lookup(left_sibling_, *cur)) out.push_back(*l);
    cur = parent(*cur);
  }
  return out;
}

std::vector<BoxId> DrsStructure::children(const BoxId& box) const {
  std::vector<BoxId> out;
  const Box* b = drs_->find(box);
  if (!b) return out;
  for (const auto& c : b->conditions)
    if (const auto* op = std::get_if<Operator>(&c.body))
      out.insert(out.end(), op->boxes.begin(), op->boxes.end());
  for (const auto& r : drs_->relations)
    if (r.host == box) {
      out.push_back(r.first);
      out.push_back(r.second);
    }
  return out;
}

bool DrsStructure::dominates(const BoxId& ancestor, const BoxId& box) const {
  std::optional<BoxId> cur = box;
  std::size_t guard = 0;
  while (cur && guard++ <= parent_.size() + 1) {
    if (*cur == ancestor) return true;
    cur = parent(*cur);
  }
  return false;
}

void validate(const Drs& drs) {
  if (drs.boxes.empty()) fail(ErrorKind::EmptyInput, "DRS has no boxes");

  std::set<BoxId> ids;
  for (const auto& b : drs.boxes)
    if (!ids.insert(b.id).second) fail(ErrorKind::InvalidDrs, "duplicate box " + b.id);
  auto require_box = [&](const BoxId& id) {
    if (!ids.count(id)) fail(ErrorKind::InvalidDrs, "reference to unknown box " + id);
  };

  const Box* top = drs.find(drs.top);
  if (!top) fail(ErrorKind::InvalidDrs, "top box " + drs.top + " does not exist");
  if (top->presupposed) fail(ErrorKind::InvalidDrs, "top box is presupposed");

  std::set<std::string> declared;
  for (const auto& b : drs.boxes) {
    std::set<std::string> local;
    for (const auto& r : b.referents) {
      if (!is_variable(r)) fail(ErrorKind::InvalidDrs, "bad referent '" + r + "' in " + b.id);
      if (!local.insert(r).second)
        fail(ErrorKind::InvalidDrs, "referent " + r + " declared twice in " + b.id);
      if (!declared.insert(r).second)
        fail(ErrorKind::InvalidDrs, "referent " + r + " declared in more than one box");
    }
    for (const auto& c : b.conditions) {
      if (const auto* op = std::get_if<Operator>(&c.body)) {
        if (!is_operator_label(op->label)) fail(ErrorKind::UnknownOperator, op->label);
        if (static_cast<int>(op->boxes.size()) != operator_arity(op->label))
          fail(ErrorKind::UnknownOperator, op->label + " with wrong number of boxes");
        for (const auto& x : op->boxes) require_box(x);
      } else if (const auto* u = std::get_if<Unary>(&c.body)) {
        if (!clean_label(u->predicate)) fail(ErrorKind::InvalidDrs, "bad predicate '" + u->predicate + "'");
        if (!is_variable(u->variable))
          fail(ErrorKind::InvalidDrs, "unary argument must be a variable: " + u->variable);
      } else if (const auto* bi = std::get_if<Binary>(&c.body)) {
        if (!clean_label(bi->role)) fail(ErrorKind::InvalidDrs, "bad role '" + bi->role + "'");
        for (const Argument* a : {&bi->first, &bi->second}) {
          if (a->is_variable() && !is_variable(a->text))
            fail(ErrorKind::InvalidDrs, "bad variable '" + a->text + "'");
          if (!a->is_variable() && (a->text.empty() || !clean_label(a->text)))
            fail(ErrorKind::InvalidDrs, "bad constant '" + a->text + "'");
        }
      }
    }
  }
  for (const auto& r : drs.relations) {
    if (!clean_label(r.label)) fail(ErrorKind::InvalidDrs, "bad relation label '" + r.label + "'");
    require_box(r.host);
    require_box(r.first);
    require_box(r.second);
  }

  DrsStructure structure(drs);

  // Cycles first: a box that reaches itself through parent links.
  for (const auto& b : drs.boxes) {
    std::set<BoxId> seen{b.id};
    auto cur = structure.parent(b.id);
    while (cur) {
      if (!seen.insert(*cur).second) fail(ErrorKind::CyclicStructure, "box " + *cur + " is its own ancestor");
      cur = structure.parent(*cur);
    }
  }
  for (const auto& b : drs.boxes) {
    auto p = structure.parent(b.id);
    if (b.id == drs.top) {
      if (p) fail(ErrorKind::CyclicStructure, "top box " + b.id + " is embedded in " + *p);
      continue;
    }
    if (b.presupposed) {
      if (p) fail(ErrorKind::InvalidDrs, "presupposed box " + b.id + " is embedded");
      continue;
    }
    if (!structure.dominates(drs.top, b.id))
      fail(ErrorKind::InvalidDrs, "box " + b.id + " is not reachable from top " + drs.top);
  }

  // Every variable must be declared in an accessible box. Presupposed
  // referents are visible everywhere; presupposed boxes see the top box.
  std::set<std::string> presupposed_refs;
  for (const auto& b : drs.boxes)
    if (b.presupposed) presupposed_refs.insert(b.referents.begin(), b.referents.end());
  for (const auto& b : drs.boxes) {
    std::set<std::string> visible = presupposed_refs;
    std::vector<BoxId> acc = b.presupposed ? std::vector<BoxId>{b.id, drs.top} : structure.accessible_from(b.id);
    for (const auto& a : acc) {
      const Box* ab = drs.find(a);
      visible.insert(ab->referents.begin(), ab->referents.end());
    }
    for (const auto& c : b.conditions)
      for (const auto& v : c.variables())
        if (!visible.count(v))
          fail(ErrorKind::UnboundVariable, "variable " + v + " used in " + b.id + " is not declared in an accessible box");
  }
}

}  // namespace xdrs
