#include "xdrs/clause_format.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

namespace {

bool is_quoted(std::string_view t) { return t.size() >= 2 && t.front() == '"' && t.back() == '"'; }

bool all_upper(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || c == '_' || c == '-';
  });
}

int parse_int(std::string_view t, const std::string& what) {
  int v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size())
    fail(ErrorKind::InvalidDrs, "expected integer for " + what + ", got '" + std::string(t) + "'");
  return v;
}

Argument parse_argument(std::string_view t, int line_no) {
  if (is_quoted(t)) return Argument::constant(std::string(t.substr(1, t.size() - 2)));
  if (is_variable(t)) return Argument::variable(std::string(t));
  fail(ErrorKind::InvalidDrs, "line " + std::to_string(line_no) + ": '" + std::string(t) +
                                  "' is neither a variable nor a quoted constant");
}

class Builder {
 public:
  Box& box(std::string_view id) {
    if (Box* b = drs_.find(id)) return *b;
    drs_.boxes.push_back(Box{std::string(id), {}, {}, false});
    return drs_.boxes.back();
  }
  void mark_argument(const BoxId& id) { arguments_.insert(id); }
  Drs& drs() { return drs_; }
  const std::set<BoxId>& arguments() const { return arguments_; }

 private:
  Drs drs_;
  std::set<BoxId> arguments_;
};

void parse_comment(std::string_view line, ClauseDocument& doc) {
  auto body = trim(line.substr(1));
  auto words = split_whitespace(body);
  if (words.empty()) return;
  if (words[0] == "id" && words.size() >= 2) {
    doc.id = std::string(words[1]);
  } else if (words[0] == "text") {
    doc.text = std::string(trim(body.substr(4)));
  } else if (words[0] == "align") {
    if (words.size() < 3) fail(ErrorKind::InvalidDrs, "alignment needs token and clause: " + std::string(line));
    TokenAlignment a;
    a.token = parse_int(words[1], "alignment token");
    a.clause = parse_int(words[2], "alignment clause");
    a.head = words.size() >= 4 && words[3] == "head";
    doc.alignments.push_back(a);
  }
}

}  // namespace

ClauseDocument parse_clause_document(std::string_view text) {
  ClauseDocument doc;
  Builder builder;
  int ordinal = 0;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '%') {
      parse_comment(line, doc);
      continue;
    }
    ++ordinal;
    auto t = split_whitespace(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!is_box_id(t[0])) fail(ErrorKind::InvalidDrs, where + ": clause must start with a box id");
    Box& box = builder.box(t[0]);
    const BoxId host = box.id;
    if (t.size() == 1) continue;
    const std::string label(t[1]);

    if (label == "REF") {
      if (t.size() != 3 || !is_variable(t[2]))
        fail(ErrorKind::InvalidDrs, where + ": REF takes one variable");
      box.referents.emplace_back(t[2]);
      continue;
    }
    if (label == "PRESUPPOSED") {
      if (t.size() != 2) fail(ErrorKind::InvalidDrs, where + ": PRESUPPOSED takes no arguments");
      box.presupposed = true;
      continue;
    }

    const bool box_args = t.size() >= 3 && std::all_of(t.begin() + 2, t.end(), is_box_id);
    if (box_args) {
      std::vector<BoxId> args(t.begin() + 2, t.end());
      for (const auto& a : args) {
        builder.box(a);
        builder.mark_argument(a);
      }
      Box& h = *builder.drs().find(host);
      if (is_operator_label(label)) {
        if (static_cast<int>(args.size()) != operator_arity(label))
          fail(ErrorKind::UnknownOperator, where + ": " + label + " takes " +
                                               std::to_string(operator_arity(label)) + " box(es)");
        h.conditions.push_back(Condition{Operator{label, args}, ordinal});
      } else if (args.size() == 2 && all_upper(label)) {
        builder.drs().relations.push_back(Relation{label, host, args[0], args[1]});
      } else {
        fail(ErrorKind::UnknownOperator, where + ": '" + label + "' over boxes");
      }
      continue;
    }
    if (t.size() == 3) {
      if (!is_variable(t[2]))
        fail(ErrorKind::InvalidDrs, where + ": unary condition needs a variable argument");
      box.conditions.push_back(Condition{Unary{label, std::string(t[2])}, ordinal});
      continue;
    }
    if (t.size() == 4) {
      box.conditions.push_back(
          Condition{Binary{label, parse_argument(t[2], line_no), parse_argument(t[3], line_no)}, ordinal});
      continue;
    }
    fail(ErrorKind::InvalidDrs, where + ": cannot interpret clause '" + std::string(line) + "'");
  }
  if (ordinal == 0) fail(ErrorKind::EmptyInput, "no clauses");

  Drs& drs = builder.drs();
  std::vector<BoxId> roots;
  for (const auto& b : drs.boxes)
    if (!b.presupposed && !builder.arguments().count(b.id)) roots.push_back(b.id);
  if (roots.empty()) fail(ErrorKind::CyclicStructure, "every box is embedded in another box");
  if (roots.size() > 1) fail(ErrorKind::InvalidDrs, "more than one top-level box: " + roots[0] + ", " + roots[1]);
  drs.top = roots[0];
  validate(drs);
  doc.drs = std::move(drs);
  return doc;
}

Drs parse_clauses(std::string_view text) { return parse_clause_document(text).drs; }

std::vector<ClauseDocument> read_clause_documents(std::string_view text) {
  std::vector<ClauseDocument> docs;
  std::string chunk;
  bool has_clause = false;
  auto flush = [&] {
    if (has_clause) docs.push_back(parse_clause_document(chunk));
    chunk.clear();
    has_clause = false;
  };
  for (auto line : split_lines(text)) {
    auto t = trim(line);
    if (t.empty()) {
      if (has_clause) flush();
      continue;
    }
    if (t.front() != '%') has_clause = true;
    chunk.append(line);
    chunk.push_back('\n');
  }
  flush();
  return docs;
}

std::string write_clauses(const ClauseDocument& doc) {
  const Drs& drs = doc.drs;
  std::string body;
  std::map<int, int> renumber;
  int ordinal = 0;
  auto emit = [&](const std::string& line) {
    body += line;
    body += '\n';
    ++ordinal;
  };
  // Top box first so the file reads outside-in; the rest keep their order.
  std::vector<const Box*> order;
  if (const Box* t = drs.find(drs.top)) order.push_back(t);
  for (const auto& b : drs.boxes)
    if (b.id != drs.top) order.push_back(&b);

  for (const Box* b : order) {
    bool has_relation = std::any_of(drs.relations.begin(), drs.relations.end(),
                                    [&](const Relation& r) { return r.host == b->id; });
    if (b->presupposed) emit(b->id + " PRESUPPOSED");
    if (!b->presupposed && b->referents.empty() && b->conditions.empty() && !has_relation) emit(b->id);
    for (const auto& r : b->referents) emit(b->id + " REF " + r);
    for (const auto& c : b->conditions) {
      std::string line = b->id + " ";
      if (const auto* u = std::get_if<Unary>(&c.body)) {
        line += u->predicate + " " + u->variable;
      } else if (const auto* bi = std::get_if<Binary>(&c.body)) {
        line += bi->role + " " + bi->first.surface() + " " + bi->second.surface();
      } else {
        const auto& op = std::get<Operator>(c.body);
        line += op.label;
        for (const auto& x : op.boxes) line += " " + x;
      }
      emit(line);
      if (c.id > 0) renumber[c.id] = ordinal;
    }
    for (const auto& r : drs.relations)
      if (r.host == b->id) emit(r.host + " " + r.label + " " + r.first + " " + r.second);
  }

  std::string out;
  if (!doc.id.empty()) out += "% id " + doc.id + "\n";
  if (!doc.text.empty()) out += "% text " + doc.text + "\n";
  for (const auto& a : doc.alignments) {
    auto it = renumber.find(a.clause);
    if (it == renumber.end()) continue;
    out += "% align " + std::to_string(a.token) + " " + std::to_string(it->second) + (a.head ? " head" : "") + "\n";
  }
  return out + body;
}

std::string write_clauses(const Drs& drs) { return write_clauses(ClauseDocument{{}, {}, drs, {}}); }

}  // namespace xdrs
