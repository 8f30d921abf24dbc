#include "xdrs/drs_tree.hpp"

#include <algorithm>
#include <array>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

using namespace tree_labels;

namespace {

TreeNode leaf(std::string label) { return TreeNode{std::move(label), {}}; }

TreeNode box_to_tree(const Drs& drs, const BoxId& id) {
  const Box* box = drs.find(id);
  TreeNode node{std::string(kDrs), {}};
  for (const auto& r : box->referents) node.children.push_back(TreeNode{std::string(kRef), {leaf(r)}});
  for (const auto& c : box->conditions) {
    if (const auto* u = std::get_if<Unary>(&c.body)) {
      node.children.push_back(TreeNode{std::string(kPred), {leaf(u->predicate), leaf(u->variable)}});
    } else if (const auto* b = std::get_if<Binary>(&c.body)) {
      node.children.push_back(
          TreeNode{std::string(kPred), {leaf(b->role), leaf(b->first.surface()), leaf(b->second.surface())}});
    } else {
      const auto& op = std::get<Operator>(c.body);
      TreeNode n{std::string(kOp), {leaf(op.label)}};
      for (const auto& sub : op.boxes) n.children.push_back(box_to_tree(drs, sub));
      node.children.push_back(std::move(n));
    }
  }
  for (const auto& r : drs.relations) {
    if (r.host != id) continue;
    node.children.push_back(
        TreeNode{std::string(kRel), {leaf(r.label), box_to_tree(drs, r.first), box_to_tree(drs, r.second)}});
  }
  return node;
}

// Rebuilds boxes from DRS nodes. Variable leaves resolve against the
// innermost visible declaration with the same surface form; unresolved
// leaves declare a fresh referent in the current box.
class TreeReader {
 public:
  Drs read(const TreeNode& root) {
    if (root.label != kDrs) fail(ErrorKind::MalformedTree, "root must be a DRS node, got '" + root.label + "'");
    Env env;
    drs_.top = read_box(root, env, nullptr).id;
    // Boxes were appended child-first; restore preorder.
    std::sort(drs_.boxes.begin(), drs_.boxes.end(), [](const Box& a, const Box& b) {
      return std::stoi(a.id.substr(1)) < std::stoi(b.id.substr(1));
    });
    validate(drs_);
    return std::move(drs_);
  }

 private:
  using Env = std::vector<std::pair<std::string, std::string>>;  // surface -> referent

  struct BoxResult {
    BoxId id;
    Env declared;
  };

  std::string fresh(char sort) {
    auto idx = static_cast<std::size_t>(std::string_view("xets").find(sort));
    return std::string(1, sort) + std::to_string(++counters_[idx]);
  }

  static const std::string* resolve(const Env& env, const std::string& surface) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == surface) return &it->second;
    return nullptr;
  }

  BoxResult read_box(const TreeNode& node, const Env& outer, const Env* left) {
    if (node.label != kDrs) fail(ErrorKind::MalformedTree, "expected DRS node, got '" + node.label + "'");
    Box box;
    box.id = "b" + std::to_string(++box_counter_);
    Env declared;
    for (const auto& child : node.children) {
      if (child.label != kRef) continue;
      if (child.children.size() != 1 || !child.children[0].is_leaf() || !is_variable(child.children[0].label))
        fail(ErrorKind::MalformedTree, "REF node needs exactly one variable leaf");
      const std::string& surface = child.children[0].label;
      if (std::any_of(declared.begin(), declared.end(), [&](const auto& p) { return p.first == surface; }))
        continue;  // duplicated declaration inside one box unifies
      std::string name = fresh(surface.front());
      box.referents.push_back(name);
      declared.emplace_back(surface, name);
    }
    auto visible = [&] {
      Env env = outer;
      if (left) env.insert(env.end(), left->begin(), left->end());
      env.insert(env.end(), declared.begin(), declared.end());
      return env;
    };
    auto argument = [&](const TreeNode& leaf_node) -> Argument {
      if (!leaf_node.is_leaf()) fail(ErrorKind::MalformedTree, "predicate argument must be a leaf");
      const std::string& t = leaf_node.label;
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return Argument::constant(t.substr(1, t.size() - 2));
      if (!is_variable(t)) fail(ErrorKind::MalformedTree, "bad argument leaf '" + t + "'");
      Env env = visible();
      if (const std::string* r = resolve(env, t)) return Argument::variable(*r);
      std::string name = fresh(t.front());
      box.referents.push_back(name);
      declared.emplace_back(t, name);
      return Argument::variable(name);
    };

    std::vector<Relation> relations;
    for (const auto& child : node.children) {
      if (child.is_leaf()) fail(ErrorKind::MalformedTree, "leaf '" + child.label + "' directly under a DRS node");
      if (child.label == kRef) continue;
      if (child.label == kPred) {
        const auto& ch = child.children;
        if (ch.size() < 2 || ch.size() > 3 || !ch[0].is_leaf())
          fail(ErrorKind::MalformedTree, "PRED node needs a label and one or two arguments");
        if (ch.size() == 2) {
          Argument a = argument(ch[1]);
          if (!a.is_variable()) fail(ErrorKind::MalformedTree, "unary predicate over a constant");
          box.conditions.push_back(Condition{Unary{ch[0].label, a.text}, 0});
        } else {
          Argument a = argument(ch[1]);
          Argument b = argument(ch[2]);
          box.conditions.push_back(Condition{Binary{ch[0].label, a, b}, 0});
        }
      } else if (child.label == kOp) {
        const auto& ch = child.children;
        if (ch.empty() || !ch[0].is_leaf()) fail(ErrorKind::MalformedTree, "OP node needs a label leaf");
        const std::string& op = ch[0].label;
        if (!is_operator_label(op)) fail(ErrorKind::UnknownOperator, op);
        if (static_cast<int>(ch.size()) - 1 != operator_arity(op))
          fail(ErrorKind::MalformedTree, op + " node with wrong number of boxes");
        Operator o{op, {}};
        Env env = visible();
        BoxResult first = read_box(ch[1], env, nullptr);
        o.boxes.push_back(first.id);
        if (ch.size() == 3) {
          const bool sees_left = op == "IMP" || op == "DUP";
          o.boxes.push_back(read_box(ch[2], env, sees_left ? &first.declared : nullptr).id);
        }
        box.conditions.push_back(Condition{std::move(o), 0});
      } else if (child.label == kRel) {
        const auto& ch = child.children;
        if (ch.size() != 3 || !ch[0].is_leaf()) fail(ErrorKind::MalformedTree, "REL node needs a label and two boxes");
        Env env = visible();
        BoxResult first = read_box(ch[1], env, nullptr);
        BoxResult second = read_box(ch[2], env, &first.declared);
        relations.push_back(Relation{ch[0].label, box.id, first.id, second.id});
      } else {
        fail(ErrorKind::MalformedTree, "unexpected node '" + child.label + "' under DRS");
      }
    }
    BoxResult result{box.id, declared};
    drs_.boxes.push_back(std::move(box));
    drs_.relations.insert(drs_.relations.end(), relations.begin(), relations.end());
    return result;
  }

  Drs drs_;
  int box_counter_ = 0;
  std::array<int, 4> counters_{};
};

void linearize_into(const TreeNode& node, std::vector<std::string>& out, bool root) {
  if (node.is_leaf() && !root) {
    out.push_back(node.label);
    return;
  }
  out.emplace_back("(");
  out.push_back(node.label);
  for (const auto& c : node.children) linearize_into(c, out, false);
  out.emplace_back(")");
}

TreeNode parse_node(const std::vector<std::string>& t, std::size_t& pos) {
  if (pos >= t.size() || t[pos] != "(") fail(ErrorKind::MalformedSequence, "expected '(' at token " + std::to_string(pos));
  ++pos;
  if (pos >= t.size() || t[pos] == "(" || t[pos] == ")")
    fail(ErrorKind::MalformedSequence, "'(' must be followed by a node label at token " + std::to_string(pos));
  TreeNode node{t[pos++], {}};
  while (true) {
    if (pos >= t.size()) fail(ErrorKind::MalformedSequence, "unbalanced brackets: missing ')'");
    if (t[pos] == ")") {
      ++pos;
      return node;
    }
    if (t[pos] == "(") {
      node.children.push_back(parse_node(t, pos));
    } else {
      node.children.push_back(leaf(t[pos++]));
    }
  }
}

}  // namespace

DrsTree to_tree(const Drs& drs) {
  for (const auto& b : drs.boxes)
    if (b.presupposed) fail(ErrorKind::InvalidDrs, "merge presupposed box " + b.id + " before tree conversion");
  if (!drs.find(drs.top)) fail(ErrorKind::InvalidDrs, "missing top box");
  return box_to_tree(drs, drs.top);
}

Drs from_tree(const DrsTree& tree) { return TreeReader{}.read(tree); }

std::string LinearSeq::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

LinearSeq LinearSeq::parse(std::string_view line) {
  LinearSeq seq;
  for (auto t : split_whitespace(line)) seq.tokens.emplace_back(t);
  return seq;
}

LinearSeq linearize(const DrsTree& tree) {
  LinearSeq seq;
  linearize_into(tree, seq.tokens, true);
  return seq;
}

DrsTree delinearize(const LinearSeq& seq) {
  if (seq.tokens.empty()) fail(ErrorKind::EmptyInput, "empty bracketed sequence");
  std::size_t pos = 0;
  TreeNode root = parse_node(seq.tokens, pos);
  if (pos != seq.tokens.size()) fail(ErrorKind::MalformedSequence, "tokens after the root closed");
  return root;
}

std::size_t node_count(const DrsTree& tree) {
  std::size_t n = 1;
  for (const auto& c : tree.children) n += node_count(c);
  return n;
}

std::size_t tree_depth(const DrsTree& tree) {
  std::size_t d = 0;
  for (const auto& c : tree.children) d = std::max(d, tree_depth(c));
  return d + 1;
}

Drs canonicalize(const Drs& drs) { return from_tree(to_tree(drs)); }

}  // namespace xdrs
