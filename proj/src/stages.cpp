#include "xdrs/stages.hpp"
#include <optional>

#include "xdrs/drs.hpp"
#include "xdrs/error.hpp"

namespace xdrs {

using namespace skeleton_tokens;

namespace {

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

void split_box(const TreeNode& box, StageTargets& out) {
  out.skeleton.emplace_back(kOpenDrs);
  for (const auto& c : box.children) {
    if (c.label == tree_labels::kRef) {
      out.skeleton.emplace_back(kRef);
      out.referents.push_back(c.children.at(0).label);
    } else if (c.label == tree_labels::kPred) {
      out.skeleton.emplace_back(c.children.size() == 2 ? kUnary : kBinary);
      out.predicates.push_back(c.children.at(0).label);
      for (std::size_t k = 1; k < c.children.size(); ++k) out.referents.push_back(c.children[k].label);
    } else if (c.label == tree_labels::kOp || c.label == tree_labels::kRel) {
      std::string prefix(c.label == tree_labels::kOp ? kOpPrefix : kRelPrefix);
      out.skeleton.push_back(prefix + c.children.at(0).label);
      for (std::size_t k = 1; k < c.children.size(); ++k) split_box(c.children[k], out);
      out.skeleton.emplace_back(kClose);
    } else {
      fail(ErrorKind::MalformedTree, "unexpected node '" + c.label + "' under DRS");
    }
  }
  out.skeleton.emplace_back(kClose);
}

int op_arity_of(std::string_view token) {
  if (starts_with(token, kRelPrefix)) return 2;
  return operator_arity(token.substr(kOpPrefix.size()));
}

}  // namespace

StageTargets split_stages(const DrsTree& tree) {
  if (tree.label != tree_labels::kDrs) fail(ErrorKind::MalformedTree, "root must be a DRS node");
  StageTargets out;
  split_box(tree, out);
  return out;
}

DrsTree assemble_tree(const std::vector<std::string>& skeleton, const std::vector<std::string>& predicates,
                      const std::vector<std::string>& referents) {
  std::vector<TreeNode> stack;
  std::optional<TreeNode> root;
  std::size_t p = 0, r = 0;
  auto next_pred = [&]() -> const std::string& {
    if (p >= predicates.size()) fail(ErrorKind::InternalContractViolation, "fewer predicates than placeholders");
    return predicates[p++];
  };
  auto next_ref = [&]() -> const std::string& {
    if (r >= referents.size()) fail(ErrorKind::InternalContractViolation, "fewer referents than slots");
    return referents[r++];
  };
  auto leaf = [](const std::string& s) { return TreeNode{s, {}}; };

  for (const auto& tok : skeleton) {
    if (root) fail(ErrorKind::MalformedSequence, "skeleton continues after the root box closed");
    if (tok == kOpenDrs) {
      stack.push_back(TreeNode{std::string(tree_labels::kDrs), {}});
    } else if (starts_with(tok, kOpPrefix)) {
      stack.push_back(TreeNode{std::string(tree_labels::kOp), {leaf(tok.substr(kOpPrefix.size()))}});
    } else if (starts_with(tok, kRelPrefix)) {
      stack.push_back(TreeNode{std::string(tree_labels::kRel), {leaf(tok.substr(kRelPrefix.size()))}});
    } else if (tok == kClose) {
      if (stack.empty()) fail(ErrorKind::MalformedSequence, "unbalanced ')' in skeleton");
      TreeNode done = std::move(stack.back());
      stack.pop_back();
      if (stack.empty())
        root = std::move(done);
      else
        stack.back().children.push_back(std::move(done));
    } else if (tok == kRef || tok == kUnary || tok == kBinary) {
      if (stack.empty() || stack.back().label != tree_labels::kDrs)
        fail(ErrorKind::MalformedSequence, tok + " outside a box");
      if (tok == kRef) {
        stack.back().children.push_back(TreeNode{std::string(tree_labels::kRef), {leaf(next_ref())}});
      } else {
        TreeNode pred{std::string(tree_labels::kPred), {leaf(next_pred())}};
        pred.children.push_back(leaf(next_ref()));
        if (tok == kBinary) pred.children.push_back(leaf(next_ref()));
        stack.back().children.push_back(std::move(pred));
      }
    } else {
      fail(ErrorKind::MalformedSequence, "unknown skeleton token '" + tok + "'");
    }
  }
  if (!root) fail(ErrorKind::MalformedSequence, "unbalanced skeleton");
  if (p != predicates.size() || r != referents.size())
    fail(ErrorKind::InternalContractViolation, "stage streams longer than the skeleton requires");
  return *root;
}

SkeletonLayout SkeletonLayout::analyze(const std::vector<std::string>& skeleton) {
  SkeletonLayout layout;
  struct Frame {
    bool is_box;
    int box;                 // for box frames
    std::vector<int> kids;   // for operator frames
    bool left_visible = false;
  };
  std::vector<Frame> stack;
  for (int i = 0; i < static_cast<int>(skeleton.size()); ++i) {
    const std::string& tok = skeleton[i];
    if (tok == kOpenDrs) {
      BoxInfo info;
      if (!stack.empty()) {
        Frame& f = stack.back();
        if (f.is_box) fail(ErrorKind::MalformedSequence, "box directly inside a box");
        info.parent = stack.size() >= 2 ? stack[stack.size() - 2].box : -1;
        if (f.left_visible && f.kids.size() == 1) info.left = f.kids[0];
        f.kids.push_back(static_cast<int>(layout.boxes.size()));
      }
      layout.boxes.push_back(info);
      stack.push_back(Frame{true, static_cast<int>(layout.boxes.size()) - 1, {}, false});
    } else if (starts_with(tok, kOpPrefix) || starts_with(tok, kRelPrefix)) {
      if (stack.empty() || !stack.back().is_box) fail(ErrorKind::MalformedSequence, tok + " outside a box");
      const bool left = starts_with(tok, kRelPrefix) || tok == "(OP:IMP" || tok == "(OP:DUP";
      stack.push_back(Frame{false, stack.back().box, {}, left});
    } else if (tok == kClose) {
      if (stack.empty()) fail(ErrorKind::MalformedSequence, "unbalanced ')' in skeleton");
      stack.pop_back();
    } else if (tok == kRef || tok == kUnary || tok == kBinary) {
      if (stack.empty() || !stack.back().is_box) fail(ErrorKind::MalformedSequence, tok + " outside a box");
      const int box = stack.back().box;
      if (tok == kRef) {
        layout.slots.push_back(Slot{Slot::Kind::Ref, box, i, -1, 0});
      } else {
        const int arity = tok == kUnary ? 1 : 2;
        const int ph = static_cast<int>(layout.placeholders.size());
        layout.placeholders.push_back(Placeholder{i, box, arity});
        for (int a = 0; a < arity; ++a) layout.slots.push_back(Slot{Slot::Kind::Arg, box, i, ph, a});
      }
    } else {
      fail(ErrorKind::MalformedSequence, "unknown skeleton token '" + tok + "'");
    }
  }
  if (!stack.empty()) fail(ErrorKind::MalformedSequence, "unbalanced skeleton");
  return layout;
}

std::vector<int> SkeletonLayout::accessible(int box) const {
  std::vector<int> out;
  for (int b = box; b >= 0; b = boxes[b].parent) {
    out.push_back(b);
    if (boxes[b].left >= 0) out.push_back(boxes[b].left);
  }
  return out;
}

std::vector<std::string> close_skeleton(const std::vector<std::string>& skeleton) {
  struct Frame {
    bool is_box;
    int arity;
    int kids;
  };
  std::vector<Frame> stack;
  std::vector<std::string> out;
  for (const auto& tok : skeleton) {
    if (tok == kOpenDrs) {
      if (!stack.empty() && !stack.back().is_box) ++stack.back().kids;
      stack.push_back({true, 0, 0});
    } else if (starts_with(tok, kOpPrefix) || starts_with(tok, kRelPrefix)) {
      stack.push_back({false, op_arity_of(tok), 0});
    } else if (tok == kClose) {
      if (stack.empty()) fail(ErrorKind::MalformedSequence, "unbalanced ')' in skeleton");
      stack.pop_back();
    }
    out.push_back(tok);
    if (stack.empty()) break;
  }
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (!f.is_box)
      for (int k = f.kids; k < f.arity; ++k) {
        out.emplace_back(kOpenDrs);
        out.emplace_back(kClose);
      }
    out.emplace_back(kClose);
  }
  return out;
}

// ---------------------------------------------------------------------------

SkeletonGrammar::SkeletonGrammar(int max_length, int max_predicates, int max_referent_slots, bool allow_binary)
    : max_length_(max_length),
      max_predicates_(max_predicates),
      max_slots_(max_referent_slots),
      allow_binary_(allow_binary) {}

int SkeletonGrammar::close_cost() const {
  int cost = 0;
  for (const auto& f : stack_) cost += f.kind == Frame::Kind::Drs ? 1 : 2 * (f.arity - f.children) + 1;
  return cost;
}

bool SkeletonGrammar::structurally_allowed(std::string_view tok) const {
  if (done_) return false;
  if (stack_.empty()) return length_ == 0 && tok == kOpenDrs;
  const Frame& top = stack_.back();
  if (top.kind != Frame::Kind::Drs) {
    if (tok == kOpenDrs) return top.children < top.arity;
    if (tok == kClose) return top.children == top.arity;
    return false;
  }
  if (tok == kClose) return true;
  if (tok == kRef) return top.phase == 0;
  if (tok == kUnary || tok == kBinary) return top.phase <= 1 && (tok == kUnary || allow_binary_);
  if (starts_with(tok, kOpPrefix)) return top.phase <= 1 && operator_arity(tok.substr(kOpPrefix.size())) > 0;
  if (starts_with(tok, kRelPrefix)) return top.phase <= 2 && tok.size() > kRelPrefix.size();
  return false;
}

bool SkeletonGrammar::allows(std::string_view tok) const {
  if (!structurally_allowed(tok)) return false;
  SkeletonGrammar next = *this;
  next.push(tok);
  return next.length_ + next.close_cost() <= max_length_ && next.predicates_ <= max_predicates_ &&
         next.slots_ <= max_slots_;
}

void SkeletonGrammar::push(std::string_view tok) {
  ++length_;
  if (tok == kOpenDrs) {
    if (!stack_.empty()) ++stack_.back().children;
    stack_.push_back(Frame{Frame::Kind::Drs, 0, 0, 0});
  } else if (starts_with(tok, kOpPrefix) || starts_with(tok, kRelPrefix)) {
    const bool rel = starts_with(tok, kRelPrefix);
    stack_.back().phase = rel ? 2 : 1;
    stack_.push_back(Frame{rel ? Frame::Kind::Rel : Frame::Kind::Op, 0, 0, op_arity_of(tok)});
  } else if (tok == kClose) {
    stack_.pop_back();
    if (stack_.empty()) done_ = true;
  } else if (tok == kRef) {
    ++slots_;
  } else if (tok == kUnary || tok == kBinary) {
    stack_.back().phase = 1;
    ++predicates_;
    slots_ += tok == kUnary ? 1 : 2;
  }
}

}  // namespace xdrs
