#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xdrs/drs.hpp"

namespace xdrs {

// Tree form of a DRS. Internal labels: DRS, REF, PRED, OP, REL.
//   (DRS (REF x1) (PRED laptop x1) (PRED Owner x1 "speaker")
//        (OP NOT (DRS ...)) (REL CONTINUATION (DRS ...) (DRS ...)))
// Within a DRS node referents come first, then conditions in box order,
// then hosted relations. Box ids are implicit; a variable used k times
// appears as k leaves.
struct TreeNode {
  std::string label;
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

using DrsTree = TreeNode;

namespace tree_labels {
inline constexpr std::string_view kDrs = "DRS";
inline constexpr std::string_view kRef = "REF";
inline constexpr std::string_view kPred = "PRED";
inline constexpr std::string_view kOp = "OP";
inline constexpr std::string_view kRel = "REL";
}  // namespace tree_labels

// Whitespace-separated bracketed tokens: "(" and the node label are two
// tokens, ")" closes, anything else is a leaf.
struct LinearSeq {
  std::vector<std::string> tokens;

  std::string str() const;
  static LinearSeq parse(std::string_view line);
  friend bool operator==(const LinearSeq&, const LinearSeq&) = default;
};

DrsTree to_tree(const Drs& drs);
Drs from_tree(const DrsTree& tree);

LinearSeq linearize(const DrsTree& tree);
DrsTree delinearize(const LinearSeq& seq);

std::size_t node_count(const DrsTree& tree);
std::size_t tree_depth(const DrsTree& tree);

// Renames referents to x1, x2, ... / e1, ... in order of first appearance
// in the tree, and boxes to b1, b2, ... in preorder.
Drs canonicalize(const Drs& drs);

}  // namespace xdrs
