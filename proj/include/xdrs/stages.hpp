#pragma once

// Coarse-to-fine factorization of a DRS tree into three token streams:
//   skeleton   - boxes, operators, relations, REF markers and predicate
//                placeholders (P1 unary, P2 binary)
//   predicates - one label per placeholder
//   referents  - one filler per REF marker and per predicate argument
// and the inverse assembly back into a tree.

#include <string>
#include <string_view>
#include <vector>

#include "xdrs/drs_tree.hpp"

namespace xdrs {

namespace skeleton_tokens {
inline constexpr std::string_view kOpenDrs = "(DRS";
inline constexpr std::string_view kClose = ")";
inline constexpr std::string_view kRef = "REF";
inline constexpr std::string_view kUnary = "P1";
inline constexpr std::string_view kBinary = "P2";
inline constexpr std::string_view kOpPrefix = "(OP:";
inline constexpr std::string_view kRelPrefix = "(REL:";
}  // namespace skeleton_tokens

struct StageTargets {
  std::vector<std::string> skeleton;
  std::vector<std::string> predicates;
  std::vector<std::string> referents;  // variable names or quoted constants
};

StageTargets split_stages(const DrsTree& tree);

// Inverse of split_stages. Count mismatches between the streams raise
// InternalContractViolation; a malformed skeleton raises MalformedSequence.
DrsTree assemble_tree(const std::vector<std::string>& skeleton, const std::vector<std::string>& predicates,
                      const std::vector<std::string>& referents);

// Box structure and slot inventory of a skeleton.
struct SkeletonLayout {
  struct BoxInfo {
    int parent = -1;  // enclosing box
    int left = -1;    // first box of IMP/DUP/relation when this is the second
  };
  struct Placeholder {
    int token = 0;
    int box = 0;
    int arity = 1;
  };
  struct Slot {
    enum class Kind { Ref, Arg };
    Kind kind = Kind::Ref;
    int box = 0;
    int token = 0;        // skeleton position
    int placeholder = -1; // for Arg slots
    int arg = 0;          // 0 or 1
  };

  std::vector<BoxInfo> boxes;
  std::vector<Placeholder> placeholders;
  std::vector<Slot> slots;

  static SkeletonLayout analyze(const std::vector<std::string>& skeleton);
  // The box itself, its left box, then the same for each enclosing box.
  std::vector<int> accessible(int box) const;
};

// Closes an unfinished skeleton: missing boxes of open operators are added
// as empty boxes, then every open bracket is closed.
std::vector<std::string> close_skeleton(const std::vector<std::string>& skeleton);

// Incremental bracket grammar for free skeleton decoding. A token is legal
// only if the sequence can still be completed within the length and slot
// budgets, so decoding always ends balanced.
class SkeletonGrammar {
 public:
  SkeletonGrammar(int max_length, int max_predicates, int max_referent_slots, bool allow_binary = true);

  bool allows(std::string_view token) const;
  void push(std::string_view token);
  bool done() const { return done_; }
  int length() const { return length_; }

 private:
  struct Frame {
    enum class Kind { Drs, Op, Rel } kind = Kind::Drs;
    int phase = 0;     // Drs: 0 referents, 1 conditions, 2 relations
    int children = 0;  // Op/Rel: boxes opened so far
    int arity = 0;
  };
  int close_cost() const;
  bool structurally_allowed(std::string_view token) const;

  int max_length_, max_predicates_, max_slots_;
  bool allow_binary_;
  std::vector<Frame> stack_;
  int length_ = 0;
  int predicates_ = 0;
  int slots_ = 0;
  bool done_ = false;
};

}  // namespace xdrs
