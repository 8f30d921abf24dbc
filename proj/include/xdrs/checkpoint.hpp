#pragma once

// Self-describing model file:
//   XDRS-CKPT v1
//   section manifest <bytes>   key = value lines (config, vocab hashes)
//   section blob:<name> <bytes> opaque text (vocabularies)
//   section tensors <bytes>    "<name> <rows> <cols> <trainable>" per tensor
//   section payload <bytes>    float64 little-endian values, tensors in table order

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xdrs/autodiff.hpp"

namespace xdrs {

inline constexpr const char* kCheckpointHeader = "XDRS-CKPT v1";

struct Checkpoint {
  struct Tensor {
    std::string name;
    Shape shape;
    bool trainable = true;
    std::vector<double> data;
  };
  std::map<std::string, std::string> manifest;
  std::map<std::string, std::string> blobs;
  std::vector<Tensor> tensors;

  static Checkpoint capture(const ParameterStore& store);
  // Every stored tensor must exist in `store` with the same shape.
  void restore(ParameterStore& store) const;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string format_kv(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_kv(std::string_view text);

}  // namespace xdrs
