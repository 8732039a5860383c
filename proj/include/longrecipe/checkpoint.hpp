#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace longrecipe::checkpoint {

// Dense row-major f32 tensor.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

struct CheckpointTensors {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> metadata;

  // Throws InputError when a shape has a non-positive dimension or its
  // element count disagrees with the data length.
  void validate() const;
  bool operator==(const CheckpointTensors&) const = default;
};

struct MergeSpec {
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  // Recorded in the merged checkpoint's metadata.
  std::string parent_a = "a";
  std::string parent_b = "b";

  bool sums_to_one() const;
};

// out[name] = lambda1 * a[name] + lambda2 * b[name] for every tensor.
// Throws InputError on differing name sets (message lists the symmetric
// difference), differing shapes (names the tensor), or non-finite output.
CheckpointTensors merge(const CheckpointTensors& a, const CheckpointTensors& b,
                        const MergeSpec& spec = {});

// Human-readable notes about a spec, e.g. weights not summing to one.
std::vector<std::string> merge_warnings(const MergeSpec& spec);

// Uniform sample without replacement of round(fraction * n) ids, returned in
// input order. Deterministic for a given seed.
std::vector<std::string> select_replay_subset(std::span<const std::string> ids, double fraction,
                                              std::uint64_t seed);

inline constexpr double kDefaultReplayFraction = 0.05;

// Container layout:
//   line 1: "LRCKPT1"
//   line 2: header, one line of JSON (metadata, tensor index, payload size
//           and payload CRC-32)
//   line 3: CRC-32 of line 2 as 8 lowercase hex digits
//   payload: tensors in name order, little-endian f32, no padding
std::string serialize(const CheckpointTensors& ckpt);
CheckpointTensors deserialize(std::string_view bytes);

void write_checkpoint(const CheckpointTensors& ckpt, const std::filesystem::path& path);
CheckpointTensors read_checkpoint(const std::filesystem::path& path);

}  // namespace longrecipe::checkpoint
