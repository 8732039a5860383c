#include "longrecipe/checkpoint.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "longrecipe/error.hpp"
#include "longrecipe/kernels.hpp"
#include "longrecipe/rng.hpp"

namespace longrecipe::checkpoint {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "LRCKPT1";

std::string crc_hex(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in pieces
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
    off += chunk;
  }
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

void append_le(std::string& out, std::span<const float> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size() * sizeof(float));
  char* dst = out.data() + start;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, values.data(), values.size() * sizeof(float));
  } else {
    for (float v : values) {
      const auto bits = __builtin_bswap32(std::bit_cast<std::uint32_t>(v));
      std::memcpy(dst, &bits, sizeof bits);
      dst += sizeof bits;
    }
  }
}

void read_le(std::string_view src, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), src.data(), out.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, src.data() + i * sizeof bits, sizeof bits);
      out[i] = std::bit_cast<float>(__builtin_bswap32(bits));
    }
  }
}

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace

std::int64_t Tensor::element_count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void CheckpointTensors::validate() const {
  for (const auto& [name, t] : tensors) {
    require_input(!name.empty(), "tensor with empty name");
    for (auto d : t.shape) {
      require_input(d >= 1, "tensor '" + name + "' has non-positive dimension");
    }
    require_input(t.element_count() == static_cast<std::int64_t>(t.data.size()),
                  "tensor '" + name + "' data length " + std::to_string(t.data.size()) +
                      " does not match shape " + shape_string(t.shape));
  }
}

bool MergeSpec::sums_to_one() const { return std::fabs(lambda1 + lambda2 - 1.0) <= 1e-12; }

std::vector<std::string> merge_warnings(const MergeSpec& spec) {
  std::vector<std::string> out;
  if (!spec.sums_to_one()) {
    out.push_back("lambda1 + lambda2 = " + std::to_string(spec.lambda1 + spec.lambda2) +
                  " (not 1); the merge is not a convex combination");
  }
  return out;
}

CheckpointTensors merge(const CheckpointTensors& a, const CheckpointTensors& b,
                        const MergeSpec& spec) {
  require_input(std::isfinite(spec.lambda1) && std::isfinite(spec.lambda2),
                "merge weights must be finite");
  a.validate();
  b.validate();

  std::vector<std::string> only_a, only_b;
  for (const auto& [name, t] : a.tensors) {
    if (!b.tensors.contains(name)) only_a.push_back(name);
  }
  for (const auto& [name, t] : b.tensors) {
    if (!a.tensors.contains(name)) only_b.push_back(name);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "checkpoint tensor names differ;";
    if (!only_a.empty()) {
      msg += " only in " + spec.parent_a + ":";
      for (const auto& n : only_a) msg += " " + n;
      if (!only_b.empty()) msg += ";";
    }
    if (!only_b.empty()) {
      msg += " only in " + spec.parent_b + ":";
      for (const auto& n : only_b) msg += " " + n;
    }
    throw InputError(msg);
  }

  CheckpointTensors out;
  for (const auto& [name, ta] : a.tensors) {
    const Tensor& tb = b.tensors.at(name);
    require_input(ta.shape == tb.shape, "tensor '" + name + "' shape mismatch: " +
                                            shape_string(ta.shape) + " vs " +
                                            shape_string(tb.shape));
    Tensor merged{ta.shape, std::vector<float>(ta.data.size())};
    kernels::merge_weighted(ta.data, tb.data, spec.lambda1, spec.lambda2, merged.data);
    const bool finite = std::all_of(merged.data.begin(), merged.data.end(),
                                    [](float v) { return std::isfinite(v); });
    require_input(finite, "tensor '" + name + "' has non-finite values after merging");
    out.tensors.emplace(name, std::move(merged));
  }
  char buf[32];
  out.metadata["merge.parent_a"] = spec.parent_a;
  out.metadata["merge.parent_b"] = spec.parent_b;
  std::snprintf(buf, sizeof buf, "%.17g", spec.lambda1);
  out.metadata["merge.lambda1"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", spec.lambda2);
  out.metadata["merge.lambda2"] = buf;
  return out;
}

std::vector<std::string> select_replay_subset(std::span<const std::string> ids, double fraction,
                                              std::uint64_t seed) {
  require_input(fraction > 0.0 && fraction <= 1.0, "replay fraction must be in (0, 1]");
  require_input(!ids.empty(), "replay selection over an empty corpus");
  const auto k = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(ids.size())));
  Rng rng(mix64(seed ^ 0x7265706c6179ULL));
  std::vector<std::string> out;
  out.reserve(k);
  for (auto i : sample_sorted_subset(ids.size(), k, rng)) out.push_back(ids[i]);
  return out;
}

std::string serialize(const CheckpointTensors& ckpt) {
  ckpt.validate();
  std::string payload;
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    index.push_back({{"name", name},
                     {"dtype", "f32"},
                     {"shape", t.shape},
                     {"offset", offset},
                     {"count", t.data.size()}});
    append_le(payload, t.data);
    offset += t.data.size() * sizeof(float);
  }
  json header = {{"format", "longrecipe-checkpoint"},
                 {"version", 1},
                 {"metadata", ckpt.metadata},
                 {"tensors", index},
                 {"payload_bytes", payload.size()},
                 {"payload_crc32", crc_hex(payload)}};
  const std::string header_line = header.dump();
  std::string out;
  out.reserve(payload.size() + header_line.size() + 32);
  out.append(kMagic).push_back('\n');
  out.append(header_line).push_back('\n');
  out.append(crc_hex(header_line)).push_back('\n');
  out.append(payload);
  return out;
}

CheckpointTensors deserialize(std::string_view bytes) {
  auto next_line = [&bytes](const char* what) {
    const auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw InputError(std::string("checkpoint: truncated ") + what);
    std::string_view line = bytes.substr(0, nl);
    bytes.remove_prefix(nl + 1);
    return line;
  };
  require_input(next_line("magic") == kMagic, "checkpoint: bad magic");
  const std::string_view header_line = next_line("header");
  const std::string_view header_crc = next_line("header checksum");
  require_input(header_crc == crc_hex(header_line), "checkpoint: header checksum mismatch");

  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  CheckpointTensors ckpt;
  try {
    require_input(header.at("format") == "longrecipe-checkpoint" && header.at("version") == 1,
                  "checkpoint: unsupported format or version");
    const auto payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
    require_input(bytes.size() >= payload_bytes, "checkpoint: truncated payload");
    require_input(bytes.size() == payload_bytes, "checkpoint: trailing bytes after payload");
    require_input(header.at("payload_crc32").get<std::string>() == crc_hex(bytes),
                  "checkpoint: payload checksum mismatch");
    ckpt.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
    std::uint64_t expect_offset = 0;
    for (const auto& entry : header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      require_input(entry.at("dtype") == "f32", "checkpoint: tensor '" + name + "' is not f32");
      Tensor t;
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto count = entry.at("count").get<std::uint64_t>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      require_input(offset == expect_offset, "checkpoint: tensor '" + name + "' misplaced");
      require_input(offset + count * sizeof(float) <= payload_bytes,
                    "checkpoint: tensor '" + name + "' exceeds payload");
      t.data.resize(count);
      read_le(bytes.substr(offset, count * sizeof(float)), t.data);
      expect_offset = offset + count * sizeof(float);
      require_input(ckpt.tensors.emplace(name, std::move(t)).second,
                    "checkpoint: duplicate tensor '" + name + "'");
    }
    require_input(expect_offset == payload_bytes, "checkpoint: payload size mismatch");
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  ckpt.validate();
  return ckpt;
}

void write_checkpoint(const CheckpointTensors& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require_input(static_cast<bool>(out), "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require_input(static_cast<bool>(out), "failed writing " + path.string());
}

CheckpointTensors read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(static_cast<bool>(in), "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace longrecipe::checkpoint
