#pragma once

// Embedding datasets: in-memory representation, validation, FSEB binary and
// CSV ingest, and the per-class record index used by the episode sampler.
//
// FSEB v1 layout (little-endian):
//   "FSEB" | u16 version=1 | u8 kind (0 pooled, 1 grid) | u32 C, H, W
//   | u32 class count, then per class: u32 byte length + UTF-8 name
//   | u64 record count, then per record: u64 id, u32 label, C*H*W float32
// Grid payloads are channel-major per position: index = (h*W + w)*C + c.
//
// CSV layout: optional first line "#classes,<name0>,<name1>,..." followed by
// the header "id,label,f0,...,f{D-1}" and one row per record. CSV always
// describes pooled embeddings.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fsk/error.hpp"

namespace fsk {

enum class ShapeKind : std::uint8_t { pooled = 0, grid = 1 };

struct EmbeddingShape {
  ShapeKind kind = ShapeKind::pooled;
  std::uint32_t dim = 1;
  std::uint32_t height = 1;
  std::uint32_t width = 1;

  static EmbeddingShape pooled(std::uint32_t channels) {
    return {ShapeKind::pooled, channels, 1, 1};
  }
  static EmbeddingShape grid(std::uint32_t height, std::uint32_t width,
                             std::uint32_t channels) {
    return {ShapeKind::grid, channels, height, width};
  }

  std::size_t positions() const { return std::size_t{height} * width; }
  std::size_t size() const { return positions() * dim; }

  bool operator==(const EmbeddingShape&) const = default;
};

struct EmbeddingRecord {
  std::uint64_t id = 0;
  std::uint32_t label = 0;
  std::vector<float> embedding;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingDataset {
  std::string name;
  std::vector<EmbeddingRecord> items;
  std::vector<std::string> class_names;
  EmbeddingShape shape;

  std::size_t num_classes() const { return class_names.size(); }
};

enum class DatasetFormat { binary, csv };

/// Record positions (indices into `EmbeddingDataset::items`) for each class,
/// in class order. Positions map one-to-one onto record ids.
struct ClassIndex {
  std::vector<std::vector<std::size_t>> members;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& m : members) n += m.size();
    return n;
  }
};

inline constexpr std::uint16_t kFsebVersion = 1;

inline void validate_shape(const EmbeddingShape& shape) {
  if (shape.dim < 1 || shape.height < 1 || shape.width < 1)
    throw DataError("invalid shape: every dimension must be >= 1");
  if (shape.kind == ShapeKind::pooled && (shape.height != 1 || shape.width != 1))
    throw DataError("invalid shape: pooled embeddings must have height = width = 1");
}

/// Checks every dataset invariant; throws DataError naming the first
/// offending record.
inline void validate(const EmbeddingDataset& dataset) {
  validate_shape(dataset.shape);
  const std::size_t expected = dataset.shape.size();
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(dataset.items.size());
  for (std::size_t r = 0; r < dataset.items.size(); ++r) {
    const auto& rec = dataset.items[r];
    const std::string at = " at record " + std::to_string(r);
    if (rec.label >= dataset.class_names.size())
      throw DataError("label out of range" + at + " (label " + std::to_string(rec.label) +
                      ", " + std::to_string(dataset.class_names.size()) + " classes)");
    if (rec.embedding.size() != expected)
      throw DataError("dimension mismatch" + at + " (expected " + std::to_string(expected) +
                      " values, got " + std::to_string(rec.embedding.size()) + ")");
    for (float v : rec.embedding)
      if (!std::isfinite(v)) throw DataError("non-finite value" + at);
    if (!seen.insert(rec.id).second)
      throw DataError("duplicate id " + std::to_string(rec.id) + at);
  }
}

namespace detail {

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  template <typename UInt>
  UInt read_uint(const char* what) {
    if (!has(sizeof(UInt))) throw DataError(std::string("malformed header: truncated ") + what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
      v |= static_cast<UInt>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(UInt);
    return v;
  }

  std::string read_string(std::size_t n) {
    if (!has(n)) throw DataError("malformed header: truncated class name");
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  // Caller has checked has(4 * n).
  void read_floats(std::vector<float>& out, std::size_t n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (std::size_t b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
      out[i] = std::bit_cast<float>(bits);
      pos_ += 4;
    }
  }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  template <typename UInt>
  void write_uint(UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
      bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void write_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void write_float(float f) { write_uint(std::bit_cast<std::uint32_t>(f)); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline EmbeddingDataset load_binary(const std::filesystem::path& path) {
  ByteReader reader(read_file(path));
  if (!reader.has(4) || reader.read_string(4) != "FSEB")
    throw DataError("malformed header: bad magic (expected FSEB)");
  const auto version = reader.read_uint<std::uint16_t>("version");
  if (version != kFsebVersion)
    throw DataError("unknown format version " + std::to_string(version));

  EmbeddingDataset ds;
  ds.name = path.stem().string();
  const auto kind = reader.read_uint<std::uint8_t>("shape kind");
  if (kind > 1) throw DataError("malformed header: shape kind " + std::to_string(kind));
  ds.shape.kind = static_cast<ShapeKind>(kind);
  ds.shape.dim = reader.read_uint<std::uint32_t>("C");
  ds.shape.height = reader.read_uint<std::uint32_t>("H");
  ds.shape.width = reader.read_uint<std::uint32_t>("W");
  validate_shape(ds.shape);

  const auto class_count = reader.read_uint<std::uint32_t>("class count");
  for (std::uint32_t c = 0; c < class_count; ++c) {
    const auto len = reader.read_uint<std::uint32_t>("class name length");
    ds.class_names.push_back(reader.read_string(len));
  }

  const auto record_count = reader.read_uint<std::uint64_t>("record count");
  const std::size_t values = ds.shape.size();
  const std::size_t record_bytes = 8 + 4 + 4 * values;
  if (record_count > reader.remaining() / record_bytes)
    throw DataError("truncated payload: " + std::to_string(record_count) + " records declared, " +
                    std::to_string(reader.remaining()) + " payload bytes present (record " +
                    std::to_string(reader.remaining() / record_bytes) + " incomplete)");
  ds.items.resize(record_count);
  for (std::uint64_t r = 0; r < record_count; ++r) {
    auto& rec = ds.items[r];
    rec.id = reader.read_uint<std::uint64_t>("record id");
    rec.label = reader.read_uint<std::uint32_t>("record label");
    reader.read_floats(rec.embedding, values);
  }
  if (reader.remaining() != 0)
    throw DataError("payload length mismatch: " + std::to_string(reader.remaining()) +
                    " trailing bytes after record " + std::to_string(record_count));
  validate(ds);
  return ds;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

inline EmbeddingDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  EmbeddingDataset ds;
  ds.name = path.stem().string();
  std::string line;
  bool declared_classes = false;
  if (!std::getline(in, line)) throw DataError("malformed header: empty file");
  if (line.rfind("#classes", 0) == 0) {
    auto fields = split(trim(line), ',');
    for (std::size_t i = 1; i < fields.size(); ++i) ds.class_names.emplace_back(trim(fields[i]));
    declared_classes = true;
    if (!std::getline(in, line)) throw DataError("malformed header: missing column header");
  }

  const auto header = split(trim(line), ',');
  if (header.size() < 3 || trim(header[0]) != "id" || trim(header[1]) != "label")
    throw DataError("malformed header: expected id,label,f0,...");
  const std::size_t dim = header.size() - 2;
  for (std::size_t f = 0; f < dim; ++f)
    if (trim(header[f + 2]) != "f" + std::to_string(f))
      throw DataError("malformed header: column " + std::to_string(f + 2) + " should be f" +
                      std::to_string(f));
  ds.shape = EmbeddingShape::pooled(static_cast<std::uint32_t>(dim));

  std::uint32_t max_label = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::string at = " at record " + std::to_string(ds.items.size());
    const auto cells = split(trim(line), ',');
    if (cells.size() != dim + 2)
      throw DataError("dimension mismatch" + at + " (expected " + std::to_string(dim) +
                      " features, got " + std::to_string(cells.size() < 2 ? 0 : cells.size() - 2) + ")");
    EmbeddingRecord rec;
    if (!parse_number(cells[0], rec.id)) throw DataError("unparsable id" + at);
    if (!parse_number(cells[1], rec.label)) throw DataError("unparsable label" + at);
    rec.embedding.resize(dim);
    for (std::size_t f = 0; f < dim; ++f)
      if (!parse_number(cells[f + 2], rec.embedding[f]))
        throw DataError("unparsable value in column f" + std::to_string(f) + at);
    max_label = std::max(max_label, rec.label);
    ds.items.push_back(std::move(rec));
  }
  if (!declared_classes && !ds.items.empty())
    for (std::uint32_t c = 0; c <= max_label; ++c) ds.class_names.push_back("class_" + std::to_string(c));
  validate(ds);
  return ds;
}

}  // namespace detail

inline DatasetFormat parse_format(std::string_view text) {
  if (text == "binary" || text == "fseb") return DatasetFormat::binary;
  if (text == "csv") return DatasetFormat::csv;
  throw DataError("unknown dataset format '" + std::string(text) + "'");
}

inline EmbeddingDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
  return format == DatasetFormat::binary ? detail::load_binary(path) : detail::load_csv(path);
}

/// Writes `dataset` as FSEB v1. The name is not stored; loading takes it
/// from the file stem.
inline void save_dataset(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  detail::ByteWriter w;
  w.write_bytes("FSEB");
  w.write_uint<std::uint16_t>(kFsebVersion);
  w.write_uint<std::uint8_t>(static_cast<std::uint8_t>(dataset.shape.kind));
  w.write_uint<std::uint32_t>(dataset.shape.dim);
  w.write_uint<std::uint32_t>(dataset.shape.height);
  w.write_uint<std::uint32_t>(dataset.shape.width);
  w.write_uint<std::uint32_t>(static_cast<std::uint32_t>(dataset.class_names.size()));
  for (const auto& name : dataset.class_names) {
    w.write_uint<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.write_bytes(name);
  }
  w.write_uint<std::uint64_t>(dataset.items.size());
  for (const auto& rec : dataset.items) {
    w.write_uint<std::uint64_t>(rec.id);
    w.write_uint<std::uint32_t>(rec.label);
    for (float v : rec.embedding) w.write_float(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("write failed: " + path.string());
}

/// CSV export of a pooled dataset, including the #classes line.
inline void save_csv(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  if (dataset.shape.kind != ShapeKind::pooled)
    throw DataError("grid shapes are not representable in CSV");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "#classes";
  for (const auto& name : dataset.class_names) out << ',' << name;
  out << "\nid,label";
  for (std::uint32_t f = 0; f < dataset.shape.dim; ++f) out << ",f" << f;
  out << '\n';
  char buf[32];
  for (const auto& rec : dataset.items) {
    out << rec.id << ',' << rec.label;
    for (float v : rec.embedding) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

inline ClassIndex build_class_index(const EmbeddingDataset& dataset) {
  ClassIndex index;
  index.members.resize(dataset.class_names.size());
  for (std::size_t r = 0; r < dataset.items.size(); ++r)
    index.members[dataset.items[r].label].push_back(r);
  return index;
}

}  // namespace fsk
