#include "gaitforge/buffer.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "gaitforge/config.hpp"
#include "gaitforge/error.hpp"

static_assert(std::endian::native == std::endian::little, "buffer I/O assumes little-endian");

namespace gaitforge {
namespace {

using nlohmann::json;

enum class Dtype : std::uint8_t { kF64 = 1, kU8 = 2, kI64 = 3 };

constexpr std::size_t kNameLen = 24;
constexpr std::size_t kHeaderLen = 8 + 4 + 4 + 8 + 8 + 8;
constexpr std::size_t kEntryLen = kNameLen + 1 + 3 + 4 + 8 + 8;

std::size_t dtype_size(Dtype d) { return d == Dtype::kU8 ? 1 : 8; }

struct Column {
  std::string name;
  Dtype dtype;
  std::uint32_t width;
  const void* data;
};

std::vector<Column> columns_of(const TransitionBuffer& b) {
  return {
      {"obs", Dtype::kF64, static_cast<std::uint32_t>(b.meta.obs_dim), b.obs.data()},
      {"action", Dtype::kF64, static_cast<std::uint32_t>(b.meta.act_dim), b.action.data()},
      {"reward", Dtype::kF64, 1, b.reward.data()},
      {"next_obs", Dtype::kF64, static_cast<std::uint32_t>(b.meta.obs_dim), b.next_obs.data()},
      {"terminated", Dtype::kU8, 1, b.terminated.data()},
      {"truncated", Dtype::kU8, 1, b.truncated.data()},
      {"episode_id", Dtype::kI64, 1, b.episode_id.data()},
  };
}

json meta_json(const BufferMetadata& m) {
  return json{{"schema_version", m.schema_version},
              {"morphology", m.morphology},
              {"spec_hash", m.spec_hash},
              {"spec", json::parse(m.spec_json.empty() ? "null" : m.spec_json)},
              {"seeds", m.seeds},
              {"control_dt", m.control_dt},
              {"created", m.created},
              {"final_episode_cut", m.final_episode_cut},
              {"obs_dim", m.obs_dim},
              {"act_dim", m.act_dim}};
}

template <typename T>
void put(std::string& out, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.append(raw, sizeof(T));
}

void pad8(std::string& out) {
  while (out.size() % 8 != 0) out.push_back('\0');
}

class Cursor {
 public:
  Cursor(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::kSchemaMismatch, std::string("buffer truncated reading ") + what +
                                                  " at byte offset " + std::to_string(pos_));
    }
  }

  const std::string& data_;
  std::size_t pos_;
};

[[noreturn]] void schema_error(const std::string& msg, std::size_t offset) {
  throw Error(ErrorCode::kSchemaMismatch, msg + " at byte offset " + std::to_string(offset));
}

}  // namespace

void check_consistent(const TransitionBuffer& b) {
  const std::size_t n = b.reward.size();
  const auto od = static_cast<std::size_t>(b.meta.obs_dim);
  const auto ad = static_cast<std::size_t>(b.meta.act_dim);
  const bool ok = b.obs.size() == n * od && b.next_obs.size() == n * od &&
                  b.action.size() == n * ad && b.terminated.size() == n &&
                  b.truncated.size() == n && b.episode_id.size() == n;
  if (!ok) throw Error(ErrorCode::kInvalidInput, "buffer column lengths disagree");
}

std::string sidecar_json(const TransitionBuffer& b) {
  json cols = json::array();
  for (const Column& c : columns_of(b)) {
    const char* dt = c.dtype == Dtype::kF64 ? "f64" : c.dtype == Dtype::kU8 ? "u8" : "i64";
    cols.push_back({{"name", c.name}, {"dtype", dt}, {"width", c.width}});
  }
  json doc = meta_json(b.meta);
  doc["rows"] = b.size();
  doc["columns"] = cols;
  return doc.dump(2) + "\n";
}

void write_buffer(const TransitionBuffer& b, const std::string& path) {
  check_consistent(b);
  const auto cols = columns_of(b);
  const std::uint64_t rows = b.size();
  const std::string meta = meta_json(b.meta).dump();

  std::string out;
  out.append(kBufferMagic, sizeof(kBufferMagic));
  put<std::uint32_t>(out, kBufferSchemaVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cols.size()));
  put<std::uint64_t>(out, rows);
  const std::uint64_t meta_offset = kHeaderLen + kEntryLen * cols.size();
  put<std::uint64_t>(out, meta_offset);
  put<std::uint64_t>(out, meta.size());

  std::uint64_t offset = meta_offset + meta.size();
  offset = (offset + 7) / 8 * 8;
  for (const Column& c : cols) {
    std::string name = c.name;
    name.resize(kNameLen, '\0');
    out += name;
    out.push_back(static_cast<char>(c.dtype));
    out.append(3, '\0');
    put<std::uint32_t>(out, c.width);
    const std::uint64_t len = rows * c.width * dtype_size(c.dtype);
    put<std::uint64_t>(out, offset);
    put<std::uint64_t>(out, len);
    offset = (offset + len + 7) / 8 * 8;
  }
  out += meta;
  pad8(out);
  for (const Column& c : cols) {
    out.append(static_cast<const char*>(c.data), rows * c.width * dtype_size(c.dtype));
    pad8(out);
  }

  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorCode::kIo, "write failed for " + path);
  }
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw Error(ErrorCode::kIo, "cannot open " + path + ".json for writing");
  side << sidecar_json(b);
  if (!side) throw Error(ErrorCode::kIo, "write failed for " + path + ".json");
}

TransitionBuffer read_buffer(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Cursor cur(data, 0);
  if (cur.bytes(sizeof(kBufferMagic), "magic") != std::string(kBufferMagic, sizeof(kBufferMagic))) {
    schema_error("not a gaitforge buffer (bad magic)", 0);
  }
  const auto version = cur.get<std::uint32_t>("schema version");
  if (version != kBufferSchemaVersion) {
    schema_error("unsupported buffer schema version " + std::to_string(version), 8);
  }
  const auto n_cols = cur.get<std::uint32_t>("column count");
  const auto rows = cur.get<std::uint64_t>("row count");
  const auto meta_offset = cur.get<std::uint64_t>("metadata offset");
  const auto meta_len = cur.get<std::uint64_t>("metadata length");

  TransitionBuffer b;
  struct Entry {
    std::string name;
    Dtype dtype;
    std::uint32_t width;
    std::uint64_t offset, len;
    std::size_t at;
  };
  std::vector<Entry> entries;
  for (std::uint32_t i = 0; i < n_cols; ++i) {
    Entry e;
    e.at = kHeaderLen + kEntryLen * i;
    std::string name = cur.bytes(kNameLen, "column name");
    e.name = name.substr(0, name.find('\0'));
    e.dtype = static_cast<Dtype>(cur.get<std::uint8_t>("column dtype"));
    cur.bytes(3, "column padding");
    e.width = cur.get<std::uint32_t>("column width");
    e.offset = cur.get<std::uint64_t>("column offset");
    e.len = cur.get<std::uint64_t>("column length");
    entries.push_back(e);
  }

  if (meta_offset + meta_len > data.size()) schema_error("metadata block truncated", meta_offset);
  json meta;
  try {
    meta = json::parse(data.substr(meta_offset, meta_len));
    BufferMetadata& m = b.meta;
    m.schema_version = meta.at("schema_version").get<std::uint32_t>();
    m.morphology = meta.at("morphology").get<std::string>();
    m.spec_hash = meta.at("spec_hash").get<std::uint64_t>();
    m.spec_json = meta.at("spec").is_null() ? "" : meta.at("spec").dump();
    m.seeds = meta.at("seeds").get<std::vector<std::uint64_t>>();
    m.control_dt = meta.at("control_dt").get<double>();
    m.created = meta.at("created").get<std::string>();
    m.final_episode_cut = meta.at("final_episode_cut").get<bool>();
    m.obs_dim = meta.at("obs_dim").get<int>();
    m.act_dim = meta.at("act_dim").get<int>();
  } catch (const json::exception& e) {
    schema_error(std::string("bad metadata block: ") + e.what(), meta_offset);
  }
  if (!b.meta.spec_json.empty()) {
    std::uint64_t hash = 0;
    try {
      hash = spec_hash(parse_spec(b.meta.spec_json));
    } catch (const Error& e) {
      schema_error(std::string("embedded spec is invalid: ") + e.what(), meta_offset);
    }
    if (hash != b.meta.spec_hash) schema_error("embedded spec does not match spec_hash", meta_offset);
  }

  const auto expected = columns_of(b);
  if (entries.size() != expected.size()) schema_error("unexpected column count", 12);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    const Column& want = expected[i];
    if (e.name != want.name || e.dtype != want.dtype || e.width != want.width) {
      schema_error("column '" + e.name + "' does not match the schema", e.at);
    }
    if (e.len != rows * e.width * dtype_size(e.dtype)) {
      schema_error("column '" + e.name + "' has the wrong length", e.at);
    }
    if (e.offset + e.len > data.size()) {
      schema_error("column '" + e.name + "' truncated", e.offset);
    }
  }
  const auto load = [&](std::size_t i, auto& vec) {
    using T = typename std::decay_t<decltype(vec)>::value_type;
    vec.resize(entries[i].len / sizeof(T));
    std::memcpy(vec.data(), data.data() + entries[i].offset, entries[i].len);
  };
  load(0, b.obs);
  load(1, b.action);
  load(2, b.reward);
  load(3, b.next_obs);
  load(4, b.terminated);
  load(5, b.truncated);
  load(6, b.episode_id);
  return b;
}

TransitionBuffer read_buffer(const std::string& path, const MorphologySpec& expected) {
  TransitionBuffer b = read_buffer(path);
  if (b.meta.spec_hash != spec_hash(expected)) {
    throw Error(ErrorCode::kSchemaMismatch, path + " was recorded for morphology '" +
                                                b.meta.morphology + "' with a different spec");
  }
  return b;
}

}  // namespace gaitforge
