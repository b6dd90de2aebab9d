#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitforge/model.hpp"

namespace gaitforge {

inline constexpr std::uint32_t kBufferSchemaVersion = 1;
inline constexpr char kBufferMagic[8] = {'G', 'A', 'I', 'T', 'F', 'B', 'U', 'F'};

struct BufferMetadata {
  std::uint32_t schema_version = kBufferSchemaVersion;
  std::string morphology;
  std::uint64_t spec_hash = 0;
  std::string spec_json;             // canonical config document of the recording spec
  std::vector<std::uint64_t> seeds;  // indexed by episode_id
  double control_dt = 0.0;
  std::string created;               // ISO-8601 UTC
  bool final_episode_cut = false;    // last episode stopped at the transition budget
  int obs_dim = 0;
  int act_dim = 0;

  bool operator==(const BufferMetadata&) const = default;
};

// Row-major within each column: obs[i * obs_dim + k] is entry k of row i.
struct TransitionBuffer {
  BufferMetadata meta;
  std::vector<double> obs;
  std::vector<double> action;
  std::vector<double> reward;
  std::vector<double> next_obs;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  std::vector<std::int64_t> episode_id;

  std::size_t size() const { return reward.size(); }
  bool operator==(const TransitionBuffer&) const = default;
};

// Throws kInvalidInput when column lengths disagree with the metadata dims.
void check_consistent(const TransitionBuffer& buf);

// Writes `path` and a metadata sidecar at `path + ".json"`. Throws kIo.
void write_buffer(const TransitionBuffer& buf, const std::string& path);

// Throws kIo when unreadable and kSchemaMismatch (with the byte offset) for
// a bad magic, version, column table, truncated file, or an embedded spec
// that does not hash to the recorded spec_hash.
TransitionBuffer read_buffer(const std::string& path);

// As above, and refuses (kSchemaMismatch) buffers recorded for another spec.
TransitionBuffer read_buffer(const std::string& path, const MorphologySpec& expected);

std::string sidecar_json(const TransitionBuffer& buf);

}  // namespace gaitforge
