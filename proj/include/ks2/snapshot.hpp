#pragma once

// Binary snapshot: "KS2D", u32 version (1), u64 nx, u64 ny, f64 L, f64 t,
// then u1 and u2 as row-major little-endian f64.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ks2/state.hpp"

namespace ks2 {

inline constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_snapshot(std::ostream& out, const State& s);
/// Throws SnapshotError on a bad header, truncated data or invalid densities.
State read_snapshot(std::istream& in);

/// Writes through a temporary file in the same directory and renames it.
void save_snapshot(const std::filesystem::path& path, const State& s);
State load_snapshot(const std::filesystem::path& path);

/// Replaces `path` with `contents` via temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace ks2
