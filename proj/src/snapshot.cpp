#include "ks2/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ks2 {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'K', 'S', '2', 'D'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw SnapshotError(fmt::format("snapshot truncated while reading {}", what));
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const State& s) {
  s.validate();
  const Grid& g = s.grid();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint64_t>(out, g.nx);
  put<std::uint64_t>(out, g.ny);
  put<double>(out, g.half_width);
  put<double>(out, s.t);
  for (const Field* f : {&s.u1, &s.u2}) {
    out.write(reinterpret_cast<const char*>(f->values.data()), static_cast<std::streamsize>(f->values.size() * sizeof(double)));
  }
  if (!out) throw SnapshotError("failed to write snapshot");
}

State read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw SnapshotError("not a KS2D snapshot (bad magic)");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kSnapshotVersion) throw SnapshotError(fmt::format("unsupported snapshot version {}", version));
  Grid g;
  g.nx = get<std::uint64_t>(in, "nx");
  g.ny = get<std::uint64_t>(in, "ny");
  g.half_width = get<double>(in, "L");
  const double t = get<double>(in, "t");
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(fmt::format("snapshot grid: {}", e.what()));
  }
  if (g.nx > (std::size_t{1} << 15)) throw SnapshotError(fmt::format("snapshot grid {}x{} is implausibly large", g.nx, g.ny));
  State s;
  s.t = t;
  s.u1 = Field(g);
  s.u2 = Field(g);
  for (Field* f : {&s.u1, &s.u2}) {
    if (!in.read(reinterpret_cast<char*>(f->values.data()), static_cast<std::streamsize>(f->values.size() * sizeof(double)))) {
      throw SnapshotError("snapshot truncated in density data");
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(fmt::format("snapshot: {}", e.what()));
  }
  return s;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("failed writing {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

void save_snapshot(const std::filesystem::path& path, const State& s) {
  std::ostringstream buf(std::ios::binary);
  write_snapshot(buf, s);
  write_file_atomic(path, buf.str());
}

State load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(fmt::format("cannot open snapshot {}", path.string()));
  return read_snapshot(in);
}

}  // namespace ks2
