#include "llbtoc/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "llbtoc/error.hpp"

namespace llbtoc {

namespace {

constexpr char kMagic[4] = {'L', 'L', 'B', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  void magic() {
    need(4);
    require(std::memcmp(bytes_.data() + pos_, kMagic, 4) == 0, ErrorKind::parse, "snapshot: bad magic bytes");
    pos_ += 4;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorKind::parse, "snapshot: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string encode_snapshot(const VectorField& field, SnapshotRole role) {
  const Grid& g = field.grid();
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(role));
  put_u32(out, static_cast<std::uint32_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) put_u32(out, static_cast<std::uint32_t>(g.cells[a]));
  for (int a = 0; a < g.dim; ++a) put_f64(out, g.extent[a]);
  for (const auto& v : field.values()) {
    put_f64(out, v.x);
    put_f64(out, v.y);
    put_f64(out, v.z);
  }
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  Reader r(bytes);
  r.magic();
  const auto version = r.u32();
  require(version == kVersion, ErrorKind::parse, "snapshot: unsupported version " + std::to_string(version));
  const auto role = r.u32();
  require(role <= 4, ErrorKind::parse, "snapshot: unknown role tag " + std::to_string(role));
  const auto dim = r.u32();
  require(dim >= 1 && dim <= 3, ErrorKind::parse, "snapshot: invalid dimension");
  std::vector<int> cells(dim);
  std::vector<double> extent(dim);
  for (auto& c : cells) c = static_cast<int>(r.u32());
  for (auto& e : extent) e = r.f64();
  const Grid g = make_grid(static_cast<int>(dim), cells, extent);
  std::vector<Vec3> values(g.size());
  for (auto& v : values) {
    v.x = r.f64();
    v.y = r.f64();
    v.z = r.f64();
  }
  require(r.done(), ErrorKind::parse, "snapshot: trailing bytes");
  return {VectorField(g, std::move(values)), static_cast<SnapshotRole>(role)};
}

void write_snapshot(const std::filesystem::path& path, const VectorField& field, SnapshotRole role) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  const std::string bytes = encode_snapshot(field, role);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(slurp(path)); }

void write_control(const std::filesystem::path& json_path, const ControlTrajectory& u) {
  const auto dir = json_path.parent_path();
  const auto stem = json_path.stem().string();
  nlohmann::json j;
  j["times"] = u.times();
  j["frames"] = nlohmann::json::array();
  for (std::size_t k = 0; k < u.node_count(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.llbf", stem.c_str(), k);
    write_snapshot(dir / name, u.frames()[k], SnapshotRole::control);
    j["frames"].push_back(name);
  }
  std::ofstream out(json_path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + json_path.string());
  out << j.dump(2) << '\n';
}

ControlTrajectory read_control(const std::filesystem::path& json_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(json_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "control file " + json_path.string() + ": " + e.what());
  }
  require(j.contains("times") && j.contains("frames"), ErrorKind::parse, "control file needs times and frames");
  std::vector<double> times = j["times"].get<std::vector<double>>();
  std::vector<VectorField> frames;
  for (const auto& f : j["frames"]) frames.push_back(read_snapshot(json_path.parent_path() / f.get<std::string>()).field);
  return ControlTrajectory(std::move(times), std::move(frames));
}

}  // namespace llbtoc
