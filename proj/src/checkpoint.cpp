#include "mtvloop/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace mtvloop {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kStage1Magic[8] = {'M', 'T', 'V', 'S', '1', 'C', 'K', '\0'};
constexpr char kMtvMagic[8] = {'M', 'T', 'V', 'T', 'I', 'L', 'E', '\0'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw DataError("checkpoint: cannot open " + path.string() + " for writing");
  }
  void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }
  template <class T>
  void pod(T v) {
    bytes(&v, sizeof v);
  }
  void floats(const std::vector<double>& values) {
    for (double v : values) pod(float(v));
  }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("checkpoint: write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataError("checkpoint: cannot open " + path.string());
  }
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), std::streamsize(n));
    if (size_t(in_.gcount()) != n) throw DataError("checkpoint: truncated file " + path_.string());
  }
  template <class T>
  T pod() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  void floats(std::vector<double>& values) {
    for (double& v : values) v = double(pod<float>());
  }
  void expect_end() {
    in_.peek();
    if (!in_.eof()) throw DataError("checkpoint: trailing bytes in " + path_.string());
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_header(Writer& w, const char (&magic)[8], uint32_t version) {
  w.bytes(magic, 8);
  w.pod(version);
}

void read_header(Reader& r, const char (&magic)[8], uint32_t version, const char* what) {
  char m[8];
  r.bytes(m, 8);
  if (std::memcmp(m, magic, 8) != 0) throw DataError(std::string(what) + ": bad magic");
  uint32_t v = r.pod<uint32_t>();
  if (v != version)
    throw DataError(std::string(what) + ": unsupported version " + std::to_string(v) + " (expected " +
                    std::to_string(version) + ")");
}

void write_camera(Writer& w, const CameraModel& c) {
  w.pod(c.fx);
  w.pod(c.fy);
  w.pod(c.cx);
  w.pod(c.cy);
  w.pod(uint32_t(c.width));
  w.pod(uint32_t(c.height));
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) w.pod(c.rotation(r, k));
  for (int r = 0; r < 3; ++r) w.pod(c.translation(r));
}

CameraModel read_camera(Reader& r) {
  CameraModel c;
  c.fx = r.pod<double>();
  c.fy = r.pod<double>();
  c.cx = r.pod<double>();
  c.cy = r.pod<double>();
  c.width = int(r.pod<uint32_t>());
  c.height = int(r.pod<uint32_t>());
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) c.rotation(i, k) = r.pod<double>();
  for (int i = 0; i < 3; ++i) c.translation(i) = r.pod<double>();
  c.validate();
  return c;
}

void write_depths(Writer& w, const std::vector<double>& depths) {
  for (double d : depths) w.pod(d);
}

std::vector<double> read_depths(Reader& r, uint32_t count) {
  std::vector<double> depths(count);
  for (double& d : depths) d = r.pod<double>();
  return depths;
}

float round_f32(double v) { return float(v); }

void quantize(std::vector<double>& values) {
  for (double& v : values) v = double(round_f32(v));
}

}  // namespace

void save_stage1_checkpoint(const std::filesystem::path& path, const Mpi& mpi, const LoopableVolume& loopable) {
  mpi.validate();
  MTV_REQUIRE(int(loopable.values.size()) == mpi.depth_count(), "checkpoint: loopable depth mismatch");
  Writer w(path);
  write_header(w, kStage1Magic, kStage1CheckpointVersion);
  w.pod(uint32_t(mpi.depth_count()));
  w.pod(uint32_t(mpi.height()));
  w.pod(uint32_t(mpi.width()));
  write_depths(w, mpi.stack.depths);
  write_camera(w, mpi.stack.reference);
  for (const auto& p : mpi.planes) w.floats(p.storage());
  for (const auto& l : loopable.values) {
    MTV_REQUIRE(l.height() == mpi.height() && l.width() == mpi.width(), "checkpoint: loopable shape mismatch");
    w.floats(l.storage());
  }
  w.finish();
}

Stage1Checkpoint load_stage1_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  read_header(r, kStage1Magic, kStage1CheckpointVersion, "stage-1 checkpoint");
  uint32_t d = r.pod<uint32_t>(), h = r.pod<uint32_t>(), w = r.pod<uint32_t>();
  MTV_REQUIRE(d >= 1 && d < 4096 && h < 65536 && w < 65536, "stage-1 checkpoint: implausible dimensions");
  Stage1Checkpoint ck;
  ck.mpi.stack.depths = read_depths(r, d);
  ck.mpi.stack.reference = read_camera(r);
  for (uint32_t k = 0; k < d; ++k) {
    ck.mpi.planes.emplace_back(int(h), int(w), 4);
    r.floats(ck.mpi.planes.back().storage());
  }
  for (uint32_t k = 0; k < d; ++k) {
    ck.loopable.values.emplace_back(int(h), int(w), 1);
    r.floats(ck.loopable.values.back().storage());
  }
  r.expect_end();
  return ck;
}

void save_mtv(const std::filesystem::path& path, const Mtv& mtv) {
  mtv.validate();
  Writer w(path);
  write_header(w, kMtvMagic, kMtvCheckpointVersion);
  w.pod(uint32_t(mtv.tile_size));
  w.pod(uint32_t(mtv.frame_count));
  w.pod(uint32_t(mtv.stack.size()));
  w.pod(uint32_t(mtv.grid_rows));
  w.pod(uint32_t(mtv.grid_cols));
  write_depths(w, mtv.stack.depths);
  write_camera(w, mtv.stack.reference);
  w.pod(uint32_t(mtv.tiles.size()));
  const uint64_t patch = uint64_t(mtv.tile_size) * mtv.tile_size * 4;
  uint64_t offset = 0;
  for (const Tile& t : mtv.tiles) {
    w.pod(uint32_t(t.plane));
    w.pod(uint32_t(t.row));
    w.pod(uint32_t(t.col));
    w.pod(uint8_t(t.label));
    const uint8_t pad[3] = {0, 0, 0};
    w.bytes(pad, 3);
    w.pod(offset);
    offset += t.label == TileLabel::loop ? patch * mtv.frame_count : patch;
  }
  for (const Tile& t : mtv.tiles) {
    if (t.label == TileLabel::static_) w.floats(t.static_patch.storage());
    for (const auto& f : t.loop_patch) w.floats(f.storage());
  }
  w.finish();
}

Mtv load_mtv(const std::filesystem::path& path) {
  Reader r(path);
  read_header(r, kMtvMagic, kMtvCheckpointVersion, "mtv checkpoint");
  Mtv mtv;
  mtv.tile_size = int(r.pod<uint32_t>());
  mtv.frame_count = int(r.pod<uint32_t>());
  uint32_t depth = r.pod<uint32_t>();
  mtv.grid_rows = int(r.pod<uint32_t>());
  mtv.grid_cols = int(r.pod<uint32_t>());
  MTV_REQUIRE(mtv.tile_size >= 1 && mtv.tile_size < 4096 && mtv.frame_count >= 1 && depth >= 1 && depth < 4096,
              "mtv checkpoint: implausible header");
  mtv.stack.depths = read_depths(r, depth);
  mtv.stack.reference = read_camera(r);
  uint32_t count = r.pod<uint32_t>();
  const uint64_t patch = uint64_t(mtv.tile_size) * mtv.tile_size * 4;
  uint64_t expected = 0;
  for (uint32_t i = 0; i < count; ++i) {
    Tile t;
    t.plane = int(r.pod<uint32_t>());
    t.row = int(r.pod<uint32_t>());
    t.col = int(r.pod<uint32_t>());
    uint8_t label = r.pod<uint8_t>();
    uint8_t pad[3];
    r.bytes(pad, 3);
    uint64_t offset = r.pod<uint64_t>();
    MTV_REQUIRE(label == uint8_t(TileLabel::static_) || label == uint8_t(TileLabel::loop),
                "mtv checkpoint: invalid tile label");
    MTV_REQUIRE(offset == expected, "mtv checkpoint: inconsistent payload offsets");
    t.label = TileLabel(label);
    expected += t.label == TileLabel::loop ? patch * mtv.frame_count : patch;
    mtv.tiles.push_back(std::move(t));
  }
  for (Tile& t : mtv.tiles) {
    if (t.label == TileLabel::static_) {
      t.static_patch = Image<double>(mtv.tile_size, mtv.tile_size, 4);
      r.floats(t.static_patch.storage());
    } else {
      for (int f = 0; f < mtv.frame_count; ++f) {
        t.loop_patch.emplace_back(mtv.tile_size, mtv.tile_size, 4);
        r.floats(t.loop_patch.back().storage());
      }
    }
  }
  r.expect_end();
  mtv.validate();
  return mtv;
}

void quantize_to_f32(Mpi& mpi, LoopableVolume& loopable) {
  for (auto& p : mpi.planes) quantize(p.storage());
  for (auto& l : loopable.values) quantize(l.storage());
}

void quantize_to_f32(Mtv& mtv) {
  for (Tile& t : mtv.tiles) {
    quantize(t.static_patch.storage());
    for (auto& f : t.loop_patch) quantize(f.storage());
  }
}

}  // namespace mtvloop
