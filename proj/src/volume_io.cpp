#include "regpose/volume_io.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace regpose {

namespace {

void write_raw(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("RPV1: truncated file");
}

}  // namespace

void write_volume(const Volume& vol, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + tmp);
    os.write("RPV1", 4);
    for (int d : vol.dims) {
      const uint32_t u = static_cast<uint32_t>(d);
      write_raw(os, &u, 4);
    }
    for (int i = 0; i < 3; ++i) write_raw(os, &vol.spacing[i], 8);
    for (int i = 0; i < 3; ++i) write_raw(os, &vol.origin[i], 8);
    std::vector<float> buf(vol.data.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(vol.data[i]);
    write_raw(os, buf.data(), buf.size() * 4);
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Volume read_volume(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  read_raw(is, magic, 4);
  if (std::memcmp(magic, "RPV1", 4) != 0) throw std::runtime_error("RPV1: bad magic in " + path);

  std::array<int, 3> dims;
  for (int i = 0; i < 3; ++i) {
    uint32_t u;
    read_raw(is, &u, 4);
    dims[i] = static_cast<int>(u);
    if (dims[i] <= 0 || dims[i] > 4096) throw std::runtime_error("RPV1: bad dims in " + path);
  }
  Vec3 spacing, origin;
  for (int i = 0; i < 3; ++i) read_raw(is, &spacing[i], 8);
  for (int i = 0; i < 3; ++i) read_raw(is, &origin[i], 8);
  if (spacing.minCoeff() <= 0.0) throw std::runtime_error("RPV1: non-positive spacing in " + path);

  Volume vol(dims, spacing, origin);
  std::vector<float> buf(vol.data.size());
  read_raw(is, buf.data(), buf.size() * 4);
  for (size_t i = 0; i < buf.size(); ++i) vol.data[i] = static_cast<double>(buf[i]);
  return vol;
}

void write_slice(const Slice& s, const std::string& path) {
  Volume v({s.dims[0], s.dims[1], 1}, Vec3(s.spacing.x(), s.spacing.y(), 1.0),
           Vec3(s.origin.x(), s.origin.y(), 0.0));
  v.data = s.data;
  write_volume(v, path);
}

Slice read_slice(const std::string& path) {
  const Volume v = read_volume(path);
  if (v.dims[2] != 1) throw std::runtime_error("expected a one-plane volume: " + path);
  Slice s({v.dims[0], v.dims[1]}, {v.spacing.x(), v.spacing.y()}, {v.origin.x(), v.origin.y()});
  s.data = v.data;
  return s;
}

namespace {

nlohmann::json metadata_json(const Volume& vol) {
  return nlohmann::json{
      {"dims", {vol.dims[0], vol.dims[1], vol.dims[2]}},
      {"spacing", {vol.spacing.x(), vol.spacing.y(), vol.spacing.z()}},
      {"origin", {vol.origin.x(), vol.origin.y(), vol.origin.z()}},
  };
}

}  // namespace

void write_sidecar(const Volume& vol, const std::string& volume_path) {
  atomic_write_text(volume_path + ".json", metadata_json(vol).dump(2) + "\n");
}

void check_sidecar(const Volume& vol, const std::string& volume_path) {
  const std::string side = volume_path + ".json";
  if (!std::filesystem::exists(side)) return;
  std::ifstream is(side);
  nlohmann::json j;
  is >> j;
  if (j != metadata_json(vol)) {
    throw std::runtime_error("sidecar disagrees with binary header: " + side);
  }
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + tmp);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace regpose
