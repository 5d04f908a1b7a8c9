#include "tdcr/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "tdcr/errors.hpp"

namespace tdcr {

namespace {

constexpr char kMagic[8] = {'T', 'D', 'C', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::ifstream& is, T* v) {
  is.read(reinterpret_cast<char*>(v), sizeof(T));
  return is.gcount() == sizeof(T);
}

void write_string(std::ofstream& os, const std::string& s) {
  write_pod(os, static_cast<uint64_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& is, const std::string& what) {
  uint64_t n = 0;
  if (!read_pod(is, &n))
    fail(ErrorKind::truncated_record, "checkpoint truncated reading " + what);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    fail(ErrorKind::truncated_record, "checkpoint truncated reading " + what);
  return s;
}

void write_vector(std::ofstream& os, const Eigen::VectorXd& v) {
  write_pod(os, static_cast<uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_vector(std::ifstream& is, const std::string& what) {
  uint64_t n = 0;
  if (!read_pod(is, &n))
    fail(ErrorKind::truncated_record, "checkpoint truncated reading " + what);
  Eigen::VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    fail(ErrorKind::truncated_record, "checkpoint truncated reading " + what);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_string(os, ckpt.role);
  write_string(os, ckpt.meta.dump());
  write_vector(os, ckpt.obs_std.mean());
  write_vector(os, ckpt.obs_std.std());
  write_vector(os, ckpt.act_std.mean());
  write_vector(os, ckpt.act_std.std());
  write_pod(os, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    write_string(os, name);
    write_pod(os, static_cast<uint64_t>(m.rows()));
    write_pod(os, static_cast<uint64_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!os) fail(ErrorKind::io, "write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(ErrorKind::corrupt_header, "bad checkpoint magic in " + path);
  uint32_t version = 0;
  if (!read_pod(is, &version))
    fail(ErrorKind::corrupt_header, "checkpoint header truncated in " + path);
  if (version != kVersion)
    fail(ErrorKind::version_mismatch,
         "checkpoint version " + std::to_string(version) + " unsupported");

  Checkpoint ckpt;
  ckpt.role = read_string(is, "role");
  const std::string meta = read_string(is, "meta");
  try {
    ckpt.meta = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_header, std::string("checkpoint meta unparsable: ") + e.what());
  }
  Eigen::VectorXd om = read_vector(is, "obs mean"), os_ = read_vector(is, "obs std");
  Eigen::VectorXd am = read_vector(is, "act mean"), as_ = read_vector(is, "act std");
  ckpt.obs_std = Standardizer(om, os_);
  ckpt.act_std = Standardizer(am, as_);
  uint32_t count = 0;
  if (!read_pod(is, &count))
    fail(ErrorKind::truncated_record, "checkpoint truncated reading tensor count");
  ckpt.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = read_string(is, "tensor name");
    uint64_t rows = 0, cols = 0;
    if (!read_pod(is, &rows) || !read_pod(is, &cols))
      fail(ErrorKind::truncated_record, "checkpoint truncated reading " + name);
    Eigen::MatrixXd m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (is.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double)))
      fail(ErrorKind::truncated_record, "checkpoint truncated reading " + name);
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  return ckpt;
}

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open: " + path);
  uint64_t h = 0xCBF29CE484222325ull;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
    if (is.eof()) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

}  // namespace tdcr
