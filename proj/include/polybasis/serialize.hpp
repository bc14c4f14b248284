#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "polybasis/basis.hpp"
#include "polybasis/common.hpp"

// Library file layout (all integers and floats little-endian):
//   magic "PBLB"
//   u32 format_version
//   u32 dimension, u32 max_degree
//   u64 config_digest, u64 created_at
//   u8  activation (enum index)
//   u32 n_widths, u32 widths[n_widths]
//   u32 n_nets
//   per net:
//     i32 exp0, i32 exp1
//     f64 final_mse
//     u8  provenance (0 random, 1 inherited), i32 inherited_from[2]
//     i32 epochs_used, u64 seed
//     f64 parameter blob, layer order, row-major weights then biases
//   u64 fnv1a checksum of every preceding byte

namespace polybasis {

class version_mismatch_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class checksum_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class malformed_file_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kLibraryFormatVersion = 1;
inline constexpr char kLibraryMagic[4] = {'P', 'B', 'L', 'B'};

namespace detail {

struct ByteWriter {
  std::vector<char> buf;
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto n = buf.size();
    buf.resize(n + sizeof(T));
    std::memcpy(buf.data() + n, &v, sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto o = buf.size();
    buf.resize(o + n);
    std::memcpy(buf.data() + o, p, n);
  }
};

struct ByteReader {
  const char* p;
  const char* end;
  template <class T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (p + sizeof(T) > end)
      throw malformed_file_error("library file is truncated");
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (p + n > end) throw malformed_file_error("library file is truncated");
    std::memcpy(out, p, n);
    p += n;
  }
};

inline void write_params(ByteWriter& w, const ParamSet& params) {
  for (const auto& layer : params.layers) {
    // Eigen stores column-major; emit row-major as documented.
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
        w.put<double>(layer.W(r, c));
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) w.put<double>(layer.b[i]);
  }
}

inline ParamSet read_params(ByteReader& r, const Architecture& arch) {
  ParamSet p = ParamSet::zeros(arch);
  for (auto& layer : p.layers) {
    for (Eigen::Index row = 0; row < layer.W.rows(); ++row)
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
        layer.W(row, c) = r.get<double>();
    for (Eigen::Index i = 0; i < layer.b.size(); ++i)
      layer.b[i] = r.get<double>();
  }
  return p;
}

}  // namespace detail

inline void save_library(const BasisLibrary& lib, const std::string& path) {
  detail::ByteWriter w;
  w.put_bytes(kLibraryMagic, 4);
  w.put<std::uint32_t>(lib.format_version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(lib.dimension));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(lib.max_degree));
  w.put<std::uint64_t>(lib.config_digest);
  w.put<std::uint64_t>(lib.created_at);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(lib.arch.activation));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(lib.arch.widths.size()));
  for (int width : lib.arch.widths) w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(lib.nets.size()));
  for (const auto& [exps, net] : lib.nets) {
    w.put<std::int32_t>(exps[0]);
    w.put<std::int32_t>(exps[1]);
    w.put<double>(net.final_mse);
    w.put<std::uint8_t>(net.provenance == InitProvenance::Inherited ? 1 : 0);
    w.put<std::int32_t>(net.inherited_from[0]);
    w.put<std::int32_t>(net.inherited_from[1]);
    w.put<std::int32_t>(net.epochs_used);
    w.put<std::uint64_t>(net.seed);
    detail::write_params(w, net.params);
  }
  w.put<std::uint64_t>(fnv1a(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline BasisLibrary load_library(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open library file: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

  if (buf.size() < 4 + sizeof(std::uint64_t) ||
      std::memcmp(buf.data(), kLibraryMagic, 4) != 0)
    throw malformed_file_error("not a basis library file: " + path);

  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (fnv1a(buf.data(), body) != stored)
    throw checksum_error("library checksum mismatch: " + path);

  detail::ByteReader r{buf.data() + 4, buf.data() + body};
  BasisLibrary lib;
  lib.format_version = r.get<std::uint32_t>();
  if (lib.format_version != kLibraryFormatVersion)
    throw version_mismatch_error(
        "library format version " + std::to_string(lib.format_version) +
        " is not supported (this build reads version " +
        std::to_string(kLibraryFormatVersion) + ")");
  lib.dimension = static_cast<int>(r.get<std::uint32_t>());
  lib.max_degree = static_cast<int>(r.get<std::uint32_t>());
  lib.config_digest = r.get<std::uint64_t>();
  lib.created_at = r.get<std::uint64_t>();
  const auto act = r.get<std::uint8_t>();
  if (act >= kActivationCount)
    throw malformed_file_error("invalid activation id in library file");
  lib.arch.activation = static_cast<ActivationKind>(act);
  const auto n_widths = r.get<std::uint32_t>();
  if (n_widths < 2 || n_widths > 64)
    throw malformed_file_error("invalid width count in library file");
  lib.arch.widths.resize(n_widths);
  for (auto& width : lib.arch.widths)
    width = static_cast<int>(r.get<std::uint32_t>());
  lib.arch.validate();

  const auto n_nets = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_nets; ++i) {
    BasisNet net;
    net.spec.dimension = lib.dimension;
    net.spec.exponents[0] = r.get<std::int32_t>();
    net.spec.exponents[1] = r.get<std::int32_t>();
    net.arch = lib.arch;
    net.final_mse = r.get<double>();
    net.provenance =
        r.get<std::uint8_t>() ? InitProvenance::Inherited : InitProvenance::Random;
    net.inherited_from[0] = r.get<std::int32_t>();
    net.inherited_from[1] = r.get<std::int32_t>();
    net.epochs_used = r.get<std::int32_t>();
    net.seed = r.get<std::uint64_t>();
    net.params = detail::read_params(r, lib.arch);
    lib.nets.emplace(net.spec.exponents, std::move(net));
  }
  if (r.p != r.end)
    throw malformed_file_error("trailing bytes in library file: " + path);
  return lib;
}

}  // namespace polybasis
