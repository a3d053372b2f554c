#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hetgoal/approx/store.hpp"

namespace hetgoal::approx {

// Checkpoint = flat binary blob (parameters + optimizer moments, little
// endian) alongside a JSON manifest written by the caller.
inline constexpr std::uint32_t kBlobMagic = 0x50434748;  // "HGCP"
inline constexpr std::uint32_t kBlobVersion = 1;

template <typename T>
void save_store(const ParamStore<T>& ps, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(kBlobMagic);
  put_u32(kBlobVersion);
  put_u32(std::uint32_t(sizeof(T)));
  put_u64(std::uint64_t(ps.w.size()));
  put_u64(std::uint64_t(ps.adam_t));
  auto put_vec = [&](const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              std::streamsize(v.size() * sizeof(T)));
  };
  put_vec(ps.w);
  put_vec(ps.m);
  put_vec(ps.v);
  if (!out) throw std::runtime_error("write failure: " + path);
}

template <typename T>
void load_store(ParamStore<T>& ps, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  if (get_u32() != kBlobMagic) throw std::runtime_error("bad checkpoint magic: " + path);
  if (get_u32() != kBlobVersion) throw std::runtime_error("bad checkpoint version: " + path);
  if (get_u32() != sizeof(T)) throw std::runtime_error("checkpoint dtype mismatch: " + path);
  const std::uint64_t n = get_u64();
  if (ps.size() != 0 && ps.size() != n)
    throw std::runtime_error("checkpoint size mismatch: " + path);
  ps.adam_t = std::int64_t(get_u64());
  auto get_vec = [&](std::vector<T>& v) {
    v.resize(std::size_t(n));
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
  };
  get_vec(ps.w);
  get_vec(ps.m);
  get_vec(ps.v);
  ps.g.assign(std::size_t(n), T(0));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

}  // namespace hetgoal::approx
