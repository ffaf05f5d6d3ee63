#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpo.hpp"

namespace mposim {

// Binary checkpoint format, little-endian throughout:
//   magic "MPOSTATE", u32 version, u64 n, u64 d, u64 chi_max, f64 trunc_tol,
//   per site: u64 left, u64 right, then left*d*d*right (re, im) f64 pairs,
//   per bond: u64 count, then count f64 values.
// Round-trips bit-exactly.

namespace detail {

constexpr char kMagic[8] = {'M', 'P', 'O', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("load_mpo: truncated file");
  return v;
}

}  // namespace detail

inline void save_mpo(const Mpo& m, const std::string& path) {
  m.check_shape();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_mpo: cannot open " + path);
  os.write(detail::kMagic, sizeof(detail::kMagic));
  detail::put(os, detail::kVersion);
  detail::put(os, static_cast<std::uint64_t>(m.n));
  detail::put(os, static_cast<std::uint64_t>(m.d));
  detail::put(os, static_cast<std::uint64_t>(m.chi_max));
  detail::put(os, m.trunc_tol);
  for (const SiteTensor& g : m.gamma) {
    detail::put(os, static_cast<std::uint64_t>(g.left));
    detail::put(os, static_cast<std::uint64_t>(g.right));
    for (const cplx& z : g.v) {
      detail::put(os, z.real());
      detail::put(os, z.imag());
    }
  }
  for (const auto& lam : m.lambda) {
    detail::put(os, static_cast<std::uint64_t>(lam.size()));
    for (double x : lam) detail::put(os, x);
  }
  if (!os) throw std::runtime_error("save_mpo: write failed for " + path);
}

inline Mpo load_mpo(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_mpo: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, detail::kMagic, sizeof(magic)) != 0)
    throw std::runtime_error("load_mpo: bad magic in " + path);
  if (detail::get<std::uint32_t>(is) != detail::kVersion)
    throw std::runtime_error("load_mpo: unsupported version in " + path);

  Mpo m;
  m.n = detail::get<std::uint64_t>(is);
  m.d = detail::get<std::uint64_t>(is);
  m.chi_max = detail::get<std::uint64_t>(is);
  m.trunc_tol = detail::get<double>(is);
  if (m.n < 2 || m.n > 4096 || m.d < 2 || m.d > 64)
    throw std::runtime_error("load_mpo: implausible header in " + path);

  m.gamma.resize(m.n);
  for (SiteTensor& g : m.gamma) {
    const auto left = detail::get<std::uint64_t>(is);
    const auto right = detail::get<std::uint64_t>(is);
    g = SiteTensor(left, m.d * m.d, right);
    for (cplx& z : g.v) {
      const double re = detail::get<double>(is);
      const double im = detail::get<double>(is);
      z = cplx(re, im);
    }
  }
  m.lambda.resize(m.n - 1);
  for (auto& lam : m.lambda) {
    lam.resize(detail::get<std::uint64_t>(is));
    for (double& x : lam) x = detail::get<double>(is);
  }
  m.check_shape();
  return m;
}

}  // namespace mposim
