#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "tripem/errors.hpp"

// Little-endian primitives shared by the binary file containers.
namespace tripem::detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32(std::istream& in, const std::string& context) {
  char b[4];
  if (!in.read(b, 4)) throw DataError(context + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline std::uint64_t get_u64(std::istream& in, const std::string& context) {
  char b[8];
  if (!in.read(b, 8)) throw DataError(context + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline double get_f64(std::istream& in, const std::string& context) {
  return std::bit_cast<double>(get_u64(in, context));
}

}  // namespace tripem::detail
