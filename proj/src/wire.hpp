#pragma once

// Little-endian binary encoding helpers shared by the checkpoint and
// dataset file formats.

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ocl/errors.hpp"

namespace ocl::wire {

inline void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

  std::uint16_t u16() {
    const unsigned char* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  std::uint64_t u64() {
    const unsigned char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void expect_magic(const char* magic) {
    const unsigned char* p = take(4);
    for (int i = 0; i < 4; ++i) {
      if (static_cast<char>(p[i]) != magic[i]) {
        throw BadMagic(name_ + ": bad magic, expected \"" + magic + "\"");
      }
    }
  }

  bool at_end() const { return pos_ == bytes_.size(); }

  void require_end() {
    if (!at_end()) throw TruncatedFile(name_ + ": trailing bytes");
  }

 private:
  const unsigned char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw TruncatedFile(name_ + ": unexpected end of file");
    }
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + pos_;
    pos_ += n;
    return p;
  }

  const std::string& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw IoError("read failed for " + path);
  return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) throw IoError("write failed for " + path);
}

}  // namespace ocl::wire
