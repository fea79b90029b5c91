#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plqp {

using Bytes = std::vector<uint8_t>;

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Big-endian fixed-width encoding of a non-negative integer. Throws if the
// value does not fit in `width` bytes.
Bytes mpz_to_be(const mpz_class& v, size_t width);
mpz_class mpz_from_be(std::span<const uint8_t> raw);

// Sequential writer for the project's wire formats: all integers
// big-endian, variable fields length-prefixed with a u32.
class ByteWriter {
 public:
  void u8(uint8_t v);
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v);
  void raw(std::span<const uint8_t> data);
  void blob(std::span<const uint8_t> data);  // u32 length + data
  void str(const std::string& s);            // u32 length + utf-8

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Bounds-checked reader; every method throws DecodeError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  int64_t i64();
  std::span<const uint8_t> raw(size_t n);
  std::span<const uint8_t> blob();
  std::string str();

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  void need(size_t n) const;
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace plqp
