#include "plqp/encoding.hpp"

#include <cstring>

namespace plqp {

Bytes mpz_to_be(const mpz_class& v, size_t width) {
  if (v < 0) throw std::invalid_argument("mpz_to_be: negative value");
  size_t needed = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (v == 0) needed = 0;
  if (needed > width) throw std::invalid_argument("mpz_to_be: value too wide");
  Bytes out(width, 0);
  size_t count = 0;
  mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0, v.get_mpz_t());
  return out;
}

mpz_class mpz_from_be(std::span<const uint8_t> raw) {
  mpz_class out;
  if (!raw.empty()) mpz_import(out.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
  return out;
}

void ByteWriter::u8(uint8_t v) { out_.push_back(v); }

void ByteWriter::u16(uint16_t v) {
  out_.push_back(uint8_t(v >> 8));
  out_.push_back(uint8_t(v));
}

void ByteWriter::u32(uint32_t v) {
  for (int i = 3; i >= 0; --i) out_.push_back(uint8_t(v >> (8 * i)));
}

void ByteWriter::u64(uint64_t v) {
  for (int i = 7; i >= 0; --i) out_.push_back(uint8_t(v >> (8 * i)));
}

void ByteWriter::i64(int64_t v) { u64(uint64_t(v)); }

void ByteWriter::raw(std::span<const uint8_t> data) {
  out_.insert(out_.end(), data.begin(), data.end());
}

void ByteWriter::blob(std::span<const uint8_t> data) {
  if (data.size() > UINT32_MAX) throw std::invalid_argument("blob too large");
  u32(uint32_t(data.size()));
  raw(data);
}

void ByteWriter::str(const std::string& s) {
  blob(std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

void ByteReader::need(size_t n) const {
  if (data_.size() - pos_ < n) throw DecodeError("truncated message");
}

uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

uint16_t ByteReader::u16() {
  need(2);
  uint16_t v = uint16_t(data_[pos_]) << 8 | data_[pos_ + 1];
  pos_ += 2;
  return v;
}

uint32_t ByteReader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 4;
  return v;
}

uint64_t ByteReader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 8;
  return v;
}

int64_t ByteReader::i64() { return int64_t(u64()); }

std::span<const uint8_t> ByteReader::raw(size_t n) {
  need(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::span<const uint8_t> ByteReader::blob() {
  uint32_t len = u32();
  return raw(len);
}

std::string ByteReader::str() {
  auto b = blob();
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

void ByteReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes in message");
}

}  // namespace plqp
