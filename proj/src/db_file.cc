#include "pcsi/db_file.h"

#include <cstring>
#include <fstream>
#include <iterator>

#include "pcsi/error.h"

namespace pcsi {

namespace {

constexpr char kMagic[] = "PCSIDB1";
constexpr std::size_t kMagicLen = 7;
constexpr std::size_t kHeaderLen = kMagicLen + 2 + 4 + 4;

std::uint32_t read_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

std::vector<std::uint8_t> encode_database(const Database& db) {
  std::vector<std::uint8_t> out(kMagic, kMagic + kMagicLen);
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  auto u32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  };
  PCSI_CHECK(db.symbols() <= 0xFFFFFFFFull, ErrorCode::kTooLarge, "message too long for file format");
  u16(static_cast<std::uint16_t>(db.field().modulus()));
  u32(db.messages());
  u32(static_cast<std::uint32_t>(db.symbols()));
  out.reserve(kHeaderLen + 2 * db.data().size());
  for (Fe x : db.data()) u16(x.value());
  return out;
}

Database decode_database(std::span<const std::uint8_t> bytes) {
  PCSI_CHECK(bytes.size() >= kHeaderLen, ErrorCode::kFrameTooShort, "database header truncated");
  PCSI_CHECK(std::memcmp(bytes.data(), kMagic, kMagicLen) == 0, ErrorCode::kBadParams,
             "not a database file");
  const std::uint8_t* p = bytes.data() + kMagicLen;
  const std::uint16_t q = static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  const std::uint32_t k = read_u32(p + 2);
  const std::uint32_t m = read_u32(p + 6);
  PrimeField field(q);
  const std::uint64_t count = std::uint64_t{k} * m;
  PCSI_CHECK(bytes.size() - kHeaderLen == 2 * count, ErrorCode::kFrameTooShort,
             "database body size differs from header");
  FeVec data(count);
  const std::uint8_t* body = bytes.data() + kHeaderLen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint16_t v = static_cast<std::uint16_t>((body[2 * i] << 8) | body[2 * i + 1]);
    PCSI_CHECK(v < q, ErrorCode::kSymbolOutOfRange, "database symbol out of range");
    data[i] = Fe(v);
  }
  return Database(field, k, m, std::move(data));
}

void write_database(const std::string& path, const Database& db) {
  const auto bytes = encode_database(db);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  PCSI_CHECK(out.good(), ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  PCSI_CHECK(out.good(), ErrorCode::kIo, "write to " + path + " failed");
}

Database read_database(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  PCSI_CHECK(in.good(), ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_database(bytes);
}

}  // namespace pcsi
