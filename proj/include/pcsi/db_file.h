#pragma once

// Database file: "PCSIDB1" | u16 q | u32 K | u32 m | K*m u16 symbols,
// row-major, big-endian.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcsi/database.h"

namespace pcsi {

std::vector<std::uint8_t> encode_database(const Database& db);
// FrameTooShort on a short or oversized body, SymbolOutOfRange on a symbol
// >= q, BadParams on a bad magic or modulus.
Database decode_database(std::span<const std::uint8_t> bytes);

void write_database(const std::string& path, const Database& db);
Database read_database(const std::string& path);

}  // namespace pcsi
