#pragma once

#include <cstdint>
#include <span>

#include "pcsi/field.h"

namespace pcsi {

// K messages of m symbols each, stored row-major.
class Database {
 public:
  Database(PrimeField field, std::uint32_t messages, std::uint64_t symbols, FeVec data);

  // Uniform symbols drawn from `seed`.
  static Database generate(PrimeField field, std::uint32_t messages, std::uint64_t symbols,
                           std::uint64_t seed);

  const PrimeField& field() const { return field_; }
  std::uint32_t messages() const { return messages_; }
  std::uint64_t symbols() const { return symbols_; }
  std::span<const Fe> message(std::uint32_t j) const {
    return {data_.data() + j * symbols_, static_cast<std::size_t>(symbols_)};
  }
  const FeVec& data() const { return data_; }

  friend bool operator==(const Database&, const Database&) = default;

 private:
  PrimeField field_;
  std::uint32_t messages_;
  std::uint64_t symbols_;
  FeVec data_;
};

}  // namespace pcsi
