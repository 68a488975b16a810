#pragma once

// Length-prefixed binary frames exchanged between client and servers.
//
//   frame   := u32 length | u8 tag | payload      (length = 1 + |payload|)
//   HELLO   := u8 version | u8 model | u32 N | u32 K | u32 M | u16 q | u32 m
//   QUERY   := u32 server | u16 q | u32 m | u32 r | r * (u32 K | K * u16)
//              | u32 sums | sums * (u32 level | u8 keep | u32 terms
//                                   | terms * (u32 function | u32 position | u8 sign))
//   ANSWER  := u32 server | u16 q | u32 count | count * (u32 index | u16 value)
//   ERROR   := u32 length | bytes
//
// Integers are big-endian; sign 0 is +1 and 1 is -1; keep is 0 or 1. A
// QUERY with an all-ones keep mask decodes to an empty mask.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcsi/protocol.h"

namespace pcsi {

enum class Tag : std::uint8_t { kHello = 0x01, kQuery = 0x02, kAnswer = 0x03, kError = 0x7F };

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 28;

struct Hello {
  Model model = Model::kI;
  std::uint32_t servers = 0;
  std::uint32_t messages = 0;
  std::uint32_t side_size = 0;
  std::uint16_t prime = 0;
  std::uint32_t symbols = 0;

  friend bool operator==(const Hello&, const Hello&) = default;
};

Hello hello_for(const ProtocolParams& params);

struct AnswerMsg {
  std::uint16_t prime = 0;
  ReducedAnswer answer;

  friend bool operator==(const AnswerMsg&, const AnswerMsg&) = default;
};

struct ErrorMsg {
  std::string reason;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Hello, ServerQuery, AnswerMsg, ErrorMsg>;

std::vector<std::uint8_t> encode_frame(const Message& message);

// Decodes exactly one complete frame. FrameTooShort on truncation, BadTag on
// an unknown tag, SymbolOutOfRange on a field element >= q, MalformedQuery
// on any other inconsistency including trailing bytes.
Message decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace pcsi
