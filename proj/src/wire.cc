#include "pcsi/wire.h"

#include <algorithm>

#include "pcsi/error.h"

namespace pcsi {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void bytes(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  Fe element(std::uint16_t q) {
    std::uint16_t v = u16();
    PCSI_CHECK(v < q, ErrorCode::kSymbolOutOfRange, "field element out of range");
    return Fe(v);
  }
  // Guards a count against the bytes left so a forged count cannot force a
  // huge allocation.
  std::size_t count(std::size_t min_item_bytes) {
    std::uint32_t n = u32();
    PCSI_CHECK(static_cast<std::uint64_t>(n) * min_item_bytes <= remaining(),
               ErrorCode::kFrameTooShort, "count exceeds frame size");
    return n;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    PCSI_CHECK(remaining() >= n, ErrorCode::kFrameTooShort, "frame truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put(Writer& w, const Hello& h) {
  w.u8(kWireVersion);
  w.u8(static_cast<std::uint8_t>(h.model));
  w.u32(h.servers);
  w.u32(h.messages);
  w.u32(h.side_size);
  w.u16(h.prime);
  w.u32(h.symbols);
}

void put(Writer& w, const ServerQuery& q) {
  w.u32(q.server);
  w.u16(q.prime);
  w.u32(q.symbols);
  w.u32(static_cast<std::uint32_t>(q.u.size()));
  for (const auto& row : q.u) {
    w.u32(static_cast<std::uint32_t>(row.size()));
    for (Fe x : row) w.u16(x.value());
  }
  PCSI_CHECK(q.keep.empty() || q.keep.size() == q.query.sums.size(), ErrorCode::kMalformedQuery,
             "keep mask length differs from sum count");
  w.u32(static_cast<std::uint32_t>(q.query.sums.size()));
  for (std::size_t i = 0; i < q.query.sums.size(); ++i) {
    const auto& s = q.query.sums[i];
    w.u32(s.level);
    w.u8(q.keep.empty() || q.keep[i] ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(s.terms.size()));
    for (const auto& t : s.terms) {
      w.u32(t.function);
      w.u32(t.position);
      w.u8(t.sign < 0 ? 1 : 0);
    }
  }
}

void put(Writer& w, const AnswerMsg& a) {
  w.u32(a.answer.server);
  w.u16(a.prime);
  w.u32(static_cast<std::uint32_t>(a.answer.entries.size()));
  for (const auto& e : a.answer.entries) {
    w.u32(e.index);
    w.u16(e.value.value());
  }
}

void put(Writer& w, const ErrorMsg& e) {
  w.u32(static_cast<std::uint32_t>(e.reason.size()));
  w.bytes(e.reason);
}

Hello get_hello(Reader& r) {
  std::uint8_t version = r.u8();
  PCSI_CHECK(version == kWireVersion, ErrorCode::kMalformedQuery, "unsupported wire version");
  Hello h;
  std::uint8_t model = r.u8();
  PCSI_CHECK(model == 1 || model == 2, ErrorCode::kMalformedQuery, "unknown model");
  h.model = static_cast<Model>(model);
  h.servers = r.u32();
  h.messages = r.u32();
  h.side_size = r.u32();
  h.prime = r.u16();
  h.symbols = r.u32();
  return h;
}

ServerQuery get_query(Reader& r) {
  ServerQuery q;
  q.server = r.u32();
  q.prime = r.u16();
  PCSI_CHECK(q.prime >= 2, ErrorCode::kMalformedQuery, "modulus too small");
  q.symbols = r.u32();
  const std::size_t rows = r.count(4);
  q.u.resize(rows);
  for (auto& row : q.u) {
    const std::size_t k = r.count(2);
    row.reserve(k);
    for (std::size_t j = 0; j < k; ++j) row.push_back(r.element(q.prime));
  }
  const std::size_t sums = r.count(9);
  q.query.server = q.server;
  q.query.sums.resize(sums);
  q.keep.resize(sums);
  bool all_kept = true;
  for (std::size_t i = 0; i < sums; ++i) {
    auto& s = q.query.sums[i];
    s.level = r.u32();
    std::uint8_t keep = r.u8();
    PCSI_CHECK(keep <= 1, ErrorCode::kMalformedQuery, "keep flag must be 0 or 1");
    q.keep[i] = keep;
    all_kept = all_kept && keep == 1;
    const std::size_t terms = r.count(9);
    s.terms.reserve(terms);
    for (std::size_t t = 0; t < terms; ++t) {
      Term term;
      term.function = r.u32();
      term.position = r.u32();
      std::uint8_t sign = r.u8();
      PCSI_CHECK(sign <= 1, ErrorCode::kMalformedQuery, "sign byte must be 0 or 1");
      term.sign = sign == 0 ? 1 : -1;
      PCSI_CHECK(s.subset.empty() || s.subset.back() < term.function, ErrorCode::kMalformedQuery,
                 "functions within a sum must be strictly increasing");
      s.subset.push_back(term.function);
      s.terms.push_back(term);
    }
  }
  if (all_kept) q.keep.clear();
  return q;
}

AnswerMsg get_answer(Reader& r) {
  AnswerMsg a;
  a.answer.server = r.u32();
  a.prime = r.u16();
  PCSI_CHECK(a.prime >= 2, ErrorCode::kMalformedQuery, "modulus too small");
  const std::size_t n = r.count(6);
  a.answer.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    AnswerEntry e;
    e.index = r.u32();
    e.value = r.element(a.prime);
    PCSI_CHECK(a.answer.entries.empty() || a.answer.entries.back().index < e.index,
               ErrorCode::kMalformedQuery, "answer indices must be strictly increasing");
    a.answer.entries.push_back(e);
  }
  return a;
}

ErrorMsg get_error(Reader& r) {
  const std::size_t n = r.count(1);
  return ErrorMsg{r.bytes(n)};
}

}  // namespace

Hello hello_for(const ProtocolParams& params) {
  Hello h;
  h.model = params.model;
  h.servers = params.servers;
  h.messages = params.messages;
  h.side_size = params.side_size;
  h.prime = static_cast<std::uint16_t>(params.prime);
  h.symbols = static_cast<std::uint32_t>(params.symbols);
  return h;
}

std::vector<std::uint8_t> encode_frame(const Message& message) {
  Writer body;
  std::uint8_t tag = 0;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) tag = static_cast<std::uint8_t>(Tag::kHello);
        if constexpr (std::is_same_v<T, ServerQuery>) tag = static_cast<std::uint8_t>(Tag::kQuery);
        if constexpr (std::is_same_v<T, AnswerMsg>) tag = static_cast<std::uint8_t>(Tag::kAnswer);
        if constexpr (std::is_same_v<T, ErrorMsg>) tag = static_cast<std::uint8_t>(Tag::kError);
        put(body, m);
      },
      message);
  std::vector<std::uint8_t> payload = body.take();
  PCSI_CHECK(payload.size() + 1 <= kMaxFrameBytes, ErrorCode::kTooLarge, "frame too large");
  Writer frame;
  frame.u32(static_cast<std::uint32_t>(payload.size() + 1));
  frame.u8(tag);
  std::vector<std::uint8_t> out = frame.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Message decode_frame(std::span<const std::uint8_t> bytes) {
  Reader header(bytes);
  const std::uint32_t length = header.u32();
  PCSI_CHECK(length >= 1, ErrorCode::kFrameTooShort, "frame length must cover the tag");
  PCSI_CHECK(bytes.size() - 4 >= length, ErrorCode::kFrameTooShort, "frame truncated");
  PCSI_CHECK(bytes.size() - 4 == length, ErrorCode::kMalformedQuery, "trailing bytes after frame");
  const std::uint8_t tag = header.u8();
  Reader r(bytes.subspan(5));
  Message out;
  switch (static_cast<Tag>(tag)) {
    case Tag::kHello: out = get_hello(r); break;
    case Tag::kQuery: out = get_query(r); break;
    case Tag::kAnswer: out = get_answer(r); break;
    case Tag::kError: out = get_error(r); break;
    default: throw Error(ErrorCode::kBadTag, "unknown frame tag " + std::to_string(tag));
  }
  PCSI_CHECK(r.remaining() == 0, ErrorCode::kMalformedQuery, "trailing bytes in payload");
  return out;
}

}  // namespace pcsi
