#include "apam/wire.hpp"

#include <bit>
#include <cstring>
#include <string>

#include <zlib.h>

namespace apam {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'P', 'A', 'M'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

void check_header_prefix(std::span<const std::uint8_t> bytes) {
  const std::size_t have = std::min<std::size_t>(bytes.size(), 4);
  if (std::memcmp(bytes.data(), kMagic, have) != 0) {
    throw FrameError(DecodeError::BadMagic, "frame: bad magic");
  }
  if (bytes.size() < kFrameHeaderSize) {
    throw FrameError(DecodeError::Truncated, "frame: truncated header (" +
                                                 std::to_string(bytes.size()) + " bytes)");
  }
}

}  // namespace

bool WireFrame::operator==(const WireFrame& o) const {
  if (type != o.type || version != o.version || worker_id != o.worker_id ||
      payload.size() != o.payload.size()) {
    return false;
  }
  // Bitwise, so NaN payloads compare equal to themselves.
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(payload[i]) != std::bit_cast<std::uint64_t>(o.payload[i])) {
      return false;
    }
  }
  return true;
}

const char* to_string(DecodeError e) {
  switch (e) {
    case DecodeError::BadMagic: return "bad_magic";
    case DecodeError::Truncated: return "truncated";
    case DecodeError::CrcMismatch: return "crc_mismatch";
    case DecodeError::BadType: return "bad_type";
    case DecodeError::LengthMismatch: return "length_mismatch";
  }
  return "?";
}

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1U << 30));
    crc = crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_frame(const WireFrame& f) {
  if (f.payload.size() > UINT32_MAX) throw std::invalid_argument("encode_frame: payload too long");
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(f.payload.size()));
  for (std::uint8_t b : kMagic) out.push_back(b);
  out.push_back(static_cast<std::uint8_t>(f.type));
  put_le<std::uint64_t>(out, f.version);
  put_le<std::uint32_t>(out, f.worker_id);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.payload.size()));
  for (double d : f.payload) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d));
  put_le<std::uint32_t>(out, crc32_ieee(out));
  return out;
}

std::size_t peek_payload_length(std::span<const std::uint8_t> header) {
  check_header_prefix(header);
  return get_le<std::uint32_t>(header.data() + 17);
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes) {
  const std::size_t n = peek_payload_length(bytes);
  const std::size_t need = frame_size(n);
  if (bytes.size() < need) {
    throw FrameError(DecodeError::Truncated, "frame: truncated (" + std::to_string(bytes.size()) +
                                                 " of " + std::to_string(need) + " bytes)");
  }
  if (bytes.size() > need) {
    throw FrameError(DecodeError::LengthMismatch, "frame: " + std::to_string(bytes.size()) +
                                                      " bytes for n=" + std::to_string(n));
  }
  const std::uint32_t stored = get_le<std::uint32_t>(bytes.data() + need - 4);
  if (stored != crc32_ieee(bytes.first(need - 4))) {
    throw FrameError(DecodeError::CrcMismatch, "frame: crc mismatch");
  }
  const std::uint8_t type = bytes[4];
  if (type > static_cast<std::uint8_t>(MsgType::Shutdown)) {
    throw FrameError(DecodeError::BadType, "frame: unknown message type " + std::to_string(type));
  }
  WireFrame f;
  f.type = static_cast<MsgType>(type);
  f.version = get_le<std::uint64_t>(bytes.data() + 5);
  f.worker_id = get_le<std::uint32_t>(bytes.data() + 13);
  f.payload.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.payload[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + kFrameHeaderSize + 8 * i));
  }
  return f;
}

}  // namespace apam
