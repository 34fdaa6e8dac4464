#pragma once

// Binary frame codec for master/worker messages.
//
//   magic "APAM" | type u8 | version u64 | worker_id u32 | n u32 | n x f64 | crc32
//
// All integers and doubles are little-endian; the crc32 (IEEE, reflected
// 0xEDB88320) covers every byte before it.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace apam {

enum class MsgType : std::uint8_t { Params = 0, Gradient = 1, Shutdown = 2 };

struct WireFrame {
  MsgType type = MsgType::Params;
  std::uint64_t version = 0;
  std::uint32_t worker_id = 0;
  std::vector<double> payload;

  bool operator==(const WireFrame& o) const;
};

enum class DecodeError { BadMagic, Truncated, CrcMismatch, BadType, LengthMismatch };
const char* to_string(DecodeError e);

class FrameError : public std::runtime_error {
 public:
  FrameError(DecodeError code, const std::string& what) : std::runtime_error(what), code_(code) {}
  DecodeError code() const { return code_; }

 private:
  DecodeError code_;
};

inline constexpr std::size_t kFrameHeaderSize = 21;  // magic..n
inline constexpr std::size_t frame_size(std::size_t n) { return kFrameHeaderSize + 8 * n + 4; }

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_frame(const WireFrame& f);

/// Decodes exactly one frame occupying all of `bytes`; throws FrameError.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Payload length announced by a header, or a FrameError if the first
/// kFrameHeaderSize bytes are not a valid header prefix.
std::size_t peek_payload_length(std::span<const std::uint8_t> header);

}  // namespace apam
