#include <doctest.h>

#include <fstream>
#include <iterator>

#include "apam/wire.hpp"
#include "support/oracles.hpp"

using namespace apam;

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DecodeError decode_code(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_frame(bytes);
  } catch (const FrameError& e) {
    return e.code();
  }
  FAIL("frame decoded unexpectedly");
  return DecodeError::BadMagic;
}

void restamp(std::vector<std::uint8_t>& bytes) {
  const std::uint32_t c = oracle::crc32_bitwise(bytes.data(), bytes.size() - 4);
  for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + i] = static_cast<std::uint8_t>(c >> (8 * i));
}

}  // namespace

TEST_CASE("golden frame") {
  const WireFrame f{MsgType::Gradient, 7, 3, {1.0, -2.5}};
  const auto golden = read_file(std::string(APAM_TEST_DATA) + "/golden_frame.bin");
  CHECK(golden.size() == 41);
  CHECK(frame_size(2) == 41);
  CHECK(encode_frame(f) == golden);
  CHECK(decode_frame(golden) == f);
  CHECK(peek_payload_length(std::span(golden).first(kFrameHeaderSize)) == 2);
}

TEST_CASE("crc32 matches the bitwise reference") {
  const std::string s = "123456789";
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  CHECK(crc32_ieee({p, s.size()}) == 0xCBF43926u);
  oracle::Gen gen(71);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint8_t> b(gen.index(300));
    for (auto& x : b) x = static_cast<std::uint8_t>(gen.index(256));
    CHECK(crc32_ieee(b) == oracle::crc32_bitwise(b.data(), b.size()));
  }
}

TEST_CASE("random frames round trip") {
  oracle::Gen gen(72);
  for (int t = 0; t < 10000; ++t) {
    WireFrame f;
    f.type = static_cast<MsgType>(gen.index(3));
    f.version = (static_cast<std::uint64_t>(gen.index(1u << 31)) << 33) ^ gen.index(1u << 30);
    f.worker_id = static_cast<std::uint32_t>(gen.index(1u << 31));
    f.payload = gen.normal_vec(gen.index(20), 1e3);
    if (gen.coin(0.05) && !f.payload.empty()) f.payload[0] = -0.0;
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == frame_size(f.payload.size()));
    CHECK(decode_frame(bytes) == f);
  }
}

TEST_CASE("special doubles survive bitwise") {
  const WireFrame f{MsgType::Params, 1, 0,
                    {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN(),
                     -0.0, std::numeric_limits<double>::denorm_min()}};
  CHECK(decode_frame(encode_frame(f)) == f);
}

TEST_CASE("every single payload bit flip is detected") {
  const WireFrame f{MsgType::Gradient, 99, 4, {0.5, -1.25, 3.0e10}};
  const auto bytes = encode_frame(f);
  for (std::size_t byte = kFrameHeaderSize; byte < kFrameHeaderSize + 24; ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      auto b = bytes;
      b[byte] ^= static_cast<std::uint8_t>(1u << bit);
      CHECK(decode_code(b) == DecodeError::CrcMismatch);
    }
  }
  auto b = bytes;
  b[6] ^= 0x10;
  CHECK(decode_code(b) == DecodeError::CrcMismatch);
}

TEST_CASE("decode error codes") {
  const auto good = encode_frame({MsgType::Params, 2, 1, {1.0, 2.0}});
  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(decode_code(bad_magic) == DecodeError::BadMagic);

  CHECK(decode_code(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)) == DecodeError::Truncated);
  CHECK(decode_code(std::vector<std::uint8_t>(good.begin(), good.end() - 1)) == DecodeError::Truncated);

  auto longer = good;
  longer.push_back(0);
  CHECK(decode_code(longer) == DecodeError::LengthMismatch);

  auto bad_type = good;
  bad_type[4] = 9;
  restamp(bad_type);
  CHECK(decode_code(bad_type) == DecodeError::BadType);

  CHECK(std::string(to_string(DecodeError::CrcMismatch)).size() > 0);
  CHECK_THROWS_AS(peek_payload_length(std::span(bad_magic).first(kFrameHeaderSize)), FrameError);
}
