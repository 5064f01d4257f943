#pragma once

// TCP frame layout, all integers little-endian:
//   "MHB1" | source u32 | tag u32 | payload length u64 | payload bytes

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "mhb/comm.hpp"

namespace mhb::wire {

inline constexpr std::array<std::byte, 4> kMagic{std::byte{'M'}, std::byte{'H'}, std::byte{'B'}, std::byte{'1'}};
inline constexpr std::size_t kHeaderSize = 20;

inline constexpr Tag kHelloTag = 0xFFFFFFFFu;
/// Bring-up address exchange: listener port (worker to coordinator), then
/// the rank address table (coordinator to worker).
inline constexpr Tag kAddressTag = 0xFFFFFFFEu;
/// Orderly shutdown notice; the peer sends nothing after it.
inline constexpr Tag kByeTag = 0xFFFFFFFDu;

struct FrameHeader {
  std::uint32_t source = 0;
  Tag tag = 0;
  std::uint64_t length = 0;

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

using HeaderBytes = std::array<std::byte, kHeaderSize>;

inline void store_le(std::byte* out, std::uint64_t value, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xFF);
}

inline std::uint64_t load_le(const std::byte* in, std::size_t width) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < width; ++i) value |= std::uint64_t(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
  return value;
}

inline HeaderBytes encode_header(const FrameHeader& header) {
  HeaderBytes out{};
  for (std::size_t i = 0; i < kMagic.size(); ++i) out[i] = kMagic[i];
  store_le(out.data() + 4, header.source, 4);
  store_le(out.data() + 8, header.tag, 4);
  store_le(out.data() + 12, header.length, 8);
  return out;
}

/// Throws CommError when the magic does not match.
inline FrameHeader decode_header(std::span<const std::byte, kHeaderSize> in) {
  for (std::size_t i = 0; i < kMagic.size(); ++i)
    if (in[i] != kMagic[i]) throw CommError("bad frame magic");
  FrameHeader header;
  header.source = static_cast<std::uint32_t>(load_le(in.data() + 4, 4));
  header.tag = static_cast<Tag>(load_le(in.data() + 8, 4));
  header.length = load_le(in.data() + 12, 8);
  return header;
}

inline Bytes encode_frame(std::uint32_t source, Tag tag, std::span<const std::byte> payload) {
  const HeaderBytes header = encode_header({source, tag, payload.size()});
  Bytes out(kHeaderSize + payload.size());
  std::copy(header.begin(), header.end(), out.begin());
  std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
  return out;
}

}  // namespace mhb::wire
