#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "soar/packet.hpp"

namespace soar {

struct CaptureResult {
  std::vector<Packet> packets;
  uint64_t skipped = 0;  // non-IPv4 frames, truncated records, short headers
  uint64_t total = 0;    // every record encountered; total == packets + skipped
};

// Classic fixed-header capture container only (magic 0xA1B2C3D4, microsecond
// timestamps); both byte orders accepted on read. Timestamps are rebased so
// the first packet defines t=0.
CaptureResult parse_capture(std::istream& in);
CaptureResult parse_capture_file(const std::filesystem::path& path);

// Serializes packets back into the same container (little-endian, ethernet
// link type). Frames are synthesized from the packet fields; payload is
// carried verbatim and frames are zero-padded up to `length`.
void write_capture(std::ostream& out, std::span<const Packet> packets);
void write_capture_file(const std::filesystem::path& path, std::span<const Packet> packets);

}  // namespace soar
