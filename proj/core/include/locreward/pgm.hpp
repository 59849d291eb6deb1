#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "locreward/mask2box.hpp"

namespace locreward::pgm {

enum class Encoding { Ascii /* P2 */, Binary /* P5 */ };

/// Foreground threshold: a pixel is set when its value exceeds this.
inline constexpr unsigned kThreshold = 127;

/// Decodes a P2 or P5 greymap (8- or 16-bit) and thresholds it.
/// Throws ParseError with a description of the first defect.
mask2box::BinaryMask decode(std::string_view bytes);

/// Reads and decodes a file; I/O failures are reported as ParseError too.
mask2box::BinaryMask read(const std::filesystem::path& path);

/// Writes set pixels as 255 and clear pixels as 0, maxval 255.
std::string encode(const mask2box::BinaryMask& mask, Encoding encoding);

}  // namespace locreward::pgm
