#include "locreward/pgm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace locreward::pgm {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view bytes) : s_(bytes) {}

  // Skips whitespace and '#' comments that run to end of line.
  void skip_separators() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_separators();
    unsigned long v = 0;
    const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) {
      throw Error(ErrorCode::ParseError, std::string("expected ") + what + " at byte " +
                                             std::to_string(pos_));
    }
    pos_ = static_cast<std::size_t>(end - s_.data());
    return v;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }
  std::string_view rest() const noexcept { return s_.substr(pos_); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

mask2box::BinaryMask decode(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw Error(ErrorCode::ParseError, "not a P2/P5 greymap (bad magic number)");
  }
  const bool binary = bytes[1] == '5';
  Reader in(bytes);
  in.advance(2);
  const unsigned long width = in.number("width");
  const unsigned long height = in.number("height");
  const unsigned long maxval = in.number("maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::ParseError, "zero image dimension");
  if (maxval == 0 || maxval > 65535) {
    throw Error(ErrorCode::ParseError, "maxval must lie in [1, 65535]");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> data(count, 0);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    const auto rest = in.rest();
    if (rest.empty() || !std::isspace(static_cast<unsigned char>(rest.front()))) {
      throw Error(ErrorCode::ParseError, "missing whitespace after P5 header");
    }
    in.advance(1);
    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const auto raster = in.rest();
    if (raster.size() < count * sample_bytes) {
      throw Error(ErrorCode::ParseError, "P5 raster truncated: need " +
                                             std::to_string(count * sample_bytes) +
                                             " bytes, have " + std::to_string(raster.size()));
    }
    for (std::size_t i = 0; i < count; ++i) {
      unsigned value = static_cast<unsigned char>(raster[i * sample_bytes]);
      if (sample_bytes == 2) {
        value = (value << 8) | static_cast<unsigned char>(raster[i * 2 + 1]);
      }
      data[i] = value > kThreshold ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned long value = in.number("pixel value");
      if (value > maxval) {
        throw Error(ErrorCode::ParseError, "pixel value " + std::to_string(value) +
                                               " exceeds maxval " + std::to_string(maxval));
      }
      data[i] = value > kThreshold ? 1 : 0;
    }
  }
  return mask2box::BinaryMask(width, height, std::move(data));
}

mask2box::BinaryMask read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.detail());
  }
}

std::string encode(const mask2box::BinaryMask& mask, Encoding encoding) {
  std::ostringstream os;
  os << (encoding == Encoding::Binary ? "P5" : "P2") << '\n'
     << mask.width() << ' ' << mask.height() << "\n255\n";
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (encoding == Encoding::Binary) {
        os.put(static_cast<char>(mask.at(x, y) ? 255 : 0));
      } else {
        os << (mask.at(x, y) ? 255 : 0) << (x + 1 == mask.width() ? '\n' : ' ');
      }
    }
  }
  return os.str();
}

}  // namespace locreward::pgm
