#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace salprop {

inline constexpr int kMinImageSize = 16;

// 8-bit RGB, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

// CIELab planes. L in [0,100], a/b unbounded opponent axes.
struct LabImage {
  int width = 0;
  int height = 0;
  std::vector<double> L, a, b;
};

struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  // Clamped lookup, used by every filter for border handling.
  double at_clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(x, y);
  }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 or 1

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Decodes a PNG or JPEG file. Grayscale input is replicated to three channels.
// Throws FileNotFound / DecodeError / TooSmall.
RgbImage load_image(const std::string& path);

// Loads an image and thresholds it into {0,1} at mid-gray (used for training masks).
BinaryMask load_mask(const std::string& path);

// sRGB -> CIELab under D65. Dimensions are preserved exactly.
LabImage rgb_to_lab(const RgbImage& img);

// L channel rescaled to [0,255], the intensity grid used by the LTP and
// texture features (their thresholds assume 8-bit-like magnitudes).
ScalarField luminance_field(const LabImage& lab);

}  // namespace salprop
