#include "salprop/image.hpp"

#include <cmath>
#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "salprop/errors.hpp"

namespace salprop {

RgbImage load_image(const std::string& path) {
  if (!std::filesystem::exists(path))
    fail(Err::FileNotFound, path);
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);  // gray is promoted to 3ch
  if (bgr.empty())
    fail(Err::DecodeError, "cannot decode " + path);
  if (bgr.cols < kMinImageSize || bgr.rows < kMinImageSize)
    fail(Err::TooSmall, path + " is " + std::to_string(bgr.cols) + "x" +
                            std::to_string(bgr.rows) + ", minimum is 16x16");

  RgbImage img;
  img.width = bgr.cols;
  img.height = bgr.rows;
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      img.at(x, y, 0) = row[x][2];
      img.at(x, y, 1) = row[x][1];
      img.at(x, y, 2) = row[x][0];
    }
  }
  return img;
}

BinaryMask load_mask(const std::string& path) {
  const RgbImage img = load_image(path);
  BinaryMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.values.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int gray = (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3;
      mask.values[static_cast<std::size_t>(y) * img.width + x] = gray > 127 ? 1 : 0;
    }
  return mask;
}

namespace {

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta
             ? std::cbrt(t)
             : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

LabImage rgb_to_lab(const RgbImage& img) {
  // D65 reference white
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

  LabImage lab;
  lab.width = img.width;
  lab.height = img.height;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  lab.L.resize(n);
  lab.a.resize(n);
  lab.b.resize(n);

  // sRGB linear light -> XYZ
  #pragma omp parallel for
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double r = srgb_to_linear(img.at(x, y, 0) / 255.0);
      const double g = srgb_to_linear(img.at(x, y, 1) / 255.0);
      const double b = srgb_to_linear(img.at(x, y, 2) / 255.0);
      const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
      const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
      const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
      const double fx = lab_f(X / kXn);
      const double fy = lab_f(Y / kYn);
      const double fz = lab_f(Z / kZn);
      const std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
      lab.L[idx] = 116.0 * fy - 16.0;
      lab.a[idx] = 500.0 * (fx - fy);
      lab.b[idx] = 200.0 * (fy - fz);
    }
  }
  return lab;
}

ScalarField luminance_field(const LabImage& lab) {
  ScalarField f(lab.width, lab.height);
  for (std::size_t i = 0; i < lab.L.size(); ++i) f.values[i] = lab.L[i] * 2.55;
  return f;
}

}  // namespace salprop
