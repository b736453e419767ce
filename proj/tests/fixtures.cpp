#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "salprop/rng.hpp"

namespace fixtures {

using salprop::BinaryMask;
using salprop::RgbImage;
using salprop::Window;

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path() /
                    ("salprop_" + tag + "_" + std::to_string(::getpid()) + "_" +
                     std::to_string(counter++));
  std::filesystem::create_directories(base);
  return base.string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << content;
}

void write_bytes(const std::string& path, const void* data, std::size_t len) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
}

RgbImage solid_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.data.resize(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

void fill_rect(RgbImage& img, const Window& box, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  for (int y = box.y; y < box.y1(); ++y)
    for (int x = box.x; x < box.x1(); ++x) {
      if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
}

void fill_disc(RgbImage& img, double cx, double cy, double radius, std::uint8_t r,
               std::uint8_t g, std::uint8_t b) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy > radius * radius) continue;
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
}

void fill_diamond(RgbImage& img, int cx, int cy, int radius, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (std::abs(x - cx) + std::abs(y - cy) > radius) continue;
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
}

void speckle(RgbImage& img, const Window& box, std::uint32_t seed, int amplitude) {
  std::mt19937 rng(seed);
  for (int y = box.y; y < box.y1(); ++y)
    for (int x = box.x; x < box.x1(); ++x) {
      if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
      const int bump = static_cast<int>(salprop::uniform_index(
                           rng, static_cast<std::uint32_t>(2 * amplitude + 1))) -
                       amplitude;
      for (int c = 0; c < 3; ++c) {
        const int v = img.at(x, y, c) + bump;
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
}

void save_png(const RgbImage& img, const std::string& path) {
  cv::Mat mat(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      auto& px = mat.at<cv::Vec3b>(y, x);
      px[0] = img.at(x, y, 2);  // BGR on disk
      px[1] = img.at(x, y, 1);
      px[2] = img.at(x, y, 0);
    }
  cv::imwrite(path, mat);
}

void save_mask_png(const BinaryMask& mask, const std::string& path) {
  cv::Mat mat(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      mat.at<std::uint8_t>(y, x) = mask.at(x, y) ? 255 : 0;
  cv::imwrite(path, mat);
}

BinaryMask disc_mask(int w, int h, double cx, double cy, double radius) {
  BinaryMask mask;
  mask.width = w;
  mask.height = h;
  mask.values.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius)
        mask.values[static_cast<std::size_t>(y) * w + x] = 1;
    }
  return mask;
}

BinaryMask rect_mask(int w, int h, const Window& box) {
  BinaryMask mask;
  mask.width = w;
  mask.height = h;
  mask.values.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = std::max(0, box.y); y < std::min(h, box.y1()); ++y)
    for (int x = std::max(0, box.x); x < std::min(w, box.x1()); ++x)
      mask.values[static_cast<std::size_t>(y) * w + x] = 1;
  return mask;
}

BinaryMask diamond_mask(int w, int h, int cx, int cy, int radius) {
  BinaryMask mask;
  mask.width = w;
  mask.height = h;
  mask.values.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::abs(x - cx) + std::abs(y - cy) <= radius)
        mask.values[static_cast<std::size_t>(y) * w + x] = 1;
  return mask;
}

}  // namespace fixtures
