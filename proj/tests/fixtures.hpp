#pragma once

// Shared synthetic-scene builders for the test binaries. Everything is
// deterministic; images go to disk as real PNGs so the loader path is
// exercised end to end.

#include <cstdint>
#include <string>

#include "salprop/geometry.hpp"
#include "salprop/image.hpp"

namespace fixtures {

// Fresh unique directory under the system temp root.
std::string make_temp_dir(const std::string& tag);

void write_text(const std::string& path, const std::string& content);
void write_bytes(const std::string& path, const void* data, std::size_t len);

salprop::RgbImage solid_image(int w, int h, std::uint8_t r, std::uint8_t g,
                              std::uint8_t b);
void fill_rect(salprop::RgbImage& img, const salprop::Window& box, std::uint8_t r,
               std::uint8_t g, std::uint8_t b);
void fill_disc(salprop::RgbImage& img, double cx, double cy, double radius,
               std::uint8_t r, std::uint8_t g, std::uint8_t b);
void fill_diamond(salprop::RgbImage& img, int cx, int cy, int radius, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b);
// Seeded speckle over a box; keeps the image deterministic but locally busy.
void speckle(salprop::RgbImage& img, const salprop::Window& box, std::uint32_t seed,
             int amplitude);

void save_png(const salprop::RgbImage& img, const std::string& path);
void save_mask_png(const salprop::BinaryMask& mask, const std::string& path);

salprop::BinaryMask disc_mask(int w, int h, double cx, double cy, double radius);
salprop::BinaryMask rect_mask(int w, int h, const salprop::Window& box);
salprop::BinaryMask diamond_mask(int w, int h, int cx, int cy, int radius);

}  // namespace fixtures
