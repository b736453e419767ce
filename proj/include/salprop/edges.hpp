#pragma once

#include <string>
#include <utility>
#include <vector>

#include "salprop/image.hpp"

namespace salprop {

// Dense per-pixel edge magnitude/orientation grid. Magnitude lives in
// [0,255]; orientation is the edge tangent in [0,pi). sparse flips to true
// once non-maximal suppression has run.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<float> magnitude;
  std::vector<float> orientation;
  bool sparse = false;
  bool flat = false;  // set by the builtin detector when no gradient exists

  float mag(int x, int y) const {
    return magnitude[static_cast<std::size_t>(y) * width + x];
  }
  float ori(int x, int y) const {
    return orientation[static_cast<std::size_t>(y) * width + x];
  }
};

// One edge segment: an ordered 8-connected chain of sparse edge pixels.
struct Edgelet {
  int id = 0;
  std::vector<std::pair<int, int>> pixels;  // (x, y), consecutive 8-connected
  std::vector<float> mags;                  // magnitude at each pixel
  int length = 0;                           // == pixels.size()
  double strength = 0.0;                    // max of mags
  double cx = 0.0, cy = 0.0;                // centroid
};

// EMAP container: "EMAP" magic, u32le width, u32le height, then two
// row-major float32le planes (magnitudes, orientations).
EdgeMap read_edge_map(const std::string& path);
void write_edge_map(const EdgeMap& map, const std::string& path);

// Oriented Gaussian-derivative detector over L,a,b; magnitude is the largest
// per-channel response across the four probe orientations, rescaled so the
// image-wide maximum is 255. Stored orientation is the edge tangent.
EdgeMap detect_edges_builtin(const LabImage& lab, double sigma = 1.0);

// Canny-style thinning: compare each pixel against the two bilinearly
// interpolated samples where the gradient ray exits its cell, dropping it
// unless it beats both (ties break toward the forward side so symmetric
// steps thin to one pixel). Throws AlreadySparse.
EdgeMap non_max_suppress(const EdgeMap& map);

// Groups above-threshold sparse pixels into chains; a chain breaks where the
// accumulated orientation change since the last break reaches pi/2, and at
// junction pixels (3+ distinct branches meeting, counted as runs of sparse
// neighbors around the 8-ring). Keeps chains with length > min_len.
std::vector<Edgelet> extract_edgelets(const EdgeMap& map, int min_len = 15,
                                      double min_mag = 40.0);

}  // namespace salprop
