#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "salprop/edges.hpp"
#include "salprop/filters.hpp"
#include "salprop/image.hpp"

namespace salprop {

// Per-segment feature vector, fixed order:
// [f_G, DoG1, DoG2, LoG1, LoG2, f_LTP, strength]
using NodeFeatures = std::array<double, 7>;

// Per-link feature vector: [up_down, right_left, mean_diff, var_diff].
using LinkFeatures = std::array<double, 4>;

// The four oriented color-gradient magnitude grids G_o, each summed over the
// L, a, b channels.
struct OrientedGradientField {
  int width = 0;
  int height = 0;
  std::array<ScalarField, 4> g;
};

OrientedGradientField oriented_gradients(const LabImage& lab, double sigma = 1.0);

// sqrt of the sum over orientations of the squared per-orientation totals,
// accumulated along the edgelet's pixels.
double color_gradient_feature(const Edgelet& e, const OrientedGradientField& grads);
double color_gradient_feature(const Edgelet& e, const LabImage& lab);

// Mean variance of the upper/lower LBP decompositions of the local ternary
// pattern over the edgelet's pixels. Neighbors use a 3x3 kernel with clamped
// borders; bit b walks counter-clockwise from east. Population variance.
double ltp_feature(const Edgelet& e, const ScalarField& luminance, double T = 5.0);

// Max magnitude over the edgelet's pixels, re-read from the map.
double edge_strength(const Edgelet& e, const EdgeMap& map);

struct TextureContext {
  double dog1 = 0.0, dog2 = 0.0;  // ascending per family
  double log1 = 0.0, log2 = 0.0;
  bool degenerate = false;  // both patches fell outside the image
};

// Variance of DoG/LoG filter-bank responses inside two discs straddling the
// edgelet (centers at centroid +- (radius+1) along the normal). Half of each
// disc's pixels are drawn with the given seed; the two region variances are
// emitted in ascending order per family.
TextureContext texture_context(const Edgelet& e, const ScalarField& luminance,
                               double k = 0.5, int radius = 5,
                               std::uint32_t seed = 0);

struct NodeFeatureConfig {
  double sigma = 1.0;        // oriented-gradient scale
  double k = 0.5;            // texture filter-bank base scale
  int radius = 5;            // texture patch radius
  double ltp_threshold = 5;  // T
  std::uint32_t seed = 42;   // texture sampling; offset per edgelet id
};

NodeFeatures node_features(const Edgelet& e, const OrientedGradientField& grads,
                           const ScalarField& luminance, const EdgeMap& map,
                           const NodeFeatureConfig& cfg);
NodeFeatures node_features(const Edgelet& e, const LabImage& lab,
                           const ScalarField& luminance, const EdgeMap& map,
                           const NodeFeatureConfig& cfg);

// Batch variant: computes the gradient field once and runs per-edgelet work
// in parallel.
std::vector<NodeFeatures> compute_node_features(const std::vector<Edgelet>& edgelets,
                                                const LabImage& lab,
                                                const ScalarField& luminance,
                                                const EdgeMap& map,
                                                const NodeFeatureConfig& cfg);

// Relative position bits plus mean/population-variance of the componentwise
// feature difference f_i - f_j. up_down = 1 iff i is above j (smaller y);
// right_left = 1 iff i is right of j.
LinkFeatures link_features(const NodeFeatures& fi, double cix, double ciy,
                           const NodeFeatures& fj, double cjx, double cjy);

}  // namespace salprop
