#include "salprop/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "salprop/errors.hpp"
#include "salprop/rng.hpp"

namespace salprop {

namespace {

// Canonical pixel ordering so every feature is bit-identical under
// permutations of the edgelet's pixel list.
std::vector<std::pair<int, int>> sorted_pixels(const Edgelet& e) {
  auto px = e.pixels;
  std::sort(px.begin(), px.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
  return px;
}

}  // namespace

OrientedGradientField oriented_gradients(const LabImage& lab, double sigma) {
  const int w = lab.width, h = lab.height;
  ScalarField chans[3] = {ScalarField(w, h), ScalarField(w, h), ScalarField(w, h)};
  chans[0].values = lab.L;
  chans[1].values = lab.a;
  chans[2].values = lab.b;

  GradientPair grads[3];
  for (int c = 0; c < 3; ++c) grads[c] = gaussian_gradients(chans[c], sigma);

  OrientedGradientField field;
  field.width = w;
  field.height = h;
  for (int o = 0; o < 4; ++o) {
    field.g[o] = ScalarField(w, h);
    const double co = std::cos(kOrientations[o]);
    const double so = std::sin(kOrientations[o]);
    #pragma omp parallel for
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        double sum = 0.0;
        for (int c = 0; c < 3; ++c)
          sum += std::fabs(co * grads[c].dx.values[idx] + so * grads[c].dy.values[idx]);
        field.g[o].values[idx] = sum;
      }
    }
  }
  return field;
}

double color_gradient_feature(const Edgelet& e, const OrientedGradientField& grads) {
  const auto px = sorted_pixels(e);
  double acc = 0.0;
  for (int o = 0; o < 4; ++o) {
    double s = 0.0;
    for (const auto& [x, y] : px) s += grads.g[o].at(x, y);
    acc += s * s;
  }
  return std::sqrt(acc);
}

double color_gradient_feature(const Edgelet& e, const LabImage& lab) {
  return color_gradient_feature(e, oriented_gradients(lab, 1.0));
}

double ltp_feature(const Edgelet& e, const ScalarField& luminance, double T) {
  // neighbor b walks from east: E, SE, S, SW, W, NW, N, NE
  static constexpr int kNx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kNy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

  // integer LTP codes tallied into histograms: order-free and exact
  std::array<std::int64_t, 256> hu{}, hl{};
  for (const auto& [x, y] : e.pixels) {
    const double center = luminance.at_clamped(x, y);
    int up = 0, lo = 0;
    for (int b = 0; b < 8; ++b) {
      const double z = luminance.at_clamped(x + kNx[b], y + kNy[b]) - center;
      if (z >= T) up |= 1 << b;
      if (z <= -T) lo |= 1 << b;
    }
    ++hu[up];
    ++hl[lo];
  }

  const std::int64_t n = static_cast<std::int64_t>(e.pixels.size());
  if (n == 0) return 0.0;
  auto pop_var = [n](const std::array<std::int64_t, 256>& hist) {
    std::int64_t sx = 0, sxx = 0;
    for (int c = 0; c < 256; ++c) {
      sx += hist[c] * c;
      sxx += hist[c] * static_cast<std::int64_t>(c) * c;
    }
    // n*Sxx - Sx^2 stays well under 2^53, so the numerator is exact
    return static_cast<double>(n * sxx - sx * sx) / (static_cast<double>(n) * n);
  };
  return (pop_var(hu) + pop_var(hl)) / 2.0;
}

double edge_strength(const Edgelet& e, const EdgeMap& map) {
  double s = 0.0;
  for (const auto& [x, y] : e.pixels) s = std::max(s, static_cast<double>(map.mag(x, y)));
  return s;
}

namespace {

// Dense clamped 2-D Gaussian smoothing evaluated at one pixel.
double point_smooth(const ScalarField& img, int px, int py, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  double acc = 0.0, norm = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double wgt = std::exp(-(dx * dx + dy * dy) * inv2s2);
      acc += wgt * img.at_clamped(px + dx, py + dy);
      norm += wgt;
    }
  return acc / norm;
}

double point_dog(const ScalarField& img, int px, int py, double sigma) {
  return point_smooth(img, px, py, sigma) - point_smooth(img, px, py, 1.6 * sigma);
}

// Mean-subtracted LoG kernel applied at one pixel; zero on flat regions.
double point_log(const ScalarField& img, int px, int py, double sigma) {
  const int radius = std::max(2, static_cast<int>(std::ceil(4.0 * sigma)));
  const int side = 2 * radius + 1;
  std::vector<double> kern(static_cast<std::size_t>(side) * side);
  const double s2 = sigma * sigma;
  double mean = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double q = (dx * dx + dy * dy) / (2.0 * s2);
      const double v = (q - 1.0) / (s2 * s2) * std::exp(-q);
      kern[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = v;
      mean += v;
    }
  mean /= side * side;
  double acc = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      acc += (kern[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] - mean) *
             img.at_clamped(px + dx, py + dy);
  return acc;
}

std::vector<std::pair<int, int>> disc_pixels(double ctr_x, double ctr_y, int radius,
                                             int w, int h) {
  std::vector<std::pair<int, int>> out;
  const int x0 = static_cast<int>(std::floor(ctr_x - radius));
  const int x1 = static_cast<int>(std::ceil(ctr_x + radius));
  const int y0 = static_cast<int>(std::floor(ctr_y - radius));
  const int y1 = static_cast<int>(std::ceil(ctr_y + radius));
  for (int y = y0; y <= y1; ++y) {
    if (y < 0 || y >= h) continue;
    for (int x = x0; x <= x1; ++x) {
      if (x < 0 || x >= w) continue;
      const double dx = x - ctr_x, dy = y - ctr_y;
      if (dx * dx + dy * dy <= static_cast<double>(radius) * radius)
        out.emplace_back(x, y);
    }
  }
  return out;
}

struct FamilyVariances {
  double dog = 0.0;
  double log = 0.0;
};

FamilyVariances region_variances(const std::vector<std::pair<int, int>>& region,
                                 const ScalarField& lum, double k, std::mt19937& rng) {
  FamilyVariances out;
  if (region.empty()) return out;
  const int n_s = (static_cast<int>(region.size()) + 1) / 2;
  auto picks = sample_indices(rng, static_cast<int>(region.size()), n_s);
  std::sort(picks.begin(), picks.end());

  std::vector<double> dog_vals, log_vals;
  dog_vals.reserve(2 * static_cast<std::size_t>(n_s));
  log_vals.reserve(3 * static_cast<std::size_t>(n_s));
  for (int i : picks) {
    const auto& [x, y] = region[i];
    dog_vals.push_back(point_dog(lum, x, y, k));
    dog_vals.push_back(point_dog(lum, x, y, 2.0 * k));
    log_vals.push_back(point_log(lum, x, y, k));
    log_vals.push_back(point_log(lum, x, y, 2.0 * k));
    log_vals.push_back(point_log(lum, x, y, 4.0 * k));
  }
  auto pop_var = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mu = 0.0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(v.size());
  };
  out.dog = pop_var(dog_vals);
  out.log = pop_var(log_vals);
  return out;
}

}  // namespace

TextureContext texture_context(const Edgelet& e, const ScalarField& luminance,
                               double k, int radius, std::uint32_t seed) {
  if (k <= 0.0) fail(Err::BadValue, "texture scale k must be positive");
  if (radius < 1) fail(Err::BadValue, "texture radius must be >= 1");

  const auto px = sorted_pixels(e);
  const double n = static_cast<double>(px.size());
  double cx = 0.0, cy = 0.0;
  for (const auto& [x, y] : px) {
    cx += x;
    cy += y;
  }
  cx /= n;
  cy /= n;

  // principal axis of the pixel cloud stands in for the mean tangent
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : px) {
    const double dx = x - cx, dy = y - cy;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  double tx = 1.0, ty = 0.0;
  const double tr2 = (sxx + syy) / 2.0;
  const double det = std::sqrt((sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy);
  const double lmax = tr2 + det;
  const double v1x = sxy, v1y = lmax - sxx;
  const double v2x = lmax - syy, v2y = sxy;
  const double n1 = v1x * v1x + v1y * v1y, n2 = v2x * v2x + v2y * v2y;
  if (n1 > 1e-18 || n2 > 1e-18) {
    if (n1 >= n2) {
      tx = v1x / std::sqrt(n1);
      ty = v1y / std::sqrt(n1);
    } else {
      tx = v2x / std::sqrt(n2);
      ty = v2y / std::sqrt(n2);
    }
  }
  const double nx = -ty, ny = tx;

  const double off = radius + 1.0;
  auto region_a = disc_pixels(cx + off * nx, cy + off * ny, radius, luminance.width,
                              luminance.height);
  auto region_b = disc_pixels(cx - off * nx, cy - off * ny, radius, luminance.width,
                              luminance.height);

  TextureContext out;
  if (region_a.empty() && region_b.empty()) {
    out.degenerate = true;
    return out;
  }

  std::mt19937 rng(seed);
  const auto va = region_variances(region_a, luminance, k, rng);
  const auto vb = region_variances(region_b, luminance, k, rng);
  out.dog1 = std::min(va.dog, vb.dog);
  out.dog2 = std::max(va.dog, vb.dog);
  out.log1 = std::min(va.log, vb.log);
  out.log2 = std::max(va.log, vb.log);
  return out;
}

NodeFeatures node_features(const Edgelet& e, const OrientedGradientField& grads,
                           const ScalarField& luminance, const EdgeMap& map,
                           const NodeFeatureConfig& cfg) {
  const auto tex = texture_context(e, luminance, cfg.k, cfg.radius,
                                   cfg.seed + static_cast<std::uint32_t>(e.id));
  NodeFeatures f{};
  f[0] = color_gradient_feature(e, grads);
  f[1] = tex.dog1;
  f[2] = tex.dog2;
  f[3] = tex.log1;
  f[4] = tex.log2;
  f[5] = ltp_feature(e, luminance, cfg.ltp_threshold);
  f[6] = edge_strength(e, map);
  return f;
}

NodeFeatures node_features(const Edgelet& e, const LabImage& lab,
                           const ScalarField& luminance, const EdgeMap& map,
                           const NodeFeatureConfig& cfg) {
  return node_features(e, oriented_gradients(lab, cfg.sigma), luminance, map, cfg);
}

std::vector<NodeFeatures> compute_node_features(const std::vector<Edgelet>& edgelets,
                                                const LabImage& lab,
                                                const ScalarField& luminance,
                                                const EdgeMap& map,
                                                const NodeFeatureConfig& cfg) {
  const auto grads = oriented_gradients(lab, cfg.sigma);
  std::vector<NodeFeatures> out(edgelets.size());
  #pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(edgelets.size()); ++i)
    out[i] = node_features(edgelets[i], grads, luminance, map, cfg);
  return out;
}

LinkFeatures link_features(const NodeFeatures& fi, double cix, double ciy,
                           const NodeFeatures& fj, double cjx, double cjy) {
  LinkFeatures lf{};
  lf[0] = ciy < cjy ? 1.0 : 0.0;
  lf[1] = cix > cjx ? 1.0 : 0.0;
  std::array<double, 7> d{};
  double mu = 0.0;
  for (int c = 0; c < 7; ++c) {
    d[c] = fi[c] - fj[c];
    mu += d[c];
  }
  mu /= 7.0;
  double var = 0.0;
  for (int c = 0; c < 7; ++c) var += (d[c] - mu) * (d[c] - mu);
  var /= 7.0;
  lf[2] = mu;
  lf[3] = var;
  return lf;
}

}  // namespace salprop
