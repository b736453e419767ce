#include "salprop/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace salprop::reference {

ScalarField convolve2d(const ScalarField& src, const std::vector<double>& kernel,
                       int kw, int kh) {
  const int rx = kw / 2, ry = kh / 2;
  ScalarField out(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int v = 0; v < kh; ++v)
        for (int u = 0; u < kw; ++u)
          acc += kernel[static_cast<std::size_t>(v) * kw + u] *
                 src.at_clamped(x - (u - rx), y - (v - ry));
      out.at(x, y) = acc;
    }
  return out;
}

GradientPair gaussian_gradients(const ScalarField& src, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int side = 2 * r + 1;
  std::vector<double> gx(static_cast<std::size_t>(side) * side);
  std::vector<double> gy(gx.size());
  double gauss_sum = 0.0;
  for (int t = -r; t <= r; ++t) gauss_sum += std::exp(-0.5 * t * t / (sigma * sigma));
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u) {
      const double g_u = std::exp(-0.5 * u * u / (sigma * sigma)) / gauss_sum;
      const double g_v = std::exp(-0.5 * v * v / (sigma * sigma)) / gauss_sum;
      const double d_u = -u / (sigma * sigma) * g_u;
      const double d_v = -v / (sigma * sigma) * g_v;
      gx[static_cast<std::size_t>(v + r) * side + (u + r)] = d_u * g_v;
      gy[static_cast<std::size_t>(v + r) * side + (u + r)] = g_u * d_v;
    }
  GradientPair out;
  out.dx = convolve2d(src, gx, side, side);
  out.dy = convolve2d(src, gy, side, side);
  return out;
}

ScalarField central_gradient_magnitude(const ScalarField& src) {
  ScalarField out(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      const double gx = (src.at_clamped(x + 1, y) - src.at_clamped(x - 1, y)) / 2.0;
      const double gy = (src.at_clamped(x, y + 1) - src.at_clamped(x, y - 1)) / 2.0;
      out.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  return out;
}

double score_window(const Window& win, const std::vector<Edgelet>& edgelets,
                    const std::vector<double>& saliency,
                    const std::vector<int>& labels) {
  double acc = 0.0;
  for (std::size_t j = 0; j < edgelets.size(); ++j) {
    if (labels[j] != 1) continue;
    bool inside = true;
    for (const auto& [px, py] : edgelets[j].pixels)
      if (!contains(win, px, py)) {
        inside = false;
        break;
      }
    if (inside) acc += saliency[j] * edgelets[j].length;
  }
  return acc / std::sqrt(static_cast<double>(win.w) * win.h);
}

std::vector<Proposal> nms_boxes(const std::vector<Proposal>& proposals, double theta) {
  std::vector<Proposal> sorted = proposals;
  std::sort(sorted.begin(), sorted.end(), [](const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.window.x != b.window.x) return a.window.x < b.window.x;
    if (a.window.y != b.window.y) return a.window.y < b.window.y;
    if (a.window.w != b.window.w) return a.window.w < b.window.w;
    return a.window.h < b.window.h;
  });
  std::vector<Proposal> kept;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    bool suppressed = false;
    for (std::size_t k = 0; k < kept.size() && !suppressed; ++k)
      suppressed = iou_pixel_count(sorted[i].window, kept[k].window) > theta;
    if (!suppressed) {
      sorted[i].rank = static_cast<int>(kept.size()) + 1;
      kept.push_back(sorted[i]);
    }
  }
  return kept;
}

double ltp_feature(const Edgelet& e, const ScalarField& luminance, double T) {
  // neighbors spelled as explicit compass points, walked west-about, with the
  // codes rebuilt from a power table — nothing borrowed from the main path
  struct Offset {
    int bit, dx, dy;
  };
  static constexpr Offset kRing[8] = {{4, -1, 0}, {5, -1, -1}, {6, 0, -1},
                                      {7, 1, -1},  {0, 1, 0},  {1, 1, 1},
                                      {2, 0, 1},   {3, -1, 1}};
  static constexpr int kPow2[8] = {1, 2, 4, 8, 16, 32, 64, 128};

  const std::int64_t n = static_cast<std::int64_t>(e.pixels.size());
  if (n == 0) return 0.0;

  std::vector<std::int64_t> upper(e.pixels.size()), lower(e.pixels.size());
  for (std::size_t p = 0; p < e.pixels.size(); ++p) {
    const auto [x, y] = e.pixels[p];
    const double center = luminance.at_clamped(x, y);
    std::int64_t u = 0, l = 0;
    for (const auto& o : kRing) {
      const double diff = luminance.at_clamped(x + o.dx, y + o.dy) - center;
      if (diff >= T) u += kPow2[o.bit];
      if (-diff >= T) l += kPow2[o.bit];
    }
    upper[p] = u;
    lower[p] = l;
  }

  // exact two-pass population variance on integers:
  // var = sum((n*x - sum(x))^2) / n^3
  auto exact_var = [n](const std::vector<std::int64_t>& codes) {
    std::int64_t sum = 0;
    for (std::int64_t c : codes) sum += c;
    std::int64_t num = 0;
    for (std::int64_t c : codes) {
      const std::int64_t d = n * c - sum;
      num += d * d;
    }
    return static_cast<double>(num) /
           (static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n));
  };
  return (exact_var(upper) + exact_var(lower)) / 2.0;
}

namespace {

double dense_point_smooth(const ScalarField& img, int px, int py, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  double acc = 0.0, norm = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      acc += w * img.at_clamped(px + dx, py + dy);
      norm += w;
    }
  return acc / norm;
}

double dense_point_log(const ScalarField& img, int px, int py, double sigma) {
  const int radius = std::max(2, static_cast<int>(std::ceil(4.0 * sigma)));
  const double s2 = sigma * sigma;
  double ksum = 0.0;
  int taps = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double q = (dx * dx + dy * dy) / (2.0 * s2);
      ksum += (q - 1.0) / (s2 * s2) * std::exp(-q);
      ++taps;
    }
  const double kmean = ksum / taps;
  double acc = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double q = (dx * dx + dy * dy) / (2.0 * s2);
      const double kv = (q - 1.0) / (s2 * s2) * std::exp(-q) - kmean;
      acc += kv * img.at_clamped(px + dx, py + dy);
    }
  return acc;
}

double plain_variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size());
}

}  // namespace

TextureContext texture_context_dense(const Edgelet& e, const ScalarField& luminance,
                                     double k, int radius) {
  double cx = 0.0, cy = 0.0;
  for (const auto& [x, y] : e.pixels) {
    cx += x;
    cy += y;
  }
  cx /= static_cast<double>(e.pixels.size());
  cy /= static_cast<double>(e.pixels.size());

  // orientation via the closed-form 2-D PCA angle
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : e.pixels) {
    sxx += (x - cx) * (x - cx);
    sxy += (x - cx) * (y - cy);
    syy += (y - cy) * (y - cy);
  }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double nx = -std::sin(theta), ny = std::cos(theta);

  const double off = radius + 1.0;
  auto collect = [&](double ox, double oy) {
    std::vector<double> dog_vals, log_vals;
    const double ctr_x = cx + off * ox, ctr_y = cy + off * oy;
    for (int y = static_cast<int>(std::floor(ctr_y - radius));
         y <= static_cast<int>(std::ceil(ctr_y + radius)); ++y) {
      if (y < 0 || y >= luminance.height) continue;
      for (int x = static_cast<int>(std::floor(ctr_x - radius));
           x <= static_cast<int>(std::ceil(ctr_x + radius)); ++x) {
        if (x < 0 || x >= luminance.width) continue;
        const double dx = x - ctr_x, dy = y - ctr_y;
        if (dx * dx + dy * dy > static_cast<double>(radius) * radius) continue;
        for (double s : {k, 2.0 * k})
          dog_vals.push_back(dense_point_smooth(luminance, x, y, s) -
                             dense_point_smooth(luminance, x, y, 1.6 * s));
        for (double s : {k, 2.0 * k, 4.0 * k})
          log_vals.push_back(dense_point_log(luminance, x, y, s));
      }
    }
    return std::pair(plain_variance(dog_vals), plain_variance(log_vals));
  };

  const auto [dog_a, log_a] = collect(nx, ny);
  const auto [dog_b, log_b] = collect(-nx, -ny);

  TextureContext out;
  out.dog1 = std::min(dog_a, dog_b);
  out.dog2 = std::max(dog_a, dog_b);
  out.log1 = std::min(log_a, log_b);
  out.log2 = std::max(log_a, log_b);
  return out;
}

double iou_pixel_count(const Window& a, const Window& b) {
  std::int64_t inter = 0;
  for (int y = a.y; y < a.y + a.h; ++y)
    for (int x = a.x; x < a.x + a.w; ++x)
      if (x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) ++inter;
  const std::int64_t uni =
      static_cast<std::int64_t>(a.w) * a.h + static_cast<std::int64_t>(b.w) * b.h -
      inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace salprop::reference
