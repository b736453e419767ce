#include "salprop/edges.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "salprop/errors.hpp"
#include "salprop/filters.hpp"

namespace salprop {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

float read_f32le(const unsigned char* p) {
  const std::uint32_t bits = read_u32le(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void write_u32le(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8 & 0xff),
                              static_cast<unsigned char>(v >> 16 & 0xff),
                              static_cast<unsigned char>(v >> 24 & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32le(std::ofstream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32le(out, bits);
}

// Fold a tangent angle into [0, pi). Guards against float rounding landing
// exactly on pi.
float fold_orientation(double o) {
  o = std::fmod(o, kPi);
  if (o < 0) o += kPi;
  const float f = static_cast<float>(o);
  return f < kPi ? f : 0.0f;
}

// Difference between two tangents, circular modulo pi, in [0, pi/2].
double orientation_diff(double a, double b) {
  double d = std::fabs(a - b);
  d = std::fmod(d, kPi);
  return std::min(d, kPi - d);
}

}  // namespace

EdgeMap read_edge_map(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::FileNotFound, path);

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4) fail(Err::Truncated, path + ": no room for magic");
  if (std::memcmp(bytes.data(), "EMAP", 4) != 0)
    fail(Err::BadMagic, path + ": expected EMAP magic");
  if (bytes.size() < 12) fail(Err::Truncated, path + ": header cut short");

  EdgeMap map;
  map.width = static_cast<int>(read_u32le(bytes.data() + 4));
  map.height = static_cast<int>(read_u32le(bytes.data() + 8));
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
  const std::size_t need = 12 + 8 * n;
  if (bytes.size() < need)
    fail(Err::Truncated, path + ": payload is " + std::to_string(bytes.size() - 12) +
                             " bytes, header promises " + std::to_string(8 * n));

  map.magnitude.resize(n);
  map.orientation.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float m = read_f32le(bytes.data() + 12 + 4 * i);
    const float o = read_f32le(bytes.data() + 12 + 4 * (n + i));
    if (!std::isfinite(m) || m < 0.0f || m > 255.0f)
      fail(Err::BadValue, path + ": magnitude " + std::to_string(m) + " at index " +
                              std::to_string(i));
    if (!std::isfinite(o) || o < 0.0f || static_cast<double>(o) >= kPi)
      fail(Err::BadValue, path + ": orientation " + std::to_string(o) + " at index " +
                              std::to_string(i));
    map.magnitude[i] = m;
    map.orientation[i] = o;
  }
  map.sparse = false;
  return map;
}

void write_edge_map(const EdgeMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  out.write("EMAP", 4);
  write_u32le(out, static_cast<std::uint32_t>(map.width));
  write_u32le(out, static_cast<std::uint32_t>(map.height));
  for (float m : map.magnitude) write_f32le(out, m);
  for (float o : map.orientation) write_f32le(out, o);
  if (!out) fail(Err::Truncated, "short write to " + path);
}

EdgeMap detect_edges_builtin(const LabImage& lab, double sigma) {
  const int w = lab.width, h = lab.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  ScalarField chans[3];
  chans[0] = ScalarField(w, h);
  chans[1] = ScalarField(w, h);
  chans[2] = ScalarField(w, h);
  chans[0].values = lab.L;
  chans[1].values = lab.a;
  chans[2].values = lab.b;

  GradientPair grads[3];
  for (int c = 0; c < 3; ++c) grads[c] = gaussian_gradients(chans[c], sigma);

  EdgeMap map;
  map.width = w;
  map.height = h;
  map.magnitude.assign(n, 0.0f);
  map.orientation.assign(n, 0.0f);

  std::vector<double> raw(n, 0.0);
  std::vector<int> arg(n, 0);
  double rawmax = 0.0;

  #pragma omp parallel for reduction(max : rawmax)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      double best = 0.0;
      int best_o = 0;
      for (int o = 0; o < 4; ++o) {
        const double co = std::cos(kOrientations[o]);
        const double so = std::sin(kOrientations[o]);
        for (int c = 0; c < 3; ++c) {
          const double r =
              std::fabs(co * grads[c].dx.values[idx] + so * grads[c].dy.values[idx]);
          if (r > best) {
            best = r;
            best_o = o;
          }
        }
      }
      raw[idx] = best;
      arg[idx] = best_o;
      rawmax = std::max(rawmax, best);
    }
  }

  if (rawmax <= 1e-12) {
    map.flat = true;  // nothing to scale; the caller treats this as "no edges"
    return map;
  }

  #pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      map.magnitude[idx] = static_cast<float>(255.0 * raw[idx] / rawmax);
      // probe direction is the gradient; the edge tangent sits 90 deg away
      map.orientation[idx] = fold_orientation(kOrientations[arg[idx]] + kPi / 2.0);
    }
  }
  return map;
}

namespace {

// Bilinear magnitude lookup at a real-valued position; outside counts as 0.
double sample_magnitude(const EdgeMap& map, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const int px = x0 + dx, py = y0 + dy;
      if (px < 0 || px >= map.width || py < 0 || py >= map.height) continue;
      const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      acc += wgt * map.mag(px, py);
    }
  return acc;
}

}  // namespace

EdgeMap non_max_suppress(const EdgeMap& map) {
  if (map.sparse) fail(Err::AlreadySparse, "map has already been thinned");

  EdgeMap out = map;
  out.sparse = true;

  #pragma omp parallel for
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double m = map.mag(x, y);
      if (m == 0.0) continue;
      const double theta = map.ori(x, y);
      // step along the gradient (normal to the edge tangent) to where the
      // ray exits the unit cell, so each probe interpolates between the two
      // ring neighbors the ray passes between; snapping within numerical
      // noise of the principal directions keeps symmetric ridges tied
      double ux = -std::sin(theta);
      double uy = std::cos(theta);
      const double scale = 1.0 / std::max(std::fabs(ux), std::fabs(uy));
      ux *= scale;
      uy *= scale;
      if (std::fabs(ux - std::round(ux)) < 1e-6) ux = std::round(ux);
      if (std::fabs(uy - std::round(uy)) < 1e-6) uy = std::round(uy);
      const double fwd = sample_magnitude(map, x + ux, y + uy);
      const double bwd = sample_magnitude(map, x - ux, y - uy);
      // asymmetric tie-break: a symmetric step yields exactly equal responses
      // on both flanks, and keeping both would leave a two-pixel-thick line
      if (m < fwd || m <= bwd)
        out.magnitude[static_cast<std::size_t>(y) * map.width + x] = 0.0f;
    }
  }
  return out;
}

std::vector<Edgelet> extract_edgelets(const EdgeMap& map, int min_len, double min_mag) {
  const int w = map.width, h = map.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) mask[i] = map.magnitude[i] > min_mag ? 1 : 0;

  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

  auto idx_of = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  auto in_bounds = [w, h](int x, int y) { return x >= 0 && x < w && y >= 0 && y < h; };

  // nbr_count seeds traces at open ends; branches counts runs of set pixels
  // around the 8-ring, so a junction is a pixel where >= 3 distinct branches
  // meet. Raw degree would flag every staircase corner of a curved contour
  // (the two pixels flanking a step see each other diagonally) and shatter
  // circles and diagonals into fragments.
  std::vector<std::uint8_t> nbr_count(n, 0), branches(n, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask[idx_of(x, y)]) continue;
      bool ring[8];
      int cnt = 0, runs = 0;
      for (int k = 0; k < 8; ++k) {
        const int nx = x + kDx[k], ny = y + kDy[k];
        ring[k] = in_bounds(nx, ny) && mask[idx_of(nx, ny)];
        cnt += ring[k];
      }
      for (int k = 0; k < 8; ++k) runs += ring[k] && !ring[(k + 7) % 8];
      nbr_count[idx_of(x, y)] = static_cast<std::uint8_t>(cnt);
      branches[idx_of(x, y)] = static_cast<std::uint8_t>(runs);
    }

  std::vector<std::uint8_t> visited(n, 0);
  std::vector<std::vector<std::pair<int, int>>> chains;

  auto walk = [&](int sx, int sy) {
    std::vector<std::pair<int, int>> chain;
    chain.emplace_back(sx, sy);
    visited[idx_of(sx, sy)] = 1;
    double acc = 0.0;
    int cx = sx, cy = sy;
    while (true) {
      // junctions end the chain that reached them first
      if (branches[idx_of(cx, cy)] >= 3 && chain.size() >= 2) break;
      int best_k = -1;
      double best_diff = 0.0;
      const double cur_ori = map.ori(cx, cy);
      for (int k = 0; k < 8; ++k) {
        const int nx = cx + kDx[k], ny = cy + kDy[k];
        if (!in_bounds(nx, ny)) continue;
        const std::size_t ni = idx_of(nx, ny);
        if (!mask[ni] || visited[ni]) continue;
        const double d = orientation_diff(cur_ori, map.ori(nx, ny));
        if (best_k < 0 || d < best_diff) {
          best_k = k;
          best_diff = d;
        }
      }
      if (best_k < 0) break;
      const int nx = cx + kDx[best_k], ny = cy + kDy[best_k];
      visited[idx_of(nx, ny)] = 1;
      // epsilon so a true right-angle bend trips the budget even though a
      // float-stored pi/2 folds to fractionally under pi/2
      if (acc + best_diff >= kPi / 2.0 - 1e-6) {
        // orientation budget exhausted: close this chain, restart at the bend
        chains.push_back(std::move(chain));
        chain.clear();
        chain.emplace_back(nx, ny);
        acc = 0.0;
      } else {
        chain.emplace_back(nx, ny);
        acc += best_diff;
      }
      cx = nx;
      cy = ny;
    }
    chains.push_back(std::move(chain));
  };

  // endpoints first so open chains are traced end to end; leftovers are cycles
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask[idx_of(x, y)] && !visited[idx_of(x, y)] && nbr_count[idx_of(x, y)] <= 1)
        walk(x, y);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask[idx_of(x, y)] && !visited[idx_of(x, y)]) walk(x, y);

  std::vector<Edgelet> out;
  for (auto& chain : chains) {
    if (static_cast<int>(chain.size()) <= min_len) continue;
    Edgelet e;
    e.id = static_cast<int>(out.size());
    e.pixels = std::move(chain);
    e.length = static_cast<int>(e.pixels.size());
    e.mags.reserve(e.pixels.size());
    double sx = 0.0, sy = 0.0, smax = 0.0;
    for (const auto& [px, py] : e.pixels) {
      const float m = map.mag(px, py);
      e.mags.push_back(m);
      smax = std::max(smax, static_cast<double>(m));
      sx += px;
      sy += py;
    }
    e.strength = smax;
    e.cx = sx / e.length;
    e.cy = sy / e.length;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace salprop
