#pragma once

#include <algorithm>
#include <cstdint>

namespace salprop {

// Axis-aligned box, top-left corner plus size, in integer pixels.
struct Window {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
  int x1() const { return x + w; }  // exclusive
  int y1() const { return y + h; }

  bool operator==(const Window&) const = default;
};

inline std::int64_t intersection_area(const Window& a, const Window& b) {
  const int ix = std::max(0, std::min(a.x1(), b.x1()) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.y1(), b.y1()) - std::max(a.y, b.y));
  return static_cast<std::int64_t>(ix) * iy;
}

// Intersection over union on pixel-area arithmetic.
inline double iou(const Window& a, const Window& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

inline bool contains(const Window& outer, const Window& inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.x1() <= outer.x1() &&
         inner.y1() <= outer.y1();
}

inline bool contains(const Window& win, int px, int py) {
  return px >= win.x && px < win.x1() && py >= win.y && py < win.y1();
}

}  // namespace salprop
