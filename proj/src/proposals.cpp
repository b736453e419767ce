#include "salprop/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "salprop/errors.hpp"

namespace salprop {

SalientEdgeIndex build_salient_index(const std::vector<Edgelet>& edgelets,
                                     const std::vector<EdgeletSaliency>& saliency,
                                     const Labeling& labels, int cell) {
  if (edgelets.size() != saliency.size() || edgelets.size() != labels.size())
    fail(Err::SizeMismatch, "segments, saliency and labels disagree in count");

  SalientEdgeIndex index;
  index.cell = cell;
  index.edgelets.resize(edgelets.size());
  int max_x = 0, max_y = 0;
  for (std::size_t i = 0; i < edgelets.size(); ++i) {
    const auto& e = edgelets[i];
    int x0 = std::numeric_limits<int>::max(), y0 = x0;
    int x1 = std::numeric_limits<int>::min(), y1 = x1;
    for (const auto& [x, y] : e.pixels) {
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
    auto& entry = index.edgelets[i];
    entry.bbox = Window{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    entry.length = e.length;
    entry.saliency = saliency[i].posterior;
    entry.label = labels[i];
    max_x = std::max(max_x, x0);
    max_y = std::max(max_y, y0);
  }

  index.grid_w = max_x / cell + 1;
  index.grid_h = max_y / cell + 1;
  index.grid.assign(static_cast<std::size_t>(index.grid_w) * index.grid_h, {});
  for (std::size_t i = 0; i < index.edgelets.size(); ++i) {
    const auto& b = index.edgelets[i].bbox;
    index.grid[static_cast<std::size_t>(b.y / cell) * index.grid_w + b.x / cell]
        .push_back(static_cast<int>(i));
  }
  return index;
}

int stride_for(int extent, double alpha) {
  // delta such that two w-wide windows offset by delta have IoU alpha:
  // (w - delta) / (w + delta) = alpha
  const double real = extent * (1.0 - alpha) / (1.0 + alpha);
  const int lo = std::max(1, static_cast<int>(std::floor(real)));
  const int hi = lo + 1;
  auto pair_iou = [extent](int d) {
    return d >= extent ? 0.0
                       : static_cast<double>(extent - d) / (extent + d);
  };
  return std::fabs(pair_iou(lo) - alpha) <= std::fabs(pair_iou(hi) - alpha) ? lo : hi;
}

std::vector<Window> enumerate_windows(int img_w, int img_h,
                                      const WindowParams& params) {
  const double area = static_cast<double>(img_w) * img_h;
  std::vector<Window> out;
  for (int t = 0;; ++t) {
    const double a = params.scale_min + t * params.scale_step;
    if (a > params.scale_max + 1e-12) break;
    for (double r : params.aspects) {
      const int w = static_cast<int>(std::lround(std::sqrt(a * area * r)));
      const int h = static_cast<int>(std::lround(std::sqrt(a * area / r)));
      if (w < params.min_dim || h < params.min_dim) continue;
      if (w > img_w || h > img_h) continue;
      const int sx = stride_for(w, params.alpha);
      const int sy = stride_for(h, params.alpha);
      for (int y = 0; y + h <= img_h; y += sy)
        for (int x = 0; x + w <= img_w; x += sx) out.push_back(Window{x, y, w, h});
    }
  }
  if (out.empty())
    fail(Err::ImageTooSmall, std::to_string(img_w) + "x" + std::to_string(img_h) +
                                 " image admits no window");
  return out;
}

double score_window(const Window& win, const SalientEdgeIndex& index) {
  // a contained edgelet's bbox top-left falls inside the window, so only the
  // grid cells overlapping the window need scanning
  const int cx0 = win.x / index.cell;
  const int cy0 = win.y / index.cell;
  const int cx1 = std::min(index.grid_w - 1, (win.x + win.w - 1) / index.cell);
  const int cy1 = std::min(index.grid_h - 1, (win.y + win.h - 1) / index.cell);

  double acc = 0.0;
  if (cx0 <= cx1 && cy0 <= cy1 && !index.grid.empty()) {
    std::vector<int> hits;
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx)
        for (int i : index.grid[static_cast<std::size_t>(cy) * index.grid_w + cx]) {
          const auto& entry = index.edgelets[i];
          if (entry.label != 1) continue;
          if (!contains(win, entry.bbox)) continue;
          hits.push_back(i);
        }
    // ascending id so optimized and reference summations agree bit for bit
    std::sort(hits.begin(), hits.end());
    for (int i : hits)
      acc += index.edgelets[i].saliency * index.edgelets[i].length;
  }
  return acc / std::sqrt(static_cast<double>(win.w) * win.h);
}

namespace {

bool proposal_before(const Proposal& a, const Proposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.window.x != b.window.x) return a.window.x < b.window.x;
  if (a.window.y != b.window.y) return a.window.y < b.window.y;
  if (a.window.w != b.window.w) return a.window.w < b.window.w;
  return a.window.h < b.window.h;
}

}  // namespace

std::vector<Proposal> score_all_windows(const std::vector<Window>& windows,
                                        const SalientEdgeIndex& index) {
  std::vector<Proposal> out(windows.size());
  #pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(windows.size()); ++i) {
    out[i].window = windows[i];
    out[i].score = score_window(windows[i], index);
  }
  std::sort(out.begin(), out.end(), proposal_before);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

namespace {

Proposal refine_one(Proposal p, const SalientEdgeIndex& index, double alpha,
                    int img_w, int img_h) {
  int step = std::max(1, stride_for(p.window.w, alpha) / 2);
  int step_y = std::max(1, stride_for(p.window.h, alpha) / 2);
  p.score = score_window(p.window, index);
  while (step >= 2 || step_y >= 2) {
    bool improved = true;
    while (improved) {
      improved = false;
      // x-4, x+4, w-4, w+4, then the y-axis counterparts
      const int dx[8] = {-step, step, 0, 0, 0, 0, 0, 0};
      const int dw[8] = {0, 0, -step, step, 0, 0, 0, 0};
      const int dy[8] = {0, 0, 0, 0, -step_y, step_y, 0, 0};
      const int dh[8] = {0, 0, 0, 0, 0, 0, -step_y, step_y};
      for (int m = 0; m < 8; ++m) {
        Window cand{p.window.x + dx[m], p.window.y + dy[m], p.window.w + dw[m],
                    p.window.h + dh[m]};
        if (cand.w < 2 || cand.h < 2) continue;
        if (cand.x < 0 || cand.y < 0 || cand.x + cand.w > img_w ||
            cand.y + cand.h > img_h)
          continue;
        const double s = score_window(cand, index);
        if (s > p.score) {
          p.window = cand;
          p.score = s;
          improved = true;
        }
      }
    }
    step /= 2;
    step_y /= 2;
  }
  return p;
}

}  // namespace

std::vector<Proposal> refine(const std::vector<Proposal>& proposals,
                             const SalientEdgeIndex& index, double alpha,
                             int img_w, int img_h) {
  std::vector<Proposal> out(proposals.size());
  #pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(proposals.size()); ++i)
    out[i] = refine_one(proposals[i], index, alpha, img_w, img_h);
  std::sort(out.begin(), out.end(), proposal_before);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

std::vector<Proposal> nms_boxes(const std::vector<Proposal>& proposals, double theta) {
  std::vector<Proposal> sorted = proposals;
  std::sort(sorted.begin(), sorted.end(), proposal_before);
  std::vector<Proposal> kept;
  for (const auto& p : sorted) {
    bool ok = true;
    for (const auto& q : kept)
      if (iou(p.window, q.window) > theta) {
        ok = false;
        break;
      }
    if (ok) {
      kept.push_back(p);
      kept.back().rank = static_cast<int>(kept.size());
    }
  }
  return kept;
}

void write_proposals_csv(const std::string& path, const ProposalSet& set,
                         const std::vector<std::string>& comment_lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  for (const auto& line : comment_lines) out << "# " << line << '\n';
  out << "rank,x,y,w,h,score\n";
  char buf[160];
  for (const auto& p : set.proposals) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%.17g\n", p.rank, p.window.x,
                  p.window.y, p.window.w, p.window.h, p.score);
    out << buf;
  }
}

std::vector<Proposal> read_proposals_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path);
  if (!in) fail(Err::FileNotFound, path);

  std::vector<Proposal> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "rank,x,y,w,h,score")
        fail(Err::ParseError, path + ": unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    Proposal p;
    char comma;
    std::istringstream ss(line);
    if (!(ss >> p.rank >> comma >> p.window.x >> comma >> p.window.y >> comma >>
          p.window.w >> comma >> p.window.h >> comma >> p.score))
      fail(Err::ParseError, path + ": bad row '" + line + "'");
    out.push_back(p);
  }
  if (!header_seen) fail(Err::ParseError, path + ": missing header");
  return out;
}

}  // namespace salprop
