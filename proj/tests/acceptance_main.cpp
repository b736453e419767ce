// Acceptance gate: eight end-state criteria, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fixtures.hpp"
#include "salprop/bayes.hpp"
#include "salprop/crf.hpp"
#include "salprop/edges.hpp"
#include "salprop/errors.hpp"
#include "salprop/evalkit.hpp"
#include "salprop/features.hpp"
#include "salprop/pipeline.hpp"
#include "salprop/proposals.hpp"
#include "salprop/reference.hpp"
#include "salprop/rng.hpp"

using namespace salprop;

namespace {

struct Check {
  bool ok = true;
  int failures = 0;
  std::string first;

  void expect(bool cond, const std::string& msg) {
    if (cond) return;
    ok = false;
    if (++failures == 1) first = msg;
  }
};

// ---------------------------------------------------------------- criterion 1

void bayes_identity(Check& c) {
  std::mt19937 rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    SaliencyHistograms hist;
    double sum_s = 0.0, sum_b = 0.0;
    for (int b = 0; b < 10; ++b) {
      hist.h_sal[b] = uniform_real(rng, 0.01, 1.0);
      hist.h_bg[b] = uniform_real(rng, 0.01, 1.0);
      sum_s += hist.h_sal[b];
      sum_b += hist.h_bg[b];
    }
    for (int b = 0; b < 10; ++b) {
      hist.h_sal[b] /= sum_s;
      hist.h_bg[b] /= sum_b;
    }
    const double prior = uniform_real(rng, 0.001, 0.999);
    const double strength = uniform_real(rng, 0.0, 250.0);
    const double max_strength = 250.0;

    const double p_sal = posterior(strength, prior, hist, max_strength);
    SaliencyHistograms swapped;
    swapped.h_sal = hist.h_bg;
    swapped.h_bg = hist.h_sal;
    const double p_bg = posterior(strength, 1.0 - prior, swapped, max_strength);
    c.expect(std::fabs(p_sal + p_bg - 1.0) < 1e-12,
             "posterior pair does not sum to 1");

    double prev = -1.0;
    for (int step = 0; step <= 10; ++step) {
      const double p = posterior(strength, 0.01 + 0.098 * step, hist, max_strength);
      c.expect(p >= prev, "posterior not monotone in prior");
      prev = p;
    }
  }
}

// ---------------------------------------------------------------- criterion 2

Edgelet random_chain(std::mt19937& rng, int img_w, int img_h, int len, int id) {
  Edgelet e;
  e.id = id;
  int x = 2 + static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(img_w - len - 4)));
  int y = 2 + static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(img_h - 8)));
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < len; ++i) {
    e.pixels.emplace_back(x, y);
    seen.insert({x, y});
    ++x;
    const int dy = static_cast<int>(uniform_index(rng, 3)) - 1;
    const int ny = std::clamp(y + dy, 1, img_h - 2);
    if (!seen.count({x, ny})) y = ny;
  }
  e.length = static_cast<int>(e.pixels.size());
  e.strength = 100.0;
  e.mags.assign(e.pixels.size(), 100.0f);
  double sx = 0.0, sy = 0.0;
  for (const auto& [px, py] : e.pixels) {
    sx += px;
    sy += py;
  }
  e.cx = sx / e.length;
  e.cy = sy / e.length;
  return e;
}

void feature_oracles(Check& c) {
  std::mt19937 rng(2002);

  // LTP against the independent per-pixel reference, exact
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 24 + static_cast<int>(uniform_index(rng, 20));
    const int h = 20 + static_cast<int>(uniform_index(rng, 16));
    ScalarField lum(w, h, 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        lum.at(x, y) = static_cast<double>(uniform_index(rng, 256));
    const Edgelet e = random_chain(rng, w, h, 18, trial);
    c.expect(ltp_feature(e, lum, 5.0) == reference::ltp_feature(e, lum, 5.0),
             "LTP diverges from the per-pixel reference");
  }

  // color gradient magnitude against inline arithmetic
  for (int trial = 0; trial < 18; ++trial) {
    const int w = 40, h = 30;
    OrientedGradientField field;
    field.width = w;
    field.height = h;
    for (int o = 0; o < 4; ++o) {
      field.g[o] = ScalarField(w, h, 0.0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          field.g[o].at(x, y) = uniform_real(rng, -3.0, 3.0);
    }
    const Edgelet e = random_chain(rng, w, h, 20, trial);

    double acc = 0.0;
    for (int o = 0; o < 4; ++o) {
      double s = 0.0;
      for (const auto& [x, y] : e.pixels) s += field.g[o].at(x, y);
      acc += s * s;
    }
    const double want = std::sqrt(acc);
    c.expect(std::fabs(color_gradient_feature(e, field) - want) < 1e-9,
             "f_G diverges from hand arithmetic");
  }

  // two hand-computed fields: single orientation, and a 3-4-0-0 sum pair
  {
    OrientedGradientField field;
    field.width = 20;
    field.height = 8;
    for (int o = 0; o < 4; ++o) field.g[o] = ScalarField(20, 8, 0.0);
    Edgelet e;
    e.id = 0;
    for (int i = 0; i < 16; ++i) e.pixels.emplace_back(2 + i, 4);
    e.length = 16;
    for (int i = 0; i < 16; ++i) field.g[0].at(2 + i, 4) = 0.75;  // sums to 12
    c.expect(std::fabs(color_gradient_feature(e, field) - 12.0) < 1e-9,
             "single-orientation field should give the plain sum");
    field.g[1].at(2, 4) = 3.0;  // sums: (12, 3, 0, 0) -> sqrt(153)
    c.expect(std::fabs(color_gradient_feature(e, field) - std::sqrt(153.0)) < 1e-9,
             "two-orientation field should give the Euclidean norm");
  }
}

// ---------------------------------------------------------------- criterion 3

EdgeGraph random_graph(std::mt19937& rng, int n, bool tree_only) {
  EdgeGraph g;
  g.nodes.resize(n);
  g.adjacency.assign(n, {});
  for (int v = 0; v < n; ++v) {
    g.nodes[v].edgelet_id = v;
    for (int c = 0; c < 7; ++c) g.nodes[v].features[c] = uniform_real(rng, -1.0, 1.0);
  }
  std::set<std::pair<int, int>> used;
  auto add = [&](int i, int j) {
    EdgeGraph::Link l;
    l.i = std::min(i, j);
    l.j = std::max(i, j);
    l.features[0] = static_cast<double>(uniform_index(rng, 2));
    l.features[1] = static_cast<double>(uniform_index(rng, 2));
    l.features[2] = uniform_real(rng, -1.0, 1.0);
    l.features[3] = uniform_real(rng, 0.0, 1.0);
    g.adjacency[l.i].push_back(static_cast<int>(g.links.size()));
    g.adjacency[l.j].push_back(static_cast<int>(g.links.size()));
    g.links.push_back(l);
  };
  for (int v = 1; v < n; ++v) {
    const int p = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(v)));
    used.insert({std::min(p, v), std::max(p, v)});
    add(p, v);
  }
  if (!tree_only && n >= 3)
    for (int t = 0; t < n / 2; ++t) {
      const int i = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(n)));
      const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(n)));
      if (i == j || !used.insert({std::min(i, j), std::max(i, j)}).second) continue;
      add(i, j);
    }
  return g;
}

CrfModel random_model(std::mt19937& rng) {
  CrfModel m;
  for (int l = 0; l < 2; ++l)
    for (int c = 0; c < 7; ++c) m.w1[l][c] = uniform_real(rng, -1.0, 1.0);
  for (int q = 0; q < 4; ++q)
    for (int c = 0; c < 4; ++c) m.w2[q][c] = uniform_real(rng, -1.0, 1.0);
  return m;
}

void crf_inference(Check& c) {
  std::mt19937 rng(3003);

  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 12));
    const EdgeGraph g = random_graph(rng, n, true);
    const CrfModel m = random_model(rng);
    c.expect(map_inference(g, m) == map_inference_exact(g, m),
             "BP missed the exact MAP on a tree");
  }

  int matched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 10));
    const EdgeGraph g = random_graph(rng, n, false);
    const CrfModel m = random_model(rng);
    const double e_bp = energy(g, map_inference(g, m, 100), m);
    const double e_opt = energy(g, map_inference_exact(g, m), m);
    c.expect(e_bp <= e_opt + 1e-9, "BP energy exceeds the exact maximum");
    matched += e_bp >= e_opt - 1e-9;
  }
  c.expect(matched >= 190, "BP matched only " + std::to_string(matched) +
                               "/200 loopy graphs (need 190)");
}

// ---------------------------------------------------------------- criterion 4

std::vector<TrainingSample> separable_set(std::mt19937& rng, int count) {
  std::vector<TrainingSample> samples;
  for (int s = 0; s < count; ++s) {
    TrainingSample t;
    const int n = 4 + static_cast<int>(uniform_index(rng, 5));
    t.graph.nodes.resize(n);
    t.graph.adjacency.assign(n, {});
    for (int v = 0; v < n; ++v) {
      const int gold = static_cast<int>(uniform_index(rng, 2));
      t.gold.push_back(gold);
      t.graph.nodes[v].edgelet_id = v;
      t.graph.nodes[v].features = {static_cast<double>(gold), 0, 0, 0,
                                   0, 0, 100.0 * gold + 50.0};
    }
    for (int v = 1; v < n; ++v) {  // chain with inert pairwise features
      EdgeGraph::Link l;
      l.i = v - 1;
      l.j = v;
      l.features = {0.0, 0.0, 0.0, 0.0};
      t.graph.adjacency[l.i].push_back(static_cast<int>(t.graph.links.size()));
      t.graph.adjacency[l.j].push_back(static_cast<int>(t.graph.links.size()));
      t.graph.links.push_back(l);
    }
    samples.push_back(std::move(t));
  }
  return samples;
}

void bcfw_training(Check& c) {
  std::mt19937 rng(4004);
  const auto samples = separable_set(rng, 50);

  const TrainResult a = train_bcfw(samples);
  c.expect(a.hamming_accuracy == 1.0,
           "training accuracy " + std::to_string(a.hamming_accuracy) + " != 1");
  c.expect(a.final_gap < 1e-3,
           "duality gap " + std::to_string(a.final_gap) + " not closed");
  c.expect(a.passes <= 200, "needed more than 200 passes");

  const TrainResult b = train_bcfw(samples);
  bool same = true;
  for (int l = 0; l < 2; ++l)
    for (int f = 0; f < 7; ++f) same = same && a.model.w1[l][f] == b.model.w1[l][f];
  for (int q = 0; q < 4; ++q)
    for (int f = 0; f < 4; ++f) same = same && a.model.w2[q][f] == b.model.w2[q][f];
  c.expect(same, "same-seed training produced different weights");
}

// ---------------------------------------------------------------- criterion 5

Edgelet snake(int x0, int y0, int width, int rows, int id) {
  Edgelet e;
  e.id = id;
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < width; ++k)
      e.pixels.emplace_back(r % 2 == 0 ? x0 + k : x0 + width - 1 - k, y0 + r);
  e.length = static_cast<int>(e.pixels.size());
  e.strength = 100.0;
  e.mags.assign(e.pixels.size(), 100.0f);
  return e;
}

void window_machinery(Check& c) {
  std::mt19937 rng(5005);

  // adjacent same-size windows: quantized stride stays near the target IoU
  for (int extent = 40; extent <= 800; ++extent) {
    const int d = stride_for(extent, 0.65);
    const double pair_iou =
        static_cast<double>(extent - d) / static_cast<double>(extent + d);
    c.expect(std::fabs(pair_iou - 0.65) <= 0.02,
             "stride IoU off target at extent " + std::to_string(extent));
  }
  // and on the actual emitted lattice of a VGA frame
  {
    const auto windows = enumerate_windows(640, 480);
    std::set<std::pair<int, int>> checked;
    for (std::size_t i = 1; i < windows.size(); ++i) {
      const auto& a = windows[i - 1];
      const auto& b = windows[i];
      if (a.w != b.w || a.h != b.h || a.y != b.y || b.x <= a.x) continue;
      if (a.w < 40 || a.h < 40) continue;
      if (!checked.insert({a.w, a.h}).second) continue;
      c.expect(std::fabs(iou(a, b) - 0.65) <= 0.02,
               "lattice neighbors off target at " + std::to_string(a.w) + "x" +
                   std::to_string(a.h));
    }
    c.expect(checked.size() > 20, "lattice check covered too few sizes");
  }

  // grid-accelerated scoring == brute force, exactly
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Edgelet> edgelets;
    std::vector<EdgeletSaliency> saliency;
    std::vector<double> posteriors;
    std::vector<int> labels;
    const int n = 8 + static_cast<int>(uniform_index(rng, 8));
    for (int i = 0; i < n; ++i) {
      const int width = 16 + static_cast<int>(uniform_index(rng, 10));
      const int rows = 1 + static_cast<int>(uniform_index(rng, 3));
      edgelets.push_back(
          snake(static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(640 - width))),
                static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(480 - rows))),
                width, rows, i));
      EdgeletSaliency s;
      s.edgelet_id = i;
      s.posterior = uniform_real(rng, 0.0, 1.0);
      saliency.push_back(s);
      posteriors.push_back(s.posterior);
      labels.push_back(static_cast<int>(uniform_index(rng, 2)));
    }
    const auto index = build_salient_index(edgelets, saliency, labels);
    for (int k = 0; k < 10; ++k) {
      const int w = 20 + static_cast<int>(uniform_index(rng, 200));
      const int h = 20 + static_cast<int>(uniform_index(rng, 160));
      const Window win{static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(640 - w))),
                       static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(480 - h))),
                       w, h};
      c.expect(score_window(win, index) ==
                   reference::score_window(win, edgelets, posteriors, labels),
               "indexed score != brute force");
    }

  }
  // sqrt-area law, controlled: everything lives inside the small window
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Edgelet> edgelets;
    std::vector<EdgeletSaliency> saliency;
    std::vector<int> labels;
    const int n = 1 + static_cast<int>(uniform_index(rng, 5));
    for (int i = 0; i < n; ++i) {
      edgelets.push_back(snake(static_cast<int>(uniform_index(rng, 20)),
                               static_cast<int>(uniform_index(rng, 16)), 18, 2, i));
      EdgeletSaliency s;
      s.edgelet_id = i;
      s.posterior = uniform_real(rng, 0.05, 1.0);
      saliency.push_back(s);
      labels.push_back(1);
    }
    const auto index = build_salient_index(edgelets, saliency, labels);
    const double s1 = score_window(Window{0, 0, 40, 20}, index);
    const double s2 = score_window(Window{0, 0, 80, 40}, index);
    c.expect(s1 > 0.0 && s2 == s1 / 2.0, "sqrt-area law broken on nested windows");
  }

  // NMS against the quadratic reference
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Proposal> boxes;
    for (int k = 0; k < 50; ++k) {
      Proposal p;
      p.window = Window{static_cast<int>(uniform_index(rng, 100)),
                        static_cast<int>(uniform_index(rng, 100)),
                        5 + static_cast<int>(uniform_index(rng, 50)),
                        5 + static_cast<int>(uniform_index(rng, 50))};
      p.score = uniform_real(rng, 0.0, 5.0);
      boxes.push_back(p);
    }
    const auto got = nms_boxes(boxes, 0.75);
    const auto want = reference::nms_boxes(boxes, 0.75);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].window == want[i].window && got[i].score == want[i].score &&
             got[i].rank == want[i].rank;
    c.expect(same, "NMS disagrees with the quadratic reference");
  }
}

// ---------------------------------------------------------------- criterion 6

void metrics(Check& c) {
  std::mt19937 rng(6006);

  for (int trial = 0; trial < 200; ++trial) {
    const Window a{static_cast<int>(uniform_index(rng, 50)),
                   static_cast<int>(uniform_index(rng, 50)),
                   1 + static_cast<int>(uniform_index(rng, 60)),
                   1 + static_cast<int>(uniform_index(rng, 60))};
    const Window b{static_cast<int>(uniform_index(rng, 50)),
                   static_cast<int>(uniform_index(rng, 50)),
                   1 + static_cast<int>(uniform_index(rng, 60)),
                   1 + static_cast<int>(uniform_index(rng, 60))};
    c.expect(std::fabs(iou(a, b) - reference::iou_pixel_count(a, b)) < 1e-9,
             "iou diverges from pixel counting");
  }

  std::vector<Proposal> proposals;
  for (int i = 0; i < 30; ++i) {
    Proposal p;
    p.window = Window{static_cast<int>(uniform_index(rng, 40)),
                      static_cast<int>(uniform_index(rng, 40)),
                      5 + static_cast<int>(uniform_index(rng, 30)),
                      5 + static_cast<int>(uniform_index(rng, 30))};
    p.rank = i + 1;
    proposals.push_back(p);
  }
  std::vector<GroundTruthBox> gts;
  for (int i = 0; i < 8; ++i) {
    GroundTruthBox g;
    g.image_id = "scene";
    g.box = Window{static_cast<int>(uniform_index(rng, 40)),
                   static_cast<int>(uniform_index(rng, 40)),
                   5 + static_cast<int>(uniform_index(rng, 30)),
                   5 + static_cast<int>(uniform_index(rng, 30))};
    gts.push_back(g);
  }
  for (const double thr : {0.3, 0.5, 0.7}) {
    double prev = 0.0;
    for (int n = 1; n <= 30; ++n) {
      const double r = recall_at_n(proposals, gts, n, thr);
      c.expect(r >= prev, "recall decreased with N");
      prev = r;
    }
  }

  c.expect(format_n_at(n_at_recall({0.1, 0.4, 0.7}, 0.75)) == "-",
           "sentinel formatting broken");
  c.expect(format_n_at(n_at_recall({0.1, 0.8}, 0.75)) == "2",
           "reached N formatting broken");
}

// ---------------------------------------------------------------- criterion 7

struct MiniScene {
  std::string id;
  RgbImage image;
  std::vector<GroundTruthBox> gts;
  bool single_clean = false;
};

Window mask_bbox(const BinaryMask& m) {
  int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  return Window{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

GroundTruthBox gt_of(const std::string& id, const Window& box) {
  GroundTruthBox g;
  g.image_id = id;
  g.box = box;
  return g;
}

std::vector<MiniScene> build_mini_set() {
  std::vector<MiniScene> scenes;
  const int W = 192, H = 144;

  // 12 single-object high-contrast scenes: rects, discs, diamonds
  for (int i = 0; i < 12; ++i) {
    MiniScene s;
    s.id = "clean" + std::to_string(i);
    s.single_clean = true;
    s.image = fixtures::solid_image(W, H, 228, 228, 228);
    const int kind = i % 3;
    if (kind == 0) {
      const Window box{24 + 9 * (i % 4), 20 + 7 * (i % 5), 48 + 4 * (i % 3),
                       40 + 6 * (i % 2)};
      fixtures::fill_rect(s.image, box, 25 + 5 * (i % 3), 30, 55);
      // interior bands at background brightness: the full box then collects
      // far more weighted edge length than any sliver around one segment
      for (int y = box.y + 8; y + 5 <= box.y + box.h - 8; y += 12)
        fixtures::fill_rect(s.image, Window{box.x + 4, y, box.w - 8, 5}, 228, 228,
                            228);
      s.gts.push_back(gt_of(s.id, box));
    } else if (kind == 1) {
      const double cx = 70.0 + 10 * (i % 4), cy = 64.0 + 5 * (i % 3);
      const double r = 20.0 + 2 * (i % 3);
      fixtures::fill_disc(s.image, cx, cy, r, 140, 30, 30);
      fixtures::fill_disc(s.image, cx, cy, r - 8.0, 228, 228, 228);  // annulus
      fixtures::fill_disc(s.image, cx, cy, r - 14.0, 140, 30, 30);
      s.gts.push_back(gt_of(s.id, mask_bbox(fixtures::disc_mask(W, H, cx, cy, r))));
    } else {
      const int cx = 90 + 6 * (i % 3), cy = 70 + 4 * (i % 2);
      const int r = 24 + 2 * (i % 2);
      fixtures::fill_diamond(s.image, cx, cy, r, 30, 110, 40);
      fixtures::fill_diamond(s.image, cx, cy, r - 8, 228, 228, 228);
      fixtures::fill_diamond(s.image, cx, cy, r - 14, 30, 110, 40);
      s.gts.push_back(gt_of(s.id, mask_bbox(fixtures::diamond_mask(W, H, cx, cy, r))));
    }
    scenes.push_back(std::move(s));
  }

  // 8 busier photo-like scenes: speckled ground, two objects each
  for (int i = 0; i < 8; ++i) {
    MiniScene s;
    s.id = "busy" + std::to_string(i);
    s.image = fixtures::solid_image(W, H, 205, 210, 215);
    fixtures::speckle(s.image, Window{0, 0, W, H}, 900 + i, 6);

    const Window box1{18 + 8 * i, 16 + 3 * (i % 4), 44, 36};
    fixtures::fill_rect(s.image, box1, 40, 45, 70);
    s.gts.push_back(gt_of(s.id, box1));

    const double cx = 140.0 - 4 * i, cy = 100.0 + 2 * (i % 3), r = 17.0;
    fixtures::fill_disc(s.image, cx, cy, r, 150, 60, 35);
    s.gts.push_back(gt_of(s.id, mask_bbox(fixtures::disc_mask(W, H, cx, cy, r))));
    scenes.push_back(std::move(s));
  }
  return scenes;
}

CrfModel train_toy_model(Check& c) {
  RunConfig cfg;
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 10; ++i) {
    RgbImage img = fixtures::solid_image(96, 96, 222, 222, 222);
    BinaryMask mask;
    if (i % 2 == 0) {
      const Window box{14 + 3 * i, 12 + 2 * i, 42, 34};
      fixtures::fill_rect(img, box, 35, 40, 60);
      mask = fixtures::rect_mask(96, 96, box);
    } else {
      const double cx = 40.0 + 3 * i, cy = 44.0 + 2 * (i % 4), r = 17.0 + (i % 3);
      fixtures::fill_disc(img, cx, cy, r, 135, 35, 35);
      mask = fixtures::disc_mask(96, 96, cx, cy, r);
    }
    fixtures::fill_rect(img, Window{6, 82, 84, 5}, 170, 172, 176);  // faint clutter
    if (auto sample = make_training_sample(img, mask, cfg))
      samples.push_back(std::move(*sample));
  }
  c.expect(samples.size() >= 8, "toy corpus yielded too few training graphs");
  const TrainResult result = train_bcfw(samples);
  c.expect(result.hamming_accuracy >= 0.9,
           "toy training accuracy " + std::to_string(result.hamming_accuracy));
  return result.model;
}

void end_to_end(Check& c) {
  const CrfModel model = train_toy_model(c);
  const auto scenes = build_mini_set();

  RunConfig cfg;
  cfg.max_n = 1000;

  std::map<std::string, std::vector<Proposal>> proposals;
  std::map<std::string, std::vector<GroundTruthBox>> annotations;
  double slowest = 0.0;
  for (const auto& scene : scenes) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProposalSet set = generate_proposals(scene.image, std::nullopt, model, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    slowest = std::max(slowest, secs);
    c.expect(secs < 60.0, scene.id + " took " + std::to_string(secs) + " s");
    c.expect(!set.proposals.empty(), scene.id + " produced no proposals");

    if (scene.single_clean && !set.proposals.empty())
      c.expect(iou(set.proposals[0].window, scene.gts[0].box) >= 0.5,
               scene.id + " top-1 IoU below 0.5");

    proposals[scene.id] = set.proposals;
    annotations[scene.id] = scene.gts;
  }
  std::printf("  (e2e: %zu scenes, slowest %.2f s/image)\n", scenes.size(), slowest);

  const EvalReport report = evaluate(proposals, annotations, {0.5, 0.7}, 1000);
  for (const auto& curve : report.curves) {
    const double r10 = curve.recall[9];
    const double r100 = curve.recall[99];
    const double r1000 = curve.recall[999];
    c.expect(r1000 >= r100 && r100 >= r10,
             "recall not monotone across N at iou " + std::to_string(curve.iou_thr));
    std::printf("  (e2e: iou %.1f recall@10 %.3f @100 %.3f @1000 %.3f)\n",
                curve.iou_thr, r10, r100, r1000);
  }
}

// ---------------------------------------------------------------- criterion 8

template <typename Fn>
bool throws_code(Err code, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  } catch (...) {
    return false;
  }
  return false;
}

void format_round_trips(Check& c) {
  const auto dir = fixtures::make_temp_dir("acceptance_io");
  std::mt19937 rng(8008);

  EdgeMap map;
  map.width = 37;
  map.height = 23;
  map.magnitude.resize(static_cast<std::size_t>(37) * 23);
  map.orientation.resize(map.magnitude.size());
  for (auto& m : map.magnitude)
    m = static_cast<float>(uniform_real(rng, 0.0, 255.0));
  for (auto& o : map.orientation)
    o = static_cast<float>(uniform_real(rng, 0.0, 3.14159));
  const auto emap_path = dir + "/map.emap";
  write_edge_map(map, emap_path);
  const EdgeMap back = read_edge_map(emap_path);
  c.expect(back.width == map.width && back.height == map.height &&
               back.magnitude == map.magnitude && back.orientation == map.orientation,
           "EMAP round trip not bit-exact");

  c.expect(throws_code(Err::FileNotFound, [&] { read_edge_map(dir + "/none.emap"); }),
           "missing EMAP should be FileNotFound");
  const auto junk = dir + "/junk.emap";
  fixtures::write_text(junk, "EMXPjunkjunkjunk");
  c.expect(throws_code(Err::BadMagic, [&] { read_edge_map(junk); }),
           "wrong magic should be BadMagic");
  const auto cut = dir + "/cut.emap";
  {
    std::string payload = "EMAP";
    const std::uint32_t dims[2] = {16, 16};
    payload.append(reinterpret_cast<const char*>(dims), 8);
    payload.append(64, '\0');  // far fewer floats than 2*16*16
    fixtures::write_bytes(cut, payload.data(), payload.size());
  }
  c.expect(throws_code(Err::Truncated, [&] { read_edge_map(cut); }),
           "short payload should be Truncated");

  CrfModel m = random_model(rng);
  for (int i = 0; i < 7; ++i) {
    m.feature_mean[i] = uniform_real(rng, -5.0, 5.0);
    m.feature_std[i] = uniform_real(rng, 0.01, 9.0);
  }
  const auto model_path = dir + "/model.txt";
  save_model(m, model_path);
  const CrfModel mback = load_model(model_path);
  bool same = true;
  for (int l = 0; l < 2; ++l)
    for (int f = 0; f < 7; ++f) same = same && mback.w1[l][f] == m.w1[l][f];
  for (int q = 0; q < 4; ++q)
    for (int f = 0; f < 4; ++f) same = same && mback.w2[q][f] == m.w2[q][f];
  for (int f = 0; f < 7; ++f)
    same = same && mback.feature_mean[f] == m.feature_mean[f] &&
           mback.feature_std[f] == m.feature_std[f];
  c.expect(same, "model round trip not bit-exact");

  c.expect(throws_code(Err::FileNotFound, [&] { load_model(dir + "/none.txt"); }),
           "missing model should be FileNotFound");
  const auto vX = dir + "/v9.txt";
  fixtures::write_text(vX, "SALPROP-MODEL v9\n0 0 0 0 0 0 0\n");
  c.expect(throws_code(Err::BadVersion, [&] { load_model(vX); }),
           "unknown version should be BadVersion");
  const auto garbled = dir + "/garbled.txt";
  fixtures::write_text(garbled, "MODELish\n1 2 3\n");
  c.expect(throws_code(Err::ParseError, [&] { load_model(garbled); }),
           "garbage model should be ParseError");
}

// -----------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 = no cap
  std::function<void(Check&)> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Bayes posterior identity and monotonicity", 1.0, bayes_identity},
      {2, "feature oracles (LTP exact, f_G vs hand values)", 5.0, feature_oracles},
      {3, "CRF inference vs exhaustive MAP", 30.0, crf_inference},
      {4, "BCFW separable training", 60.0, bcfw_training},
      {5, "window machinery (stride, scoring, NMS)", 30.0, window_machinery},
      {6, "metrics (IoU oracle, recall curves, sentinel)", 5.0, metrics},
      {7, "desk-scale end-to-end", 0.0, end_to_end},
      {8, "format round trips and error classes", 0.0, format_round_trips},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criterion.fn(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criterion.time_limit > 0.0)
      check.expect(secs < criterion.time_limit,
                   "runtime " + std::to_string(secs) + " s over the " +
                       std::to_string(criterion.time_limit) + " s budget");
    std::printf("criterion %d: %s — %s (%.2f s)\n", criterion.id,
                check.ok ? "PASS" : "FAIL", criterion.name, secs);
    if (!check.ok) {
      std::printf("  first failure: %s (%d total)\n", check.first.c_str(),
                  check.failures);
      ++failed;
    }
  }
  if (failed) std::printf("%d of 8 criteria failed\n", failed);
  else std::printf("all 8 criteria passed\n");
  return failed;
}
