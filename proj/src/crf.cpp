#include "salprop/crf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "salprop/errors.hpp"
#include "salprop/rng.hpp"

namespace salprop {

namespace {

double endpoint_distance(const Edgelet& a, const Edgelet& b) {
  const std::pair<int, int> ea[2] = {a.pixels.front(), a.pixels.back()};
  const std::pair<int, int> eb[2] = {b.pixels.front(), b.pixels.back()};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [ax, ay] : ea)
    for (const auto& [bx, by] : eb) {
      const double dx = ax - bx, dy = ay - by;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
  return best;
}

}  // namespace

EdgeGraph build_graph(const std::vector<Edgelet>& edgelets,
                      const std::vector<NodeFeatures>& features,
                      double link_radius, int max_degree) {
  if (edgelets.size() != features.size())
    fail(Err::SizeMismatch, "features and segments disagree in count");

  const int n = static_cast<int>(edgelets.size());
  EdgeGraph g;
  g.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    g.nodes[i].edgelet_id = edgelets[i].id;
    g.nodes[i].features = features[i];
  }
  g.adjacency.assign(n, {});
  if (n == 0) return g;

  // candidate neighbors per node, ranked by distance then id
  std::vector<std::vector<std::pair<double, int>>> cand(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = endpoint_distance(edgelets[i], edgelets[j]);
      if (d <= link_radius) {
        cand[i].emplace_back(d, j);
        cand[j].emplace_back(d, i);
      }
    }

  std::vector<std::vector<char>> keeps(n);
  for (int i = 0; i < n; ++i) {
    auto& c = cand[i];
    std::sort(c.begin(), c.end());
    keeps[i].assign(n, 0);
    const int lim = std::min<int>(max_degree, static_cast<int>(c.size()));
    for (int r = 0; r < lim; ++r) keeps[i][c[r].second] = 1;
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!keeps[i][j] || !keeps[j][i]) continue;
      EdgeGraph::Link link;
      link.i = i;
      link.j = j;
      link.features = link_features(features[i], edgelets[i].cx, edgelets[i].cy,
                                    features[j], edgelets[j].cx, edgelets[j].cy);
      g.adjacency[i].push_back(static_cast<int>(g.links.size()));
      g.adjacency[j].push_back(static_cast<int>(g.links.size()));
      g.links.push_back(link);
    }
  return g;
}

EdgeGraph normalize_graph(const EdgeGraph& graph, const std::array<double, 7>& mean,
                          const std::array<double, 7>& stddev) {
  EdgeGraph out = graph;
  for (auto& node : out.nodes)
    for (int c = 0; c < 7; ++c)
      node.features[c] = (node.features[c] - mean[c]) / stddev[c];
  for (auto& link : out.links) {
    const auto& fi = out.nodes[link.i].features;
    const auto& fj = out.nodes[link.j].features;
    double mu = 0.0;
    std::array<double, 7> d{};
    for (int c = 0; c < 7; ++c) {
      d[c] = fi[c] - fj[c];
      mu += d[c];
    }
    mu /= 7.0;
    double var = 0.0;
    for (int c = 0; c < 7; ++c) var += (d[c] - mu) * (d[c] - mu);
    link.features[2] = mu;
    link.features[3] = var / 7.0;
  }
  return out;
}

namespace {

struct ScoreTables {
  std::vector<std::array<double, 2>> unary;     // node -> label score
  std::vector<std::array<double, 4>> pairwise;  // link -> pair(l_i,l_j) score
};

ScoreTables make_tables(const EdgeGraph& graph, const CrfModel& model) {
  ScoreTables t;
  t.unary.resize(graph.nodes.size());
  for (std::size_t v = 0; v < graph.nodes.size(); ++v)
    for (int l = 0; l < 2; ++l) {
      double s = 0.0;
      for (int c = 0; c < 7; ++c) s += model.w1[l][c] * graph.nodes[v].features[c];
      t.unary[v][l] = s;
    }
  t.pairwise.resize(graph.links.size());
  for (std::size_t e = 0; e < graph.links.size(); ++e)
    for (int p = 0; p < 4; ++p) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += model.w2[p][c] * graph.links[e].features[c];
      t.pairwise[e][p] = s;
    }
  return t;
}

Labeling bp_decode(const EdgeGraph& graph, const ScoreTables& t, int max_iters,
                   double damping) {
  const int n = graph.size();
  const int m = static_cast<int>(graph.links.size());
  Labeling labels(n, 0);
  if (n == 0) return labels;

  // directed messages: 2*e   = link.i -> link.j
  //                    2*e+1 = link.j -> link.i
  std::vector<std::array<double, 2>> msg(static_cast<std::size_t>(2) * m, {0.0, 0.0});

  for (int iter = 0; iter < max_iters && m > 0; ++iter) {
    double delta = 0.0;
    for (int e = 0; e < m; ++e) {
      const auto& link = graph.links[e];
      for (int dir = 0; dir < 2; ++dir) {
        const int src = dir == 0 ? link.i : link.j;
        const int d = 2 * e + dir;
        std::array<double, 2> fresh{};
        for (int lt = 0; lt < 2; ++lt) {
          double best = -std::numeric_limits<double>::infinity();
          for (int ls = 0; ls < 2; ++ls) {
            double s = t.unary[src][ls];
            s += t.pairwise[e][dir == 0 ? pair_index(ls, lt) : pair_index(lt, ls)];
            for (int ae : graph.adjacency[src]) {
              if (ae == e) continue;
              const auto& al = graph.links[ae];
              const int in_dir = al.i == src ? 1 : 0;  // message flowing into src
              s += msg[static_cast<std::size_t>(2) * ae + in_dir][ls];
            }
            best = std::max(best, s);
          }
          fresh[lt] = best;
        }
        const double shift = std::max(fresh[0], fresh[1]);
        fresh[0] -= shift;
        fresh[1] -= shift;
        for (int l = 0; l < 2; ++l) {
          const double mixed = damping * msg[d][l] + (1.0 - damping) * fresh[l];
          delta = std::max(delta, std::fabs(mixed - msg[d][l]));
          msg[d][l] = mixed;
        }
      }
    }
    if (delta < 1e-6) break;
  }

  for (int v = 0; v < n; ++v) {
    std::array<double, 2> belief = t.unary[v];
    for (int ae : graph.adjacency[v]) {
      const auto& al = graph.links[ae];
      const int in_dir = al.i == v ? 1 : 0;
      for (int l = 0; l < 2; ++l)
        belief[l] += msg[static_cast<std::size_t>(2) * ae + in_dir][l];
    }
    labels[v] = belief[1] > belief[0] ? 1 : 0;  // ties go to 0
  }
  return labels;
}

double table_energy(const EdgeGraph& graph, const ScoreTables& t, const Labeling& l) {
  double s = 0.0;
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) s += t.unary[v][l[v]];
  for (std::size_t e = 0; e < graph.links.size(); ++e)
    s += t.pairwise[e][pair_index(l[graph.links[e].i], l[graph.links[e].j])];
  return s;
}

Labeling exact_decode(const EdgeGraph& graph, const ScoreTables& t) {
  const int n = graph.size();
  Labeling best(n, 0);
  if (n == 0) return best;
  Labeling cur(n, 0);
  double best_score = table_energy(graph, t, cur);
  const std::uint32_t total = 1u << n;
  for (std::uint32_t code = 1; code < total; ++code) {
    // l_0 is the most significant bit so ascending codes scan labelings in
    // lexicographic order; strict > keeps the first (smallest) maximum
    for (int v = 0; v < n; ++v) cur[v] = code >> (n - 1 - v) & 1u;
    const double s = table_energy(graph, t, cur);
    if (s > best_score) {
      best_score = s;
      best = cur;
    }
  }
  return best;
}

}  // namespace

double energy(const EdgeGraph& graph, const Labeling& labeling, const CrfModel& model) {
  if (labeling.size() != graph.nodes.size())
    fail(Err::SizeMismatch, "labeling and node counts differ");
  for (int l : labeling)
    if (l != 0 && l != 1) fail(Err::BadValue, "labels must be 0 or 1");
  return table_energy(graph, make_tables(graph, model), labeling);
}

Labeling map_inference(const EdgeGraph& graph, const CrfModel& model, int max_iters,
                       double damping) {
  return bp_decode(graph, make_tables(graph, model), max_iters, damping);
}

Labeling map_inference_exact(const EdgeGraph& graph, const CrfModel& model) {
  if (graph.size() > 20)
    fail(Err::TooLarge, "exhaustive decode supports at most 20 nodes, got " +
                            std::to_string(graph.size()));
  return exact_decode(graph, make_tables(graph, model));
}

Labeling weak_labels(const std::vector<Edgelet>& edgelets, const BinaryMask& mask,
                     int boundary_tol) {
  const int w = mask.width, h = mask.height;
  for (const auto& e : edgelets)
    for (const auto& [x, y] : e.pixels)
      if (x < 0 || x >= w || y < 0 || y >= h)
        fail(Err::SizeMismatch, "segment pixel outside mask bounds");

  auto at = [&](int x, int y) { return mask.values[static_cast<std::size_t>(y) * w + x]; };

  // object pixels with a background 4-neighbor (or touching the frame)
  std::vector<std::uint8_t> near(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -boundary_tol; dy <= boundary_tol; ++dy)
    for (int dx = -boundary_tol; dx <= boundary_tol; ++dx)
      if (dx * dx + dy * dy <= boundary_tol * boundary_tol) offsets.emplace_back(dx, dy);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!at(x, y)) continue;
      const bool edge = x == 0 || x == w - 1 || y == 0 || y == h - 1 ||
                        !at(x - 1, y) || !at(x + 1, y) || !at(x, y - 1) || !at(x, y + 1);
      if (!edge) continue;
      for (const auto& [dx, dy] : offsets) {
        const int nx = x + dx, ny = y + dy;
        if (nx >= 0 && nx < w && ny >= 0 && ny < h)
          near[static_cast<std::size_t>(ny) * w + nx] = 1;
      }
    }

  const int n = static_cast<int>(edgelets.size());
  Labeling labels(n, 0);
  std::vector<char> fixed(n, 0);
  for (int i = 0; i < n; ++i) {
    int hit = 0;
    for (const auto& [x, y] : edgelets[i].pixels)
      hit += near[static_cast<std::size_t>(y) * w + x];
    if (2 * hit >= static_cast<int>(edgelets[i].pixels.size())) {
      labels[i] = 1;
      fixed[i] = 1;
    }
  }

  // the rest split by 2-means over strength, high cluster = object
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& e : edgelets) {
    lo = std::min(lo, e.strength);
    hi = std::max(hi, e.strength);
  }
  if (n == 0 || lo == hi) return labels;

  double c0 = lo, c1 = hi;
  for (int iter = 0; iter < 100; ++iter) {
    double s0 = 0.0, s1 = 0.0;
    int n0 = 0, n1 = 0;
    for (const auto& e : edgelets) {
      if (std::fabs(e.strength - c0) <= std::fabs(e.strength - c1)) {
        s0 += e.strength;
        ++n0;
      } else {
        s1 += e.strength;
        ++n1;
      }
    }
    const double m0 = n0 ? s0 / n0 : c0;
    const double m1 = n1 ? s1 / n1 : c1;
    if (m0 == c0 && m1 == c1) break;
    c0 = m0;
    c1 = m1;
  }
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    labels[i] =
        std::fabs(edgelets[i].strength - c1) < std::fabs(edgelets[i].strength - c0) ? 1
                                                                                    : 0;
  }
  return labels;
}

namespace {

constexpr int kDim = 30;  // 2*7 unary + 4*4 pairwise
using Flat = std::array<double, kDim>;

void from_flat(const Flat& f, CrfModel& m) {
  int p = 0;
  for (int l = 0; l < 2; ++l)
    for (int c = 0; c < 7; ++c) m.w1[l][c] = f[p++];
  for (int q = 0; q < 4; ++q)
    for (int c = 0; c < 4; ++c) m.w2[q][c] = f[p++];
}

// joint feature map: energy(graph, L; w) == dot(w, psi(graph, L))
Flat psi(const EdgeGraph& graph, const Labeling& l) {
  Flat f{};
  for (std::size_t v = 0; v < graph.nodes.size(); ++v)
    for (int c = 0; c < 7; ++c) f[7 * l[v] + c] += graph.nodes[v].features[c];
  for (const auto& link : graph.links) {
    const int q = pair_index(l[link.i], l[link.j]);
    for (int c = 0; c < 4; ++c) f[14 + 4 * q + c] += link.features[c];
  }
  return f;
}

double dot(const Flat& a, const Flat& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) s += a[i] * b[i];
  return s;
}

int hamming(const Labeling& a, const Labeling& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// argmax_L [ Hamming(gold, L) + energy(L; w) ] — the loss enters the unaries
Labeling loss_augmented_decode(const EdgeGraph& graph, const Labeling& gold,
                               const CrfModel& model, const TrainOptions& opts) {
  ScoreTables t = make_tables(graph, model);
  for (std::size_t v = 0; v < graph.nodes.size(); ++v)
    for (int l = 0; l < 2; ++l)
      if (l != gold[v]) t.unary[v][l] += 1.0;
  return bp_decode(graph, t, opts.bp_max_iters, opts.bp_damping);
}

}  // namespace

TrainResult train_bcfw(const std::vector<TrainingSample>& samples,
                       const TrainOptions& opts) {
  if (samples.empty()) fail(Err::EmptyTrainingSet, "no training samples");

  // normalization statistics over every node in the set
  std::array<double, 7> mean{}, stddev{};
  std::size_t total_nodes = 0;
  for (const auto& s : samples) {
    for (const auto& node : s.graph.nodes)
      for (int c = 0; c < 7; ++c) mean[c] += node.features[c];
    total_nodes += s.graph.nodes.size();
  }
  for (int c = 0; c < 7; ++c) mean[c] = total_nodes ? mean[c] / total_nodes : 0.0;
  for (const auto& s : samples)
    for (const auto& node : s.graph.nodes)
      for (int c = 0; c < 7; ++c) {
        const double d = node.features[c] - mean[c];
        stddev[c] += d * d;
      }
  for (int c = 0; c < 7; ++c) {
    stddev[c] = total_nodes ? std::sqrt(stddev[c] / total_nodes) : 0.0;
    if (stddev[c] <= 0.0) stddev[c] = 1.0;
  }

  const int n = static_cast<int>(samples.size());
  std::vector<TrainingSample> norm(n);
  for (int i = 0; i < n; ++i) {
    norm[i].graph = normalize_graph(samples[i].graph, mean, stddev);
    norm[i].gold = samples[i].gold;
  }

  TrainResult res;
  res.model.feature_mean = mean;
  res.model.feature_std = stddev;

  CrfModel work = res.model;  // carries the current iterate for decoding

  auto predict_accuracy = [&](const CrfModel& m) {
    std::size_t correct = 0, total = 0;
    for (const auto& s : norm) {
      const auto pred = bp_decode(s.graph, make_tables(s.graph, m), opts.bp_max_iters,
                                  opts.bp_damping);
      for (std::size_t v = 0; v < pred.size(); ++v) correct += pred[v] == s.gold[v];
      total += pred.size();
    }
    return total ? static_cast<double>(correct) / total : 1.0;
  };

  if (opts.C <= 0.0) {  // objective collapses to the regularizer
    res.hamming_accuracy = predict_accuracy(res.model);
    return res;
  }

  const double lambda = 1.0 / (opts.C * n);

  Flat w{}, wavg{};
  double ell = 0.0;
  std::vector<Flat> w_i(n, Flat{});
  std::vector<double> ell_i(n, 0.0);
  // per-sample gold feature maps never change
  std::vector<Flat> psi_gold(n);
  for (int i = 0; i < n; ++i) psi_gold[i] = psi(norm[i].graph, norm[i].gold);

  std::mt19937 rng(opts.seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  long k = 0;
  for (int pass = 0; pass < opts.max_passes; ++pass) {
    shuffle_seeded(order, rng);
    for (int oi = 0; oi < n; ++oi) {
      const int i = order[oi];
      from_flat(w, work);
      const auto star = loss_augmented_decode(norm[i].graph, norm[i].gold, work, opts);
      Flat psi_diff{};
      const Flat psi_star = psi(norm[i].graph, star);
      for (int c = 0; c < kDim; ++c) psi_diff[c] = psi_gold[i][c] - psi_star[c];

      Flat w_s{};
      for (int c = 0; c < kDim; ++c) w_s[c] = psi_diff[c] / (lambda * n);
      const double ell_s = static_cast<double>(hamming(norm[i].gold, star)) / n;

      Flat diff{};
      for (int c = 0; c < kDim; ++c) diff[c] = w_i[i][c] - w_s[c];
      const double denom = lambda * dot(diff, diff);
      double gamma = 0.0;
      if (denom > 0.0)
        gamma = std::clamp((lambda * dot(diff, w) - ell_i[i] + ell_s) / denom, 0.0, 1.0);

      for (int c = 0; c < kDim; ++c) {
        const double w_new = (1.0 - gamma) * w_i[i][c] + gamma * w_s[c];
        w[c] += w_new - w_i[i][c];
        w_i[i][c] = w_new;
      }
      const double ell_new = (1.0 - gamma) * ell_i[i] + gamma * ell_s;
      ell += ell_new - ell_i[i];
      ell_i[i] = ell_new;

      const double rho = 2.0 / (k + 2.0);
      for (int c = 0; c < kDim; ++c) wavg[c] = (1.0 - rho) * wavg[c] + rho * w[c];
      ++k;
    }

    for (double v : w)
      if (!std::isfinite(v)) fail(Err::NonFinite, "weights diverged during training");

    // duality gap from a fresh batch of loss-augmented decodes at w
    from_flat(w, work);
    Flat w_s_batch{};
    double ell_s_batch = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto star = loss_augmented_decode(norm[i].graph, norm[i].gold, work, opts);
      const Flat psi_star = psi(norm[i].graph, star);
      for (int c = 0; c < kDim; ++c)
        w_s_batch[c] += (psi_gold[i][c] - psi_star[c]) / (lambda * n);
      ell_s_batch += static_cast<double>(hamming(norm[i].gold, star)) / n;
    }
    Flat gap_dir{};
    for (int c = 0; c < kDim; ++c) gap_dir[c] = w[c] - w_s_batch[c];
    const double gap = lambda * dot(gap_dir, w) - ell + ell_s_batch;
    res.gap_history.push_back(gap);
    res.passes = pass + 1;
    if (gap < opts.gap_tol) break;
  }

  from_flat(wavg, res.model);
  res.final_gap = res.gap_history.empty() ? 0.0 : res.gap_history.back();
  res.hamming_accuracy = predict_accuracy(res.model);
  return res;
}

void save_model(const CrfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  char buf[64];
  auto row = [&](const double* v, int count) {
    for (int c = 0; c < count; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v[c]);
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  };
  out << "SALPROP-MODEL v" << model.version << '\n';
  row(model.feature_mean.data(), 7);
  row(model.feature_std.data(), 7);
  for (int l = 0; l < 2; ++l) row(model.w1[l].data(), 7);
  for (int q = 0; q < 4; ++q) row(model.w2[q].data(), 4);
}

CrfModel load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path);
  if (!in) fail(Err::FileNotFound, path);

  std::string header;
  if (!std::getline(in, header)) fail(Err::ParseError, path + ": empty file");
  if (header.rfind("SALPROP-MODEL ", 0) != 0)
    fail(Err::ParseError, path + ": not a model file");
  if (header != "SALPROP-MODEL v1")
    fail(Err::BadVersion, path + ": unsupported " + header.substr(14));

  CrfModel m;
  auto row = [&](double* v, int count) {
    std::string line;
    if (!std::getline(in, line)) fail(Err::ParseError, path + ": truncated model");
    std::istringstream ss(line);
    for (int c = 0; c < count; ++c)
      if (!(ss >> v[c]) || !std::isfinite(v[c]))
        fail(Err::ParseError, path + ": bad weight row '" + line + "'");
    double extra;
    if (ss >> extra) fail(Err::ParseError, path + ": too many values in row");
  };
  row(m.feature_mean.data(), 7);
  row(m.feature_std.data(), 7);
  for (int l = 0; l < 2; ++l) row(m.w1[l].data(), 7);
  for (int q = 0; q < 4; ++q) row(m.w2[q].data(), 4);
  for (double s : m.feature_std)
    if (s <= 0.0) fail(Err::ParseError, path + ": non-positive feature scale");
  return m;
}

}  // namespace salprop
