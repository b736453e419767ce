#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "salprop/edges.hpp"
#include "salprop/features.hpp"
#include "salprop/image.hpp"

namespace salprop {

// Pairwise binary CRF over edge segments. Links join spatially close
// segments; i < j always holds and adjacency lists index into links.
struct EdgeGraph {
  struct Node {
    int edgelet_id = 0;
    NodeFeatures features{};
  };
  struct Link {
    int i = 0;
    int j = 0;
    LinkFeatures features{};
  };
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<std::vector<int>> adjacency;  // node -> link indices

  int size() const { return static_cast<int>(nodes.size()); }
};

// 0 = non-object, 1 = object.
using Labeling = std::vector<int>;

inline int pair_index(int li, int lj) { return li * 2 + lj; }  // 00,01,10,11

struct CrfModel {
  std::array<std::array<double, 7>, 2> w1{};  // unary weights per label
  std::array<std::array<double, 4>, 4> w2{};  // pairwise weights per label pair
  std::array<double, 7> feature_mean{};
  std::array<double, 7> feature_std{{1, 1, 1, 1, 1, 1, 1}};
  int version = 1;
};

struct TrainingSample {
  EdgeGraph graph;
  Labeling gold;
};

// Links segments whose closest chain endpoints are within link_radius,
// keeping only links ranked inside both endpoints' max_degree nearest
// candidates (ties broken toward the lower id).
EdgeGraph build_graph(const std::vector<Edgelet>& edgelets,
                      const std::vector<NodeFeatures>& features,
                      double link_radius = 15.0, int max_degree = 8);

// z-scores node features with the model statistics and recomputes the
// mean/variance link components from the normalized differences; the
// positional bits are untouched.
EdgeGraph normalize_graph(const EdgeGraph& graph, const std::array<double, 7>& mean,
                          const std::array<double, 7>& stddev);

// Total labeling score: sum of unary and pairwise dot products. Maximized by
// inference. Throws SizeMismatch.
double energy(const EdgeGraph& graph, const Labeling& labeling, const CrfModel& model);

// Damped max-product loopy belief propagation; ties break toward label 0.
Labeling map_inference(const EdgeGraph& graph, const CrfModel& model,
                       int max_iters = 50, double damping = 0.5);

// Exhaustive argmax over all labelings (lexicographically smallest on ties).
// Only for graphs of at most 20 nodes; throws TooLarge beyond that.
Labeling map_inference_exact(const EdgeGraph& graph, const CrfModel& model);

// Object/non-object labels from a ground-truth region mask: an edgelet is an
// object edge if at least half its pixels lie within boundary_tol of the mask
// boundary; the rest follow a 2-means split on strength (higher cluster =>
// object), skipped when all strengths are equal.
Labeling weak_labels(const std::vector<Edgelet>& edgelets, const BinaryMask& mask,
                     int boundary_tol = 2);

struct TrainOptions {
  double C = 1.0;
  int max_passes = 200;
  double gap_tol = 1e-3;
  std::uint32_t seed = 42;
  int bp_max_iters = 50;
  double bp_damping = 0.5;
};

struct TrainResult {
  CrfModel model;
  double final_gap = 0.0;
  double hamming_accuracy = 0.0;     // on the training set, final model
  int passes = 0;
  std::vector<double> gap_history;   // one entry per completed pass
};

// Block-coordinate Frank-Wolfe on the structured hinge objective with
// Hamming loss. Loss-augmented decoding folds the loss into the unary
// scores and reuses map_inference. Samples carry raw features; the
// normalization statistics are computed here and stored in the model.
// Returns the weighted-average iterate.
TrainResult train_bcfw(const std::vector<TrainingSample>& samples,
                       const TrainOptions& opts = {});

// Line-oriented text format, "SALPROP-MODEL v1". Round trips bit-exactly.
void save_model(const CrfModel& model, const std::string& path);
CrfModel load_model(const std::string& path);

}  // namespace salprop
