#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salprop/crf.hpp"
#include "salprop/edges.hpp"
#include "salprop/image.hpp"
#include "salprop/proposals.hpp"

namespace salprop {

// Every tunable in one place. Defaults follow the reference configuration;
// validate() rejects out-of-range values.
struct RunConfig {
  // window generation / ranking
  double alpha = 0.65;
  double nms_theta = 0.75;
  int max_n = 1000;
  int pre_nms_top_k = 1000;
  // features
  double ltp_threshold = 5.0;  // T
  double k = 0.5;              // texture filter-bank scale
  int patch_radius = 5;
  double sigma = 1.0;  // builtin detector / oriented gradient scale
  // bayes
  double beta = 0.8;
  // edgelets
  int min_len = 15;
  double min_mag = 40.0;
  // graph
  double link_radius = 15.0;
  int max_degree = 8;
  int bp_max_iters = 50;
  double bp_damping = 0.5;
  // training
  double C = 1.0;
  int max_passes = 200;
  double gap_tol = 1e-3;
  // misc
  std::uint32_t seed = 42;
  int jobs = 0;  // 0 = library default thread count

  void validate() const;  // throws BadValue
};

// Full detection pipeline: edges (ingested or detected) -> edgelets ->
// features -> Bayesian saliency -> CRF labels -> window scoring ->
// refinement -> NMS -> top max_n. Deterministic for a fixed config.
ProposalSet generate_proposals(const RgbImage& image,
                               const std::optional<EdgeMap>& edge_map,
                               const CrfModel& model, const RunConfig& config);

// Edge handling shared by detection and training: ingest or detect, then
// thin. Returns the sparse map.
EdgeMap prepare_edges(const LabImage& lab, const std::optional<EdgeMap>& edge_map,
                      const RunConfig& config);

// Builds one training sample (raw-feature graph + weak labels) from an
// image/mask pair. Returns nullopt when the image yields no edgelets.
std::optional<TrainingSample> make_training_sample(const RgbImage& image,
                                                   const BinaryMask& mask,
                                                   const RunConfig& config);

}  // namespace salprop
