#include "salprop/pipeline.hpp"

#include <algorithm>

#include "salprop/bayes.hpp"
#include "salprop/errors.hpp"
#include "salprop/features.hpp"

namespace salprop {

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(Err::BadValue, what);
  };
  check(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  check(nms_theta > 0.0 && nms_theta < 1.0, "nms-theta must lie in (0,1)");
  check(max_n >= 1, "max-n must be at least 1");
  check(pre_nms_top_k >= 1, "pre-NMS K must be at least 1");
  check(ltp_threshold > 0.0, "LTP threshold must be positive");
  check(k > 0.0, "texture scale k must be positive");
  check(patch_radius >= 1, "patch radius must be at least 1");
  check(sigma > 0.0, "sigma must be positive");
  check(beta > 0.0, "beta must be positive");
  check(min_len >= 1, "min segment length must be at least 1");
  check(min_mag >= 0.0 && min_mag < 255.0, "min magnitude must lie in [0,255)");
  check(link_radius > 0.0, "link radius must be positive");
  check(max_degree >= 1, "max degree must be at least 1");
  check(bp_max_iters >= 1, "BP iteration cap must be at least 1");
  check(bp_damping >= 0.0 && bp_damping < 1.0, "BP damping must lie in [0,1)");
  check(max_passes >= 1, "pass cap must be at least 1");
  check(gap_tol > 0.0, "gap tolerance must be positive");
  check(jobs >= 0, "jobs must be non-negative");
}

EdgeMap prepare_edges(const LabImage& lab, const std::optional<EdgeMap>& edge_map,
                      const RunConfig& config) {
  if (edge_map) {
    if (edge_map->width != lab.width || edge_map->height != lab.height)
      fail(Err::SizeMismatch,
           "edge map is " + std::to_string(edge_map->width) + "x" +
               std::to_string(edge_map->height) + ", image is " +
               std::to_string(lab.width) + "x" + std::to_string(lab.height));
    return non_max_suppress(*edge_map);
  }
  EdgeMap detected = detect_edges_builtin(lab, config.sigma);
  if (detected.flat) {
    detected.sparse = true;  // nothing to thin
    return detected;
  }
  return non_max_suppress(detected);
}

ProposalSet generate_proposals(const RgbImage& image,
                               const std::optional<EdgeMap>& edge_map,
                               const CrfModel& model, const RunConfig& config) {
  config.validate();

  ProposalSet result;
  result.seed = config.seed;

  const LabImage lab = rgb_to_lab(image);
  const EdgeMap sparse = prepare_edges(lab, edge_map, config);
  result.flat_image = sparse.flat;

  const auto edgelets = extract_edgelets(sparse, config.min_len, config.min_mag);
  if (edgelets.empty()) {
    result.no_edgelets = true;
    return result;
  }

  const ScalarField luminance = luminance_field(lab);
  NodeFeatureConfig fcfg;
  fcfg.sigma = config.sigma;
  fcfg.k = config.k;
  fcfg.radius = config.patch_radius;
  fcfg.ltp_threshold = config.ltp_threshold;
  fcfg.seed = config.seed;
  const auto features = compute_node_features(edgelets, lab, luminance, sparse, fcfg);

  const auto saliency = compute_saliency(edgelets, features, config.beta);

  const EdgeGraph graph =
      build_graph(edgelets, features, config.link_radius, config.max_degree);
  const EdgeGraph normalized =
      normalize_graph(graph, model.feature_mean, model.feature_std);
  const Labeling labels =
      map_inference(normalized, model, config.bp_max_iters, config.bp_damping);

  const auto index = build_salient_index(edgelets, saliency, labels);
  const auto windows = enumerate_windows(image.width, image.height,
                                         WindowParams{config.alpha});
  auto scored = score_all_windows(windows, index);
  if (static_cast<int>(scored.size()) > config.pre_nms_top_k)
    scored.resize(static_cast<std::size_t>(config.pre_nms_top_k));

  auto refined = refine(scored, index, config.alpha, image.width, image.height);
  auto kept = nms_boxes(refined, config.nms_theta);
  if (static_cast<int>(kept.size()) > config.max_n)
    kept.resize(static_cast<std::size_t>(config.max_n));

  result.proposals = std::move(kept);
  return result;
}

std::optional<TrainingSample> make_training_sample(const RgbImage& image,
                                                   const BinaryMask& mask,
                                                   const RunConfig& config) {
  config.validate();
  if (mask.width != image.width || mask.height != image.height)
    fail(Err::SizeMismatch, "mask is " + std::to_string(mask.width) + "x" +
                                std::to_string(mask.height) + ", image is " +
                                std::to_string(image.width) + "x" +
                                std::to_string(image.height));

  const LabImage lab = rgb_to_lab(image);
  const EdgeMap sparse = prepare_edges(lab, std::nullopt, config);
  const auto edgelets = extract_edgelets(sparse, config.min_len, config.min_mag);
  if (edgelets.empty()) return std::nullopt;

  const ScalarField luminance = luminance_field(lab);
  NodeFeatureConfig fcfg;
  fcfg.sigma = config.sigma;
  fcfg.k = config.k;
  fcfg.radius = config.patch_radius;
  fcfg.ltp_threshold = config.ltp_threshold;
  fcfg.seed = config.seed;
  const auto features = compute_node_features(edgelets, lab, luminance, sparse, fcfg);

  TrainingSample sample;
  sample.graph = build_graph(edgelets, features, config.link_radius, config.max_degree);
  sample.gold = weak_labels(edgelets, mask, 2);
  return sample;
}

}  // namespace salprop
