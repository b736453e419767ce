#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salprop/bayes.hpp"
#include "salprop/crf.hpp"
#include "salprop/edges.hpp"
#include "salprop/geometry.hpp"

namespace salprop {

struct Proposal {
  Window window;
  double score = 0.0;
  int rank = 0;  // 1-based, scores non-increasing with rank
};

// Per-edgelet summary plus a coarse uniform grid over bbox top-left corners.
// An edgelet lies completely inside a window iff its bbox does, and a
// contained bbox has its top-left corner inside the window, so a window query
// only scans the grid cells the window covers.
struct SalientEdgeIndex {
  struct Entry {
    Window bbox;
    int length = 0;
    double saliency = 0.0;  // Bayesian posterior
    int label = 0;          // CRF object/non-object
  };
  std::vector<Entry> edgelets;
  int cell = 32;
  int grid_w = 0, grid_h = 0;
  std::vector<std::vector<int>> grid;  // cell -> edgelet indices (ascending)
};

SalientEdgeIndex build_salient_index(const std::vector<Edgelet>& edgelets,
                                     const std::vector<EdgeletSaliency>& saliency,
                                     const Labeling& labels, int cell = 32);

struct WindowParams {
  double alpha = 0.65;       // IoU between adjacent same-size windows
  double scale_min = 0.005;  // window area as a fraction of image area
  double scale_max = 0.95;
  double scale_step = 0.01;
  std::vector<double> aspects = {1.0 / 3.0, 0.57735026918962584, 1.0,
                                 1.7320508075688772, 3.0};
  int min_dim = 8;  // windows with a smaller side are skipped
};

// Integer step whose adjacent-window IoU is nearest alpha, at least 1.
int stride_for(int extent, double alpha);

// Sliding windows over scale, aspect and position. Throws ImageTooSmall when
// nothing survives.
std::vector<Window> enumerate_windows(int img_w, int img_h,
                                      const WindowParams& params = {});

// Salient-edge density: sum of saliency * length over object-labeled
// edgelets completely inside the window, divided by sqrt of the window area.
double score_window(const Window& win, const SalientEdgeIndex& index);

// Scores every window (parallel) and returns proposals sorted by descending
// score with ranks assigned; deterministic tie order.
std::vector<Proposal> score_all_windows(const std::vector<Window>& windows,
                                        const SalientEdgeIndex& index);

// Greedy per-box hill climb on x/y/w/h with a halving step starting at half
// the translation stride; never lowers a score. Boxes stay inside the image.
std::vector<Proposal> refine(const std::vector<Proposal>& proposals,
                             const SalientEdgeIndex& index, double alpha,
                             int img_w, int img_h);

// Greedy descending-score suppression: keep a box iff IoU with every kept
// box is <= theta. Ranks are reassigned 1..N.
std::vector<Proposal> nms_boxes(const std::vector<Proposal>& proposals,
                                double theta = 0.75);

struct ProposalSet {
  std::vector<Proposal> proposals;
  bool no_edgelets = false;
  bool flat_image = false;
  std::uint32_t seed = 0;
};

// CSV "rank,x,y,w,h,score"; comment_lines are emitted first, prefixed '#'.
void write_proposals_csv(const std::string& path, const ProposalSet& set,
                         const std::vector<std::string>& comment_lines = {});
std::vector<Proposal> read_proposals_csv(const std::string& path);

}  // namespace salprop
