#pragma once

#include <array>
#include <string>
#include <vector>

#include "salprop/edges.hpp"
#include "salprop/features.hpp"

namespace salprop {

// Smoothed magnitude likelihood histograms over normalized strength [0,1].
struct SaliencyHistograms {
  std::array<double, 10> h_sal{};
  std::array<double, 10> h_bg{};
};

struct EdgeletSaliency {
  int edgelet_id = 0;
  double prior = 0.5;      // clamped to [1e-3, 1-1e-3]
  double posterior = 0.5;  // p(sal | strength)
  double nu = 0.0;         // f_G * f_LTP * strength
};

inline constexpr double kPriorClampLo = 1e-3;
inline constexpr double kPriorClampHi = 1.0 - 1e-3;

// nu_j = f_G * f_LTP * strength, normalized by the max over segments and
// clamped. All-zero nu degenerates to uniform 0.5 priors. Throws EmptyInput.
std::vector<double> saliency_prior(const std::vector<std::array<double, 3>>& fg_fltp_s);

// Splits segments into salient (strength >= beta * max strength) and
// background, then histograms member-pixel magnitudes normalized by the max
// strength into 10 bins with add-one smoothing. Throws EmptyInput.
SaliencyHistograms build_likelihood_histograms(const std::vector<Edgelet>& edgelets,
                                               double beta = 0.8);

// Bayes rule over the bin containing strength / max_strength (last bin is
// closed at 1.0). The smoothed histograms keep the denominator positive.
double posterior(double strength, double prior, const SaliencyHistograms& hist,
                 double max_strength);

// Composition over a whole image's edgelets; features align with edgelets.
std::vector<EdgeletSaliency> compute_saliency(const std::vector<Edgelet>& edgelets,
                                              const std::vector<NodeFeatures>& features,
                                              double beta = 0.8);

// Debug dump: edgelet_id, prior, posterior, strength.
void write_saliency_csv(const std::string& path,
                        const std::vector<EdgeletSaliency>& saliency,
                        const std::vector<Edgelet>& edgelets);

}  // namespace salprop
