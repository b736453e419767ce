#include "salprop/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "salprop/errors.hpp"

namespace salprop {

std::vector<double> saliency_prior(const std::vector<std::array<double, 3>>& fg_fltp_s) {
  if (fg_fltp_s.empty()) fail(Err::EmptyInput, "no segments to rank");
  std::vector<double> nu(fg_fltp_s.size());
  double nu_max = 0.0;
  for (std::size_t i = 0; i < fg_fltp_s.size(); ++i) {
    nu[i] = fg_fltp_s[i][0] * fg_fltp_s[i][1] * fg_fltp_s[i][2];
    nu_max = std::max(nu_max, nu[i]);
  }
  std::vector<double> priors(nu.size());
  if (nu_max <= 0.0) {
    std::fill(priors.begin(), priors.end(), 0.5);
    return priors;
  }
  for (std::size_t i = 0; i < nu.size(); ++i)
    priors[i] = std::clamp(nu[i] / nu_max, kPriorClampLo, kPriorClampHi);
  return priors;
}

namespace {

int bin_of(double normalized) {
  const int b = static_cast<int>(std::floor(10.0 * normalized));
  return std::clamp(b, 0, 9);
}

}  // namespace

SaliencyHistograms build_likelihood_histograms(const std::vector<Edgelet>& edgelets,
                                               double beta) {
  if (edgelets.empty()) fail(Err::EmptyInput, "no segments to histogram");
  if (beta <= 0.0) fail(Err::BadValue, "beta must be positive");

  double strength_max = 0.0;
  for (const auto& e : edgelets) strength_max = std::max(strength_max, e.strength);

  std::array<double, 10> count_sal{};
  std::array<double, 10> count_bg{};
  for (const auto& e : edgelets) {
    const bool salient = strength_max > 0.0 && e.strength >= beta * strength_max;
    auto& bins = salient ? count_sal : count_bg;
    for (float m : e.mags)
      bins[bin_of(strength_max > 0.0 ? m / strength_max : 0.0)] += 1.0;
  }

  SaliencyHistograms h;
  double tot_sal = 0.0, tot_bg = 0.0;
  for (int b = 0; b < 10; ++b) {
    h.h_sal[b] = count_sal[b] + 1.0;  // add-one smoothing
    h.h_bg[b] = count_bg[b] + 1.0;
    tot_sal += h.h_sal[b];
    tot_bg += h.h_bg[b];
  }
  for (int b = 0; b < 10; ++b) {
    h.h_sal[b] /= tot_sal;
    h.h_bg[b] /= tot_bg;
  }
  return h;
}

double posterior(double strength, double prior, const SaliencyHistograms& hist,
                 double max_strength) {
  if (max_strength <= 0.0) fail(Err::BadValue, "max strength must be positive");
  const int b = bin_of(strength / max_strength);
  const double p_sal = hist.h_sal[b];
  const double p_bg = hist.h_bg[b];
  return prior * p_sal / (prior * p_sal + (1.0 - prior) * p_bg);
}

std::vector<EdgeletSaliency> compute_saliency(const std::vector<Edgelet>& edgelets,
                                              const std::vector<NodeFeatures>& features,
                                              double beta) {
  if (edgelets.empty()) fail(Err::EmptyInput, "no segments to score");
  if (edgelets.size() != features.size())
    fail(Err::SizeMismatch, "features and segments disagree in count");

  std::vector<std::array<double, 3>> cues(edgelets.size());
  for (std::size_t i = 0; i < edgelets.size(); ++i)
    cues[i] = {features[i][0], features[i][5], features[i][6]};
  const auto priors = saliency_prior(cues);
  const auto hist = build_likelihood_histograms(edgelets, beta);

  double strength_max = 0.0;
  for (const auto& e : edgelets) strength_max = std::max(strength_max, e.strength);

  std::vector<EdgeletSaliency> out(edgelets.size());
  for (std::size_t i = 0; i < edgelets.size(); ++i) {
    out[i].edgelet_id = edgelets[i].id;
    out[i].prior = priors[i];
    out[i].nu = cues[i][0] * cues[i][1] * cues[i][2];
    out[i].posterior = strength_max > 0.0
                           ? posterior(edgelets[i].strength, priors[i], hist,
                                       strength_max)
                           : priors[i];
  }
  return out;
}

void write_saliency_csv(const std::string& path,
                        const std::vector<EdgeletSaliency>& saliency,
                        const std::vector<Edgelet>& edgelets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  out << "edgelet_id,prior,posterior,strength\n";
  char buf[128];
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const double strength = i < edgelets.size() ? edgelets[i].strength : 0.0;
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", saliency[i].edgelet_id,
                  saliency[i].prior, saliency[i].posterior, strength);
    out << buf;
  }
}

}  // namespace salprop
