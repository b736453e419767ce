#pragma once

#include <cstdint>
#include <vector>

#include "salprop/bayes.hpp"
#include "salprop/crf.hpp"
#include "salprop/edges.hpp"
#include "salprop/features.hpp"
#include "salprop/geometry.hpp"
#include "salprop/image.hpp"
#include "salprop/proposals.hpp"

namespace salprop::reference {

// Serial reference implementations. These exist so the optimized kernels have
// an independent check and a benchmark baseline: straight loops, no OpenMP, no
// shared code with the paths they verify. Used by the test suites and by
// tools/bench.

// Dense 2-D convolution with an explicit kernel grid, clamped borders.
ScalarField convolve2d(const ScalarField& src, const std::vector<double>& kernel,
                       int kw, int kh);

// Gaussian derivative pair built from dense outer-product kernels.
GradientPair gaussian_gradients(const ScalarField& src, double sigma);

// Central-difference gradient magnitude (no smoothing); loose positional
// oracle for the builtin detector.
ScalarField central_gradient_magnitude(const ScalarField& src);

// Eq.-by-eq window score: walks every edgelet, tests every pixel for
// containment, accumulates in ascending edgelet order.
double score_window(const Window& win, const std::vector<Edgelet>& edgelets,
                    const std::vector<double>& saliency,
                    const std::vector<int>& labels);

// Plain O(n^2) greedy suppression.
std::vector<Proposal> nms_boxes(const std::vector<Proposal>& proposals, double theta);

// Per-pixel LTP evaluation with its own neighbor walk and a two-pass
// population variance.
double ltp_feature(const Edgelet& e, const ScalarField& luminance, double T);

// Dense (unsampled) texture context for the sampling-tolerance checks.
TextureContext texture_context_dense(const Edgelet& e, const ScalarField& luminance,
                                     double k, int radius);

// IoU by counting pixels on the integer grid.
double iou_pixel_count(const Window& a, const Window& b);

}  // namespace salprop::reference
