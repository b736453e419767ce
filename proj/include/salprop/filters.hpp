#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "salprop/image.hpp"

namespace salprop {

// Probe directions for the oriented gradient machinery: 0, 45, 90, 135 degrees.
inline constexpr std::array<double, 4> kOrientations = {
    0.0, 0.78539816339744831, 1.5707963267948966, 2.3561944901923449};

// Sampled Gaussian, normalized to unit sum. Radius = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// Sampled first derivative of a Gaussian (antisymmetric, zero sum).
std::vector<double> gaussian_deriv_kernel(double sigma);

// Separable convolution with clamped borders, horizontal kernel kx then
// vertical kernel ky. Kernels are centered and of odd length.
ScalarField convolve_separable(const ScalarField& src,
                               const std::vector<double>& kx,
                               const std::vector<double>& ky);

ScalarField gaussian_smooth(const ScalarField& src, double sigma);

struct GradientPair {
  ScalarField dx, dy;
};

// First-order Gaussian derivatives; responses at any orientation steer as
// cos(o)*dx + sin(o)*dy.
GradientPair gaussian_gradients(const ScalarField& src, double sigma);

// Difference of Gaussians at scale sigma: G(sigma) - G(1.6 sigma).
ScalarField dog_response(const ScalarField& src, double sigma);

// Laplacian of Gaussian, sampled kernel with zero-sum correction.
ScalarField log_response(const ScalarField& src, double sigma);

}  // namespace salprop
