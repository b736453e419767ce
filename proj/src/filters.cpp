#include "salprop/filters.hpp"

#include <cmath>

namespace salprop {

namespace {

int kernel_radius(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  const int r = kernel_radius(sigma);
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_deriv_kernel(double sigma) {
  const int r = kernel_radius(sigma);
  std::vector<double> k(2 * r + 1);
  // d/dx of the unit-sum Gaussian; antisymmetric, so the taps sum to zero.
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) norm += std::exp(-0.5 * i * i / (sigma * sigma));
  for (int i = -r; i <= r; ++i)
    k[i + r] = -i / (sigma * sigma) * std::exp(-0.5 * i * i / (sigma * sigma)) / norm;
  return k;
}

ScalarField convolve_separable(const ScalarField& src, const std::vector<double>& kx,
                               const std::vector<double>& ky) {
  const int rx = static_cast<int>(kx.size()) / 2;
  const int ry = static_cast<int>(ky.size()) / 2;
  ScalarField tmp(src.width, src.height);
  ScalarField out(src.width, src.height);

  // horizontal pass
  #pragma omp parallel for
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int t = -rx; t <= rx; ++t) acc += kx[t + rx] * src.at_clamped(x - t, y);
      tmp.at(x, y) = acc;
    }
  }
  // vertical pass
  #pragma omp parallel for
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int t = -ry; t <= ry; ++t) acc += ky[t + ry] * tmp.at_clamped(x, y - t);
      out.at(x, y) = acc;
    }
  }
  return out;
}

ScalarField gaussian_smooth(const ScalarField& src, double sigma) {
  const auto g = gaussian_kernel(sigma);
  return convolve_separable(src, g, g);
}

GradientPair gaussian_gradients(const ScalarField& src, double sigma) {
  const auto g = gaussian_kernel(sigma);
  const auto d = gaussian_deriv_kernel(sigma);
  GradientPair out;
  out.dx = convolve_separable(src, d, g);
  out.dy = convolve_separable(src, g, d);
  return out;
}

ScalarField dog_response(const ScalarField& src, double sigma) {
  const ScalarField fine = gaussian_smooth(src, sigma);
  const ScalarField coarse = gaussian_smooth(src, 1.6 * sigma);
  ScalarField out(src.width, src.height);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = fine.values[i] - coarse.values[i];
  return out;
}

ScalarField log_response(const ScalarField& src, double sigma) {
  // Dense sampled LoG kernel; mean-subtracted so flat regions respond zero.
  const int r = std::max(2, static_cast<int>(std::ceil(4.0 * sigma)));
  const int size = 2 * r + 1;
  std::vector<double> kernel(static_cast<std::size_t>(size) * size);
  const double s2 = sigma * sigma;
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double q = (x * x + y * y) / (2.0 * s2);
      const double v = (q - 1.0) / (s2 * s2) * std::exp(-q);
      kernel[static_cast<std::size_t>(y + r) * size + (x + r)] = v;
      sum += v;
    }
  const double mean = sum / (static_cast<double>(size) * size);
  for (double& v : kernel) v -= mean;

  ScalarField out(src.width, src.height);
  #pragma omp parallel for
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int ky = -r; ky <= r; ++ky)
        for (int kx = -r; kx <= r; ++kx)
          acc += kernel[static_cast<std::size_t>(ky + r) * size + (kx + r)] *
                 src.at_clamped(x - kx, y - ky);
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace salprop
