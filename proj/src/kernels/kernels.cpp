// Copyright 2026 The iqastack Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iqa/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "iqa/error.hpp"
#include "iqa/parallel.hpp"

namespace iqa {

namespace {
int g_threads = 0;
}  // namespace

void set_num_threads(int n) {
  g_threads = std::max(1, n);
  omp_set_num_threads(g_threads);
}

int num_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

namespace kernels {
namespace {

// Row loop shared by both flavours. `fn(r)` must only write row r.
template <bool kParallel, typename Fn>
void for_rows(int rows, Fn&& fn) {
  if constexpr (kParallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) fn(r);
  } else {
    for (int r = 0; r < rows; ++r) fn(r);
  }
}

template <bool kParallel>
ImageTensor separable_impl(const ImageTensor& img, std::span<const float> taps) {
  if (taps.empty() || taps.size() % 2 == 0) throw ConfigError("separable_convolve: taps must have odd length");
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = img.height();
  const int w = img.width();
  ImageTensor tmp(h, w);
  // Locals rather than captures keep the inner loops free of reloads once
  // the body is outlined into an OpenMP region.
  const float* const t = taps.data();
  const float* const src = img.data().data();
  float* const mid = tmp.data().data();
  for_rows<kParallel>(h, [=](int r) {
    const float* row = src + static_cast<std::size_t>(r) * w * 3;
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) acc += t[k + radius] * row[std::clamp(c + k, 0, w - 1) * 3 + ch];
        mid[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = acc;
      }
    }
  });
  ImageTensor out(h, w);
  float* const dst = out.data().data();
  for_rows<kParallel>(h, [=](int r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          acc += t[k + radius] * mid[(static_cast<std::size_t>(std::clamp(r + k, 0, h - 1)) * w + c) * 3 + ch];
        }
        dst[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = acc;
      }
    }
  });
  return out;
}

template <bool kParallel>
ImageTensor convolve2d_impl(const ImageTensor& img, const Kernel2D& kernel) {
  if (kernel.size < 1 || kernel.size % 2 == 0 ||
      kernel.taps.size() != static_cast<std::size_t>(kernel.size) * kernel.size) {
    throw ConfigError("convolve2d: kernel must be square with odd side");
  }
  const int radius = kernel.size / 2;
  ImageTensor out(img.height(), img.width());
  for_rows<kParallel>(img.height(), [&](int r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        float acc = 0.0f;
        for (int dy = -radius; dy <= radius; ++dy) {
          const float* row_taps = &kernel.taps[static_cast<std::size_t>(dy + radius) * kernel.size];
          for (int dx = -radius; dx <= radius; ++dx) {
            const float t = row_taps[dx + radius];
            if (t != 0.0f) acc += t * img.clamped(r + dy, c + dx, ch);
          }
        }
        out.at(r, c, ch) = acc;
      }
    }
  });
  return out;
}

template <bool kParallel>
ImageTensor bilateral_impl(const ImageTensor& img, double spatial_sigma, double range_sigma) {
  if (!(spatial_sigma > 0.0) || !(range_sigma > 0.0)) throw ConfigError("bilateral: sigmas must be positive");
  const int radius = static_cast<int>(std::ceil(2.0 * spatial_sigma));
  const float inv_s = static_cast<float>(1.0 / (2.0 * spatial_sigma * spatial_sigma));
  const float inv_r = static_cast<float>(1.0 / (2.0 * range_sigma * range_sigma));
  ImageTensor out(img.height(), img.width());
  for_rows<kParallel>(img.height(), [&](int r) {
    for (int c = 0; c < img.width(); ++c) {
      float acc[3] = {0, 0, 0};
      float norm = 0.0f;
      const float c0 = img.at(r, c, 0), c1 = img.at(r, c, 1), c2 = img.at(r, c, 2);
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const float p0 = img.clamped(r + dy, c + dx, 0);
          const float p1 = img.clamped(r + dy, c + dx, 1);
          const float p2 = img.clamped(r + dy, c + dx, 2);
          const float range2 = (p0 - c0) * (p0 - c0) + (p1 - c1) * (p1 - c1) + (p2 - c2) * (p2 - c2);
          const float wgt = std::exp(-static_cast<float>(dy * dy + dx * dx) * inv_s - range2 * inv_r);
          acc[0] += wgt * p0;
          acc[1] += wgt * p1;
          acc[2] += wgt * p2;
          norm += wgt;
        }
      }
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = acc[ch] / norm;
    }
  });
  return out;
}

template <bool kParallel, bool kBicubic>
ImageTensor remap_impl(const ImageTensor& img, std::span<const SamplePoint> points) {
  if (points.size() != img.pixel_count()) throw ConfigError("remap: one sample point per pixel required");
  ImageTensor out(img.height(), img.width());
  const int w = img.width();
  for_rows<kParallel>(img.height(), [&](int r) {
    for (int c = 0; c < w; ++c) {
      const SamplePoint& p = points[static_cast<std::size_t>(r) * w + c];
      for (int ch = 0; ch < 3; ++ch) {
        out.at(r, c, ch) = kBicubic ? sample_bicubic(img, p.row, p.col, ch)
                                    : sample_bilinear(img, p.row, p.col, ch);
      }
    }
  });
  return out;
}

template <bool kParallel>
Matrix matmul_nt_impl(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ConfigError("matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  const int n = static_cast<int>(a.rows());
  for_rows<kParallel>(n, [&](int i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < ai.size(); ++k) acc += ai[k] * bj[k];
      c(i, j) = acc;
    }
  });
  return c;
}

template <bool kParallel>
Matrix matmul_tn_impl(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ConfigError("matmul_tn: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  const int k_rows = static_cast<int>(a.cols());
  for_rows<kParallel>(k_rows, [&](int i) {
    auto ci = c.row(i);
    for (std::size_t n = 0; n < a.rows(); ++n) {
      const double av = a(n, i);
      if (av == 0.0) continue;
      const auto bn = b.row(n);
      for (std::size_t j = 0; j < ci.size(); ++j) ci[j] += av * bn[j];
    }
  });
  return c;
}

template <bool kParallel>
Matrix matmul_nn_impl(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("matmul_nn: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const int n = static_cast<int>(a.rows());
  for_rows<kParallel>(n, [&](int i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double av = a(i, k);
      if (av == 0.0) continue;
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < ci.size(); ++j) ci[j] += av * bk[j];
    }
  });
  return c;
}

float cubic_weight(float t) {
  // Catmull-Rom (a = -0.5).
  t = std::fabs(t);
  if (t < 1.0f) return (1.5f * t - 2.5f) * t * t + 1.0f;
  if (t < 2.0f) return ((-0.5f * t + 2.5f) * t - 4.0f) * t + 2.0f;
  return 0.0f;
}

}  // namespace

std::vector<float> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian_taps: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += std::exp(-(i * i) / (2.0 * sigma * sigma));
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = static_cast<float>(std::exp(-(i * i) / (2.0 * sigma * sigma)) / sum);
  }
  return taps;
}

Kernel2D disk_kernel(double radius) {
  if (!(radius > 0.0)) throw ConfigError("disk_kernel: radius must be positive");
  const int r = static_cast<int>(std::ceil(radius));
  Kernel2D k;
  k.size = 2 * r + 1;
  k.taps.assign(static_cast<std::size_t>(k.size) * k.size, 0.0f);
  // Coverage estimated on a 4x4 subpixel grid.
  double sum = 0.0;
  std::vector<double> cover(k.taps.size());
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      int inside = 0;
      for (int sy = 0; sy < 4; ++sy) {
        for (int sx = 0; sx < 4; ++sx) {
          const double y = dy - 0.375 + 0.25 * sy;
          const double x = dx - 0.375 + 0.25 * sx;
          if (x * x + y * y <= radius * radius) ++inside;
        }
      }
      const std::size_t idx = static_cast<std::size_t>(dy + r) * k.size + (dx + r);
      cover[idx] = inside / 16.0;
      sum += cover[idx];
    }
  }
  for (std::size_t i = 0; i < cover.size(); ++i) k.taps[i] = static_cast<float>(cover[i] / sum);
  return k;
}

float sample_bilinear(const ImageTensor& img, float row, float col, int ch) {
  const float fr = std::floor(row);
  const float fc = std::floor(col);
  const int r0 = static_cast<int>(fr);
  const int c0 = static_cast<int>(fc);
  const float ty = row - fr;
  const float tx = col - fc;
  const float p00 = img.clamped(r0, c0, ch);
  const float p01 = img.clamped(r0, c0 + 1, ch);
  const float p10 = img.clamped(r0 + 1, c0, ch);
  const float p11 = img.clamped(r0 + 1, c0 + 1, ch);
  const float top = tx == 0.0f ? p00 : p00 + tx * (p01 - p00);
  const float bottom = tx == 0.0f ? p10 : p10 + tx * (p11 - p10);
  return ty == 0.0f ? top : top + ty * (bottom - top);
}

float sample_bicubic(const ImageTensor& img, float row, float col, int ch) {
  const float fr = std::floor(row);
  const float fc = std::floor(col);
  const int r0 = static_cast<int>(fr);
  const int c0 = static_cast<int>(fc);
  const float ty = row - fr;
  const float tx = col - fc;
  float acc = 0.0f;
  for (int i = -1; i <= 2; ++i) {
    const float wy = cubic_weight(static_cast<float>(i) - ty);
    float line = 0.0f;
    for (int j = -1; j <= 2; ++j) line += cubic_weight(static_cast<float>(j) - tx) * img.clamped(r0 + i, c0 + j, ch);
    acc += wy * line;
  }
  return acc;
}

ImageTensor separable_convolve(const ImageTensor& img, std::span<const float> taps) {
  return separable_impl<true>(img, taps);
}
ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& kernel) {
  return convolve2d_impl<true>(img, kernel);
}
ImageTensor bilateral(const ImageTensor& img, double spatial_sigma, double range_sigma) {
  return bilateral_impl<true>(img, spatial_sigma, range_sigma);
}
ImageTensor remap_bilinear(const ImageTensor& img, std::span<const SamplePoint> points) {
  return remap_impl<true, false>(img, points);
}
ImageTensor remap_bicubic(const ImageTensor& img, std::span<const SamplePoint> points) {
  return remap_impl<true, true>(img, points);
}
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return matmul_nt_impl<true>(a, b); }
Matrix matmul_tn(const Matrix& a, const Matrix& b) { return matmul_tn_impl<true>(a, b); }
Matrix matmul_nn(const Matrix& a, const Matrix& b) { return matmul_nn_impl<true>(a, b); }

namespace serial {

ImageTensor separable_convolve(const ImageTensor& img, std::span<const float> taps) {
  return separable_impl<false>(img, taps);
}
ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& kernel) {
  return convolve2d_impl<false>(img, kernel);
}
ImageTensor bilateral(const ImageTensor& img, double spatial_sigma, double range_sigma) {
  return bilateral_impl<false>(img, spatial_sigma, range_sigma);
}
ImageTensor remap_bilinear(const ImageTensor& img, std::span<const SamplePoint> points) {
  return remap_impl<false, false>(img, points);
}
ImageTensor remap_bicubic(const ImageTensor& img, std::span<const SamplePoint> points) {
  return remap_impl<false, true>(img, points);
}
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return matmul_nt_impl<false>(a, b); }
Matrix matmul_tn(const Matrix& a, const Matrix& b) { return matmul_tn_impl<false>(a, b); }
Matrix matmul_nn(const Matrix& a, const Matrix& b) { return matmul_nn_impl<false>(a, b); }

}  // namespace serial
}  // namespace kernels
}  // namespace iqa
