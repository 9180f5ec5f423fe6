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

#pragma once

// Data-parallel image and dense-algebra kernels.
//
// Each kernel exists twice: an OpenMP version in iqa::kernels and a plain
// loop in iqa::kernels::serial that is kept as the reference for tests and
// the benchmark. Both compute every output element with the same arithmetic
// in the same order, so their results are bit-identical for any thread
// count.

#include <span>
#include <vector>

#include "iqa/image.hpp"
#include "iqa/matrix.hpp"

namespace iqa::kernels {

/// Square 2-D filter with odd side, row-major taps.
struct Kernel2D {
  int size = 1;
  std::vector<float> taps{1.0f};
};

/// Source coordinate (row, col) per output pixel, for remapping.
struct SamplePoint {
  float row = 0.0f;
  float col = 0.0f;
};

/// Normalized 1-D Gaussian with radius ceil(3 sigma).
std::vector<float> gaussian_taps(double sigma);
/// Normalized disk of the given radius, anti-aliased at the rim.
Kernel2D disk_kernel(double radius);

/// Bilinear sample with edge replication.
float sample_bilinear(const ImageTensor& img, float row, float col, int ch);
/// Catmull-Rom bicubic sample with edge replication.
float sample_bicubic(const ImageTensor& img, float row, float col, int ch);

ImageTensor separable_convolve(const ImageTensor& img, std::span<const float> taps);
ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& kernel);
ImageTensor bilateral(const ImageTensor& img, double spatial_sigma, double range_sigma);
/// out(p) = bilinear(img, points[p]); points has one entry per pixel.
ImageTensor remap_bilinear(const ImageTensor& img, std::span<const SamplePoint> points);
ImageTensor remap_bicubic(const ImageTensor& img, std::span<const SamplePoint> points);

/// C = A * B^T   (A: n x k, B: m x k, C: n x m)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// C = A^T * B   (A: n x k, B: n x m, C: k x m)
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// C = A * B     (A: n x k, B: k x m, C: n x m)
Matrix matmul_nn(const Matrix& a, const Matrix& b);

namespace serial {

ImageTensor separable_convolve(const ImageTensor& img, std::span<const float> taps);
ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& kernel);
ImageTensor bilateral(const ImageTensor& img, double spatial_sigma, double range_sigma);
ImageTensor remap_bilinear(const ImageTensor& img, std::span<const SamplePoint> points);
ImageTensor remap_bicubic(const ImageTensor& img, std::span<const SamplePoint> points);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nn(const Matrix& a, const Matrix& b);

}  // namespace serial
}  // namespace iqa::kernels
