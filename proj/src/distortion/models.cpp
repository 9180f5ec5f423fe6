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

#include <cstddef>
#include <cstdio>
#include <cstdlib>

#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "color.hpp"
#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/kernels.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace {

constexpr std::array<std::string_view, kDistortionModels> kNames = {
    "color quantization", "JPEG2000",       "impulse noise",       "color block",
    "color shift",        "color diffusion", "multiplicative noise", "denoise",
    "Gaussian blur",      "high sharpen",    "darken",              "contrast change",
    "HSV saturation",     "jitter",          "lens blur",           "JPEG",
    "mean shift",         "brighten",        "Lab saturation",      "non-eccentricity patch",
    "pixelate",           "quantization",    "motion blur",         "YCbCr white noise",
    "white noise"};

// Applies fn(r, c) -> Triple to every pixel, one row per OpenMP iteration.
template <typename Fn>
ImageTensor map_pixels(const ImageTensor& img, Fn&& fn) {
  ImageTensor out(img.height(), img.width());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const color::Triple v = fn(r, c, color::Triple{img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)});
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = v[ch];
    }
  }
  return out;
}

std::uint64_t pixel_index(const ImageTensor& img, int r, int c) {
  return static_cast<std::uint64_t>(r) * img.width() + c;
}

// --- 1: colour quantization ------------------------------------------------

struct ColorBox {
  std::vector<std::uint32_t> members;
  double sse = 0.0;
  int axis = 0;
  color::Triple mean{};
};

ColorBox make_box(const ImageTensor& img, std::vector<std::uint32_t> members) {
  ColorBox box;
  box.members = std::move(members);
  const auto data = img.data();
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (std::uint32_t p : box.members) {
    for (int ch = 0; ch < 3; ++ch) {
      const double v = data[static_cast<std::size_t>(p) * 3 + ch];
      sum[ch] += v;
      sq[ch] += v * v;
    }
  }
  const double n = static_cast<double>(box.members.size());
  double best = -1.0;
  for (int ch = 0; ch < 3; ++ch) {
    box.mean[ch] = static_cast<float>(sum[ch] / n);
    const double var = sq[ch] - sum[ch] * sum[ch] / n;
    box.sse += var;
    if (var > best) {
      best = var;
      box.axis = ch;
    }
  }
  return box;
}

// Minimum-variance palette by recursive splitting of the box with the
// largest squared error, followed by Floyd-Steinberg error diffusion.
ImageTensor color_quantization(const ImageTensor& img, int colors) {
  std::vector<std::uint32_t> all(img.pixel_count());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<ColorBox> boxes;
  boxes.push_back(make_box(img, std::move(all)));
  const auto data = img.data();
  while (static_cast<int>(boxes.size()) < colors) {
    auto it = std::max_element(boxes.begin(), boxes.end(), [](const ColorBox& a, const ColorBox& b) { return a.sse < b.sse; });
    if (it->members.size() < 2 || it->sse <= 0.0) break;
    ColorBox box = std::move(*it);
    boxes.erase(it);
    const int axis = box.axis;
    std::stable_sort(box.members.begin(), box.members.end(), [&](std::uint32_t a, std::uint32_t b) {
      return data[static_cast<std::size_t>(a) * 3 + axis] < data[static_cast<std::size_t>(b) * 3 + axis];
    });
    // Split where the summed within-half variance along the axis is minimal.
    const std::size_t n = box.members.size();
    std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data[static_cast<std::size_t>(box.members[i]) * 3 + axis];
      prefix[i + 1] = prefix[i] + v;
      prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    std::size_t split = n / 2;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
      const double left = prefix_sq[k] - prefix[k] * prefix[k] / k;
      const double rs = prefix[n] - prefix[k];
      const double right = (prefix_sq[n] - prefix_sq[k]) - rs * rs / (n - k);
      if (left + right < best) {
        best = left + right;
        split = k;
      }
    }
    std::vector<std::uint32_t> lo(box.members.begin(), box.members.begin() + static_cast<std::ptrdiff_t>(split));
    std::vector<std::uint32_t> hi(box.members.begin() + static_cast<std::ptrdiff_t>(split), box.members.end());
    boxes.push_back(make_box(img, std::move(lo)));
    boxes.push_back(make_box(img, std::move(hi)));
  }
  ImageTensor work = img;
  ImageTensor out(img.height(), img.width());
  const int h = img.height(), w = img.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      float best = std::numeric_limits<float>::infinity();
      const ColorBox* pick = &boxes.front();
      for (const ColorBox& b : boxes) {
        float d = 0.0f;
        for (int ch = 0; ch < 3; ++ch) d += (work.at(r, c, ch) - b.mean[ch]) * (work.at(r, c, ch) - b.mean[ch]);
        if (d < best) {
          best = d;
          pick = &b;
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        const float err = work.at(r, c, ch) - pick->mean[ch];
        out.at(r, c, ch) = pick->mean[ch];
        if (c + 1 < w) work.at(r, c + 1, ch) += err * 7.0f / 16.0f;
        if (r + 1 < h) {
          if (c > 0) work.at(r + 1, c - 1, ch) += err * 3.0f / 16.0f;
          work.at(r + 1, c, ch) += err * 5.0f / 16.0f;
          if (c + 1 < w) work.at(r + 1, c + 1, ch) += err * 1.0f / 16.0f;
        }
      }
    }
  }
  return out;
}

// --- 2: wavelet compression (JPEG2000 stand-in) ------------------------------

// Orthonormal multi-level Haar transform with hard thresholding of detail
// coefficients. With an orthonormal basis the squared error equals the
// energy of the discarded coefficients, so error grows with the threshold.
void haar_forward(std::vector<double>& plane, int stride, int h, int w) {
  std::vector<double> tmp(static_cast<std::size_t>(std::max(h, w)));
  constexpr double s = std::numbers::sqrt2 / 2.0;
  for (int r = 0; r < h; ++r) {
    for (int i = 0; i < w / 2; ++i) {
      const double a = plane[r * stride + 2 * i], b = plane[r * stride + 2 * i + 1];
      tmp[i] = (a + b) * s;
      tmp[w / 2 + i] = (a - b) * s;
    }
    for (int i = 0; i < w; ++i) plane[r * stride + i] = tmp[i];
  }
  for (int c = 0; c < w; ++c) {
    for (int i = 0; i < h / 2; ++i) {
      const double a = plane[2 * i * stride + c], b = plane[(2 * i + 1) * stride + c];
      tmp[i] = (a + b) * s;
      tmp[h / 2 + i] = (a - b) * s;
    }
    for (int i = 0; i < h; ++i) plane[i * stride + c] = tmp[i];
  }
}

void haar_inverse(std::vector<double>& plane, int stride, int h, int w) {
  std::vector<double> tmp(static_cast<std::size_t>(std::max(h, w)));
  constexpr double s = std::numbers::sqrt2 / 2.0;
  for (int c = 0; c < w; ++c) {
    for (int i = 0; i < h / 2; ++i) {
      const double a = plane[i * stride + c], d = plane[(h / 2 + i) * stride + c];
      tmp[2 * i] = (a + d) * s;
      tmp[2 * i + 1] = (a - d) * s;
    }
    for (int i = 0; i < h; ++i) plane[i * stride + c] = tmp[i];
  }
  for (int r = 0; r < h; ++r) {
    for (int i = 0; i < w / 2; ++i) {
      const double a = plane[r * stride + i], d = plane[r * stride + w / 2 + i];
      tmp[2 * i] = (a + d) * s;
      tmp[2 * i + 1] = (a - d) * s;
    }
    for (int i = 0; i < w; ++i) plane[r * stride + i] = tmp[i];
  }
}

ImageTensor wavelet_compress(const ImageTensor& img, double threshold) {
  constexpr int kLevels = 5;
  const int block = 1 << kLevels;
  const int ph = (img.height() + block - 1) / block * block;
  const int pw = (img.width() + block - 1) / block * block;
  ImageTensor out(img.height(), img.width());
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> plane(static_cast<std::size_t>(ph) * pw);
    for (int r = 0; r < ph; ++r) {
      for (int c = 0; c < pw; ++c) plane[static_cast<std::size_t>(r) * pw + c] = img.clamped(r, c, ch);
    }
    for (int l = 0; l < kLevels; ++l) haar_forward(plane, pw, ph >> l, pw >> l);
    const int ah = ph >> kLevels, aw = pw >> kLevels;
    for (int r = 0; r < ph; ++r) {
      for (int c = 0; c < pw; ++c) {
        if (r < ah && c < aw) continue;  // approximation band kept
        double& v = plane[static_cast<std::size_t>(r) * pw + c];
        if (std::fabs(v) < threshold) v = 0.0;
      }
    }
    for (int l = kLevels - 1; l >= 0; --l) haar_inverse(plane, pw, ph >> l, pw >> l);
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) out.at(r, c, ch) = static_cast<float>(plane[static_cast<std::size_t>(r) * pw + c]);
    }
  }
  return out;
}

// --- 16: JPEG through libjpeg ------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

ImageTensor jpeg_roundtrip(const ImageTensor& img, int quality) {
  const Rgb8Image rgb = to_rgb8(img);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  {
    jpeg_compress_struct cinfo;
    JpegErrorManager jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
      jpeg_destroy_compress(&cinfo);
      std::free(buffer);
      throw DataError("JPEG encoding failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(rgb.width);
    cinfo.image_height = static_cast<JDIMENSION>(rgb.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row = const_cast<JSAMPROW>(&rgb.bytes[static_cast<std::size_t>(cinfo.next_scanline) * rgb.width * 3]);
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
  }
  Rgb8Image decoded{rgb.height, rgb.width, std::vector<std::uint8_t>(rgb.bytes.size())};
  {
    jpeg_decompress_struct dinfo;
    JpegErrorManager jerr;
    dinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
      jpeg_destroy_decompress(&dinfo);
      std::free(buffer);
      throw DataError("JPEG decoding failed");
    }
    jpeg_create_decompress(&dinfo);
    jpeg_mem_src(&dinfo, buffer, size);
    jpeg_read_header(&dinfo, TRUE);
    dinfo.out_color_space = JCS_RGB;
    dinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&dinfo);
    while (dinfo.output_scanline < dinfo.output_height) {
      JSAMPROW row = &decoded.bytes[static_cast<std::size_t>(dinfo.output_scanline) * rgb.width * 3];
      jpeg_read_scanlines(&dinfo, &row, 1);
    }
    jpeg_finish_decompress(&dinfo);
    jpeg_destroy_decompress(&dinfo);
  }
  std::free(buffer);
  return from_rgb8(decoded);
}

// --- 22: multi-level Otsu ------------------------------------------------------

// Exact multi-threshold Otsu by dynamic programming over a 256-bin histogram:
// maximises between-class variance, i.e. sum over classes of S^2 / W.
std::vector<int> otsu_thresholds(const std::array<double, 256>& hist, int count) {
  constexpr int kBins = 256;
  std::array<double, kBins + 1> w{}, s{};
  for (int i = 0; i < kBins; ++i) {
    w[i + 1] = w[i] + hist[i];
    s[i + 1] = s[i] + hist[i] * i;
  }
  auto score = [&](int a, int b) {  // bins [a, b)
    const double ww = w[b] - w[a];
    return ww > 0 ? (s[b] - s[a]) * (s[b] - s[a]) / ww : 0.0;
  };
  const int classes = count + 1;
  std::vector<std::vector<double>> best(classes + 1, std::vector<double>(kBins + 1, -1.0));
  std::vector<std::vector<int>> arg(classes + 1, std::vector<int>(kBins + 1, 0));
  for (int b = 1; b <= kBins; ++b) best[1][b] = score(0, b);
  for (int k = 2; k <= classes; ++k) {
    for (int b = k; b <= kBins; ++b) {
      for (int a = k - 1; a < b; ++a) {
        const double v = best[k - 1][a] + score(a, b);
        if (v > best[k][b]) {
          best[k][b] = v;
          arg[k][b] = a;
        }
      }
    }
  }
  std::vector<int> cuts(count);
  int b = kBins;
  for (int k = classes; k >= 2; --k) {
    b = arg[k][b];
    cuts[k - 2] = b;
  }
  return cuts;  // class boundaries: bin < cuts[0] is class 0, etc.
}

ImageTensor otsu_quantize(const ImageTensor& img, int count) {
  std::array<double, 256> hist{};
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      hist[quantize_channel(color::luminance(img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)))] += 1.0;
    }
  }
  const std::vector<int> cuts = otsu_thresholds(hist, count);
  // Representative of each class: mean luminance of its histogram mass.
  std::vector<float> rep(cuts.size() + 1);
  int lo = 0;
  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    const int hi = k < cuts.size() ? cuts[k] : 256;
    double ww = 0, ss = 0;
    for (int i = lo; i < hi; ++i) {
      ww += hist[i];
      ss += hist[i] * i;
    }
    rep[k] = static_cast<float>(ww > 0 ? ss / ww / 255.0 : (lo + hi - 1) / 2.0 / 255.0);
    lo = hi;
  }
  return map_pixels(img, [&](int, int, color::Triple v) {
    for (float& x : v) {
      const int bin = quantize_channel(x);
      const auto k = std::upper_bound(cuts.begin(), cuts.end(), bin) - cuts.begin();
      x = rep[static_cast<std::size_t>(k)];
    }
    return v;
  });
}

// --- remaining helpers ---------------------------------------------------------

ImageTensor gaussian_blur(const ImageTensor& img, double sigma) {
  const auto taps = kernels::gaussian_taps(sigma);
  return kernels::separable_convolve(img, taps);
}

ImageTensor pixelate(const ImageTensor& img, int block) {
  ImageTensor out(img.height(), img.width());
  const int brows = (img.height() + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (int br = 0; br < brows; ++br) {
    const int r0 = br * block, r1 = std::min(img.height(), r0 + block);
    for (int c0 = 0; c0 < img.width(); c0 += block) {
      const int c1 = std::min(img.width(), c0 + block);
      for (int ch = 0; ch < 3; ++ch) {
        double sum = 0.0;
        for (int r = r0; r < r1; ++r) {
          for (int c = c0; c < c1; ++c) sum += img.at(r, c, ch);
        }
        const float mean = static_cast<float>(sum / ((r1 - r0) * (c1 - c0)));
        for (int r = r0; r < r1; ++r) {
          for (int c = c0; c < c1; ++c) out.at(r, c, ch) = mean;
        }
      }
    }
  }
  return out;
}

ImageTensor motion_blur(const ImageTensor& img, double length, double angle_degrees) {
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const int taps = std::max(2, static_cast<int>(std::lround(length)));
  const double dy = std::sin(theta), dx = std::cos(theta);
  ImageTensor out(img.height(), img.width());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        float acc = 0.0f;
        for (int t = 0; t < taps; ++t) {
          const double off = t - (taps - 1) / 2.0;
          acc += kernels::sample_bilinear(img, static_cast<float>(r + off * dy), static_cast<float>(c + off * dx), ch);
        }
        out.at(r, c, ch) = acc / static_cast<float>(taps);
      }
    }
  }
  return out;
}

ImageTensor gaussian_noise_rgb(const ImageTensor& img, double variance, std::uint64_t seed) {
  const CounterRng noise(seed);
  const float sd = static_cast<float>(std::sqrt(variance));
  return map_pixels(img, [&](int r, int c, color::Triple v) {
    const std::uint64_t i = pixel_index(img, r, c);
    for (int ch = 0; ch < 3; ++ch) v[ch] += sd * static_cast<float>(noise.normal(i, ch));
    return v;
  });
}

float s_curve(float x, float strength) {
  constexpr float k = 10.0f;
  auto sig = [](float t) { return 1.0f / (1.0f + std::exp(-t)); };
  const float lo = sig(-k / 2), hi = sig(k / 2);
  const float s = (sig(k * (x - 0.5f)) - lo) / (hi - lo);
  return x + strength * (s - x);
}

ImageTensor lab_map(const ImageTensor& img, auto&& fn) {
  return map_pixels(img, [&](int, int, color::Triple v) { return color::lab_to_rgb(fn(color::rgb_to_lab(v))); });
}

ImageTensor color_diffusion(const ImageTensor& img, double sigma) {
  ImageTensor lab(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const auto v = color::rgb_to_lab({img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)});
      for (int ch = 0; ch < 3; ++ch) lab.at(r, c, ch) = v[ch];
    }
  }
  const ImageTensor blurred = gaussian_blur(lab, sigma);
  return map_pixels(lab, [&](int r, int c, color::Triple v) {
    v[1] = blurred.at(r, c, 1);
    v[2] = blurred.at(r, c, 2);
    return color::lab_to_rgb(v);
  });
}

ImageTensor color_shift(const ImageTensor& img, double shift, double weight, std::uint64_t seed) {
  Rng rng(seed);
  const double theta = uniform_between(rng, 0.0, 2.0 * std::numbers::pi);
  const float sy = static_cast<float>(shift * std::sin(theta));
  const float sx = static_cast<float>(shift * std::cos(theta));
  // Normalised Sobel gradient magnitude of luminance.
  std::vector<float> grad(img.pixel_count());
  auto lum = [&](int r, int c) {
    return color::luminance(img.clamped(r, c, 0), img.clamped(r, c, 1), img.clamped(r, c, 2));
  };
  float gmax = 0.0f;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const float gx = (lum(r - 1, c + 1) + 2 * lum(r, c + 1) + lum(r + 1, c + 1)) -
                       (lum(r - 1, c - 1) + 2 * lum(r, c - 1) + lum(r + 1, c - 1));
      const float gy = (lum(r + 1, c - 1) + 2 * lum(r + 1, c) + lum(r + 1, c + 1)) -
                       (lum(r - 1, c - 1) + 2 * lum(r - 1, c) + lum(r - 1, c + 1));
      const float g = std::sqrt(gx * gx + gy * gy);
      grad[pixel_index(img, r, c)] = g;
      gmax = std::max(gmax, g);
    }
  }
  const float inv = gmax > 0.0f ? 1.0f / gmax : 0.0f;
  const float wgt = static_cast<float>(weight);
  return map_pixels(img, [&](int r, int c, color::Triple v) {
    const float a = wgt * grad[pixel_index(img, r, c)] * inv;
    const float shifted = kernels::sample_bilinear(img, static_cast<float>(r) - sy, static_cast<float>(c) - sx, 1);
    v[1] = (1.0f - a) * v[1] + a * shifted;
    return v;
  });
}

ImageTensor color_blocks(const ImageTensor& img, int count, double side_fraction, std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor out = img;
  const int side = std::max(1, static_cast<int>(std::lround(side_fraction * std::min(img.height(), img.width()))));
  for (int b = 0; b < count; ++b) {
    const int r0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(std::max(1, img.height() - side + 1))));
    const int c0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(std::max(1, img.width() - side + 1))));
    float col[3];
    for (float& v : col) v = static_cast<float>(uniform01(rng));
    for (int r = r0; r < std::min(img.height(), r0 + side); ++r) {
      for (int c = c0; c < std::min(img.width(), c0 + side); ++c) {
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = col[ch];
      }
    }
  }
  return out;
}

ImageTensor scatter_patches(const ImageTensor& img, double per_4096, double side_fraction, std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor out = img;
  const int side = std::max(2, static_cast<int>(std::lround(side_fraction * std::min(img.height(), img.width()))));
  const int count = std::max(1, static_cast<int>(std::lround(per_4096 * img.pixel_count() / 4096.0)));
  const int reach = side;
  for (int p = 0; p < count; ++p) {
    const int r0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(std::max(1, img.height() - side + 1))));
    const int c0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(std::max(1, img.width() - side + 1))));
    const int dr = static_cast<int>(uniform_below(rng, 2 * reach + 1)) - reach;
    const int dc = static_cast<int>(uniform_below(rng, 2 * reach + 1)) - reach;
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const int tr = r0 + dr + r, tc = c0 + dc + c;
        if (tr < 0 || tc < 0 || tr >= img.height() || tc >= img.width()) continue;
        for (int ch = 0; ch < 3; ++ch) out.at(tr, tc, ch) = img.clamped(r0 + r, c0 + c, ch);
      }
    }
  }
  return out;
}

ImageTensor jitter(const ImageTensor& img, double amplitude, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<kernels::SamplePoint> points(img.pixel_count());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const std::uint64_t i = pixel_index(img, r, c);
      points[i] = {static_cast<float>(r + amplitude * (2.0 * rng.uniform(i, 0) - 1.0)),
                   static_cast<float>(c + amplitude * (2.0 * rng.uniform(i, 1) - 1.0))};
    }
  }
  return kernels::remap_bicubic(img, points);
}

}  // namespace

std::string_view distortion_name(int model) {
  if (model < 1 || model > kDistortionModels) throw ConfigError("distortion model out of range");
  return kNames[static_cast<std::size_t>(model - 1)];
}

void validate(const DistortionSpec& spec) {
  if (spec.model < 1 || spec.model > kDistortionModels) {
    throw ConfigError("distortion model " + std::to_string(spec.model) + " out of range 1..25");
  }
  if (spec.level < 1 || spec.level > kSeverityLevels) {
    throw ConfigError("severity level " + std::to_string(spec.level) + " out of range 1..5");
  }
}

PseudoLabel pseudo_label(const DistortionSpec& spec) {
  validate(spec);
  return {std::to_string(spec.model) + "-" + std::to_string(spec.level), (spec.model - 1) * kSeverityLevels + (spec.level - 1)};
}

DistortionSpec spec_from_class(int class_index) {
  if (class_index < 0 || class_index >= kDistortionClasses) throw ConfigError("class index out of range 0..124");
  return {class_index / kSeverityLevels + 1, class_index % kSeverityLevels + 1, 0};
}

ImageTensor apply_distortion(const ImageTensor& img, const DistortionSpec& spec, const SeveritySchedule& schedule) {
  validate(spec);
  const std::vector<double>& p = schedule.params(spec.model, spec.level);
  auto param = [&](std::size_t i, double fallback) { return i < p.size() ? p[i] : fallback; };
  const std::uint64_t seed = spec.seed;
  ImageTensor out;
  switch (static_cast<DistortionModel>(spec.model)) {
    case DistortionModel::kColorQuantization:
      out = color_quantization(img, std::max(2, static_cast<int>(std::lround(p[0]))));
      break;
    case DistortionModel::kJpeg2000:
      out = wavelet_compress(img, p[0]);
      break;
    case DistortionModel::kImpulseNoise: {
      const CounterRng rng(seed);
      const double density = p[0];
      out = map_pixels(img, [&](int r, int c, color::Triple v) {
        const std::uint64_t i = pixel_index(img, r, c);
        for (int ch = 0; ch < 3; ++ch) {
          const double u = rng.uniform(i, ch);
          if (u < density / 2) {
            v[ch] = 0.0f;
          } else if (u < density) {
            v[ch] = 1.0f;
          }
        }
        return v;
      });
      break;
    }
    case DistortionModel::kColorBlock:
      out = color_blocks(img, static_cast<int>(std::lround(p[0])), param(1, 0.08), seed);
      break;
    case DistortionModel::kColorShift:
      out = color_shift(img, p[0], param(1, 1.0), seed);
      break;
    case DistortionModel::kColorDiffusion:
      out = color_diffusion(img, p[0]);
      break;
    case DistortionModel::kMultiplicativeNoise: {
      const CounterRng rng(seed);
      const float sd = static_cast<float>(std::sqrt(p[0]));
      out = map_pixels(img, [&](int r, int c, color::Triple v) {
        const std::uint64_t i = pixel_index(img, r, c);
        for (int ch = 0; ch < 3; ++ch) v[ch] += v[ch] * sd * static_cast<float>(rng.normal(i, ch));
        return v;
      });
      break;
    }
    case DistortionModel::kDenoise: {
      // Gaussian noise followed by an edge-preserving bilateral filter, in
      // place of a learned denoiser.
      ImageTensor noisy = gaussian_noise_rgb(img, p[0], seed);
      noisy.clamp_unit();
      out = kernels::bilateral(noisy, param(1, 1.5), std::max(0.05, 3.0 * std::sqrt(p[0])));
      break;
    }
    case DistortionModel::kGaussianBlur:
      out = gaussian_blur(img, p[0]);
      break;
    case DistortionModel::kHighSharpen: {
      const ImageTensor blurred = gaussian_blur(img, param(1, 1.0));
      const float amount = static_cast<float>(p[0]);
      out = map_pixels(img, [&](int r, int c, color::Triple v) {
        for (int ch = 0; ch < 3; ++ch) v[ch] += amount * (v[ch] - blurred.at(r, c, ch));
        return v;
      });
      break;
    }
    case DistortionModel::kDarken:
    case DistortionModel::kBrighten: {
      const double gamma = p[0];
      out = lab_map(img, [&](color::Triple lab) {
        lab[0] = static_cast<float>(100.0 * std::pow(std::clamp(lab[0] / 100.0, 0.0, 1.0), gamma));
        return lab;
      });
      break;
    }
    case DistortionModel::kContrastChange: {
      const float strength = static_cast<float>(p[0]);
      out = map_pixels(img, [&](int, int, color::Triple v) {
        for (float& x : v) x = s_curve(x, strength);
        return v;
      });
      break;
    }
    case DistortionModel::kHsvSaturation: {
      const float factor = static_cast<float>(p[0]);
      out = map_pixels(img, [&](int, int, color::Triple v) {
        auto hsv = color::rgb_to_hsv(v);
        hsv[1] = std::clamp(hsv[1] * factor, 0.0f, 1.0f);
        return color::hsv_to_rgb(hsv);
      });
      break;
    }
    case DistortionModel::kJitter:
      out = jitter(img, p[0], seed);
      break;
    case DistortionModel::kLensBlur:
      out = kernels::convolve2d(img, kernels::disk_kernel(p[0]));
      break;
    case DistortionModel::kJpeg:
      out = jpeg_roundtrip(img, std::clamp(static_cast<int>(std::lround(p[0])), 1, 100));
      break;
    case DistortionModel::kMeanShift: {
      const float shift = static_cast<float>(p[0]);
      out = map_pixels(img, [&](int, int, color::Triple v) {
        for (float& x : v) x += shift;
        return v;
      });
      break;
    }
    case DistortionModel::kLabSaturation: {
      const float gain = static_cast<float>(p[0]);
      out = lab_map(img, [&](color::Triple lab) {
        lab[1] *= gain;
        lab[2] *= gain;
        return lab;
      });
      break;
    }
    case DistortionModel::kNonEccentricityPatch:
      out = scatter_patches(img, p[0], param(1, 0.08), seed);
      break;
    case DistortionModel::kPixelate:
      out = pixelate(img, std::max(1, static_cast<int>(std::lround(p[0]))));
      break;
    case DistortionModel::kQuantization:
      out = otsu_quantize(img, std::clamp(static_cast<int>(std::lround(p[0])), 1, 16));
      break;
    case DistortionModel::kMotionBlur:
      out = motion_blur(img, p[0], param(1, 30.0));
      break;
    case DistortionModel::kYCbCrWhiteNoise: {
      const CounterRng rng(seed);
      const float sd = static_cast<float>(std::sqrt(p[0]));
      out = map_pixels(img, [&](int r, int c, color::Triple v) {
        const std::uint64_t i = pixel_index(img, r, c);
        auto ycc = color::rgb_to_ycbcr(v);
        for (int ch = 0; ch < 3; ++ch) ycc[ch] += sd * static_cast<float>(rng.normal(i, ch));
        return color::ycbcr_to_rgb(ycc);
      });
      break;
    }
    case DistortionModel::kWhiteNoise:
      out = gaussian_noise_rgb(img, p[0], seed);
      break;
  }
  out.clamp_unit();
  return out;
}

}  // namespace iqa
