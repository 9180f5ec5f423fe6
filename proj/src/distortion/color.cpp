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

#include "color.hpp"

#include <algorithm>
#include <cmath>

namespace iqa::color {
namespace {

constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }
double linear_to_srgb(double c) {
  c = std::max(c, 0.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}
double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
}
double lab_finv(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d ? t * t * t : 3 * d * d * (t - 4.0 / 29.0);
}

}  // namespace

Triple rgb_to_lab(const Triple& rgb) {
  const double r = srgb_to_linear(rgb[0]), g = srgb_to_linear(rgb[1]), b = srgb_to_linear(rgb[2]);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
  return {static_cast<float>(116 * fy - 16), static_cast<float>(500 * (fx - fy)), static_cast<float>(200 * (fy - fz))};
}

Triple lab_to_rgb(const Triple& lab) {
  const double fy = (lab[0] + 16) / 116.0;
  const double fx = fy + lab[1] / 500.0;
  const double fz = fy - lab[2] / 200.0;
  const double x = kXn * lab_finv(fx), y = kYn * lab_finv(fy), z = kZn * lab_finv(fz);
  const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
  return {static_cast<float>(linear_to_srgb(r)), static_cast<float>(linear_to_srgb(g)),
          static_cast<float>(linear_to_srgb(b))};
}

Triple rgb_to_hsv(const Triple& rgb) {
  const float mx = std::max({rgb[0], rgb[1], rgb[2]});
  const float mn = std::min({rgb[0], rgb[1], rgb[2]});
  const float d = mx - mn;
  float h = 0.0f;
  if (d > 0.0f) {
    if (mx == rgb[0]) {
      h = std::fmod((rgb[1] - rgb[2]) / d, 6.0f);
    } else if (mx == rgb[1]) {
      h = (rgb[2] - rgb[0]) / d + 2.0f;
    } else {
      h = (rgb[0] - rgb[1]) / d + 4.0f;
    }
    h /= 6.0f;
    if (h < 0.0f) h += 1.0f;
  }
  const float s = mx > 0.0f ? d / mx : 0.0f;
  return {h, s, mx};
}

Triple hsv_to_rgb(const Triple& hsv) {
  const float h6 = hsv[0] * 6.0f;
  const float c = hsv[2] * hsv[1];
  const float x = c * (1.0f - std::fabs(std::fmod(h6, 2.0f) - 1.0f));
  const float m = hsv[2] - c;
  float r = 0, g = 0, b = 0;
  switch (static_cast<int>(h6) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {r + m, g + m, b + m};
}

Triple rgb_to_ycbcr(const Triple& rgb) {
  const float y = luminance(rgb[0], rgb[1], rgb[2]);
  return {y, 0.564f * (rgb[2] - y), 0.713f * (rgb[0] - y)};
}

Triple ycbcr_to_rgb(const Triple& ycc) {
  const float r = ycc[0] + ycc[2] / 0.713f;
  const float b = ycc[0] + ycc[1] / 0.564f;
  const float g = (ycc[0] - 0.299f * r - 0.114f * b) / 0.587f;
  return {r, g, b};
}

}  // namespace iqa::color
