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

// Colour-space conversions used by the distortion models. sRGB with D65
// white, CIE Lab; HSV; full-range BT.601 YCbCr.

#include <array>

namespace iqa::color {

using Triple = std::array<float, 3>;

Triple rgb_to_lab(const Triple& rgb);
Triple lab_to_rgb(const Triple& lab);
Triple rgb_to_hsv(const Triple& rgb);
Triple hsv_to_rgb(const Triple& hsv);
Triple rgb_to_ycbcr(const Triple& rgb);
Triple ycbcr_to_rgb(const Triple& ycc);

inline float luminance(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

}  // namespace iqa::color
