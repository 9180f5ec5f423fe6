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


// Serial reference kernels against their OpenMP counterparts. The thread
// count of the parallel runs is the benchmark argument.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "iqa/image.hpp"
#include "iqa/kernels.hpp"
#include "iqa/parallel.hpp"
#include "iqa/rng.hpp"

namespace {

using namespace iqa;

const ImageTensor& scene() {
  static const ImageTensor img = synthesize_scene(256, 256, 7);
  return img;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(i) - 0.5;
  return m;
}

std::vector<kernels::SamplePoint> swirl(int h, int w) {
  std::vector<kernels::SamplePoint> pts(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float a = 0.002f * static_cast<float>((r - h / 2) * (r - h / 2) + (c - w / 2) * (c - w / 2)) / w;
      pts[static_cast<std::size_t>(r) * w + c] = {r + 3.0f * std::sin(a), c + 3.0f * std::cos(a)};
    }
  }
  return pts;
}

// Parallel benchmarks take the thread count as their argument.
template <typename Fn>
void run_parallel(benchmark::State& state, Fn fn) {
  ScopedThreads threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fn());
  state.counters["threads"] = static_cast<double>(state.range(0));
}

template <typename Fn>
void run_serial(benchmark::State& state, Fn fn) {
  for (auto _ : state) benchmark::DoNotOptimize(fn());
}

const std::vector<float>& taps() {
  static const std::vector<float> t = kernels::gaussian_taps(2.0);
  return t;
}

const kernels::Kernel2D& disk() {
  static const kernels::Kernel2D k = kernels::disk_kernel(4.0);
  return k;
}

void BM_SeparableSerial(benchmark::State& s) { run_serial(s, [] { return kernels::serial::separable_convolve(scene(), taps()); }); }
void BM_SeparableOmp(benchmark::State& s) { run_parallel(s, [] { return kernels::separable_convolve(scene(), taps()); }); }
void BM_Convolve2dSerial(benchmark::State& s) { run_serial(s, [] { return kernels::serial::convolve2d(scene(), disk()); }); }
void BM_Convolve2dOmp(benchmark::State& s) { run_parallel(s, [] { return kernels::convolve2d(scene(), disk()); }); }
void BM_BilateralSerial(benchmark::State& s) { run_serial(s, [] { return kernels::serial::bilateral(scene(), 2.0, 0.1); }); }
void BM_BilateralOmp(benchmark::State& s) { run_parallel(s, [] { return kernels::bilateral(scene(), 2.0, 0.1); }); }

void BM_RemapBicubicSerial(benchmark::State& s) {
  const auto pts = swirl(256, 256);
  run_serial(s, [&] { return kernels::serial::remap_bicubic(scene(), pts); });
}
void BM_RemapBicubicOmp(benchmark::State& s) {
  const auto pts = swirl(256, 256);
  run_parallel(s, [&] { return kernels::remap_bicubic(scene(), pts); });
}

void BM_MatmulSerial(benchmark::State& s) {
  const Matrix a = random_matrix(256, 768, 1);
  const Matrix b = random_matrix(64, 768, 2);
  run_serial(s, [&] { return kernels::serial::matmul_nt(a, b); });
}
void BM_MatmulOmp(benchmark::State& s) {
  const Matrix a = random_matrix(256, 768, 1);
  const Matrix b = random_matrix(64, 768, 2);
  run_parallel(s, [&] { return kernels::matmul_nt(a, b); });
}

}  // namespace

BENCHMARK(BM_SeparableSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SeparableOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Convolve2dSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Convolve2dOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BilateralSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BilateralOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RemapBicubicSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RemapBicubicOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatmulSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatmulOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
