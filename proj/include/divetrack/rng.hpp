// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// The scenario generator's random source, pinned so that generated fixtures
// are reproducible anywhere: seeds feed std::mt19937_64 (whose output stream
// is fixed by the standard), uniforms take the top 53 bits, and normals come
// from plain Box-Muller. Each call consumes a fixed number of engine draws
// (uniform: 1, gaussian: 2), which makes the generator's draw order part of
// the file-format contract.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace divetrack::sim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch only; always exactly two
  /// uniform draws).
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace divetrack::sim
