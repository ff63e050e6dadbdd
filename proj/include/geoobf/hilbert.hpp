// Copyright 2026 The geoobf Authors
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
//

#ifndef GEOOBF_HILBERT_HPP_
#define GEOOBF_HILBERT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"

namespace geoobf {

inline constexpr unsigned kMaxHilbertOrder = 31;

struct GridCell {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

namespace detail {

inline void require_order(unsigned order) {
  if (order > kMaxHilbertOrder) {
    throw InvalidArgument("Hilbert order " + std::to_string(order) +
                          " exceeds " + std::to_string(kMaxHilbertOrder));
  }
}

inline void rotate_quadrant(std::uint64_t side, std::uint64_t& x, std::uint64_t& y,
                            std::uint64_t rx, std::uint64_t ry) {
  if (ry == 0) {
    if (rx == 1) {
      x = side - 1 - x;
      y = side - 1 - y;
    }
    std::swap(x, y);
  }
}

}  // namespace detail

// Index of cell (x, y) along the order-`order` Hilbert curve on a
// 2^order x 2^order grid. The curve starts at the lower-left cell (0, 0) and
// ends at the lower-right cell (2^order - 1, 0).
inline std::uint64_t hilbert_rank(std::uint64_t x, std::uint64_t y, unsigned order) {
  detail::require_order(order);
  const std::uint64_t n = std::uint64_t{1} << order;
  if (x >= n || y >= n) {
    throw InvalidArgument("cell (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside a " + std::to_string(n) + "x" +
                          std::to_string(n) + " grid");
  }
  std::uint64_t d = 0;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    const std::uint64_t rx = (x & s) ? 1 : 0;
    const std::uint64_t ry = (y & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    detail::rotate_quadrant(n, x, y, rx, ry);
  }
  return d;
}

// Inverse of hilbert_rank.
inline GridCell hilbert_cell(std::uint64_t index, unsigned order) {
  detail::require_order(order);
  const std::uint64_t n = std::uint64_t{1} << order;
  if (index >= n * n) {
    throw InvalidArgument("Hilbert index " + std::to_string(index) + " out of range");
  }
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t t = index;
  for (std::uint64_t s = 1; s < n; s *= 2) {
    const std::uint64_t rx = 1 & (t / 2);
    const std::uint64_t ry = 1 & (t ^ rx);
    detail::rotate_quadrant(s, x, y, rx, ry);
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
}

// Clockwise rotation of the curve about the grid center.
enum class Rotation : int { kDeg0 = 0, kDeg90 = 90, kDeg180 = 180, kDeg270 = 270 };

inline constexpr std::array<Rotation, 4> kAllRotations = {
    Rotation::kDeg0, Rotation::kDeg90, Rotation::kDeg180, Rotation::kDeg270};

inline int degrees(Rotation r) { return static_cast<int>(r); }

// Index of `cell` on the curve rotated clockwise by `rotation`. Rotating the
// curve clockwise is the same as rotating the cell counter-clockwise and
// reading the unrotated curve.
inline std::uint64_t rotated_hilbert_rank(GridCell cell, unsigned order,
                                          Rotation rotation) {
  detail::require_order(order);
  const std::uint64_t last = (std::uint64_t{1} << order) - 1;
  const std::uint64_t x = cell.x;
  const std::uint64_t y = cell.y;
  switch (rotation) {
    case Rotation::kDeg0:
      return hilbert_rank(x, y, order);
    case Rotation::kDeg90:
      return hilbert_rank(last - y, x, order);
    case Rotation::kDeg180:
      return hilbert_rank(last - x, last - y, order);
    case Rotation::kDeg270:
      return hilbert_rank(y, last - x, order);
  }
  throw InvalidArgument("bad rotation");
}

// Total order of a domain along one rotated curve.
struct HilbertOrdering {
  Rotation rotation = Rotation::kDeg0;
  unsigned order = 0;
  std::vector<std::size_t> ranks;     // ranks[id]
  std::vector<LocationId> sequence;   // sequence[rank] = id
};

// Smallest order m >= 1 whose 2^m cells per side are no coarser than
// `cell_km` across the domain's bounding box.
inline unsigned default_order(const LocationDomain& domain, double cell_km = 1.0) {
  if (!(cell_km > 0.0)) throw InvalidArgument("cell_km must be positive");
  if (domain.empty()) return 1;
  double min_x = domain.pos(0).x, max_x = min_x;
  double min_y = domain.pos(0).y, max_y = min_y;
  for (const Location& loc : domain.locations()) {
    min_x = std::min(min_x, loc.pos.x);
    max_x = std::max(max_x, loc.pos.x);
    min_y = std::min(min_y, loc.pos.y);
    max_y = std::max(max_y, loc.pos.y);
  }
  const double cells = std::max(max_x - min_x, max_y - min_y) / cell_km;
  unsigned m = 1;
  while (m < kMaxHilbertOrder && std::ldexp(1.0, static_cast<int>(m)) < cells) ++m;
  return m;
}

// Snaps every location onto a 2^order grid laid over the (square) bounding
// box and ranks them along the rotated curve. Locations sharing a cell are
// ordered by id.
inline HilbertOrdering order_domain(const LocationDomain& domain, unsigned order,
                                    Rotation rotation) {
  detail::require_order(order);
  if (domain.empty()) throw InvalidArgument("cannot order an empty domain");
  const std::size_t n = domain.size();
  HilbertOrdering out;
  out.rotation = rotation;
  out.order = order;
  out.ranks.assign(n, 0);
  out.sequence.assign(n, 0);
  if (n == 1) return out;

  double min_x = domain.pos(0).x, max_x = min_x;
  double min_y = domain.pos(0).y, max_y = min_y;
  for (const Location& loc : domain.locations()) {
    min_x = std::min(min_x, loc.pos.x);
    max_x = std::max(max_x, loc.pos.x);
    min_y = std::min(min_y, loc.pos.y);
    max_y = std::max(max_y, loc.pos.y);
  }
  const double span = std::max(max_x - min_x, max_y - min_y);
  if (!(span > 0.0)) {
    throw InvalidArgument("degenerate bounding box: all locations coincide");
  }
  const std::uint64_t side = std::uint64_t{1} << order;
  const auto snap = [&](double v, double lo) {
    const double scaled = std::floor((v - lo) / span * static_cast<double>(side));
    return static_cast<std::uint32_t>(
        std::clamp(scaled, 0.0, static_cast<double>(side - 1)));
  };

  std::vector<std::pair<std::uint64_t, LocationId>> keyed(n);
  for (LocationId id = 0; id < n; ++id) {
    const GridCell cell{snap(domain.pos(id).x, min_x), snap(domain.pos(id).y, min_y)};
    keyed[id] = {rotated_hilbert_rank(cell, order, rotation), id};
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t r = 0; r < n; ++r) {
    out.sequence[r] = keyed[r].second;
    out.ranks[keyed[r].second] = r;
  }
  return out;
}

inline std::array<HilbertOrdering, 4> all_rotations(const LocationDomain& domain,
                                                    unsigned order) {
  std::array<HilbertOrdering, 4> out;
  for (std::size_t i = 0; i < kAllRotations.size(); ++i) {
    out[i] = order_domain(domain, order, kAllRotations[i]);
  }
  return out;
}

}  // namespace geoobf

#endif  // GEOOBF_HILBERT_HPP_
