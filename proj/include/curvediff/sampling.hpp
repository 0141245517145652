#pragma once

#include <cstddef>

#include "curvediff/curve.hpp"
#include "curvediff/matrix.hpp"
#include "curvediff/rng.hpp"

namespace curvediff {

enum class CurveFamily {
  /// Jittered star-shaped polygon, random scale and offset; well separated vertices.
  Star,
  /// i.i.d. Gaussian vertices; may be self-intersecting and have short edges.
  Gaussian,
};

DiscreteCurve random_curve(CounterRng& rng, std::size_t n, std::size_t d, CurveFamily family = CurveFamily::Star);
TangentVector random_tangent(CounterRng& rng, std::size_t n, std::size_t d);
/// Haar-ish random orthogonal d×d matrix (Gram–Schmidt of a Gaussian matrix).
Matrix random_rotation(CounterRng& rng, std::size_t d);

}  // namespace curvediff
