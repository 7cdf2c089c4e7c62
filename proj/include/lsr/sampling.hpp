#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lsr/norms.hpp"

namespace lsr {

/// Deterministic sample set for a closed ball B(center, radius) in the given
/// norm: the center, the 2*dim axis boundary points, the diagonal boundary
/// points along +-e_i +-e_j, and a tensor lattice with `samples_per_dim`
/// points per axis intersected with the ball.
///
/// The lattice is the union of the levels N, N/2, N/4, ... (down to 2), so
/// the sample set for 2N always contains the set for N and a sampled
/// supremum can only grow when the resolution is doubled.
std::vector<Vector> ball_samples(const Vector& center, double radius,
                                 int samples_per_dim, NormKind norm);

/// Worker count for supremum sampling: LS_CERTIFY_THREADS if set to a
/// positive integer, otherwise the hardware concurrency.
unsigned sampling_threads();

/// max_{0 <= i < count} fn(i), evaluated on up to `threads` workers (0 means
/// sampling_threads()). Returns 0 for count == 0. The first exception thrown
/// by any worker is rethrown.
double parallel_max(std::size_t count, const std::function<double(std::size_t)>& fn,
                    unsigned threads = 0);

}  // namespace lsr
