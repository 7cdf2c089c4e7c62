#include "lsr/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "lsr/errors.hpp"

namespace lsr {

namespace {

void add_lattice_level(const Vector& center, double radius, int points_per_axis,
                       NormKind norm, std::vector<Vector>& out) {
  const Eigen::Index dim = center.size();
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  const double limit = radius * (1.0 + 1e-12);
  Vector offset(dim);
  for (;;) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double t = -1.0 + 2.0 * idx[static_cast<std::size_t>(d)] / (points_per_axis - 1);
      offset(d) = radius * t;
    }
    if (vector_norm(offset, norm) <= limit) out.push_back(center + offset);

    Eigen::Index d = 0;
    for (; d < dim; ++d) {
      auto& i = idx[static_cast<std::size_t>(d)];
      if (++i < points_per_axis) break;
      i = 0;
    }
    if (d == dim) break;
  }
}

}  // namespace

std::vector<Vector> ball_samples(const Vector& center, double radius,
                                 int samples_per_dim, NormKind norm) {
  if (!(radius >= 0.0) || !std::isfinite(radius))
    fail(ErrorCode::InvalidArgument, "ball radius must be finite and nonnegative");
  if (samples_per_dim < 1)
    fail(ErrorCode::InvalidArgument, "samples_per_dim must be positive");

  std::vector<Vector> out;
  out.push_back(center);
  const Eigen::Index dim = center.size();
  if (dim == 0 || radius == 0.0) return out;

  for (Eigen::Index i = 0; i < dim; ++i) {
    for (double s : {1.0, -1.0}) {
      Vector p = center;
      p(i) += s * radius;
      out.push_back(std::move(p));
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          Vector d = Vector::Zero(dim);
          d(i) = si;
          d(j) = sj;
          out.push_back(center + d * (radius / vector_norm(d, norm)));
        }
      }
    }
  }
  for (int level = samples_per_dim; level >= 2; level /= 2)
    add_lattice_level(center, radius, level, norm, out);
  return out;
}

unsigned sampling_threads() {
  if (const char* env = std::getenv("LS_CERTIFY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double parallel_max(std::size_t count, const std::function<double(std::size_t)>& fn,
                    unsigned threads) {
  if (count == 0) return 0.0;
  if (threads == 0) threads = sampling_threads();
  const std::size_t workers = std::min<std::size_t>(threads, (count + 255) / 256);
  if (workers <= 1) {
    double best = 0.0;
    for (std::size_t i = 0; i < count; ++i) best = std::max(best, fn(i));
    return best;
  }

  std::vector<double> partial(workers, 0.0);
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          double best = 0.0;
          for (std::size_t i = w; i < count && !stop.load(std::memory_order_relaxed); i += workers)
            best = std::max(best, fn(i));
          partial[w] = best;
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return *std::max_element(partial.begin(), partial.end());
}

}  // namespace lsr
