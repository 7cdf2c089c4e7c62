#include "lsr/norms.hpp"

#include <cmath>
#include <limits>

namespace lsr {

const char* norm_name(NormKind kind) noexcept {
  switch (kind) {
    case NormKind::Spectral: return "spectral";
    case NormKind::One: return "one";
    case NormKind::Infinity: return "infinity";
  }
  return "spectral";
}

std::optional<NormKind> parse_norm(std::string_view name) noexcept {
  if (name == "spectral") return NormKind::Spectral;
  if (name == "one") return NormKind::One;
  if (name == "infinity") return NormKind::Infinity;
  return std::nullopt;
}

double vector_norm(const Vector& v, NormKind kind) {
  if (v.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::Spectral: return v.norm();
    case NormKind::One: return v.lpNorm<1>();
    case NormKind::Infinity: return v.lpNorm<Eigen::Infinity>();
  }
  return v.norm();
}

double matrix_norm(const Matrix& a, NormKind kind) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  switch (kind) {
    case NormKind::Spectral: {
      if (a.rows() == 1 || a.cols() == 1) return a.norm();
      Eigen::JacobiSVD<Matrix> svd(a);
      return svd.singularValues()(0);
    }
    case NormKind::One: return a.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::Infinity: return a.cwiseAbs().rowwise().sum().maxCoeff();
  }
  return 0.0;
}

double condition_number(const Matrix& a) {
  if (a.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

bool all_finite(const Vector& v) noexcept { return v.allFinite(); }
bool all_finite(const Matrix& a) noexcept { return a.allFinite(); }

}  // namespace lsr
