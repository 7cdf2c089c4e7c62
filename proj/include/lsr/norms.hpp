#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>

namespace lsr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Vector norm and the matrix norm it induces. One kind is used for every
/// quantity of a certification run.
enum class NormKind { Spectral, One, Infinity };

const char* norm_name(NormKind kind) noexcept;
std::optional<NormKind> parse_norm(std::string_view name) noexcept;

/// 2-, 1- or max-norm. Empty vectors have norm 0.
double vector_norm(const Vector& v, NormKind kind);

/// Induced operator norm; empty matrices (any zero dimension) have norm 0.
double matrix_norm(const Matrix& a, NormKind kind);

/// sigma_max / sigma_min of a square matrix; +inf when singular.
double condition_number(const Matrix& a);

bool all_finite(const Vector& v) noexcept;
bool all_finite(const Matrix& a) noexcept;

}  // namespace lsr
