#pragma once

#include <functional>
#include <string>

#include "doctest.h"
#include "lsr/errors.hpp"
#include "lsr/norms.hpp"

namespace testing {

inline lsr::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const lsr::Error& e) {
    return e.code();
  }
  FAIL("expected an lsr::Error");
  return lsr::ErrorCode::InvalidArgument;
}

inline std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const lsr::Error& e) {
    return e.what();
  }
  FAIL("expected an lsr::Error");
  return {};
}

inline lsr::Matrix mat2(double a, double b, double c, double d) {
  lsr::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline lsr::Vector vec(std::initializer_list<double> v) {
  lsr::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace testing
