#pragma once
// floor(tau / unit) computed exactly on the rationals represented by two doubles.

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

inline long long exact_floor_ratio(double tau, double unit) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const cpp_rational q = cpp_rational(tau) / cpp_rational(unit);
  const cpp_int num = boost::multiprecision::numerator(q);
  const cpp_int den = boost::multiprecision::denominator(q);
  cpp_int f = num / den;  // truncates toward zero; operands are positive
  return f.convert_to<long long>();
}

}  // namespace oracle
