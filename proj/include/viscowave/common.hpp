#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace viscowave {

inline constexpr const char* kToolVersion = "0.1.0";

using Complex = std::complex<double>;

/// Numerical failure in an integration, inversion or extrapolation routine.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A limit extraction could not classify its sequence as convergent or divergent.
class IndeterminateLimit : public NumericalError {
public:
  explicit IndeterminateLimit(const std::string& what) : NumericalError(what) {}
};

/// An output failed one of its declared invariants.
class InvariantViolation : public std::runtime_error {
public:
  explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Non-negative real extended with +infinity, for quantities like G(0) and C'(0).
class ExtendedReal {
public:
  static ExtendedReal finite(double v) {
    if (!(v >= 0.0))
      throw std::invalid_argument("ExtendedReal: finite value must be >= 0");
    return ExtendedReal(v, false);
  }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return inf_; }
  /// Finite value; throws if infinite.
  double value() const {
    if (inf_) throw std::logic_error("ExtendedReal: value() on +infinity");
    return v_;
  }
  /// Finite value or +inf as a double (for printing and comparisons).
  double as_double() const { return inf_ ? std::numeric_limits<double>::infinity() : v_; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.v_ == b.v_;
  }

private:
  ExtendedReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

inline std::string to_string(const ExtendedReal& x) {
  return x.is_infinite() ? "inf" : std::to_string(x.as_double());
}

}  // namespace viscowave
