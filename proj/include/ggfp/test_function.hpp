#pragma once

#include <functional>
#include <string>

namespace ggfp {

/// A bounded smooth function psi with its analytic derivative.
///
/// The derivative is checked against a fourth-order central difference at 100
/// deterministic points of the validation interval when the object is built;
/// a mismatch throws ParameterError.
class TestFunction {
 public:
  using Fn = std::function<double(double)>;

  TestFunction(Fn value, Fn derivative, std::string label, double bound, double check_lo, double check_hi);

  double operator()(double x) const { return value_(x); }
  double derivative(double x) const { return derivative_(x); }
  const std::string& label() const { return label_; }
  /// sup |psi| certificate.
  double bound() const { return bound_; }

 private:
  Fn value_;
  Fn derivative_;
  std::string label_;
  double bound_;
};

}  // namespace ggfp
