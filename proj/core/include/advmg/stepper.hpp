#pragma once

#include <span>
#include <variant>
#include <vector>

#include "advmg/circulant.hpp"

namespace advmg {

/// A one-step time integrator u^{n+1} = Phi u^n that is either an explicit
/// circulant or an implicit rational stepper. Cheap to copy; safe to share
/// read-only between threads.
class Stepper {
 public:
  Stepper(CirculantOperator op) : impl_(std::move(op)) {}  // NOLINT(implicit)
  Stepper(RationalStepper op) : impl_(std::move(op)) {}    // NOLINT(implicit)

  std::size_t size() const noexcept;
  bool is_rational() const noexcept { return std::holds_alternative<RationalStepper>(impl_); }

  /// Explicit operator, or nullptr for rational steppers.
  const CirculantOperator* explicit_operator() const noexcept {
    return std::get_if<CirculantOperator>(&impl_);
  }
  const RationalStepper* rational() const noexcept { return std::get_if<RationalStepper>(&impl_); }

  /// Nonzeros per row used for cost accounting. Rational steppers count the
  /// numerator and denominator nonzeros together.
  std::size_t nnz() const noexcept;

  void apply_into(std::span<const double> u, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> u) const;

  SpectralDiagonal eigenvalues() const;

 private:
  std::variant<CirculantOperator, RationalStepper> impl_;
};

}  // namespace advmg
