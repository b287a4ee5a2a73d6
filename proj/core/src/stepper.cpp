#include "advmg/stepper.hpp"

namespace advmg {

std::size_t Stepper::size() const noexcept {
  return std::visit([](const auto& op) { return op.size(); }, impl_);
}

std::size_t Stepper::nnz() const noexcept {
  if (const auto* op = explicit_operator()) return op->nnz();
  const auto* r = rational();
  return r->numerator().nnz() + r->denominator().nnz();
}

void Stepper::apply_into(std::span<const double> u, std::span<double> out) const {
  std::visit([&](const auto& op) { op.apply_into(u, out); }, impl_);
}

std::vector<double> Stepper::apply(std::span<const double> u) const {
  std::vector<double> out(size());
  apply_into(u, out);
  return out;
}

SpectralDiagonal Stepper::eigenvalues() const {
  if (const auto* op = explicit_operator()) return advmg::eigenvalues(*op);
  return SpectralDiagonal{rational()->symbol()};
}

}  // namespace advmg
