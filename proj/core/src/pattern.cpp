#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "advmg/errors.hpp"
#include "advmg/optimizer.hpp"

namespace advmg {
namespace {

int centered(std::ptrdiff_t o, std::size_t nx) {
  const auto n = static_cast<std::ptrdiff_t>(nx);
  o %= n;
  if (o < 0) o += n;
  if (2 * o > n) o -= n;
  return static_cast<int>(o);
}

int diagonal_of_position(std::size_t d, std::size_t nx) {
  return centered(-static_cast<std::ptrdiff_t>(d), nx);
}

}  // namespace

SparsityPattern::SparsityPattern(std::vector<int> offsets, std::size_t nx) : nx_(nx) {
  if (offsets.empty()) throw EmptyPattern("sparsity pattern has no offsets");
  if (nx < 4) throw InvalidPattern("sparsity pattern needs nx >= 4");
  std::set<int> reduced;
  for (int o : offsets) {
    if (!reduced.insert(centered(o, nx)).second) {
      std::ostringstream msg;
      msg << "offset " << o << " repeats modulo nx = " << nx;
      throw InvalidPattern(msg.str());
    }
  }
  if (reduced.size() > nx / 4) {
    std::ostringstream msg;
    msg << "pattern of size " << reduced.size() << " exceeds nx / 4 = " << nx / 4;
    throw InvalidPattern(msg.str());
  }
  offsets_.assign(reduced.begin(), reduced.end());
}

SparsityPattern SparsityPattern::contiguous(int first, std::size_t width, std::size_t nx) {
  std::vector<int> offsets(width);
  for (std::size_t i = 0; i < width; ++i) offsets[i] = first + static_cast<int>(i);
  return SparsityPattern(std::move(offsets), nx);
}

std::vector<std::size_t> SparsityPattern::column_positions() const {
  std::vector<std::size_t> out;
  out.reserve(offsets_.size());
  const auto n = static_cast<std::ptrdiff_t>(nx_);
  for (int o : offsets_) out.push_back(static_cast<std::size_t>(((-o % n) + n) % n));
  return out;
}

SparsityPattern select_pattern(std::span<const double> ideal_column, const PatternStrategy& strategy,
                               std::size_t nnz_target) {
  const std::size_t nx = ideal_column.size();
  if (const auto* phi = std::get_if<PhiPattern>(&strategy)) {
    return SparsityPattern(phi->offsets, nx);
  }
  if (const auto* threshold = std::get_if<Threshold>(&strategy)) {
    if (!(threshold->eta > 0.0 && threshold->eta < 1.0))
      throw InvalidArgument("threshold must lie in (0, 1)");
    double peak = 0.0;
    for (double v : ideal_column) peak = std::max(peak, std::abs(v));
    std::vector<int> offsets;
    if (peak > 0.0) {
      for (std::size_t d = 0; d < nx; ++d)
        if (std::abs(ideal_column[d]) >= threshold->eta * peak)
          offsets.push_back(diagonal_of_position(d, nx));
    }
    if (offsets.empty()) throw EmptyPattern("threshold removed every entry of the ideal column");
    return SparsityPattern(std::move(offsets), nx);
  }
  const auto& window = std::get<IdealWindow>(strategy);
  const std::size_t width = nnz_target + window.extra;
  if (width == 0) throw EmptyPattern("window width is zero");
  if (width > nx) throw InvalidPattern("window wider than the grid");
  // Window over column positions d, d + 1, ..., d + width - 1 (circular).
  double best = -1.0;
  std::size_t best_start = 0;
  for (std::size_t d = 0; d < nx; ++d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < width; ++i) sum += std::abs(ideal_column[(d + i) % nx]);
    if (sum > best) {
      best = sum;
      best_start = d;
    }
  }
  std::vector<int> offsets(width);
  for (std::size_t i = 0; i < width; ++i)
    offsets[i] = diagonal_of_position((best_start + i) % nx, nx);
  return SparsityPattern(std::move(offsets), nx);
}

}  // namespace advmg
