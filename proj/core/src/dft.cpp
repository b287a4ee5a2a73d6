#include "advmg/dft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include "advmg/errors.hpp"

namespace advmg::dft {
namespace {

// FFTW planning is not thread-safe, executing a finished plan on new arrays is.
// Plans are created once per (length, direction) under a lock and then shared.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<const Complex> in, std::span<Complex> out, int sign) {
  if (in.size() != out.size()) throw DimensionMismatch("dft: input and output lengths differ");
  const std::size_t n = in.size();
  if (n == 0) return;
  fftw_plan plan = cache().get(n, sign);
  if (in.data() == out.data()) {
    std::vector<Complex> copy(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  } else {
    // Out-of-place complex transforms leave the input untouched.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }
}

}  // namespace

void forward_into(std::span<const Complex> in, std::span<Complex> out) {
  execute(in, out, FFTW_FORWARD);
}

void inverse_into(std::span<const Complex> in, std::span<Complex> out) {
  execute(in, out, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
}

std::vector<Complex> forward(std::span<const Complex> x) {
  std::vector<Complex> out(x.size());
  forward_into(x, out);
  return out;
}

std::vector<Complex> forward(std::span<const double> x) {
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  forward_into(in, out);
  return out;
}

std::vector<Complex> inverse(std::span<const Complex> x) {
  std::vector<Complex> out(x.size());
  inverse_into(x, out);
  return out;
}

RealSignal inverse_real(std::span<const Complex> x) {
  auto full = inverse(x);
  RealSignal signal;
  signal.values.resize(full.size());
  for (std::size_t j = 0; j < full.size(); ++j) {
    signal.values[j] = full[j].real();
    signal.imag_residue = std::max(signal.imag_residue, std::abs(full[j].imag()));
  }
  return signal;
}

std::vector<double> truncate_imaginary(const RealSignal& signal, double tolerance) {
  if (!(signal.imag_residue <= tolerance)) {
    std::ostringstream msg;
    msg << "imaginary residue " << signal.imag_residue << " exceeds " << tolerance;
    throw ImaginaryResidue(msg.str(), signal.imag_residue);
  }
  return signal.values;
}

}  // namespace advmg::dft
