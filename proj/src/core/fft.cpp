#include "core/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace swnav {
namespace {

struct PlanCache {
  std::mutex mutex;
  // FFTW plan creation is not thread safe; execution with fftw_execute_dft
  // on distinct buffers is.
  std::map<std::size_t, fftw_plan> plans;

  fftw_plan get(std::size_t n, fftw_complex* in, fftw_complex* out) {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find(n);
    if (it == plans.end()) {
      // FFTW_UNALIGNED: plans are reused on caller-owned buffers whose
      // alignment we do not control.
      fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out,
                                     FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
      it = plans.emplace(n, p).first;
    }
    return it->second;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

std::vector<std::complex<double>> fft_forward(
    std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n);
  if (n == 0) return out;
  auto* in_p = reinterpret_cast<fftw_complex*>(in.data());
  auto* out_p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = cache().get(n, in_p, out_p);
  // New-array execute: the cached plan was created for some other buffer
  // pair of the same size/alignment class.
  fftw_execute_dft(plan, in_p, out_p);
  return out;
}

}  // namespace swnav
