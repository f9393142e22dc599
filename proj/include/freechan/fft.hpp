#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

#include "freechan/grid.hpp"

namespace freechan {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread safe; execution through the new-array interface
// is. Plans are created once per lattice shape under a lock and reused from
// any thread. FFTW_UNALIGNED lets plans run on arbitrary std::vector storage.
class FftPlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  Plans get(const Grid& g) {
    const Key key{g.dims, g.points[0], g.points[1], g.points[2]};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::array<int, 3> n{};
    for (int d = 0; d < g.dims; ++d) n[d] = static_cast<int>(g.points[d]);
    const std::size_t total = g.size();
    auto* scratch = fftw_alloc_complex(total);
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_dft(g.dims, n.data(), scratch, scratch, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(g.dims, n.data(), scratch, scratch, FFTW_BACKWARD, flags);
    fftw_free(scratch);
    plans_.emplace(key, p);
    return p;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t>;
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<Key, Plans> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalized in-place DFT with kernel exp(-2 pi i m j / N).
inline void fft_forward_raw(const Grid& g, std::span<cplx> data) {
  const auto plans = detail::FftPlanCache::instance().get(g);
  fftw_execute_dft(plans.forward, detail::as_fftw(data.data()), detail::as_fftw(data.data()));
}

/// Unnormalized in-place inverse DFT with kernel exp(+2 pi i m j / N).
inline void fft_backward_raw(const Grid& g, std::span<cplx> data) {
  const auto plans = detail::FftPlanCache::instance().get(g);
  fftw_execute_dft(plans.backward, detail::as_fftw(data.data()), detail::as_fftw(data.data()));
}

}  // namespace freechan
