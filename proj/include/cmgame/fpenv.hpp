#ifndef CMGAME_FPENV_HPP
#define CMGAME_FPENV_HPP

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace cmgame {

/// Flushes subnormal results and inputs to zero on the calling thread for the
/// guard's lifetime. Long runs whose decayed coordinates would otherwise sit in
/// the subnormal range get an order of magnitude faster. No-op off x86.
class ScopedFlushDenormals {
 public:
  ScopedFlushDenormals() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | kFlushToZero | kDenormalsAreZero);
#endif
  }
  ~ScopedFlushDenormals() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

 private:
#if defined(__SSE2__)
  static constexpr unsigned kFlushToZero = 0x8000;
  static constexpr unsigned kDenormalsAreZero = 0x0040;
  unsigned saved_ = 0;
#endif
};

}  // namespace cmgame

#endif  // CMGAME_FPENV_HPP
