#include "twistlight/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <tuple>

namespace twistlight::fft {
namespace {

template <typename Scalar>
struct Fftw;

template <>
struct Fftw<double> {
  using complex_t = fftw_complex;
  using plan_t = fftw_plan;
  static void* malloc(size_t n) { return fftw_malloc(n); }
  static void free(void* p) { fftw_free(p); }
  static plan_t plan_2d(int r, int c, complex_t* buf, int sign) {
    return fftw_plan_dft_2d(r, c, buf, buf, sign, FFTW_ESTIMATE);
  }
  static plan_t plan_rows(int r, int c, complex_t* buf, int sign) {
    return fftw_plan_many_dft(1, &c, r, buf, nullptr, 1, c, buf, nullptr, 1, c, sign,
                              FFTW_ESTIMATE);
  }
  static void execute(plan_t p, complex_t* buf) { fftw_execute_dft(p, buf, buf); }
  static void destroy(plan_t p) { fftw_destroy_plan(p); }
};

template <>
struct Fftw<float> {
  using complex_t = fftwf_complex;
  using plan_t = fftwf_plan;
  static void* malloc(size_t n) { return fftwf_malloc(n); }
  static void free(void* p) { fftwf_free(p); }
  static plan_t plan_2d(int r, int c, complex_t* buf, int sign) {
    return fftwf_plan_dft_2d(r, c, buf, buf, sign, FFTW_ESTIMATE);
  }
  static plan_t plan_rows(int r, int c, complex_t* buf, int sign) {
    return fftwf_plan_many_dft(1, &c, r, buf, nullptr, 1, c, buf, nullptr, 1, c, sign,
                               FFTW_ESTIMATE);
  }
  static void execute(plan_t p, complex_t* buf) { fftwf_execute_dft(p, buf, buf); }
  static void destroy(plan_t p) { fftwf_destroy_plan(p); }
};

enum class Kind { full, rows };

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is, provided the arrays share the planning buffer's alignment.
// Every transform therefore runs on a fresh fftw_malloc buffer.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename Scalar>
class PlanCache {
 public:
  using F = Fftw<Scalar>;

  ~PlanCache() {
    for (auto& [key, plan] : plans_) F::destroy(plan);
  }

  typename F::plan_t get(Kind kind, int rows, int cols, int sign) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    const auto key = std::make_tuple(kind, rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* buf = static_cast<typename F::complex_t*>(
        F::malloc(sizeof(typename F::complex_t) * size_t(rows) * size_t(cols)));
    if (!buf) throw std::bad_alloc();
    auto plan = kind == Kind::full ? F::plan_2d(rows, cols, buf, sign)
                                   : F::plan_rows(rows, cols, buf, sign);
    F::free(buf);
    if (!plan) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::map<std::tuple<Kind, int, int, int>, typename F::plan_t> plans_;
};

template <typename Scalar>
PlanCache<Scalar>& cache() {
  static PlanCache<Scalar> c;
  return c;
}

template <typename Scalar>
void run(ComplexArray<Scalar>& a, Kind kind, int sign) {
  using F = Fftw<Scalar>;
  if (a.size() == 0) return;
  const int rows = int(a.rows()), cols = int(a.cols());
  auto plan = cache<Scalar>().get(kind, rows, cols, sign);
  const size_t bytes = sizeof(typename F::complex_t) * size_t(a.size());
  std::unique_ptr<void, void (*)(void*)> buf(F::malloc(bytes), F::free);
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf.get(), a.data(), bytes);
  F::execute(plan, static_cast<typename F::complex_t*>(buf.get()));
  std::memcpy(a.data(), buf.get(), bytes);
}

}  // namespace

void forward(ComplexArray<double>& a) { run(a, Kind::full, FFTW_FORWARD); }
void forward(ComplexArray<float>& a) { run(a, Kind::full, FFTW_FORWARD); }

void inverse(ComplexArray<double>& a) {
  run(a, Kind::full, FFTW_BACKWARD);
  a /= double(a.size());
}

void inverse(ComplexArray<float>& a) {
  run(a, Kind::full, FFTW_BACKWARD);
  a /= float(a.size());
}

void forward_rows(ComplexArray<double>& a) { run(a, Kind::rows, FFTW_FORWARD); }
void forward_rows(ComplexArray<float>& a) { run(a, Kind::rows, FFTW_FORWARD); }

}  // namespace twistlight::fft
