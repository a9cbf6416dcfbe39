#include <atomic>
#include <cstdlib>
#include <cstring>

#include "berryline/errors.hpp"
#include "berryline/kernels.hpp"

namespace berryline::kernels {
namespace {

// -1: automatic, otherwise a Backend value.
std::atomic<int> forced{-1};

Backend detect() {
  if (const char* env = std::getenv("BERRYLINE_SIMD"); env && std::strcmp(env, "scalar") == 0)
    return Backend::scalar;
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

void check_sizes(std::size_t n, std::size_t m) {
  if (m < n) throw InvalidArgument("kernel output span shorter than input");
}

}  // namespace

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = avx2::compiled() && __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Backend active_backend() {
  const int f = forced.load(std::memory_order_relaxed);
  if (f >= 0) return static_cast<Backend>(f);
  static const Backend automatic = detect();
  return automatic;
}

void force_backend(std::optional<Backend> b) {
  if (b && *b == Backend::avx2 && !avx2_supported()) throw InvalidArgument("AVX2 backend not available");
  forced.store(b ? static_cast<int>(*b) : -1, std::memory_order_relaxed);
}

BipartiteScalars BipartiteScalars::make(double v, double v_prime, double gamma) {
  BipartiteScalars s;
  s.v = v;
  s.v_prime = v_prime;
  s.gamma = gamma;
  s.hop_sum = v * v + v_prime * v_prime;
  s.hop_cross = 2.0 * v * v_prime;
  s.gamma_sq = gamma * gamma;
  s.gamma_vvp = gamma * v * v_prime;
  return s;
}

void radicand(std::span<const double> cos_k, const BipartiteScalars& s, std::span<double> out) {
  check_sizes(cos_k.size(), out.size());
  if (active_backend() == Backend::avx2)
    avx2::radicand(cos_k.data(), cos_k.size(), s, out.data());
  else
    scalar::radicand(cos_k.data(), cos_k.size(), s, out.data());
}

void connection_terms(std::span<const double> cos_k, std::span<const double> sin_k, const BipartiteScalars& s,
                      const ConnectionTerms& out) {
  const std::size_t n = cos_k.size();
  check_sizes(n, sin_k.size());
  for (auto span : {out.theta_prime, out.cos_chi_re, out.cos_chi_im, out.sin_chi_re, out.sin_chi_im, out.chi_prime_im})
    check_sizes(n, span.size());
  if (active_backend() == Backend::avx2)
    avx2::connection_terms(cos_k.data(), sin_k.data(), n, s, out);
  else
    scalar::connection_terms(cos_k.data(), sin_k.data(), n, s, out);
}

}  // namespace berryline::kernels
