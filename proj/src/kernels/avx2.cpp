#include "berryline/kernels.hpp"
#include "kernels_inline.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace berryline::kernels::avx2 {

#if defined(__AVX2__)

bool compiled() { return true; }

void radicand(const double* cos_k, std::size_t n, const BipartiteScalars& s, double* out) {
  const __m256d hop_sum = _mm256_set1_pd(s.hop_sum);
  const __m256d hop_cross = _mm256_set1_pd(s.hop_cross);
  const __m256d gamma_sq = _mm256_set1_pd(s.gamma_sq);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_loadu_pd(cos_k + i);
    const __m256d vk2 = _mm256_add_pd(hop_sum, _mm256_mul_pd(hop_cross, c));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(vk2, gamma_sq));
  }
  for (; i < n; ++i) out[i] = detail::radicand_one(cos_k[i], s);
}

void connection_terms(const double* cos_k, const double* sin_k, std::size_t n, const BipartiteScalars& s,
                      const ConnectionTerms& out) {
  const __m256d hop_sum = _mm256_set1_pd(s.hop_sum);
  const __m256d hop_cross = _mm256_set1_pd(s.hop_cross);
  const __m256d gamma_sq = _mm256_set1_pd(s.gamma_sq);
  const __m256d gamma = _mm256_set1_pd(s.gamma);
  const __m256d gamma_vvp = _mm256_set1_pd(s.gamma_vvp);
  const __m256d v = _mm256_set1_pd(s.v);
  const __m256d vp = _mm256_set1_pd(s.v_prime);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d sign = _mm256_set1_pd(-0.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_loadu_pd(cos_k + i);
    const __m256d sn = _mm256_loadu_pd(sin_k + i);
    const __m256d vk2 = _mm256_add_pd(hop_sum, _mm256_mul_pd(hop_cross, c));
    const __m256d rad = _mm256_sub_pd(vk2, gamma_sq);
    const __m256d abs_v = _mm256_sqrt_pd(vk2);
    const __m256d root = _mm256_sqrt_pd(_mm256_andnot_pd(sign, rad));
    const __m256d g_over = _mm256_div_pd(gamma, root);
    const __m256d v_over = _mm256_div_pd(abs_v, root);
    const __m256d tp = _mm256_div_pd(_mm256_mul_pd(vp, _mm256_add_pd(vp, _mm256_mul_pd(v, c))), vk2);
    const __m256d gapped = _mm256_cmp_pd(rad, zero, _CMP_GT_OQ);

    _mm256_storeu_pd(out.theta_prime.data() + i, tp);
    _mm256_storeu_pd(out.cos_chi_re.data() + i, _mm256_blendv_pd(g_over, zero, gapped));
    _mm256_storeu_pd(out.cos_chi_im.data() + i, _mm256_blendv_pd(zero, g_over, gapped));
    _mm256_storeu_pd(out.sin_chi_re.data() + i, _mm256_blendv_pd(zero, v_over, gapped));
    _mm256_storeu_pd(out.sin_chi_im.data() + i, _mm256_blendv_pd(_mm256_xor_pd(sign, v_over), zero, gapped));
    const __m256d chi = _mm256_div_pd(_mm256_mul_pd(gamma_vvp, sn), _mm256_mul_pd(rad, abs_v));
    _mm256_storeu_pd(out.chi_prime_im.data() + i, _mm256_xor_pd(sign, chi));
  }
  for (; i < n; ++i) detail::connection_one(cos_k[i], sin_k[i], s, out, i);
}

#else

bool compiled() { return false; }

void radicand(const double* cos_k, std::size_t n, const BipartiteScalars& s, double* out) {
  scalar::radicand(cos_k, n, s, out);
}

void connection_terms(const double* cos_k, const double* sin_k, std::size_t n, const BipartiteScalars& s,
                      const ConnectionTerms& out) {
  scalar::connection_terms(cos_k, sin_k, n, s, out);
}

#endif

}  // namespace berryline::kernels::avx2
