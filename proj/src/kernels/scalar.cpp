#include <cmath>

#include "berryline/kernels.hpp"
#include "kernels_inline.hpp"

namespace berryline::kernels::scalar {

void radicand(const double* cos_k, std::size_t n, const BipartiteScalars& s, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::radicand_one(cos_k[i], s);
}

void connection_terms(const double* cos_k, const double* sin_k, std::size_t n, const BipartiteScalars& s,
                      const ConnectionTerms& out) {
  for (std::size_t i = 0; i < n; ++i) detail::connection_one(cos_k[i], sin_k[i], s, out, i);
}

}  // namespace berryline::kernels::scalar
