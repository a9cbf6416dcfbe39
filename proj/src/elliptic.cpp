#include "berryline/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "berryline/errors.hpp"
#include "berryline/models.hpp"

namespace berryline {
namespace {

constexpr double tolerance = 1e-17;

}  // namespace

double carlson_rc(double x, double y) {
  if (!(x >= 0.0) || !(y > 0.0)) throw DomainError("carlson_rc requires x >= 0, y > 0");
  const double a0 = (x + 2.0 * y) / 3.0;
  const double y0 = y;
  const double q = std::pow(3.0 * tolerance, -1.0 / 8.0) * std::abs(a0 - x);
  double a = a0;
  double f = 1.0;
  while (f * q >= std::abs(a)) {
    const double lambda = 2.0 * std::sqrt(x) * std::sqrt(y) + y;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    a = 0.25 * (a + lambda);
    f *= 0.25;
  }
  const double s = (y0 - a0) * f / a;
  const double s2 = s * s;
  return (1.0 + s2 * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * (9.0 / 22.0 + s * (159.0 / 208.0 + s * (9.0 / 8.0))))))) /
         std::sqrt(a);
}

double carlson_rf(double x, double y, double z) {
  if (std::min({x, y, z}) < 0.0 || (x == 0.0 && y == 0.0) || (x == 0.0 && z == 0.0) || (y == 0.0 && z == 0.0))
    throw DomainError("carlson_rf requires non-negative arguments with at most one zero");
  const double a0 = (x + y + z) / 3.0;
  const double q = std::pow(3.0 * tolerance, -1.0 / 6.0) * std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double a = a0, f = 1.0;
  const double x0 = x, y0 = y;
  while (f * q >= std::abs(a)) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lambda = sx * sy + sy * sz + sz * sx;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
    a = 0.25 * (a + lambda);
    f *= 0.25;
  }
  const double xx = (a0 - x0) * f / a;
  const double yy = (a0 - y0) * f / a;
  const double zz = -xx - yy;
  const double e2 = xx * yy - zz * zz;
  const double e3 = xx * yy * zz;
  return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / std::sqrt(a);
}

double carlson_rj(double x, double y, double z, double p) {
  if (std::min({x, y, z}) < 0.0 || !(p > 0.0) || (x == 0.0 && y == 0.0) || (x == 0.0 && z == 0.0) ||
      (y == 0.0 && z == 0.0))
    throw DomainError("carlson_rj requires x, y, z >= 0 (at most one zero) and p > 0");
  const double a0 = (x + y + z + 2.0 * p) / 5.0;
  const double delta = (p - x) * (p - y) * (p - z);
  const double q = std::pow(0.25 * tolerance, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z), std::abs(a0 - p)});
  const double x0 = x, y0 = y, z0 = z;
  double a = a0, f = 1.0, f3 = 1.0, sum = 0.0;
  while (f * q >= std::abs(a)) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z), sp = std::sqrt(p);
    const double lambda = sx * sy + sy * sz + sz * sx;
    const double d = (sp + sx) * (sp + sy) * (sp + sz);
    const double e = f3 * delta / (d * d);
    sum += f / d * carlson_rc(1.0, 1.0 + e);
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
    p = 0.25 * (p + lambda);
    a = 0.25 * (a + lambda);
    f *= 0.25;
    f3 *= 1.0 / 64.0;
  }
  const double xx = (a0 - x0) * f / a;
  const double yy = (a0 - y0) * f / a;
  const double zz = (a0 - z0) * f / a;
  const double pp = -0.5 * (xx + yy + zz);
  const double e2 = xx * yy + xx * zz + yy * zz - 3.0 * pp * pp;
  const double e3 = xx * yy * zz + 2.0 * e2 * pp + 4.0 * pp * pp * pp;
  const double e4 = (2.0 * xx * yy * zz + e2 * pp + 3.0 * pp * pp * pp) * pp;
  const double e5 = xx * yy * zz * pp * pp;
  const double series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 -
                        9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  return f / (a * std::sqrt(a)) * series + 6.0 * sum;
}

double ellip_k(double y) {
  if (!std::isfinite(y) || y >= 1.0) throw DomainError("ellip_k requires y < 1");
  return carlson_rf(0.0, 1.0 - y, 1.0);
}

double ellip_pi(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y) || x >= 1.0 || y >= 1.0)
    throw DomainError("ellip_pi requires x < 1 and y < 1");
  if (x == 0.0) return ellip_k(y);
  return carlson_rf(0.0, 1.0 - y, 1.0) + x / 3.0 * carlson_rj(0.0, 1.0 - y, 1.0, 1.0 - x);
}

EllipticArgs elliptic_args(double q, double eta) {
  EllipticArgs a;
  a.x = 4.0 * q / ((q + 1.0) * (q + 1.0));
  a.y = 4.0 * q / ((q + 1.0) * (q + 1.0) - eta * eta);
  return a;
}

cplx closed_form_gamma(double q, double eta, Band band) {
  if (!std::isfinite(q) || !std::isfinite(eta) || !(q > 0.0) || eta < 0.0)
    throw InvalidArgument("closed_form_gamma requires q > 0 and eta >= 0");
  if (q == 1.0) throw UndefinedAtTransition("closed form undefined at q = 1");
  if (eta >= std::abs(q - 1.0)) throw OutsideValidityDomain("closed form only valid for eta < |q - 1|");
  const EllipticArgs args = elliptic_args(q, eta);
  const double re = q > 1.0 ? pi : 0.0;
  const double bracket = ellip_k(args.y) + (q - 1.0) / (q + 1.0) * ellip_pi(args.x, args.y);
  const double im = 0.5 * eta * std::sqrt(args.y / q) * bracket;
  return {re, band == Band::plus ? im : -im};
}

}  // namespace berryline
