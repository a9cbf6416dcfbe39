#pragma once

#include "berryline/biortho.hpp"
#include "berryline/matrix2.hpp"

namespace berryline {

// Carlson symmetric integrals (real arguments).
double carlson_rc(double x, double y);
double carlson_rf(double x, double y, double z);
double carlson_rj(double x, double y, double z, double p);

// Complete integrals in the parameter convention: y multiplies sin^2.
double ellip_k(double y);
double ellip_pi(double x, double y);

struct EllipticArgs {
  double x = 0.0;  // 4q/(q+1)^2
  double y = 0.0;  // 4q/((q+1)^2 - eta^2)
};

EllipticArgs elliptic_args(double q, double eta);

// gamma^G_band = pi Theta(q-1) +- i (eta/2) sqrt(y/q) [K(y) + (q-1)/(q+1) Pi(x,y)],
// valid for q > 0, q != 1, 0 <= eta < |q-1|.
cplx closed_form_gamma(double q, double eta, Band band);

}  // namespace berryline
