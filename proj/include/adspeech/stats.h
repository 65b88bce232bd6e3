#pragma once

#include "adspeech/matrix.h"

namespace adspeech {

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x): series for
// x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double df);

struct FriedmanResult {
  double chi2 = 0;
  int df = 0;
  double p = 1;
};

// scores: conditions x blocks, higher is better. Average ranks for ties with
// the usual tie correction.
FriedmanResult friedman_test(const Matrix& scores);

}  // namespace adspeech
