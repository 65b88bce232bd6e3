#include "adspeech/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "adspeech/common.h"

namespace adspeech {
namespace {

constexpr int kMaxIter = 1000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double series_p(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double fraction_q(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_args(double a, double x) {
  if (!(a > 0) || !(x >= 0)) throw InputError("incomplete gamma needs a > 0 and x >= 0");
}

}  // namespace

double gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0) return 0.0;
  return x < a + 1.0 ? series_p(a, x) : 1.0 - fraction_q(a, x);
}

double gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0) return 1.0;
  return x < a + 1.0 ? 1.0 - series_p(a, x) : fraction_q(a, x);
}

double chi2_sf(double x, double df) { return gamma_q(df / 2.0, std::max(x, 0.0) / 2.0); }

FriedmanResult friedman_test(const Matrix& scores) {
  const std::size_t k = scores.rows();
  const std::size_t n = scores.cols();
  if (k < 2 || n < 2) throw InputError("friedman test needs >= 2 conditions and >= 2 blocks");

  std::vector<double> rank_sum(k, 0.0);
  double tie_term = 0;
  std::vector<std::size_t> order(k);
  for (std::size_t b = 0; b < n; ++b) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return scores(i, b) < scores(j, b); });
    for (std::size_t s = 0; s < k;) {
      std::size_t e = s + 1;
      while (e < k && scores(order[e], b) == scores(order[s], b)) ++e;
      const double avg = 0.5 * static_cast<double>(s + 1 + e);  // ranks s+1..e
      for (std::size_t t = s; t < e; ++t) rank_sum[order[t]] += avg;
      const double t = static_cast<double>(e - s);
      tie_term += t * t * t - t;
      s = e;
    }
  }

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  double ss = 0;
  for (double r : rank_sum) ss += r * r;
  double chi2 = 12.0 / (nd * kd * (kd + 1.0)) * ss - 3.0 * nd * (kd + 1.0);
  const double correction = 1.0 - tie_term / (nd * kd * (kd * kd - 1.0));
  if (correction > 0) chi2 /= correction;
  chi2 = std::max(chi2, 0.0);

  FriedmanResult r;
  r.chi2 = chi2;
  r.df = static_cast<int>(k) - 1;
  r.p = chi2_sf(chi2, r.df);
  return r;
}

}  // namespace adspeech
