#include "formsense/fdist.hpp"

#include <cmath>
#include <limits>

#include "formsense/error.hpp"

namespace formsense {

namespace {

// Continued fraction for I_x(a, b), modified Lentz; converges fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxTerms = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double f, double dof_num, double dof_den) {
  if (!(dof_num > 0.0) || !(dof_den > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  const double x = dof_num * f / (dof_num * f + dof_den);
  return incomplete_beta(0.5 * dof_num, 0.5 * dof_den, x);
}

double f_survival(double f, double dof_num, double dof_den) {
  if (!(dof_num > 0.0) || !(dof_den > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // 1 - I_x(a, b) = I_{1-x}(b, a), evaluated directly to keep small tails accurate.
  const double y = dof_den / (dof_num * f + dof_den);
  return incomplete_beta(0.5 * dof_den, 0.5 * dof_num, y);
}

double f_critical(double p_level, int dof_num, int dof_den) {
  if (!(p_level > 0.0 && p_level < 1.0)) throw InvalidInput("p_level must lie in (0, 1)");
  if (dof_num < 1 || dof_den < 1) throw InvalidInput("degrees of freedom must be positive");
  const double a = 0.5 * dof_den, b = 0.5 * dof_num;
  // P(F > f) = I_y(a, b) with y = dof_den / (dof_num f + dof_den), increasing in y.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (incomplete_beta(a, b, mid) < p_level)
      lo = mid;
    else
      hi = mid;
  }
  const double y = 0.5 * (lo + hi);
  return dof_den * (1.0 - y) / (dof_num * y);
}

}  // namespace formsense
