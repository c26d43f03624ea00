#pragma once

namespace formsense {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Fisher-Snedecor CDF P(F <= f) with (dof_num, dof_den) degrees of freedom.
double f_cdf(double f, double dof_num, double dof_den);
/// Upper tail P(F > f).
double f_survival(double f, double dof_num, double dof_den);

/// Upper critical value: the f with P(F > f) = p_level.
double f_critical(double p_level, int dof_num, int dof_den);

}  // namespace formsense
