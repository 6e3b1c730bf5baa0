#pragma once

namespace fbl {

/// Regularized lower incomplete gamma P(n, x) for integer n >= 0, x >= 0.
/// P(0, x) is taken as 1 (the x -> 0+ limit of the shape parameter), which
/// is what the [.]^+ = 0 entries of the USTM kernel matrix need.
double reg_inc_gamma(int n, double x);

/// log P(n, x), accurate deep into the lower tail where P underflows.
double log_reg_inc_gamma(int n, double x);

/// log( k! / (k-l)! ); -inf when l > k.
double log_falling_factorial(int k, int l);

/// log 1F1(a; b; x) for integers 1 <= a <= b and x >= 0 by direct summation
/// of the (all-positive) power series. Intended for moderate x.
double log_hyp1f1_series(int a, int b, double x);

/// log 1F1(a; b; x), integers 1 <= a <= b, any x >= 0: the series at
/// moderate x, the terminating large-x expansion once the term it drops is
/// below double resolution.
double log_hyp1f1(int a, int b, double x);

/// Numerically stable log(exp(a) + exp(b)).
double log_add(double a, double b);

}  // namespace fbl
