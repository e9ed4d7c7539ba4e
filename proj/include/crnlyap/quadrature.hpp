#pragma once

#include <functional>
#include <stdexcept>

namespace crnlyap {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Globally adaptive 7-point Gauss / 15-point Kronrod quadrature: the interval
/// with the largest error estimate is bisected until the summed estimate drops
/// below max(abs_tol, rel_tol |I|). Reversed limits give the negated integral.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                    double rel_tol = 0.0, int max_intervals = 4000);

/// Same, throwing QuadratureError when the tolerance is not reached.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          double rel_tol = 0.0);

}  // namespace crnlyap
