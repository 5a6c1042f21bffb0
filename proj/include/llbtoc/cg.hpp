#pragma once

#include <cmath>
#include <string>

#include "llbtoc/error.hpp"

namespace llbtoc {

struct CgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for an SPD operator.
///
/// V is any vector type with copy, +=, -=, *= scalar and a free axpy(alpha, x, y).
/// Starts from x = 0 and stops once ‖r‖ ≤ rtol·‖b‖ (norms induced by `dot`).
/// Throws non_convergence past `max_iter`.
template <class V, class Apply, class Dot, class Precond>
CgStats conjugate_gradient(const Apply& apply, const V& b, V& x, const Dot& dot, const Precond& precondition,
                           double rtol, int max_iter) {
  x = b;
  x *= 0.0;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) return {};

  V r = b;
  V z = precondition(r);
  V p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    const V ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      fail(ErrorKind::non_convergence, "conjugate gradients: operator not positive definite (p·Ap = " +
                                           std::to_string(pap) + ")");
    }
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double r_norm = std::sqrt(dot(r, r));
    if (r_norm <= rtol * b_norm) return {it, r_norm / b_norm};
    z = precondition(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    p *= beta;
    p += z;
  }
  fail(ErrorKind::non_convergence, "conjugate gradients did not reach relative residual " + std::to_string(rtol) +
                                       " within " + std::to_string(max_iter) + " iterations");
}

template <class V, class Apply, class Dot>
CgStats conjugate_gradient(const Apply& apply, const V& b, V& x, const Dot& dot, double rtol, int max_iter) {
  return conjugate_gradient(apply, b, x, dot, [](const V& r) { return r; }, rtol, max_iter);
}

}  // namespace llbtoc
