#pragma once

#include <stdexcept>
#include <string>

namespace pmflow {

// Equation of state fails: the Bernoulli density argument dropped to or
// below zero. Carries the offending argument so callers can react.
class CavitationError : public std::runtime_error {
 public:
  CavitationError(double argument, double speed_sq, double phi_val)
      : std::runtime_error("cavitation: density argument " +
                           std::to_string(argument) + " <= 0 at |Dphi|^2=" +
                           std::to_string(speed_sq) + ", phi=" +
                           std::to_string(phi_val)),
        argument(argument),
        speed_sq(speed_sq),
        phi_val(phi_val) {}
  double argument;
  double speed_sq;
  double phi_val;
};

// A root-find or linear solve failed; message carries the bracket/iteration
// trace that was available at the point of failure.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

// Wedge angle at or beyond detachment: no attached oblique shock exists.
class DetachedError : public std::runtime_error {
 public:
  DetachedError(double theta_w, double theta_detach)
      : std::runtime_error("detached: theta_w=" + std::to_string(theta_w) +
                           " >= theta_detach=" + std::to_string(theta_detach)),
        theta_w(theta_w),
        theta_detach(theta_detach) {}
  double theta_w;
  double theta_detach;
};

// The transversality bound d_eta(phi_inf - phi) < 0 failed at a shock knot.
// The run aborts and reports; continuing would corrupt the free boundary.
class MonotonicityBreakdown : public std::runtime_error {
 public:
  MonotonicityBreakdown(double xi, double value)
      : std::runtime_error("monotonicity breakdown: d_eta(phi_inf-phi)=" +
                           std::to_string(value) + " >= 0 at xi=" +
                           std::to_string(xi)),
        xi(xi),
        value(value) {}
  double xi;
  double value;
};

// A structural invariant that valid inputs cannot violate did; signals a bug
// (or a parameter outside the theory), never bad user input.
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::logic_error(what) {}
};

}  // namespace pmflow
