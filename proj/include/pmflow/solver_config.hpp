#pragma once

#include <stdexcept>
#include <string>

namespace pmflow {

// Knobs for the free boundary iteration. cutoff_band <= 0 selects the
// geometry-derived default 0.15 * min(c_O, c_N).
struct SolverConfig {
  int n_s = 128;
  int n_t = 64;
  double cutoff_delta = 0.2;   // delta in the cutoff slope (2-delta)/(1+gamma)
  double cutoff_band = 0.0;    // epsilon of the sonic neighborhoods, in x
  double relax_shock = 0.7;
  double relax_field = 0.9;
  double tol_elliptic = 1e-9;
  double tol_fixed_point = 1e-8;
  int max_outer = 80;
  int max_inner = 60;
  int beta_steps = 8;

  void validate() const {
    if (n_s < 16 || n_t < 16) {
      throw std::domain_error("SolverConfig: grid sizes must be >= 16");
    }
    if (!(cutoff_delta > 0.0 && cutoff_delta < 2.0)) {
      throw std::domain_error("SolverConfig: cutoff_delta must be in (0,2)");
    }
    if (!(relax_shock > 0.0 && relax_shock <= 1.0) ||
        !(relax_field > 0.0 && relax_field <= 1.0)) {
      throw std::domain_error("SolverConfig: relaxation factors in (0,1]");
    }
    if (!(tol_elliptic > 0.0) || !(tol_fixed_point > 0.0)) {
      throw std::domain_error("SolverConfig: tolerances must be > 0");
    }
    if (max_outer < 1 || max_inner < 1 || beta_steps < 1) {
      throw std::domain_error("SolverConfig: iteration caps must be >= 1");
    }
  }
};

}  // namespace pmflow
