#pragma once

#include <cstdint>

namespace ctrac {

// Central knobs. Every residual test and integrator reads these; the CLI
// overrides them from flags or from CTRAC_* environment variables.
struct Defaults {
  double tol = 1e-8;           // identity / residual tolerance
  double parallel_tol = 1e-7;  // parallelism and transport-closure verdicts
  double rk_tol = 1e-10;       // transport local truncation tolerance
  long rk_max_steps = 1000000;
  int grid_axis = 33;          // verification grid, points per axis (d <= 3)
  int sample_points = 100;     // random interior samples per sweep
  double zero_refine = 1e-12;  // bisection target for sigma = 0
  unsigned long long seed = 0x5eedULL;

  // Full grids in high dimension are thinned so sweeps stay tractable.
  int grid_for_dim(int d) const {
    if (d <= 3) return grid_axis;
    if (d == 4) return 9;
    if (d == 5) return 7;
    return 5;
  }

  static Defaults from_env();
};

}  // namespace ctrac
