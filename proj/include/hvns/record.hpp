#pragma once

namespace hvns {

/// One diagnostics sample. `hyper` is ||A^(l/2) u||^2 (||A u||^2 for l = 2);
/// `budget_residual` covers the interval since the previous sample.
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;     // ||u||^2
  double enstrophy = 0.0;  // ||u||_1^2 = ||grad u||^2
  double hyper = 0.0;
  double injection = 0.0;  // (f, u)
  double budget_residual = 0.0;
};

}  // namespace hvns
