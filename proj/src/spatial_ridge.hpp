#pragma once

#include "rfcd/operators.hpp"

#include <vector>

namespace rfcd::detail {

// Solves (mu I + w H D^T D H) x = rhs for single bands on an h x w grid, where H is the
// cyclic blur and D the decimation of R. Cyclic blur is diagonal in the DFT basis, and
// D H^2 D^T is circulant on the coarse grid with eigenvalues given by aliasing folding,
// so the Woodbury form only needs FFTs on the fine and coarse grids.
class SpatialRidge {
 public:
  SpatialRidge(const SpatialDegradation& R, int height, int width);

  Vector solve(const Vector& rhs, double w, double mu) const;

  int coarse_pixels() const { return hc_ * wc_; }

 private:
  Vector blur(const Vector& x) const;

  int h_, w_, hc_, wc_, dr_, dc_;
  std::vector<double> transfer_;
  std::vector<double> folded_;
  double min_transfer_sq_;
};

}  // namespace rfcd::detail
