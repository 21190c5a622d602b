#pragma once

#include "rfcd/image.hpp"
#include "rfcd/operators.hpp"

namespace rfcd {

struct RegularizationParams {
  double lambda = 0.0;  // Tikhonov weight
  double gamma = 0.0;   // group-sparsity weight

  void validate() const;
};

// Sum over pixels of the Euclidean norm of each spectral column.
double l21_norm(const MultiBandImage& D);

// Prox of kappa*||.||_{2,1} under 0.5*||. - A||^2: shrinks each column norm by kappa.
MultiBandImage group_soft_threshold(const MultiBandImage& A, double kappa);

// ||X - Xbar||_F^2
double tikhonov_penalty(const MultiBandImage& X, const MultiBandImage& Xbar);

// Spectral pseudo-inverse L^T (L L^T)^{-1}, then nearest-neighbour upsampling to `target`.
MultiBandImage crude_estimate(const MultiBandImage& Y1, const DegradationModel& model1, const Geometry& target);

}  // namespace rfcd
