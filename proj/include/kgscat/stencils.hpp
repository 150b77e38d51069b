#pragma once

// Centered finite differences on uniform grids. Dirichlet ends are held
// fixed and the stencil reaches past them by odd reflection about the end
// value; periodic grids wrap around.

#include <Eigen/Core>

namespace kgscat {

enum class GridBoundary { Dirichlet, Periodic };

/// d^2/dx^2 of order 2, 4 or 6. Zero at Dirichlet end points.
Eigen::VectorXd second_difference(const Eigen::VectorXd& v, double h, int order,
                                  GridBoundary boundary = GridBoundary::Dirichlet);

/// d/dx of order 2, 4 or 6 (one-sided second order at Dirichlet ends).
Eigen::VectorXd first_difference(const Eigen::VectorXd& v, double h, int order,
                                 GridBoundary boundary = GridBoundary::Dirichlet);

/// Spectral radius of -d^2/dx^2 times h^2 for the given order.
double second_difference_radius(int order);

}  // namespace kgscat
