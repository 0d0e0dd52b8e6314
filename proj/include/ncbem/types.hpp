// Common scalar and linear-algebra aliases used across the library.
#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ncbem {

using Complex = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;

using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr Complex imag_unit{0.0, 1.0};

}  // namespace ncbem
