#ifndef MPOC_COMMON_HPP
#define MPOC_COMMON_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpoc {

using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Values at quadrature points, indexed cell * kQuadPoints + q.
using QuadField = std::vector<double>;

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
// Boundary data also receive the arc length s along Γ0 (0 off Γ0).
using BoundaryScalar = std::function<double(const Vec2&, double)>;
using BoundaryVector = std::function<Vec2(const Vec2&, double)>;

// Malformed input: bad files, bad configuration, violated preconditions on data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure of a numerical procedure: singular systems, non-convergence, NaN.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mpoc

#endif
