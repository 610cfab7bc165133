#ifndef MPOC_PROBLEM_HPP
#define MPOC_PROBLEM_HPP

#include "mpoc/fe_space.hpp"
#include "mpoc/forms.hpp"
#include "mpoc/linalg.hpp"
#include "mpoc/stream_density.hpp"

#include <array>
#include <memory>

namespace mpoc {

struct ModelParams {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double mur = 0.5;
  double alpha = 0.0;
  VectorField f;      // body force; empty means zero
  ScalarField g;      // body couple; empty means zero
  BoundaryVector u0;  // velocity on Γ0
  BoundaryScalar w0;  // microrotation on Γ0
  BoundaryScalar rho0;  // density on Γ0
  std::array<double, 6> beta{0, 1, 0, 0, 1e-3, 1e-3};

  // Throws InputError: mu1, mu2 > 0, mur, alpha >= 0, beta >= 0 and not all zero.
  void validate() const;
};

struct Targets {
  QuadField ux, uy, w, rho;
  static Targets zero(const SpaceSet& s);
  static Targets from_functions(const SpaceSet& s, const VectorField& u_d, const ScalarField& w_d,
                                const ScalarField& rho_d);
};

// g1: two values (x, y) per Γ1 control node, interleaved. g2: one value per Γ3 control node.
struct ControlPair {
  Vector g1, g2;
  Vector g1_lower, g1_upper, g2_lower, g2_upper;
  double flux_target = 0.0;  // required value of the flux functional applied to g1
};

enum class Segment { Gamma1, Gamma3, NonSlip, Whole };

// Squared discrete extension norm g^T S g on a set of trace nodes: minimum H1 energy over
// discrete extensions equal to g on the nodes (and zero on `zero` nodes).
struct HalfNormOperator {
  std::vector<int> nodes;
  Matrix S;
  Eigen::LLT<Matrix> chol;
  Vector solve(const Vector& rhs) const { return chol.solve(rhs); }
  double norm2(const Vector& trace) const { return trace.dot(S * trace); }
  // Vector-valued traces stored interleaved (x, y) per node.
  double norm2_interleaved(const Vector& trace) const;
  Vector apply_interleaved(const Vector& trace) const;
  Vector solve_interleaved(const Vector& rhs) const;
};

HalfNormOperator build_halfnorm(const SpaceSet& s, const SparseMatrix& gram, Segment segment);

class Problem {
 public:
  Problem(const Mesh& mesh, ModelParams params);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const SpaceSet& spaces() const { return *spaces_; }
  const ModelParams& params() const { return params_; }
  const DensityProfile& profile() const { return profile_; }
  const StreamOperator& stream() const { return *stream_; }

  const SparseMatrix& A() const { return A_; }            // 2(D,D) + 2 alpha Γ2 mass
  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& mass() const { return M_; }
  const SparseMatrix& vector_mass() const { return Mv_; }
  const SparseMatrix& gram() const { return G_; }
  const SparseMatrix& vector_gram() const { return Gv_; }
  const SparseMatrix& divergence() const { return D_; }
  const SparseMatrix& rot_w() const { return Rw_; }       // (rot w, v)
  const SparseMatrix& rot_u() const { return Ru_; }       // (rot u, z)
  const SparseMatrix& rotrot() const { return RR_; }
  const QuadField& fx() const { return fx_; }
  const QuadField& fy() const { return fy_; }
  const QuadField& g() const { return g_; }

  const HalfNormOperator& halfnorm(Segment seg) const { return halfnorms_[static_cast<int>(seg)]; }

  int n_control1() const { return static_cast<int>(spaces_->control1_nodes.size()); }
  int n_control3() const { return static_cast<int>(spaces_->control3_nodes.size()); }

  // Full nodal vectors with Γ0 data (zero elsewhere).
  const Vector& u_gamma0() const { return u_gamma0_; }
  const Vector& w_gamma0() const { return w_gamma0_; }
  Vector velocity_dirichlet(const Vector& g1) const;
  Vector rotation_dirichlet(const Vector& g2) const;
  Vector extract_g1(const Vector& u) const;
  Vector extract_g2(const Vector& w) const;

  // a with a.g1 = ∫_{Γ1} g1.n, and the flux g1 must carry for compatibility.
  const Vector& flux_functional() const { return flux_a_; }
  double required_flux() const { return flux_target_; }
  // Lumped boundary mass per control value (the projection metric).
  const Vector& lumped_mass1() const { return lumped1_; }
  const Vector& lumped_mass3() const { return lumped3_; }

  ControlPair make_controls(const VectorField& g1, const ScalarField& g2, double g1_lo, double g1_hi, double g2_lo,
                            double g2_hi) const;
  ControlPair zero_controls(double bound = 1e6) const;

  // 1/sqrt(smallest Dirichlet eigenvalue), estimated once.
  double poincare_constant() const;

 private:
  std::unique_ptr<SpaceSet> spaces_;
  std::unique_ptr<StreamOperator> stream_;
  ModelParams params_;
  DensityProfile profile_;
  SparseMatrix A_, K_, M_, Mv_, G_, Gv_, D_, Rw_, Ru_, RR_;
  QuadField fx_, fy_, g_;
  std::array<HalfNormOperator, 4> halfnorms_;
  Vector u_gamma0_, w_gamma0_, flux_a_, lumped1_, lumped3_;
  double flux_target_ = 0.0;
  mutable double poincare_ = -1.0;
};

}  // namespace mpoc

#endif
