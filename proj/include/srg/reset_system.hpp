#pragma once

// Reset systems: linear flow, quadratic flow/jump partition and a constant
// reset map. Also the SORE factory and its scaled-graph bound.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "srg/complex_sets.hpp"
#include "srg/errors.hpp"
#include "srg/lti.hpp"

namespace srg {

/// x' = A x + B u, y = C x + D u while [x; u]' M [x; u] >= 0;
/// x+ = RJ x while [x; u]' M [x; u] <= 0.
struct ResetSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;
  Eigen::MatrixXd RJ;
  Eigen::MatrixXd M;

  Eigen::Index order() const { return A.rows(); }

  void validate() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw InputError("A: matrix must be square");
    if (B.size() != n) throw InputError("B: expected " + std::to_string(n) + " entries");
    if (C.size() != n) throw InputError("C: expected " + std::to_string(n) + " entries");
    if (RJ.rows() != n || RJ.cols() != n) throw InputError("RJ: expected an n x n matrix");
    if (M.rows() != n + 1 || M.cols() != n + 1) throw InputError("M: expected an (n+1) x (n+1) matrix");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !std::isfinite(D) || !RJ.allFinite() ||
        !M.allFinite()) {
      throw InputError("reset system: entries must be finite");
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("M: matrix must be symmetric");
  }
};

inline ResetSystem make_reset_system(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::RowVectorXd C, double D,
                                     Eigen::MatrixXd RJ, Eigen::MatrixXd M) {
  ResetSystem sys{std::move(A), std::move(B), std::move(C), D, std::move(RJ), std::move(M)};
  sys.validate();
  return sys;
}

inline constexpr double kSoreAlpha = 0.9;
inline constexpr double kSoreRightRadius = 0.85;
inline constexpr double kSoreLeftRadius = 0.504;

/// Second order reset element; resets to zero whenever alpha^2 x1^2 - x2^2 <= 0.
inline ResetSystem make_sore(double alpha = kSoreAlpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha: must be positive");
  Eigen::MatrixXd A(2, 2);
  A << -1, 0, 1, -1;
  Eigen::VectorXd B(2);
  B << 1, 0;
  Eigen::RowVectorXd C(2);
  C << 0, 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 3);
  M(0, 0) = alpha * alpha;
  M(1, 1) = -1.0;
  return make_reset_system(A, B, C, 0.0, Eigen::MatrixXd::Zero(2, 2), M);
}

/// [x; u]' M [x; u].
inline double quadratic_form(const ResetSystem& sys, const Eigen::VectorXd& x, double u) {
  if (x.size() != sys.order()) {
    throw InputError("x: expected " + std::to_string(sys.order()) + " entries, got " + std::to_string(x.size()));
  }
  Eigen::VectorXd xi(x.size() + 1);
  xi << x, u;
  return xi.dot(sys.M * xi);
}

inline bool in_jump_set(const ResetSystem& sys, const Eigen::VectorXd& x, double u) {
  return quadratic_form(sys, x, u) <= 0.0;
}

inline bool in_flow_set(const ResetSystem& sys, const Eigen::VectorXd& x, double u) {
  return quadratic_form(sys, x, u) >= 0.0;
}

/// C (sI - A)^{-1} B + D with the reset condition removed.
inline TransferFunction base_linear(const ResetSystem& sys) {
  return to_transfer_function(sys.A, sys.B, sys.C, sys.D);
}

/// Region containing SG(phi), its radius and the star centre kappa.
struct SgBound {
  Region shape;
  double gain = 0.0;
  Complex kappa{};
};

/// Bound S for make_sore(0.9).
inline SgBound sore_sg_bound() {
  Region s = make_half_disc_union(kSoreRightRadius, kSoreLeftRadius);
  return {s, region_radius(s), Complex{}};
}

/// kp + kr * S.
inline SgBound controller_sg_bound(double kp, double kr) {
  if (!std::isfinite(kp) || !std::isfinite(kr)) throw InputError("kp/kr: must be finite");
  if (kr == 0.0) return {make_point(kp), std::abs(kp), Complex{kp, 0.0}};
  Region shape = translate_region(scale_region(sore_sg_bound().shape, kr), kp);
  return {shape, region_radius(shape), Complex{kp, 0.0}};
}

}  // namespace srg
