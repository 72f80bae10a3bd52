#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "robin/experiments.hpp"

namespace robin {

struct CheckResult {
  std::string name;   ///< e.g. "adjoint_elliptic"
  bool passed = false;
  double value = 0.0;  ///< worst observed quantity
  std::string detail;
};

/// Largest relative gap |<w, u p>_Ga - int_Gi u d w* ds| over `pairs` random
/// directions d > 0 and weights p, with w = u'(gamma) d and w* the adjoint state
/// for p. Uses the smooth example coefficient on an nx x ny mesh.
CheckResult check_adjoint_elliptic(std::size_t nx = 8, std::size_t ny = 16, int pairs = 20,
                                   std::uint64_t seed = 11);
CheckResult check_adjoint_parabolic(std::size_t nx = 8, std::size_t ny = 16, std::size_t nt = 16,
                                    int pairs = 20, std::uint64_t seed = 12);

/// Observed orders log10(e(eps_j) / e(eps_{j+1})) of the finite-difference
/// error e(eps) = ||(u(gamma + eps d) - u(gamma))/eps - u'(gamma) d||_Ga at
/// eps = 1e-2, 1e-3, 1e-4. Passes when every order lies in [0.7, 1.3].
CheckResult check_derivative_elliptic(std::size_t nx = 16, std::size_t ny = 32);
CheckResult check_derivative_parabolic(std::size_t nx = 8, std::size_t ny = 16,
                                       std::size_t nt = 16);

/// Dense Gauss-Newton comparison on a 4 x 8 mesh with noisy data, at the
/// initial guess and at two later iterates.
CheckResult check_oracle();

/// L2 error ratio of the manufactured elliptic solution between nx x ny and
/// 2nx x 2ny meshes; passes at >= 3.5.
CheckResult check_fem_elliptic(std::size_t nx = 8, std::size_t ny = 16);
/// Space-time L2 error ratio under halving h and dt together; passes at >= 1.8.
CheckResult check_fem_parabolic(std::size_t nx = 8, std::size_t ny = 16, std::size_t nt = 16);

/// L2(domain) norm of u_h - u with a degree-4 rule on each triangle.
double l2_error(const Mesh& mesh, const NodalField& uh, const SpatialFunction& exact);

/// Runs every check whose name contains `only` (all when empty).
std::vector<CheckResult> run_verification(std::string_view only = {});

}  // namespace robin
