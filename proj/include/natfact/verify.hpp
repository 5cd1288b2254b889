#pragma once

#include "natfact/operators.hpp"
#include "natfact/preconditioner.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace natfact {

struct CheckResult {
  std::string name;
  int n = 0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  int n_max = 8;
  /// Perturbs one entry of C_tilde before checking; the suite must then fail.
  bool corrupt_assembly = false;
  int random_fields = 5;
};

/// Structural and spectral checks for n = 1..n_max (n_max <= 16). Dense
/// spectral checks run for n <= 8 only.
std::vector<CheckResult> run_verify_suite(const VerifyOptions& opts);

void print_check_table(std::ostream& os, const std::vector<CheckResult>& results);

/// Exact cond(M^{-1} A_hat) from the dense generalized eigenproblem.
double exact_preconditioned_condition(const NaturalFactors& factors, const CoefficientDiagonal& d);

/// Element-by-element CR stiffness assembly (dense, verification only).
MatrixXd assemble_cr_stiffness_elementwise(const Mesh& m, const CoefficientDiagonal& d);

}  // namespace natfact
