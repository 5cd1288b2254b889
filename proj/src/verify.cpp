#include "natfact/verify.hpp"

#include "natfact/pcg.hpp"
#include "natfact/randomfield.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace natfact {

double exact_preconditioned_condition(const NaturalFactors& factors, const CoefficientDiagonal& d) {
  const MatrixXd a = dense_block_operator(factors, d);
  const MatrixXd m = dense_preconditioner(factors, d);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(a, m, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw std::runtime_error("generalized eigensolve failed");
  const auto& ev = ges.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

MatrixXd assemble_cr_stiffness_elementwise(const Mesh& m, const CoefficientDiagonal& d) {
  MatrixXd a = MatrixXd::Zero(m.num_interior_edges(), m.num_interior_edges());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto grads = barycentric_gradients(m, t);
    // grad phi_k . grad phi_l with phi_k = 1 - 2 lambda_k
    const Eigen::Matrix3d local = 4.0 * m.areas[t] * d.values()(t) * grads * grads.transpose();
    for (int k = 0; k < 3; ++k) {
      const int ek = m.interior_edge_index[m.triangle_edges[t][k]];
      if (ek < 0) continue;
      for (int l = 0; l < 3; ++l) {
        const int el = m.interior_edge_index[m.triangle_edges[t][l]];
        if (el >= 0) a(ek, el) += local(k, l);
      }
    }
  }
  return a;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const VerifyOptions& opts) {
  if (opts.n_max < 1 || opts.n_max > 16) throw std::invalid_argument("verify: n_max must lie in [1, 16]");
  std::vector<CheckResult> out;
  auto record = [&](std::string name, int n, bool ok, std::string detail) {
    out.push_back({std::move(name), n, ok, std::move(detail)});
  };

  for (int n = 1; n <= opts.n_max; ++n) {
    auto mesh = std::make_shared<const Mesh>(build_mesh(n));
    const int nt = mesh->num_triangles();
    const int ne = mesh->num_interior_edges();
    const int nv_all = mesh->num_vertices();

    const bool counts = nt == 2 * n * n && nv_all == (n + 1) * (n + 1) &&
                        mesh->num_interior_vertices() == (n - 1) * (n - 1) && ne == 3 * n * n - 2 * n;
    record("mesh_counts", n, counts,
           "N_T=" + std::to_string(nt) + " N_e=" + std::to_string(ne) + " Nv~=" + std::to_string(nv_all));
    record("euler_identity", n, 2 * nt == ne + nv_all - 1,
           std::to_string(2 * nt) + " = " + std::to_string(ne) + " + " + std::to_string(nv_all) + " - 1");

    double area_sum = 0.0;
    for (double a : mesh->areas) area_sum += a;
    record("area_sum", n, std::abs(area_sum - 1.0) <= 1e-14, "|sum-1|=" + fmt(std::abs(area_sum - 1.0)));

    auto factors = std::make_shared<NaturalFactors>(assemble_natural_factors(mesh));
    if (opts.corrupt_assembly && factors->C_tilde.nonZeros() > 0) factors->C_tilde.valuePtr()[0] += 1e-3;

    const SparseXd gtc = SparseXd(factors->G_cr.transpose()) * factors->C_tilde;
    const double orth = gtc.nonZeros() ? MatrixXd(gtc).cwiseAbs().maxCoeff() : 0.0;
    record("curl_orthogonality", n, orth <= 1e-12, "max|G^T C|=" + fmt(orth));

    const SparseXd h = assemble_h(*factors);
    record("h_square", n, h.rows() == h.cols() && h.cols() == 2 * nt,
           std::to_string(h.rows()) + "x" + std::to_string(h.cols()));

    const std::vector<double> ones(static_cast<std::size_t>(nt), 1.0);
    const CoefficientDiagonal unit(ones);
    const SparseXd a_cr = assemble_stiffness(factors->G_cr, unit);
    const double asym = ne ? MatrixXd(a_cr - SparseXd(a_cr.transpose())).cwiseAbs().maxCoeff() : 0.0;
    record("stiffness_symmetry", n, asym <= 1e-13, "max|A-A^T|=" + fmt(asym));

    if (n > 8) continue;

    const Eigen::JacobiSVD<MatrixXd> svd{MatrixXd(h)};
    const double smin = svd.singularValues().minCoeff();
    record("h_nonsingular", n, smin > 0.0 && std::isfinite(smin), "sigma_min=" + fmt(smin));

    // Random log-normal fields for the spectral checks.
    const KlExpansion kl = build_kl(*mesh, CovarianceKernel::gaussian(), std::min(10, nt));
    const HFactorization hf(factors, FactorMethod::lu);

    double worst_equiv = 0.0, worst_margin = -1e300, worst_minv = 0.0;
    for (int s = 0; s < opts.random_fields; ++s) {
      const FieldSample field = sample_field(kl, 1000u * static_cast<unsigned>(n) + static_cast<unsigned>(s));
      const CoefficientDiagonal d(field.kappa);

      if (ne > 0) {
        const MatrixXd ref = assemble_cr_stiffness_elementwise(*mesh, d);
        const MatrixXd nat(assemble_stiffness(factors->G_cr, d));
        const double scale = ref.cwiseAbs().maxCoeff();
        worst_equiv = std::max(worst_equiv, (nat - ref).cwiseAbs().maxCoeff() / scale);
      }

      const double cond = exact_preconditioned_condition(*factors, d);
      worst_margin = std::max(worst_margin, cond - condition_bound(d));

      const VectorXd r = VectorXd::LinSpaced(2 * nt, 1.0, 2.0);
      const VectorXd v = apply_minv(hf, d, r);
      const VectorXd back = dense_preconditioner(*factors, d) * v;
      worst_minv = std::max(worst_minv, (back - r).norm() / r.norm());
    }
    record("natural_factor_equivalence", n, worst_equiv <= 1e-12, "max rel err=" + fmt(worst_equiv));
    record("condition_bound", n, worst_margin <= 1e-8, "max cond-(2eta-1)=" + fmt(worst_margin));
    record("minv_inverts_m", n, worst_minv <= 1e-10, "max rel residual=" + fmt(worst_minv));

    const BlockOperator op(*factors, unit);
    VectorXd rhs = VectorXd::Zero(2 * nt);
    rhs.head(ne) = load_vector_cr(*mesh, [](double, double) { return 1.0; });
    const SolveReport rep = pcg_solve(op, hf, rhs);
    const bool one_step = ne == 0 ? rep.iterations == 0 : rep.iterations == 1;
    record("exact_preconditioner_unit_kappa", n, rep.converged && one_step,
           "iterations=" + std::to_string(rep.iterations));
  }
  return out;
}

void print_check_table(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    os << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(34) << r.name << " n=" << std::setw(3)
       << r.n << ' ' << r.detail << '\n';
  }
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  os << results.size() - static_cast<std::size_t>(failed) << '/' << results.size() << " checks passed\n";
}

}  // namespace natfact
