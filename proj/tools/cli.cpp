#include "cli.hpp"

#include "natfact/mesh.hpp"
#include "natfact/montecarlo.hpp"
#include "natfact/operators.hpp"
#include "natfact/pcg.hpp"
#include "natfact/preconditioner.hpp"
#include "natfact/randomfield.hpp"
#include "natfact/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace natfact::cli {

namespace {

struct FieldFlags {
  std::optional<double> kappa_const;
  std::string kappa_csv;
  std::string cov;
  double nu = 0.5;
  double ell = 1.0;
  int kl_terms = 0;
  std::uint64_t seed = 0;
};

void add_field_flags(CLI::App* sub, FieldFlags& f) {
  auto* kc = sub->add_option("--kappa-const", f.kappa_const, "constant coefficient")
                 ->check(CLI::PositiveNumber);
  auto* kcsv = sub->add_option("--kappa-csv", f.kappa_csv, "per-triangle coefficient file");
  auto* cov = sub->add_option("--cov", f.cov, "KL covariance kernel")
                  ->check(CLI::IsMember({"gaussian", "matern"}));
  sub->add_option("--nu", f.nu, "Matern smoothness (0.5, 1.5, 2.5)")->check(CLI::IsMember({0.5, 1.5, 2.5}));
  sub->add_option("--ell", f.ell, "Matern length scale")->check(CLI::PositiveNumber);
  sub->add_option("--kl-terms", f.kl_terms, "KL truncation")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "RNG seed");
  kc->excludes(kcsv)->excludes(cov);
  kcsv->excludes(cov);
}

CovarianceKernel kernel_from(const std::string& cov, double nu, double ell) {
  if (parse_kernel_kind(cov) == KernelKind::gaussian) return CovarianceKernel::gaussian();
  return CovarianceKernel::matern(nu, ell);
}

struct ResolvedField {
  CoefficientDiagonal d;
  nlohmann::json source;
};

ResolvedField resolve_field(const FieldFlags& f, const Mesh& m) {
  const auto nt = static_cast<std::size_t>(m.num_triangles());
  if (!f.kappa_csv.empty()) {
    const auto k = read_field_csv(f.kappa_csv);
    if (k.size() != nt)
      throw std::runtime_error("field csv has " + std::to_string(k.size()) + " values, mesh has " +
                               std::to_string(nt) + " triangles");
    return {CoefficientDiagonal(k), {{"kind", "csv"}, {"path", f.kappa_csv}}};
  }
  if (!f.cov.empty()) {
    if (f.kl_terms < 1) throw std::runtime_error("--cov requires --kl-terms");
    const auto kernel = kernel_from(f.cov, f.nu, f.ell);
    const KlExpansion kl = build_kl(m, kernel, f.kl_terms);
    const FieldSample s = sample_field(kl, f.seed);
    return {CoefficientDiagonal(s.kappa),
            {{"kind", "kl"}, {"cov", f.cov}, {"nu", f.nu}, {"ell", f.ell}, {"kl_terms", f.kl_terms},
             {"seed", f.seed}}};
  }
  const double c = f.kappa_const.value_or(1.0);
  return {CoefficientDiagonal(std::vector<double>(nt, c)), {{"kind", "const"}, {"value", c}}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (key.empty() || given(flag)) continue;
    if (value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural-factor solvers for parametric diffusion problems"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "run the structural and spectral check suite");
  VerifyOptions vopts;
  verify->add_option("--n-max", vopts.n_max, "largest mesh size")->check(CLI::Range(1, 16));
  verify->add_flag("--corrupt-assembly", vopts.corrupt_assembly, "perturb C~ (negative test)")->group("");

  // solve
  auto* solve = app.add_subcommand("solve", "solve one coefficient realization");
  int solve_n = 0;
  FieldFlags solve_field;
  PcgConfig solve_pcg;
  std::string solve_method = "lu", solve_forcing = "const:1", solve_out, solve_report;
  solve->add_option("--n", solve_n, "subdivisions per side")->required()->check(CLI::PositiveNumber);
  add_field_flags(solve, solve_field);
  solve->add_option("--tol", solve_pcg.rel_tolerance, "PCG relative tolerance")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--max-iter", solve_pcg.max_iterations, "PCG iteration cap")->check(CLI::PositiveNumber);
  solve->add_option("--method", solve_method, "H factorization")->check(CLI::IsMember({"lu", "qr", "sparse-lu"}));
  solve->add_option("--forcing", solve_forcing, "const:<v> or sine");
  solve->add_option("--out", solve_out, "solution CSV")->required();
  solve->add_option("--out-report", solve_report, "JSON report (default <out>.json)");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo campaign");
  McConfig mcfg;
  std::string mc_cov, mc_method = "lu", mc_forcing = "const:1", mc_summary, mc_samples;
  double mc_nu = 0.5, mc_ell = 1.0;
  int mc_threads = 1, mc_ref_terms = 0, mc_ref_realizations = 0;
  mc->add_option("--n", mcfg.n, "subdivisions per side")->required()->check(CLI::PositiveNumber);
  mc->add_option("--cov", mc_cov, "covariance kernel")->required()->check(CLI::IsMember({"gaussian", "matern"}));
  mc->add_option("--nu", mc_nu, "Matern smoothness")->check(CLI::IsMember({0.5, 1.5, 2.5}));
  mc->add_option("--ell", mc_ell, "Matern length scale")->check(CLI::PositiveNumber);
  mc->add_option("--kl-terms", mcfg.terms, "KL truncation")->required()->check(CLI::PositiveNumber);
  mc->add_option("--realizations", mcfg.realizations, "R")->required()->check(CLI::PositiveNumber);
  mc->add_option("--seed", mcfg.base_seed, "base seed")->required();
  mc->add_option("--threads", mc_threads, "worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--tol", mcfg.pcg.rel_tolerance, "PCG relative tolerance")->check(CLI::Range(0.0, 1.0));
  mc->add_option("--max-iter", mcfg.pcg.max_iterations, "PCG iteration cap")->check(CLI::PositiveNumber);
  mc->add_option("--method", mc_method, "H factorization")->check(CLI::IsMember({"lu", "qr", "sparse-lu"}));
  mc->add_option("--forcing", mc_forcing, "const:<v> or sine");
  mc->add_option("--reference-terms", mc_ref_terms, "KL terms of an H1 reference mean")->check(CLI::PositiveNumber);
  mc->add_option("--reference-realizations", mc_ref_realizations, "reference sample count (default R)")
      ->check(CLI::PositiveNumber);
  mc->add_option("--out-summary", mc_summary, "summary JSON")->required();
  mc->add_option("--out-samples", mc_samples, "per-realization CSV")->required();

  // export
  auto* exp = app.add_subcommand("export", "write an operator as MatrixMarket");
  int exp_n = 0;
  std::string exp_matrix, exp_out;
  FieldFlags exp_field;
  exp->add_option("--n", exp_n, "subdivisions per side")->required()->check(CLI::PositiveNumber);
  exp->add_option("--matrix", exp_matrix, "G, C, H, Acr or Gl")
      ->required()
      ->check(CLI::IsMember({"G", "C", "H", "Acr", "Gl"}));
  add_field_flags(exp, exp_field);
  exp->add_option("--out", exp_out, "MatrixMarket file")->required();

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*verify) {
      const auto results = run_verify_suite(vopts);
      print_check_table(out, results);
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
      return ok ? 0 : 1;
    }

    if (*solve) {
      solve_pcg.validate();
      const auto forcing = ForcingSpec::parse(solve_forcing);
      auto mesh = std::make_shared<const Mesh>(build_mesh(solve_n));
      auto factors = std::make_shared<const NaturalFactors>(assemble_natural_factors(mesh));
      const ResolvedField field = resolve_field(solve_field, *mesh);
      const HFactorization hf = build_h(factors, parse_factor_method(solve_method));

      const VectorXd b_cr = load_vector_cr(*mesh, forcing.function());
      VectorXd rhs = VectorXd::Zero(hf.size());
      rhs.head(b_cr.size()) = b_cr;
      const BlockOperator op(*factors, field.d);
      const SolveReport rep = pcg_solve(op, hf, rhs, solve_pcg);

      auto os = open_out(solve_out);
      os << "edge,x,y,value\n" << std::setprecision(17);
      const auto mids = edge_midpoints(*mesh);
      for (std::size_t e = 0; e < mids.size(); ++e)
        os << e << ',' << mids[e].x() << ',' << mids[e].y() << ',' << rep.solution(static_cast<Eigen::Index>(e))
           << '\n';

      nlohmann::json report{{"n", solve_n},
                            {"kappa", field.source},
                            {"forcing", forcing.to_string()},
                            {"method", solve_method},
                            {"tol", solve_pcg.rel_tolerance},
                            {"iterations", rep.iterations},
                            {"converged", rep.converged},
                            {"condition", rep.condition_estimate},
                            {"contrast", rep.contrast},
                            {"condition_bound", condition_bound(field.d)}};
      write_json(solve_report.empty() ? solve_out + ".json" : solve_report, report);
      out << "iterations=" << rep.iterations << " condition=" << rep.condition_estimate
          << " contrast=" << rep.contrast << (rep.converged ? "" : " (not converged)") << '\n';
      return rep.converged ? 0 : 3;
    }

    if (*mc) {
      mcfg.kernel = kernel_from(mc_cov, mc_nu, mc_ell);
      mcfg.method = parse_factor_method(mc_method);
      mcfg.forcing = ForcingSpec::parse(mc_forcing);
      mcfg.validate();
      auto mesh = std::make_shared<const Mesh>(build_mesh(mcfg.n));
      if (mcfg.terms > mesh->num_triangles()) throw std::runtime_error("--kl-terms exceeds the triangle count");
      auto factors = std::make_shared<const NaturalFactors>(assemble_natural_factors(mesh));
      const HFactorization hf = build_h(factors, mcfg.method);
      const KlExpansion kl = build_kl(*mesh, mcfg.kernel, mcfg.terms);
      McSummary s = run_mc(mcfg, hf, kl, mc_threads);
      if (mc_ref_terms > 0) {
        const int rr = mc_ref_realizations > 0 ? mc_ref_realizations : mcfg.realizations;
        const VectorXd ref = reference_solution(mcfg, hf, mc_ref_terms, rr, kReferenceSeedOffset, mc_threads);
        s.h1_error = broken_h1_error(factors->G_cr, s.mean_solution, ref);
      }
      nlohmann::json j = summary_to_json(mcfg, s);
      if (mc_ref_terms > 0) {
        j["reference"] = {{"kl_terms", mc_ref_terms},
                          {"realizations", mc_ref_realizations > 0 ? mc_ref_realizations : mcfg.realizations}};
      }
      write_json(mc_summary, j);
      write_records_csv(mc_samples, s.records);
      out << std::setprecision(6) << "condition mean=" << s.mean_condition << " var=" << s.var_condition
          << "\niterations mean=" << s.mean_iterations << " var=" << s.var_iterations
          << "\ncontrast mean=" << s.mean_contrast << " var=" << s.var_contrast << '\n';
      if (s.h1_error) out << "h1 error=" << *s.h1_error << '\n';
      if (s.nonconverged > 0) {
        err << s.nonconverged << " realizations did not converge\n";
        return 3;
      }
      return 0;
    }

    if (*exp) {
      auto mesh = std::make_shared<const Mesh>(build_mesh(exp_n));
      auto factors = std::make_shared<const NaturalFactors>(assemble_natural_factors(mesh));
      if (exp_matrix == "G") {
        write_matrix_market(exp_out, factors->G_cr);
      } else if (exp_matrix == "C") {
        write_matrix_market(exp_out, factors->C_tilde);
      } else if (exp_matrix == "Gl") {
        write_matrix_market(exp_out, factors->G_l);
      } else if (exp_matrix == "H") {
        write_matrix_market(exp_out, assemble_h(*factors));
      } else {
        const ResolvedField field = resolve_field(exp_field, *mesh);
        write_matrix_market(exp_out, assemble_stiffness(factors->G_cr, field.d));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace natfact::cli
