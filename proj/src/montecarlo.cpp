#include "natfact/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace natfact {

ForcingSpec ForcingSpec::parse(const std::string& s) {
  if (s == "sine") return {Kind::sine, 0.0};
  if (s.rfind("const:", 0) == 0) {
    const std::string num = s.substr(6);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size() || !std::isfinite(v))
      throw std::invalid_argument("forcing: bad constant in '" + s + "'");
    return {Kind::constant, v};
  }
  throw std::invalid_argument("forcing: expected 'const:<value>' or 'sine', got '" + s + "'");
}

std::string ForcingSpec::to_string() const {
  if (kind == Kind::sine) return "sine";
  std::ostringstream os;
  os << "const:" << std::setprecision(17) << value;
  return os.str();
}

ScalarField ForcingSpec::function() const {
  if (kind == Kind::sine) {
    return [](double x, double y) {
      constexpr double pi = std::numbers::pi;
      return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
    };
  }
  const double v = value;
  return [v](double, double) { return v; };
}

void McConfig::validate() const {
  if (n < 1) throw std::invalid_argument("mc: n must be at least 1");
  if (terms < 1) throw std::invalid_argument("mc: KL term count must be at least 1");
  if (realizations < 1) throw std::invalid_argument("mc: realization count must be at least 1");
  kernel.validate();
  pcg.validate();
}

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

template <typename Get>
Moments moments(const std::vector<RealizationRecord>& recs, Get get) {
  Moments m;
  const auto r = static_cast<double>(recs.size());
  for (const auto& rec : recs) m.mean += get(rec);
  m.mean /= r;
  if (recs.size() > 1) {
    for (const auto& rec : recs) {
      const double dv = get(rec) - m.mean;
      m.variance += dv * dv;
    }
    m.variance /= (r - 1.0);
  }
  return m;
}

}  // namespace

McSummary run_mc(const McConfig& cfg, const HFactorization& f, const KlExpansion& kl, int threads) {
  cfg.validate();
  const NaturalFactors& factors = f.factors();
  const Mesh& mesh = *factors.mesh;
  if (mesh.n != cfg.n) throw std::invalid_argument("run_mc: factorization was built for another mesh");
  if (static_cast<int>(kl.sample_points.size()) != mesh.num_triangles() || kl.terms != cfg.terms ||
      !(kl.kernel == cfg.kernel))
    throw std::invalid_argument("run_mc: KL expansion does not match the configuration");
  threads = std::max(1, threads);

  const VectorXd b_cr = load_vector_cr(mesh, cfg.forcing.function());
  VectorXd rhs = VectorXd::Zero(f.size());
  rhs.head(b_cr.size()) = b_cr;
  const auto n_cr = b_cr.size();

  McSummary out;
  out.realizations = cfg.realizations;
  out.records.resize(static_cast<std::size_t>(cfg.realizations));
  VectorXd sum = VectorXd::Zero(n_cr);

  auto solve_one = [&](int i, VectorXd& u_cr) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    const FieldSample field =
        cfg.zero_xi ? sample_field_from_xi(kl, VectorXd::Zero(kl.terms)) : sample_field(kl, seed);
    const CoefficientDiagonal d(field.kappa);
    const BlockOperator op(factors, d);
    const SolveReport rep = pcg_solve(op, f, rhs, cfg.pcg);
    out.records[static_cast<std::size_t>(i)] =
        RealizationRecord{seed, rep.iterations, rep.condition_estimate, rep.contrast, rep.converged};
    u_cr = rep.solution.head(n_cr);
  };

  // Blocks are solved (possibly in parallel) and then summed in index order,
  // so the floating-point result is independent of the thread count.
  const int block = 64 * threads;
  std::vector<VectorXd> slots(static_cast<std::size_t>(block));
  for (int start = 0; start < cfg.realizations; start += block) {
    const int stop = std::min(cfg.realizations, start + block);
    if (threads == 1) {
      for (int i = start; i < stop; ++i) solve_one(i, slots[static_cast<std::size_t>(i - start)]);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (int i = start + t; i < stop; i += threads)
            solve_one(i, slots[static_cast<std::size_t>(i - start)]);
        });
      }
    }
    for (int i = start; i < stop; ++i) sum += slots[static_cast<std::size_t>(i - start)];
  }

  out.mean_solution = sum / static_cast<double>(cfg.realizations);
  const auto cond = moments(out.records, [](const RealizationRecord& r) { return r.condition; });
  const auto iter = moments(out.records, [](const RealizationRecord& r) { return double(r.iterations); });
  const auto con = moments(out.records, [](const RealizationRecord& r) { return r.contrast; });
  out.mean_condition = cond.mean;
  out.var_condition = cond.variance;
  out.mean_iterations = iter.mean;
  out.var_iterations = iter.variance;
  out.mean_contrast = con.mean;
  out.var_contrast = con.variance;
  out.nonconverged = static_cast<int>(
      std::count_if(out.records.begin(), out.records.end(), [](const auto& r) { return !r.converged; }));
  return out;
}

double broken_h1_error(const SparseXd& g_cr, const Eigen::Ref<const VectorXd>& u,
                       const Eigen::Ref<const VectorXd>& u_ref) {
  detail::require_dims(u.size() == g_cr.cols() && u_ref.size() == g_cr.cols(), "broken_h1_error");
  const VectorXd delta = u - u_ref;
  return sparse_matvec<double>(g_cr, delta).norm();
}

double broken_h1_error(const Mesh& m, const Eigen::Ref<const VectorXd>& u,
                       const Eigen::Ref<const VectorXd>& u_ref) {
  return broken_h1_error(assemble_gradient_cr(m), u, u_ref);
}

VectorXd reference_solution(const McConfig& cfg, const HFactorization& f, int ref_terms,
                            int ref_realizations, std::uint64_t seed_offset, int threads) {
  if (ref_terms < cfg.terms)
    throw std::invalid_argument("reference_solution: reference needs at least as many KL terms");
  McConfig ref = cfg;
  ref.terms = ref_terms;
  ref.realizations = ref_realizations;
  ref.base_seed = cfg.base_seed + seed_offset;
  const KlExpansion kl = build_kl(*f.factors().mesh, ref.kernel, ref.terms);
  return run_mc(ref, f, kl, threads).mean_solution;
}

nlohmann::json config_to_json(const McConfig& cfg) {
  return {
      {"n", cfg.n},
      {"cov", to_string(cfg.kernel.kind)},
      {"nu", cfg.kernel.nu},
      {"ell", cfg.kernel.ell},
      {"kl_terms", cfg.terms},
      {"realizations", cfg.realizations},
      {"seed", cfg.base_seed},
      {"forcing", cfg.forcing.to_string()},
      {"tol", cfg.pcg.rel_tolerance},
      {"max_iter", cfg.pcg.max_iterations},
      {"method", to_string(cfg.method)},
  };
}

McConfig config_from_json(const nlohmann::json& j) {
  McConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.kernel.kind = parse_kernel_kind(j.at("cov").get<std::string>());
  cfg.kernel.nu = j.at("nu").get<double>();
  cfg.kernel.ell = j.at("ell").get<double>();
  cfg.terms = j.at("kl_terms").get<int>();
  cfg.realizations = j.at("realizations").get<int>();
  cfg.base_seed = j.at("seed").get<std::uint64_t>();
  cfg.forcing = ForcingSpec::parse(j.at("forcing").get<std::string>());
  cfg.pcg.rel_tolerance = j.at("tol").get<double>();
  cfg.pcg.max_iterations = j.at("max_iter").get<int>();
  cfg.method = parse_factor_method(j.at("method").get<std::string>());
  return cfg;
}

nlohmann::json summary_to_json(const McConfig& cfg, const McSummary& s) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["realizations"] = s.realizations;
  j["condition"] = {{"mean", s.mean_condition}, {"variance", s.var_condition}};
  j["iterations"] = {{"mean", s.mean_iterations}, {"variance", s.var_iterations}};
  j["contrast"] = {{"mean", s.mean_contrast}, {"variance", s.var_contrast}};
  j["nonconverged"] = s.nonconverged;
  j["mean_solution"] = std::vector<double>(s.mean_solution.data(),
                                           s.mean_solution.data() + s.mean_solution.size());
  j["h1_error"] = s.h1_error ? nlohmann::json(*s.h1_error) : nlohmann::json(nullptr);
  return j;
}

void write_records_csv(std::ostream& os, const std::vector<RealizationRecord>& records) {
  os << "seed,iterations,condition,contrast,converged\n" << std::setprecision(17);
  for (const auto& r : records)
    os << r.seed << ',' << r.iterations << ',' << r.condition << ',' << r.contrast << ','
       << (r.converged ? 1 : 0) << '\n';
}

void write_records_csv(const std::string& path, const std::vector<RealizationRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_records_csv(os, records);
}

}  // namespace natfact
