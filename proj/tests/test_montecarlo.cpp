#include "natfact/montecarlo.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

using namespace natfact;

namespace {

struct Fixture {
  McConfig cfg;
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<HFactorization> h;
  KlExpansion kl;

  explicit Fixture(int n, CovarianceKernel k = CovarianceKernel::gaussian(), int terms = 10) {
    cfg.n = n;
    cfg.kernel = k;
    cfg.terms = terms;
    cfg.realizations = 20;
    cfg.base_seed = 11;
    mesh = std::make_shared<const Mesh>(build_mesh(n));
    h = std::make_unique<HFactorization>(
        std::make_shared<const NaturalFactors>(assemble_natural_factors(mesh)), FactorMethod::lu);
    kl = build_kl(*mesh, k, terms);
  }
};

}  // namespace

TEST_CASE("ForcingSpec parsing") {
  CHECK(ForcingSpec::parse("sine").kind == ForcingSpec::Kind::sine);
  const auto c = ForcingSpec::parse("const:2.5");
  CHECK(c.kind == ForcingSpec::Kind::constant);
  CHECK(c.value == 2.5);
  CHECK(ForcingSpec::parse(c.to_string()) == c);
  CHECK(c.function()(0.3, 0.9) == 2.5);
  CHECK(ForcingSpec::parse("sine").function()(0.5, 0.5) == doctest::Approx(2.0 * M_PI * M_PI));
  for (const char* bad : {"", "const:", "const:x", "const:1.0abc", "cosine", "const:inf"})
    CHECK_THROWS_AS(ForcingSpec::parse(bad), std::invalid_argument);
}

TEST_CASE("McConfig validation") {
  McConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.realizations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McConfig{};
  cfg.terms = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McConfig{};
  cfg.pcg.rel_tolerance = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("run_mc: single realization has zero variance") {
  Fixture fx(4);
  fx.cfg.realizations = 1;
  const McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  CHECK(s.realizations == 1);
  CHECK(s.var_condition == 0.0);
  CHECK(s.var_iterations == 0.0);
  CHECK(s.var_contrast == 0.0);
  CHECK(s.records.size() == 1);
  CHECK(s.records[0].seed == 11);
  CHECK(s.mean_condition == s.records[0].condition);
}

TEST_CASE("run_mc: zero KL coordinates give the exact preconditioner") {
  Fixture fx(6);
  fx.cfg.zero_xi = true;
  const McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  CHECK(s.mean_iterations == 1.0);
  CHECK(s.var_iterations == 0.0);
  CHECK(s.mean_condition == 1.0);
  CHECK(s.var_condition == 0.0);
  CHECK(s.mean_contrast == 1.0);
  CHECK(s.nonconverged == 0);
}

TEST_CASE("run_mc: summary statistics agree with the records") {
  Fixture fx(4, CovarianceKernel::matern(0.5, 1.0), 12);
  const McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  const auto r = static_cast<double>(s.records.size());
  double mc = 0.0, mi = 0.0;
  for (const auto& rec : s.records) {
    mc += rec.condition;
    mi += rec.iterations;
  }
  mc /= r;
  mi /= r;
  double vc = 0.0;
  for (const auto& rec : s.records) vc += (rec.condition - mc) * (rec.condition - mc);
  vc /= r - 1.0;
  CHECK(s.mean_condition == doctest::Approx(mc).epsilon(1e-14));
  CHECK(s.mean_iterations == doctest::Approx(mi).epsilon(1e-14));
  CHECK(s.var_condition == doctest::Approx(vc).epsilon(1e-12));
  for (std::size_t i = 0; i < s.records.size(); ++i) CHECK(s.records[i].seed == 11 + i);
}

TEST_CASE("run_mc: determinism and thread independence") {
  Fixture fx(6, CovarianceKernel::matern(1.5, 0.5), 10);
  fx.cfg.realizations = 150;
  const McSummary a = run_mc(fx.cfg, *fx.h, fx.kl, 1);
  const McSummary b = run_mc(fx.cfg, *fx.h, fx.kl, 1);
  const McSummary c = run_mc(fx.cfg, *fx.h, fx.kl, 3);
  for (const McSummary* other : {&b, &c}) {
    CHECK(summary_to_json(fx.cfg, a).dump() == summary_to_json(fx.cfg, *other).dump());
    CHECK(a.mean_solution == other->mean_solution);
  }
}

TEST_CASE("run_mc: one factorization per campaign") {
  Fixture fx(4);
  fx.cfg.realizations = 100;
  HFactorization::reset_construction_count();
  const HFactorization f(fx.h->factors_ptr(), FactorMethod::lu);
  const McSummary s = run_mc(fx.cfg, f, fx.kl, 2);
  CHECK(s.realizations == 100);
  CHECK(HFactorization::construction_count() == 1);
}

TEST_CASE("run_mc: per-realization condition estimates respect the bound") {
  Fixture fx(8, CovarianceKernel::matern(0.5, 1.0), 20);
  fx.cfg.realizations = 40;
  const McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  for (const auto& rec : s.records) {
    CHECK(rec.converged);
    CHECK(rec.condition >= 1.0 - 1e-10);
    CHECK(rec.condition <= 1.05 * (2.0 * rec.contrast - 1.0));
  }
}

TEST_CASE("run_mc: rejects mismatched inputs") {
  Fixture fx(4);
  McConfig cfg = fx.cfg;
  cfg.n = 5;
  CHECK_THROWS_AS(run_mc(cfg, *fx.h, fx.kl), std::invalid_argument);
  cfg = fx.cfg;
  cfg.terms = 11;
  CHECK_THROWS_AS(run_mc(cfg, *fx.h, fx.kl), std::invalid_argument);
  cfg = fx.cfg;
  cfg.kernel = CovarianceKernel::matern(0.5, 1.0);
  CHECK_THROWS_AS(run_mc(cfg, *fx.h, fx.kl), std::invalid_argument);
  const KlExpansion other = build_kl(build_mesh(3), fx.cfg.kernel, fx.cfg.terms);
  CHECK_THROWS_AS(run_mc(fx.cfg, *fx.h, other), std::invalid_argument);
}

TEST_CASE("broken_h1_error") {
  const Mesh m1 = build_mesh(1);
  const VectorXd zero = VectorXd::Zero(m1.num_interior_edges());
  CHECK(broken_h1_error(m1, zero, zero) == 0.0);
  // The lone interior CR function on the unit square has |grad|^2 = 4 on both halves.
  const VectorXd one = VectorXd::Ones(1);
  CHECK(broken_h1_error(m1, one, zero) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));

  const Mesh m4 = build_mesh(4);
  const VectorXd u = VectorXd::LinSpaced(m4.num_interior_edges(), -1.0, 2.0);
  CHECK(broken_h1_error(m4, u, u) == 0.0);
  CHECK(broken_h1_error(m4, u, VectorXd::Zero(u.size())) > 0.0);
  CHECK_THROWS_AS(broken_h1_error(m4, u, VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("reference_solution") {
  Fixture fx(4, CovarianceKernel::matern(0.5, 5.0), 6);
  fx.cfg.realizations = 30;
  const McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  const VectorXd same = reference_solution(fx.cfg, *fx.h, 6, 30, 0);
  CHECK(same == s.mean_solution);

  const VectorXd ref = reference_solution(fx.cfg, *fx.h, 12, 30);
  CHECK(ref.size() == s.mean_solution.size());
  CHECK(ref != s.mean_solution);
  CHECK_THROWS_AS(reference_solution(fx.cfg, *fx.h, 5, 30), std::invalid_argument);
}

TEST_CASE("mean solutions from independent streams approach each other") {
  Fixture fx(4, CovarianceKernel::matern(0.5, 1.0), 10);
  const SparseXd& g = fx.h->factors().G_cr;
  auto gap = [&](int r) {
    McConfig a = fx.cfg;
    a.realizations = r;
    McConfig b = a;
    b.base_seed = a.base_seed + 1000000;
    return broken_h1_error(g, run_mc(a, *fx.h, fx.kl).mean_solution, run_mc(b, *fx.h, fx.kl).mean_solution);
  };
  const double small = gap(20), large = gap(2000);
  CHECK(large > 0.0);
  CHECK(large < small);
}

TEST_CASE("config JSON round trip") {
  McConfig cfg;
  cfg.n = 13;
  cfg.kernel = CovarianceKernel::matern(2.5, 0.75);
  cfg.terms = 17;
  cfg.realizations = 321;
  cfg.base_seed = (std::uint64_t{1} << 40) + 5;
  cfg.forcing = ForcingSpec::parse("const:0.125");
  cfg.pcg.rel_tolerance = 3e-9;
  cfg.pcg.max_iterations = 77;
  cfg.method = FactorMethod::sparse_lu;
  const McConfig back = config_from_json(nlohmann::json::parse(config_to_json(cfg).dump()));
  CHECK(back.n == cfg.n);
  CHECK(back.kernel == cfg.kernel);
  CHECK(back.terms == cfg.terms);
  CHECK(back.realizations == cfg.realizations);
  CHECK(back.base_seed == cfg.base_seed);
  CHECK(back.forcing == cfg.forcing);
  CHECK(back.pcg.rel_tolerance == cfg.pcg.rel_tolerance);
  CHECK(back.pcg.max_iterations == cfg.pcg.max_iterations);
  CHECK(back.method == cfg.method);
  CHECK_THROWS(config_from_json(nlohmann::json::object()));
}

TEST_CASE("summary JSON and records CSV") {
  Fixture fx(3);
  fx.cfg.realizations = 4;
  McSummary s = run_mc(fx.cfg, *fx.h, fx.kl);
  nlohmann::json j = summary_to_json(fx.cfg, s);
  CHECK(j["realizations"] == 4);
  CHECK(j["h1_error"].is_null());
  CHECK(j["mean_solution"].size() == static_cast<std::size_t>(s.mean_solution.size()));
  CHECK(j["condition"]["mean"].get<double>() == s.mean_condition);
  s.h1_error = 0.25;
  CHECK(summary_to_json(fx.cfg, s)["h1_error"] == 0.25);

  std::ostringstream os;
  write_records_csv(os, s.records);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "seed,iterations,condition,contrast,converged");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.rfind(std::to_string(s.records[static_cast<std::size_t>(rows - 1)].seed) + ",", 0) == 0);
    CHECK(line.back() == '1');
  }
  CHECK(rows == 4);
}
