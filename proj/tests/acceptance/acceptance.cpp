// Acceptance checks. Usage: acceptance [criterion...]; with no arguments every
// criterion runs. Each prints one PASS/FAIL line followed by indented detail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/SVD>

#include "cml/bounds.hpp"
#include "cml/data.hpp"
#include "cml/geometry.hpp"
#include "cml/harness.hpp"
#include "cml/metric.hpp"
#include "cml/projection.hpp"
#include "cml/random.hpp"

using namespace cml;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sonar_path() {
  if (const char* env = std::getenv("CML_SONAR_CSV")) return env;
  return std::string(CML_DATA_DIR) + "/sonar.csv";
}

// 1. Monte Carlo stable dimension of 2000-point ellipsoid clouds vs the closed form.
Outcome ellipsoid_stable_dimension_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  int ok = 0, total = 0;
  for (const char* spec : {"constant", "power_decay:1", "exponential_decay:0.2"}) {
    for (int d : {10, 50, 100}) {
      const auto profile = EigenProfile::parse(spec, d);
      const auto cloud = gen_ellipsoid_dataset(profile, 2000, 1);
      const auto est = stable_dimension_mc(PointSet(cloud.features), kDefaultWidthSamples, 2);
      const double exact = ellipsoid_stable_dimension(singular_values(profile));
      const double rel = std::abs(est.value - exact) / exact;
      ++total;
      ok += rel <= 0.05;
      o.detail.push_back(fmt("%-22s d=%-3d  estimate %8.3f +- %.3f  closed form %8.3f  rel.err %5.1f%%  %s", spec,
                             d, est.value, est.std_error, exact, 100 * rel, rel <= 0.05 ? "ok" : "OUT"));
    }
  }
  const double secs = seconds_since(t0);
  o.pass = ok == total && secs < 120.0;
  o.summary = fmt("ellipsoid stable dimension within 5%%: %d/%d cells, %.1fs (limit 120s)", ok, total, secs);
  return o;
}

// 2. a(k) against direct Monte Carlo and the k/sqrt(k+1) <= a(k) <= sqrt(k) bracket.
Outcome expected_norm_correctness() {
  Outcome o;
  bool ok = true;
  std::mt19937_64 eng(424242);
  std::normal_distribution<double> gauss;
  for (int k : {1, 2, 10, 100}) {
    constexpr int samples = 1000000;
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) {
      double sq = 0.0;
      for (int j = 0; j < k; ++j) {
        const double z = gauss(eng);
        sq += z * z;
      }
      sum += std::sqrt(sq);
    }
    const double mc = sum / samples;
    const double rel = std::abs(expected_norm_a(k) - mc) / mc;
    ok = ok && rel <= 0.005;
    o.detail.push_back(fmt("k=%-3d  a(k)=%.6f  Monte Carlo=%.6f  rel.err %.4f%%", k, expected_norm_a(k), mc,
                           100 * rel));
  }
  int bracket_failures = 0;
  for (int k = 1; k <= 10000; ++k) {
    const double a = expected_norm_a(k);
    if (!(a >= k / std::sqrt(k + 1.0) && a <= std::sqrt(static_cast<double>(k)))) ++bracket_failures;
  }
  o.detail.push_back(fmt("bracket violations for k <= 10^4: %d", bracket_failures));
  o.pass = ok && bracket_failures == 0;
  o.summary = "a(k) within 0.5% of 10^6-sample Monte Carlo and inside its bracket";
  return o;
}

// 3. Gordon tail check for three geometries.
Outcome gordon_tail() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  constexpr int draws = 2000;
  std::vector<std::pair<std::string, PointSet>> sets;
  {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 50);
    x(0, 0) = 1.0;
    sets.emplace_back("singleton d=50", PointSet(x));
    Rng rng(3);
    Eigen::MatrixXd s = normal_matrix(500, 50, rng);
    s.array().colwise() /= s.rowwise().norm().array();
    sets.emplace_back("sphere 2*S^49 (500 pts)", PointSet(2.0 * s));
    sets.emplace_back("ellipsoid d=100 (500 pts)",
                      PointSet(gen_ellipsoid_dataset(EigenProfile::power_decay(100, 1.0), 500, 4).features));
  }
  bool ok = true;
  std::uint64_t cell = 0;
  for (const auto& [name, t] : sets) {
    for (auto [k, eps] : {std::pair{10, 1.0}, std::pair{20, 2.0}}) {
      const auto c = gordon_tail_check(t, k, eps, draws, kDefaultWidthSamples, mix_seed(5, cell++));
      // The estimated width may undershoot the true one by ~3 standard errors,
      // which eats into eps before the concentration bound applies.
      const double eps_eff = std::max(0.0, eps - 3.0 * c.omega_hat.std_error);
      const double p = c.b > 0 ? std::exp(-eps_eff * eps_eff / (2.0 * c.b * c.b)) : 0.0;
      const double limit = p + 3.0 * std::sqrt(p * (1.0 - p) / draws);
      const bool cell_ok = c.violation_fraction <= limit;
      ok = ok && cell_ok;
      o.detail.push_back(fmt("%-26s k=%-2d eps=%.0f  violations %.4f  bound %.4f  limit %.4f  %s", name.c_str(), k,
                             eps, c.violation_fraction, c.theoretical_bound, limit, cell_ok ? "ok" : "OUT"));
    }
  }
  const double secs = seconds_since(t0);
  o.pass = ok && secs < 180.0;
  o.summary = fmt("Gordon tail check, 6 cells x 2000 draws: %s, %.1fs (limit 180s)", ok ? "all within" : "exceeded",
                  secs);
  return o;
}

// 4. E ||Rx||^2 / ||x||^2 = 1 for the 1/k-variance projection.
Outcome norm_preservation() {
  Outcome o;
  Rng rng(6);
  const Eigen::VectorXd x = normal_matrix(200, 1, rng);
  double sum = 0.0;
  constexpr int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const auto r = sample_projection(20, 200, ScaleMode::inv_k_variance, mix_seed(7, static_cast<std::uint64_t>(t)));
    sum += apply_projection(r, x).squaredNorm() / x.squaredNorm();
  }
  const double mean = sum / draws;
  o.pass = std::abs(mean - 1.0) <= 0.02;
  o.summary = fmt("mean ||Rx||^2/||x||^2 over 10^4 draws (k=20, d=200) = %.4f, tolerance 2%%", mean);
  return o;
}

// 5. Bound evaluators against 50-digit arithmetic, plus monotonicity facts.
Outcome bound_evaluators() {
  using hp = boost::multiprecision::cpp_bin_float_50;
  Outcome o;
  const double rho = 1.3, eps = 0.05;
  const int d = 2000;
  auto inflation = [](hp k, hp s, hp lg) {
    const hp f = 1 + sqrt(s / k) + sqrt(2 * lg / k);
    return f * f;
  };
  double worst = 0.0;
  int points = 0;
  const std::vector<int> ks{1, 5, 20, 100, 1000};
  const std::vector<int> ns{50, 5000};
  const std::vector<double> ss{1.5, 30.0};
  for (int k : ks)
    for (int n : ns)
      for (double s : ss) {
        ++points;
        const BoundInputs b{k, n, s, rho, eps, d};
        const hp l2 = log(hp(2) / hp(eps));
        const hp l1 = log(1 / hp(eps));
        const hp gen = 2 * hp(rho) * sqrt(hp(k) / n) * inflation(k, s, l2) + sqrt(l2 / (2 * hp(n)));
        const hp exc = hp(rho) * inflation(k, s, l1);
        const hp amb = 2 * hp(rho) * sqrt(hp(d) / n) + sqrt(l1 / (2 * hp(n)));
        for (auto [got, want] : {std::pair{generalisation_bound(b), gen.convert_to<double>()},
                                 std::pair{excess_empirical_bound(b), exc.convert_to<double>()},
                                 std::pair{ambient_bound(b), amb.convert_to<double>()}})
          worst = std::max(worst, std::abs(got - want) / want);
      }
  o.detail.push_back(fmt("%d grid points, worst relative deviation %.2e (limit 1e-12)", points, worst));

  int mono_checks = 0, mono_fail = 0;
  auto expect = [&](bool cond) {
    ++mono_checks;
    mono_fail += !cond;
  };
  for (int n : ns)
    for (double s : ss) {
      // The generalisation bound falls until k* = (sqrt(s) + sqrt(2 ln(2/eps)))^2 and rises after it.
      const double k_star = std::pow(std::sqrt(s) + std::sqrt(2.0 * std::log(2.0 / eps)), 2);
      for (std::size_t i = 1; i < ks.size(); ++i) {
        const BoundInputs lo{ks[i - 1], n, s, rho, eps, d}, hi{ks[i], n, s, rho, eps, d};
        if (ks[i - 1] >= k_star) expect(generalisation_bound(hi) > generalisation_bound(lo));
        if (ks[i] <= k_star) expect(generalisation_bound(hi) < generalisation_bound(lo));
        expect(excess_empirical_bound(hi) < excess_empirical_bound(lo));
      }
    }
  for (int k : ks)
    for (int n : ns) {
      const BoundInputs lo{k, n, ss[0], rho, eps, d}, hi{k, n, ss[1], rho, eps, d};
      expect(generalisation_bound(hi) > generalisation_bound(lo));
      expect(excess_empirical_bound(hi) > excess_empirical_bound(lo));
    }
  for (int k : ks)
    for (double s : ss) {
      const BoundInputs lo{k, ns[0], s, rho, eps, d}, hi{k, ns[1], s, rho, eps, d};
      expect(generalisation_bound(hi) < generalisation_bound(lo));
      expect(ambient_bound(hi) < ambient_bound(lo));
      for (int n : ns) expect(excess_empirical_bound({k, n, s, rho, eps, d}) >= rho);
    }
  for (double s : ss) {
    const double limit = excess_empirical_bound({1000000000, 100, s, rho, eps, d});
    expect(std::abs(limit - rho) / rho <= 1e-3);
  }
  o.detail.push_back(fmt("monotonicity suite: %d/%d checks hold", mono_checks - mono_fail, mono_checks));
  o.pass = worst <= 1e-12 && mono_fail == 0;
  o.summary = "bound evaluators match 50-digit arithmetic and satisfy the monotonicity suite";
  return o;
}

// 6. Rademacher estimator: the closed-form sup dominates random feasible
//    metrics, and the estimate stays below the chain bound.
Outcome rademacher_soundness() {
  Outcome o;
  Rng rng(8);
  int violations = 0;
  long comparisons = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const int k = 1 + static_cast<int>(rng.below(5));
    const int d = k + static_cast<int>(rng.below(8));
    const Eigen::MatrixXd delta = normal_matrix(n, d, rng);
    const auto r = sample_projection(k, d, ScaleMode::inv_k_variance, rng.next());
    const Eigen::MatrixXd v = apply_projection(r, delta);
    const double diam = 0.5 + 3.0 * rng.uniform();
    std::vector<double> signs(static_cast<std::size_t>(n));
    for (auto& s : signs) s = (rng.next() >> 63) ? 1.0 : -1.0;
    const double sup = rademacher_draw_sup(v, signs, diam);
    for (int t = 0; t < 10000; ++t) {
      Eigen::MatrixXd m = normal_matrix(k, k, rng);
      if (k > 1 && t % 2) m.row(static_cast<Eigen::Index>(rng.below(k))).setZero();
      const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
      if (!(sigma > 0)) continue;
      m /= sigma * diam;
      double value = 0.0;
      for (int i = 0; i < n; ++i) value += signs[static_cast<std::size_t>(i)] * (m * v.row(i).transpose()).squaredNorm();
      ++comparisons;
      if (value > sup * (1.0 + 1e-12) + 1e-15) ++violations;
    }
  }
  o.detail.push_back(fmt("20 instances, %ld random feasible metrics: %d exceed the closed-form sup", comparisons,
                         violations));

  // Aggregate estimate vs sqrt(k/n)(1 + sqrt(s/k) + sqrt(2 ln(1/0.1)/k))^2.
  const auto data = gen_ellipsoid_dataset(EigenProfile::power_decay(50, 1.0), 400, 9);
  const PointSet cloud(data.features);
  const double diam = diameter(cloud);
  const double s_hat = stable_dimension_mc(cloud, 2000, 10).value;
  const auto pairs = make_pairs(data, 11);
  const int k = 5;
  const double chain = rademacher_chain_bound(k, static_cast<int>(pairs.size()), s_hat, 0.1);
  int exceed = 0;
  double worst = 0.0;
  for (int j = 0; j < 50; ++j) {
    const auto r = sample_projection(k, 50, ScaleMode::inv_k_variance, mix_seed(12, static_cast<std::uint64_t>(j)));
    const auto est = rademacher_estimate_mc(pairs, r, diam, 200, mix_seed(13, static_cast<std::uint64_t>(j)));
    worst = std::max(worst, est.estimate.value);
    if (est.estimate.value > chain + 3.0 * est.estimate.std_error) ++exceed;
  }
  o.detail.push_back(fmt("50 projections (n=%ld pairs, k=%d, s_hat=%.2f): largest estimate %.4f, chain bound %.4f, "
                         "exceedances %d (limit 5)",
                         static_cast<long>(pairs.size()), k, s_hat, worst, chain, exceed));
  o.pass = violations == 0 && exceed <= 5;
  o.summary = "Rademacher closed-form sup is never beaten and the estimate respects the chain bound";
  return o;
}

// 7. Loss examples, trainer normalization, Lipschitz property.
Outcome loss_metric_suite() {
  Outcome o;
  auto near = [](double a, double b) { return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b)); };
  const bool examples = loss(0.4, true, {2.0, 0.1, 0.4}) == 0.0 && loss(0.7, true, {5.0, 0.3, 0.7}) == 0.0 &&
                        near(loss(0.6, true, {2.0, 0.1, 0.4}), 0.4) &&
                        near(loss(0.05, false, {2.0, 0.1, 0.4}), 0.1) && loss(9.0, true, {2.0, 0.1, 0.4}) == 1.0;
  o.detail.push_back(std::string("loss examples: ") + (examples ? "ok" : "MISMATCH"));

  // Trainer outputs on assorted inputs.
  double worst = 0.0;
  int runs = 0;
  Rng rng(14);
  for (int trial = 0; trial < 4; ++trial) {
    const int d = 20 + 10 * trial;
    const auto ds = gen_ellipsoid_dataset(EigenProfile::power_decay(d, 0.5 * trial), 200, 15 + trial);
    const auto r = sample_projection(5 + trial, d, ScaleMode::inv_k_variance, 16 + trial);
    LabeledDataset proj = ds;
    proj.features = apply_projection(r, ds.features);
    const double diam = diameter(PointSet(proj.features));
    const auto pairs = make_pairs(proj, 17);
    const auto p = default_loss_params(pair_sq_distances(identity_metric(proj.dim(), diam), pairs));
    TrainConfig cfg;
    cfg.seed = 18;
    cfg.max_epochs = 50;
    for (const Metric& m : {train_pairwise(pairs, p, cfg, diam).metric, train_lmnn(proj, cfg, diam).metric}) {
      const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(m.matrix).singularValues()(0);
      worst = std::max(worst, std::abs(sigma * diam - 1.0));
      ++runs;
    }
  }
  o.detail.push_back(fmt("%d trained metrics: max |sigma_max * diam_ref - 1| = %.2e (limit 1e-8)", runs, worst));

  int lipschitz_fail = 0;
  for (int t = 0; t < 100000; ++t) {
    const double l = 0.01 + rng.uniform();
    const LossParams p{0.1 + 20.0 * rng.uniform(), l, l + 0.01 + rng.uniform()};
    const double a = 3.0 * rng.uniform(), b = 3.0 * rng.uniform();
    const bool same = rng.next() & 1;
    const double gap = std::abs(loss(a, same, p) - loss(b, same, p));
    if (gap > p.rho * std::abs(a - b) * (1.0 + 1e-12) + 1e-15) ++lipschitz_fail;
  }
  o.detail.push_back(fmt("Lipschitz violations over 10^5 triples: %d", lipschitz_fail));
  o.pass = examples && worst <= 1e-8 && lipschitz_fail == 0;
  o.summary = "loss examples, trainer spectral normalization and loss Lipschitz property";
  return o;
}

std::map<std::pair<std::string, int>, double> mean_error(const std::vector<ResultRow>& rows, bool by_gamma) {
  std::map<std::pair<std::string, int>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    if (r.failed()) continue;
    auto& a = acc[{by_gamma ? fmt("%g", *r.gamma) : r.dataset, r.k}];
    a.first += *r.test_error;
    ++a.second;
  }
  std::map<std::pair<std::string, int>, double> out;
  for (const auto& [key, a] : acc) out[key] = a.first / a.second;
  return out;
}

int failed_rows(const std::vector<ResultRow>& rows) {
  int n = 0;
  for (const auto& r : rows) n += r.failed();
  return n;
}

// 8. Synthetic ellipsoids: isotropic data stays near chance, fast decay does much better.
Outcome synthetic_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const auto cfg = parse_config_text(
      "mode=synthetic\nd=200\nk=10\nreps=10\nn=2000\ntrain_fraction=0.8\n"
      "profile=constant\nprofile=exponential_decay:0.2\n");
  const double s_decay = ellipsoid_stable_dimension(singular_values(EigenProfile::exponential_decay(200, 0.2)));
  const auto rows = run_synthetic(cfg);
  const auto means = mean_error(rows, false);
  const double flat = means.at({"ellipsoid_constant", 10});
  const double decay = means.at({"ellipsoid_exponential_decay_0.2", 10});
  const double secs = seconds_since(t0);
  o.detail.push_back(fmt("constant profile (s=200): mean test error %.4f (need >= 0.4)", flat));
  o.detail.push_back(fmt("exponential decay 0.2 (s=%.2f): mean test error %.4f (need <= %.4f)", s_decay, decay,
                         flat - 0.15));
  o.detail.push_back(fmt("failed cells: %d", failed_rows(rows)));
  o.pass = failed_rows(rows) == 0 && s_decay <= 10.0 && flat >= 0.4 && decay <= flat - 0.15 && secs < 900.0;
  o.summary = fmt("synthetic k=10, d=200: %.3f vs %.3f, %.1fs (limit 900s)", flat, decay, secs);
  return o;
}

// 9. Sonar with embedding noise: error plateaus in k and grows with gamma.
Outcome benchmark_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  auto cfg = parse_config_text("mode=benchmark\ngamma=0.05\ngamma=0.5\nk=5,10,20,40,80\nreps=10\nambient_dim=100\n");
  cfg.dataset_path = sonar_path();
  const auto rows = run_benchmark(cfg);
  const auto means = mean_error(rows, true);
  bool plateau = true;
  double avg_low = 0.0, avg_high = 0.0;
  for (const char* g : {"0.05", "0.5"}) {
    std::string line = std::string("gamma=") + g + ":";
    for (int k : cfg.k_grid) line += fmt("  k=%d %.4f", k, means.at({g, k}));
    o.detail.push_back(line);
    plateau = plateau && means.at({g, 80}) <= means.at({g, 5}) + 0.02;
  }
  for (int k : cfg.k_grid) {
    avg_low += means.at({"0.05", k}) / cfg.k_grid.size();
    avg_high += means.at({"0.5", k}) / cfg.k_grid.size();
  }
  const double secs = seconds_since(t0);
  o.detail.push_back(fmt("average over k: gamma=0.05 %.4f, gamma=0.5 %.4f; failed cells %d", avg_low, avg_high,
                         failed_rows(rows)));
  o.pass = failed_rows(rows) == 0 && plateau && avg_high > avg_low && secs < 1200.0;
  o.summary = fmt("Sonar: %s from k=5 to k=80, gamma=0.5 %s gamma=0.05, %.1fs (limit 1200s)",
                  plateau ? "no rise" : "RISE", avg_high > avg_low ? "above" : "NOT above", secs);
  return o;
}

// 10. Byte-identical results across repeated runs.
Outcome determinism() {
  Outcome o;
  const std::string text =
      "mode=synthetic\nd=50\nk=5,10\nreps=3\nn=500\nprofile=constant\nprofile=exponential_decay:0.2\nworkers=2\n";
  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    auto cfg = parse_config_text(text);
    const auto dir = fs::temp_directory_path() / ("cml_acceptance_determinism_" + std::to_string(run));
    fs::remove_all(dir);
    cfg.output_dir = dir.string();
    run_experiment(cfg);
    std::ifstream in(dir / "results.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    outputs.push_back(buf.str());
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  o.pass = same;
  o.summary = fmt("two runs of a 12-cell synthetic sweep: results.csv %s (%zu bytes)",
                  same ? "byte-identical" : "DIFFERS", outputs[0].size());
  return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria = {
    {"C1 ellipsoid stable dimension", ellipsoid_stable_dimension_agreement},
    {"C2 a(k) correctness", expected_norm_correctness},
    {"C3 Gordon tail check", gordon_tail},
    {"C4 norm preservation", norm_preservation},
    {"C5 bound evaluators", bound_evaluators},
    {"C6 Rademacher estimator", rademacher_soundness},
    {"C7 loss and metric suite", loss_metric_suite},
    {"C8 synthetic error profiles", synthetic_reproduction},
    {"C9 Sonar noise sweep", benchmark_reproduction},
    {"C10 determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int c = 1; c <= static_cast<int>(kCriteria.size()); ++c) selected.push_back(c);

  int failures = 0;
  for (int c : selected) {
    if (c < 1 || c > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    const auto& [name, run] = kCriteria[static_cast<std::size_t>(c - 1)];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.summary.c_str());
    for (const auto& line : o.detail) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
