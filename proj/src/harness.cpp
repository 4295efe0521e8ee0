#include "cml/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "cml/data.hpp"
#include "cml/errors.hpp"
#include "cml/evaluation.hpp"
#include "cml/geometry.hpp"
#include "cml/projection.hpp"
#include "cml/random.hpp"
#include "cml/svg.hpp"

namespace cml {
namespace {

constexpr std::array<std::string_view, 41> kKeys = {
    "mode",           "dataset",          "out",
    "d",              "k",                "gamma",
    "profile",        "reps",             "trainer",
    "seed_data",      "seed_projection",  "seed_split",
    "seed_train",     "n",                "train_fraction",
    "ambient_dim",    "eps",              "stable_dim_samples",
    "bound_n",        "bound_s",          "bound_rho",
    "bound_d",        "geometry",         "epsilon",
    "gordon_profile", "gordon_points",    "gordon_draws",
    "width_samples",  "workers",          "record_timing",
    "loss_rho",       "loss_l",           "loss_u",
    "max_epochs",     "step_size",        "batch_size",
    "tolerance",      "lmnn_neighbors",   "lmnn_margin",
    "lmnn_pull_weight", "lmnn_impostor_refresh",
};

const std::set<std::string, std::less<>> kGridKeys = {"d", "k", "gamma", "profile", "geometry", "epsilon"};

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, std::string_view value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for key '" + key + "'");
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Runs every job on up to `workers` threads; jobs write to their own slots.
void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), jobs.size());
  if (count <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) jobs[i]();
    });
  }
}

int train_pair_count(const LabeledDataset& train) { return static_cast<int>(train.size() / 2); }

// One grid cell: project, train, evaluate.
ResultRow run_cell(const ExperimentConfig& cfg, const LabeledDataset& train, const LabeledDataset& test,
                   int k, int rep, double s_x, ResultRow row) {
  const auto start = std::chrono::steady_clock::now();
  row.k = k;
  row.rep = rep;
  row.seed = cfg.seeds.projection_base + static_cast<std::uint64_t>(rep);
  row.trainer = std::string(to_string(cfg.trainer));
  try {
    const int d = static_cast<int>(train.dim());
    const Projection r = sample_projection(k, d, ScaleMode::inv_k_variance, row.seed);
    LabeledDataset ptrain = train;
    LabeledDataset ptest = test;
    ptrain.features = apply_projection(r, train.features);
    ptest.features = apply_projection(r, test.features);

    const double diam_ref = diameter(PointSet(ptrain.features));
    if (!(diam_ref > 0.0)) throw std::runtime_error("compressed training set has zero diameter");
    const PairSet pairs = make_pairs(ptrain, cfg.seeds.train);
    LossParams loss_params = default_loss_params(pair_sq_distances(identity_metric(k, diam_ref), pairs));
    if (cfg.loss_rho) loss_params.rho = *cfg.loss_rho;
    if (cfg.loss_l) loss_params.l = *cfg.loss_l;
    if (cfg.loss_u) loss_params.u = *cfg.loss_u;
    loss_params.validate();

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seeds.train;
    Metric metric = identity_metric(k, diam_ref);
    switch (cfg.trainer) {
      case TrainerChoice::pairwise_erm:
        tc.algorithm = TrainerKind::pairwise_erm;
        metric = train_pairwise(pairs, loss_params, tc, diam_ref).metric;
        break;
      case TrainerChoice::lmnn:
        tc.algorithm = TrainerKind::lmnn;
        metric = train_lmnn(ptrain, tc, diam_ref).metric;
        break;
      case TrainerChoice::none:
        break;
    }

    row.test_error = evaluate(ptrain, ptest, metric).error_rate;
    row.test_error_euclidean = evaluate(ptrain, ptest).error_rate;
    row.train_error = leave_one_out_error(ptrain, &metric);

    const double s_used = std::clamp(s_x, 1e-12, static_cast<double>(d));
    const BoundInputs b{k, train_pair_count(train), s_used, loss_params.rho, cfg.eps, d};
    row.stable_dim_estimate = s_x;
    row.gen_bound = generalisation_bound(b);
    row.excess_bound = excess_empirical_bound(b);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string timings_csv(std::span<const ResultRow> rows) {
  std::string out = "mode,dataset,d,k,gamma,rep,wall_ms\n";
  for (const auto& r : rows) {
    out += r.mode + "," + r.dataset + "," + std::to_string(r.d) + "," + std::to_string(r.k) + "," +
           (r.gamma ? fmt6(*r.gamma) : "") + "," + std::to_string(r.rep) + "," + fmt6(r.wall_ms) + "\n";
  }
  return out;
}

// Provenance blocks of every training set in the sweep, plus the seeds that
// are not attached to a dataset.
std::string sweep_provenance(const ExperimentConfig& cfg) {
  std::string out = "[sweep]\nmode=" + std::string(to_string(cfg.mode)) +
                    "\ntrainer=" + std::string(to_string(cfg.trainer)) +
                    "\nprojection_seed_base=" + std::to_string(cfg.seeds.projection_base) +
                    "\ntrain_seed=" + std::to_string(cfg.seeds.train) + "\nprojection_scale=inv_k_variance\n";
  auto block = [&](const LabeledDataset& train) {
    out += "\n[" + train.name + "]\n" + train.provenance.to_text();
  };
  if (cfg.mode == Mode::synthetic) {
    for (const auto& spec : cfg.profiles)
      for (int d : cfg.d_grid)
        block(train_test_split(gen_ellipsoid_dataset(EigenProfile::parse(spec, d), cfg.n, cfg.seeds.data),
                               cfg.train_fraction, cfg.seeds.split)
                  .first);
  } else if (cfg.mode == Mode::benchmark) {
    const LabeledDataset normalized = normalize_features(load_csv_dataset(cfg.dataset_path));
    for (double gamma : cfg.gamma_grid) {
      auto train = train_test_split(embed_and_noise(normalized, cfg.ambient_dim, gamma, cfg.seeds.data),
                                    cfg.train_fraction, cfg.seeds.split)
                       .first;
      train.name += "_gamma" + fmt6(gamma);
      block(train);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::synthetic: return "synthetic";
    case Mode::benchmark: return "benchmark";
    case Mode::bounds: return "bounds";
    case Mode::gordon: return "gordon";
  }
  return "unknown";
}

std::string_view to_string(TrainerChoice trainer) {
  switch (trainer) {
    case TrainerChoice::pairwise_erm: return "pairwise_erm";
    case TrainerChoice::lmnn: return "lmnn";
    case TrainerChoice::none: return "none";
  }
  return "unknown";
}

std::span<const std::string_view> config_keys() { return kKeys; }

void reset_grid(ExperimentConfig& cfg, const std::string& key) {
  if (key == "d") cfg.d_grid.clear();
  else if (key == "k") cfg.k_grid.clear();
  else if (key == "gamma") cfg.gamma_grid.clear();
  else if (key == "profile") cfg.profiles.clear();
  else if (key == "geometry") cfg.geometries.clear();
  else if (key == "epsilon") cfg.epsilon_grid.clear();
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string_view value = trim(raw);
  auto as_int = [&] { return parse_number<int>(key, value); };
  auto as_u64 = [&] { return parse_number<std::uint64_t>(key, value); };
  auto as_double = [&] { return parse_number<double>(key, value); };

  if (kGridKeys.contains(key)) {
    for (auto item : split_list(value)) {
      if (key == "d") cfg.d_grid.push_back(parse_number<int>(key, item));
      else if (key == "k") cfg.k_grid.push_back(parse_number<int>(key, item));
      else if (key == "gamma") cfg.gamma_grid.push_back(parse_number<double>(key, item));
      else if (key == "epsilon") cfg.epsilon_grid.push_back(parse_number<double>(key, item));
      else if (key == "profile") cfg.profiles.emplace_back(item);
      else if (key == "geometry") cfg.geometries.emplace_back(item);
    }
    return;
  }
  if (key == "mode") {
    if (value == "synthetic") cfg.mode = Mode::synthetic;
    else if (value == "benchmark") cfg.mode = Mode::benchmark;
    else if (value == "bounds") cfg.mode = Mode::bounds;
    else if (value == "gordon") cfg.mode = Mode::gordon;
    else throw ConfigError("unknown mode '" + std::string(value) + "'");
  } else if (key == "trainer") {
    if (value == "pairwise_erm") cfg.trainer = TrainerChoice::pairwise_erm;
    else if (value == "lmnn") cfg.trainer = TrainerChoice::lmnn;
    else if (value == "none") cfg.trainer = TrainerChoice::none;
    else throw ConfigError("unknown trainer '" + std::string(value) + "'");
  } else if (key == "dataset") cfg.dataset_path = value;
  else if (key == "out") cfg.output_dir = value;
  else if (key == "reps") cfg.reps = as_int();
  else if (key == "seed_data") cfg.seeds.data = as_u64();
  else if (key == "seed_projection") cfg.seeds.projection_base = as_u64();
  else if (key == "seed_split") cfg.seeds.split = as_u64();
  else if (key == "seed_train") cfg.seeds.train = as_u64();
  else if (key == "n") cfg.n = as_int();
  else if (key == "train_fraction") cfg.train_fraction = as_double();
  else if (key == "ambient_dim") cfg.ambient_dim = as_int();
  else if (key == "eps") cfg.eps = as_double();
  else if (key == "stable_dim_samples") cfg.stable_dim_samples = as_int();
  else if (key == "bound_n") cfg.bound_n = as_int();
  else if (key == "bound_s") cfg.bound_s = as_double();
  else if (key == "bound_rho") cfg.bound_rho = as_double();
  else if (key == "bound_d") cfg.bound_d = as_int();
  else if (key == "gordon_profile") cfg.gordon_profile = value;
  else if (key == "gordon_points") cfg.gordon_points = as_int();
  else if (key == "gordon_draws") cfg.gordon_draws = as_int();
  else if (key == "width_samples") cfg.width_samples = as_int();
  else if (key == "workers") cfg.workers = as_int();
  else if (key == "record_timing") cfg.record_timing = parse_bool(key, value);
  else if (key == "loss_rho") cfg.loss_rho = as_double();
  else if (key == "loss_l") cfg.loss_l = as_double();
  else if (key == "loss_u") cfg.loss_u = as_double();
  else if (key == "max_epochs") cfg.train.max_epochs = as_int();
  else if (key == "step_size") cfg.train.step_size = as_double();
  else if (key == "batch_size") cfg.train.batch_size = as_int();
  else if (key == "tolerance") cfg.train.tolerance = as_double();
  else if (key == "lmnn_neighbors") cfg.train.lmnn_neighbors = as_int();
  else if (key == "lmnn_margin") cfg.train.lmnn_margin = as_double();
  else if (key == "lmnn_pull_weight") cfg.train.lmnn_pull_weight = as_double();
  else if (key == "lmnn_impostor_refresh") cfg.train.lmnn_impostor_refresh = as_int();
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen_grids;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (kGridKeys.contains(key) && seen_grids.insert(key).second) reset_grid(cfg, key);
    apply_setting(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (reps < 1) fail("reps must be positive");
  if (!(eps > 0.0 && eps < 1.0)) fail("eps must lie in (0, 1)");
  if (workers < 1) fail("workers must be positive");
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (loss_rho && !(*loss_rho > 0.0)) fail("loss_rho must be positive");
  if (loss_l && loss_u && !(*loss_l > 0.0 && *loss_l < *loss_u)) fail("need 0 < loss_l < loss_u");
  if (k_grid.empty()) fail("k grid is empty");
  for (int k : k_grid)
    if (k < 1) fail("k values must be positive");

  auto check_k_against = [&](int d, const std::string& what) {
    for (int k : k_grid)
      if (k > d) fail("k=" + std::to_string(k) + " exceeds " + what + "=" + std::to_string(d));
  };

  switch (mode) {
    case Mode::synthetic:
      if (d_grid.empty()) fail("d grid is empty");
      if (profiles.empty()) fail("profile grid is empty");
      for (int d : d_grid) {
        if (d < 1 || d > static_cast<int>(kLabelWeightCount)) fail("d must lie in [1, 1000]");
        check_k_against(d, "d");
      }
      for (const auto& p : profiles) {
        try {
          singular_values(EigenProfile::parse(p, d_grid.front()));
        } catch (const std::invalid_argument& e) {
          fail(e.what());
        }
      }
      if (n < 5) fail("n must be at least 5");
      if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
      break;
    case Mode::benchmark:
      if (dataset_path.empty()) fail("benchmark mode needs dataset=<path>");
      if (gamma_grid.empty()) fail("gamma grid is empty");
      for (double g : gamma_grid)
        if (!(g >= 0.0)) fail("gamma values must be non-negative");
      check_k_against(ambient_dim, "ambient_dim");
      if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
      if (stable_dim_samples < 2) fail("stable_dim_samples must be at least 2");
      break;
    case Mode::bounds:
      try {
        BoundInputs{1, bound_n, bound_s, bound_rho, eps, bound_d}.validate();
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      break;
    case Mode::gordon:
      if (d_grid.empty()) fail("d grid is empty");
      if (geometries.empty()) fail("geometry grid is empty");
      if (epsilon_grid.empty()) fail("epsilon grid is empty");
      for (int d : d_grid) check_k_against(d, "d");
      for (const auto& g : geometries)
        if (g != "singleton" && g != "sphere" && g != "ellipsoid") fail("unknown geometry '" + g + "'");
      for (double e : epsilon_grid)
        if (!(e > 0.0)) fail("epsilon values must be positive");
      if (gordon_points < 1 || gordon_draws < 1 || width_samples < 2) fail("gordon sizes must be positive");
      break;
  }
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    const double ga = a.gamma.value_or(-1.0);
    const double gb = b.gamma.value_or(-1.0);
    return std::tie(a.mode, a.dataset, a.d, a.k, ga, a.rep) < std::tie(b.mode, b.dataset, b.d, b.k, gb, b.rep);
  });
}

std::string results_csv(std::span<const ResultRow> rows, bool with_timing) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); };
  std::string out(kResultsHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += r.mode + "," + r.dataset + "," + std::to_string(r.d) + "," + std::to_string(r.k) + "," +
           opt(r.gamma) + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + r.trainer + "," +
           opt(r.train_error) + "," + opt(r.test_error) + "," + opt(r.test_error_euclidean) + "," +
           opt(r.stable_dim_estimate) + "," + opt(r.gen_bound) + "," + opt(r.excess_bound) + "," +
           (with_timing ? fmt6(r.wall_ms) : std::string()) + "\n";
  }
  return out;
}

std::vector<ResultRow> run_synthetic(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mode != Mode::synthetic) throw ConfigError("run_synthetic needs mode=synthetic");

  struct Prepared {
    LabeledDataset train;
    LabeledDataset test;
    double s_x;
    ResultRow base;
  };
  std::vector<Prepared> prepared;
  for (const auto& spec : cfg.profiles) {
    for (int d : cfg.d_grid) {
      const EigenProfile profile = EigenProfile::parse(spec, d);
      const auto sigma = singular_values(profile);
      const LabeledDataset ds = gen_ellipsoid_dataset(profile, cfg.n, cfg.seeds.data);
      auto [train, test] = train_test_split(ds, cfg.train_fraction, cfg.seeds.split);
      ResultRow base;
      base.mode = "synthetic";
      base.dataset = "ellipsoid_" + profile_label(profile);
      base.d = d;
      prepared.push_back({std::move(train), std::move(test), ellipsoid_stable_dimension(sigma), base});
    }
  }

  std::vector<ResultRow> rows;
  std::vector<std::function<void()>> jobs;
  for (const auto& p : prepared)
    for (std::size_t i = 0; i < cfg.k_grid.size() * static_cast<std::size_t>(cfg.reps); ++i) rows.push_back(p.base);
  std::size_t slot = 0;
  for (const auto& p : prepared) {
    for (int k : cfg.k_grid) {
      for (int rep = 1; rep <= cfg.reps; ++rep) {
        jobs.emplace_back([&cfg, &p, &rows, k, rep, slot] {
          rows[slot] = run_cell(cfg, p.train, p.test, k, rep, p.s_x, p.base);
        });
        ++slot;
      }
    }
  }
  run_jobs(jobs, cfg.workers);
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mode != Mode::benchmark) throw ConfigError("run_benchmark needs mode=benchmark");
  const LabeledDataset raw = load_csv_dataset(cfg.dataset_path);
  if (raw.dim() > cfg.ambient_dim)
    throw ConfigError("dataset has more features than ambient_dim");
  const LabeledDataset normalized = normalize_features(raw);

  struct Prepared {
    LabeledDataset train;
    LabeledDataset test;
    double s_x;
    ResultRow base;
  };
  std::vector<Prepared> prepared;
  for (double gamma : cfg.gamma_grid) {
    const LabeledDataset noisy = embed_and_noise(normalized, cfg.ambient_dim, gamma, cfg.seeds.data);
    auto [train, test] = train_test_split(noisy, cfg.train_fraction, cfg.seeds.split);
    const double s_x =
        stable_dimension_mc(PointSet(train.features), cfg.stable_dim_samples, cfg.seeds.data).value;
    ResultRow base;
    base.mode = "benchmark";
    base.dataset = raw.name;
    base.d = cfg.ambient_dim;
    base.gamma = gamma;
    prepared.push_back({std::move(train), std::move(test), s_x, base});
  }

  std::vector<ResultRow> rows;
  for (const auto& p : prepared)
    for (std::size_t i = 0; i < cfg.k_grid.size() * static_cast<std::size_t>(cfg.reps); ++i) rows.push_back(p.base);
  std::vector<std::function<void()>> jobs;
  std::size_t slot = 0;
  for (const auto& p : prepared) {
    for (int k : cfg.k_grid) {
      for (int rep = 1; rep <= cfg.reps; ++rep) {
        jobs.emplace_back([&cfg, &p, &rows, k, rep, slot] {
          rows[slot] = run_cell(cfg, p.train, p.test, k, rep, p.s_x, p.base);
        });
        ++slot;
      }
    }
  }
  run_jobs(jobs, cfg.workers);
  sort_rows(rows);
  return rows;
}

std::vector<TradeoffRow> run_bounds(const ExperimentConfig& cfg) {
  cfg.validate();
  try {
    return tradeoff_table(cfg.k_grid, cfg.bound_n, cfg.bound_s, cfg.bound_rho, cfg.eps, cfg.bound_d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<GordonRow> run_gordon(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<GordonRow> rows;
  std::uint64_t cell = 0;
  for (const auto& geometry : cfg.geometries) {
    for (int d : cfg.d_grid) {
      PointSet t;
      if (geometry == "singleton") {
        Rng rng(cfg.seeds.data);
        Eigen::MatrixXd x = normal_matrix(1, d, rng);
        t = PointSet(x / x.norm());
      } else if (geometry == "sphere") {
        Rng rng(cfg.seeds.data);
        Eigen::MatrixXd x = normal_matrix(cfg.gordon_points, d, rng);
        x.array().colwise() /= x.rowwise().norm().array();
        t = PointSet(std::move(x));
      } else {
        t = PointSet(gen_ellipsoid_dataset(EigenProfile::parse(cfg.gordon_profile, d), cfg.gordon_points,
                                           cfg.seeds.data)
                         .features);
      }
      for (int k : cfg.k_grid) {
        for (double eps : cfg.epsilon_grid) {
          GordonRow row{geometry, d, k, eps, {}};
          row.check = gordon_tail_check(t, k, eps, cfg.gordon_draws, cfg.width_samples,
                                        mix_seed(cfg.seeds.projection_base, cell++));
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

std::string gordon_csv(std::span<const GordonRow> rows) {
  std::string out(kGordonHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += r.geometry + "," + std::to_string(r.d) + "," + std::to_string(r.k) + "," + fmt6(r.epsilon) + "," +
           fmt6(r.check.violation_fraction) + "," + fmt6(r.check.theoretical_bound) + "," + fmt6(r.check.b) +
           "," + fmt6(r.check.omega_hat.value) + "," + fmt6(r.check.omega_hat.std_error) + "," +
           fmt6(r.check.rhs_used) + "\n";
  }
  return out;
}

std::vector<SeriesSummary> summarize(std::span<const ResultRow> rows) {
  using Key = std::tuple<std::string, std::string, double, bool>;
  std::map<Key, std::map<int, std::vector<double>>> groups;
  for (const auto& r : rows) {
    if (r.failed()) continue;
    const double series = r.gamma ? *r.gamma : static_cast<double>(r.d);
    if (r.test_error) groups[{r.mode, r.dataset, series, false}][r.k].push_back(*r.test_error);
    if (r.test_error_euclidean) groups[{r.mode, r.dataset, series, true}][r.k].push_back(*r.test_error_euclidean);
  }
  std::vector<SeriesSummary> out;
  for (const auto& [key, by_k] : groups) {
    const auto& [mode, dataset, series, baseline] = key;
    SeriesSummary s;
    s.mode = mode;
    s.dataset = dataset;
    s.baseline = baseline;
    s.key = (mode == "benchmark" ? "gamma=" + fmt6(series) : "d=" + std::to_string(static_cast<int>(series)));
    for (const auto& [k, values] : by_k) {
      SeriesPoint p;
      p.k = k;
      p.count = static_cast<int>(values.size());
      for (double v : values) p.mean += v;
      p.mean /= p.count;
      if (p.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - p.mean) * (v - p.mean);
        p.std_error = std::sqrt(ss / (p.count - 1)) / std::sqrt(static_cast<double>(p.count));
      }
      s.points.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::filesystem::path> emit_plots(std::span<const ResultRow> rows,
                                              const std::filesystem::path& output_dir) {
  const auto summaries = summarize(rows);
  std::map<std::pair<std::string, std::string>, svg::LineChart> charts;
  for (const auto& s : summaries) {
    auto& chart = charts[{s.mode, s.dataset}];
    chart.title = s.dataset + " (" + s.mode + ")";
    chart.x_label = "projection dimension k";
    chart.y_label = "1-NN test error";
    svg::Series series;
    series.label = s.baseline ? s.key + " euclidean" : s.key;
    series.dashed = s.baseline;
    for (const auto& p : s.points) series.points.push_back({static_cast<double>(p.k), p.mean, p.std_error});
    chart.series.push_back(std::move(series));
  }
  std::filesystem::create_directories(output_dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& [key, chart] : charts) {
    const auto path = output_dir / (sanitize(key.first + "_" + key.second) + ".svg");
    write_file(path, svg::render(chart));
    paths.push_back(path);
  }
  return paths;
}

int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  switch (cfg.mode) {
    case Mode::bounds:
      write_file(out_dir / "bounds.csv", tradeoff_csv(run_bounds(cfg)));
      return kExitOk;
    case Mode::gordon:
      write_file(out_dir / "gordon.csv", gordon_csv(run_gordon(cfg)));
      return kExitOk;
    case Mode::synthetic:
    case Mode::benchmark:
      break;
  }

  const auto rows = cfg.mode == Mode::synthetic ? run_synthetic(cfg) : run_benchmark(cfg);
  write_file(out_dir / "results.csv", results_csv(rows, cfg.record_timing));
  write_file(out_dir / "timings.csv", timings_csv(rows));

  std::string errors;
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.failed()) continue;
    ++failed;
    errors += r.dataset + " d=" + std::to_string(r.d) + " k=" + std::to_string(r.k) +
              (r.gamma ? " gamma=" + fmt6(*r.gamma) : "") + " rep=" + std::to_string(r.rep) + ": " + r.error + "\n";
  }
  if (failed > 0) {
    write_file(out_dir / "errors.log", errors);
    std::cerr << failed << " of " << rows.size() << " cells failed; see " << (out_dir / "errors.log") << "\n";
  }
  if (failed < rows.size()) emit_plots(rows, out_dir);

  write_file(out_dir / "provenance.txt", sweep_provenance(cfg));

  return (!rows.empty() && failed == rows.size()) ? kExitRuntime : kExitOk;
}

}  // namespace cml
