#include "mlltr/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mlltr/pareto.hpp"
#include "mlltr/stats.hpp"
#include "mlltr/util.hpp"

namespace mlltr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string join_vector(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

std::string subset_name(const std::vector<std::size_t>& subset) {
  std::string s;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(subset[i]);
  }
  return s;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("config: methods must not be empty");
  if (n_preferences < 1) throw std::invalid_argument("config: n_preferences must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must not be empty");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("config: nu must be in (0, 1)");
  if (!(ec_mu > 0.0)) throw std::invalid_argument("config: ec_mu must be > 0");
  if (metric_ndcg_k < 1) throw std::invalid_argument("config: metric_ndcg_k must be >= 1");
  gbm.validate();
  loss.validate();
  if (!synthetic && train_path.empty())
    throw std::invalid_argument("config: train_path required in file mode");
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["data"]["synthetic"] = synthetic;
  if (synthetic) {
    j["data"]["queries"] = synth.num_queries;
    j["data"]["items_per_query"] = synth.items_per_query;
    j["data"]["feature_dim"] = synth.feature_dim;
    j["data"]["levels"] = synth.levels;
    j["data"]["conflict"] = synth.conflict;
    j["data"]["noise_std"] = synth.noise_std;
    j["data"]["test_queries"] = synth_test_queries;
  } else {
    j["data"]["train"] = train_path;
    j["data"]["test"] = test_path;
    j["data"]["promote_features"] = promote_features;
    j["data"]["keep_original_label"] = keep_original_label;
    j["data"]["quantize_levels"] = quantize_levels;
  }
  j["label_subsets"] = label_subsets;
  j["methods"] = ordered_json::array();
  for (const auto& m : methods)
    j["methods"].push_back({{"kind", to_string(m.kind)}, {"smoothing", m.smoothing}});
  j["n_preferences"] = n_preferences;
  j["seeds"] = seeds;
  j["gbm"] = {{"n_trees", gbm.n_trees},
              {"learning_rate", gbm.learning_rate},
              {"max_leaves", gbm.tree.max_leaves},
              {"max_depth", gbm.tree.max_depth},
              {"min_samples_leaf", gbm.tree.min_samples_leaf},
              {"convergence_tol", gbm.convergence_tol}};
  j["loss"] = {{"sigma", loss.sigma},
               {"use_delta_ndcg", loss.use_delta_ndcg},
               {"gain", loss.gain == NdcgGain::kExponential ? "exponential" : "linear"}};
  j["nu"] = nu;
  j["ec_mu"] = ec_mu;
  j["dbgd_beta"] = dbgd_beta;
  j["metric_ndcg_k"] = metric_ndcg_k;
  j["workers"] = workers;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    cfg.synthetic = d.value("synthetic", true);
    if (cfg.synthetic) {
      cfg.synth.num_queries = d.value("queries", cfg.synth.num_queries);
      cfg.synth.items_per_query = d.value("items_per_query", cfg.synth.items_per_query);
      cfg.synth.feature_dim = d.value("feature_dim", cfg.synth.feature_dim);
      cfg.synth.levels = d.value("levels", cfg.synth.levels);
      cfg.synth.conflict = d.value("conflict", cfg.synth.conflict);
      cfg.synth.noise_std = d.value("noise_std", cfg.synth.noise_std);
      cfg.synth_test_queries = d.value("test_queries", cfg.synth_test_queries);
    } else {
      cfg.train_path = d.value("train", "");
      cfg.test_path = d.value("test", "");
      cfg.promote_features = d.value("promote_features", std::vector<std::size_t>{});
      cfg.keep_original_label = d.value("keep_original_label", true);
      cfg.quantize_levels = d.value("quantize_levels", 5);
    }
  }
  cfg.label_subsets = j.value("label_subsets", std::vector<std::vector<std::size_t>>{});
  if (j.contains("methods")) {
    for (const auto& m : j.at("methods")) {
      MethodSpec spec;
      spec.kind = combinator_from_string(m.at("kind").get<std::string>());
      spec.smoothing = m.value("smoothing", false);
      cfg.methods.push_back(spec);
    }
  }
  cfg.n_preferences = j.value("n_preferences", 5);
  cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
  if (j.contains("gbm")) {
    const auto& g = j.at("gbm");
    cfg.gbm.n_trees = g.value("n_trees", cfg.gbm.n_trees);
    cfg.gbm.learning_rate = g.value("learning_rate", cfg.gbm.learning_rate);
    cfg.gbm.tree.max_leaves = g.value("max_leaves", cfg.gbm.tree.max_leaves);
    cfg.gbm.tree.max_depth = g.value("max_depth", cfg.gbm.tree.max_depth);
    cfg.gbm.tree.min_samples_leaf = g.value("min_samples_leaf", cfg.gbm.tree.min_samples_leaf);
    cfg.gbm.convergence_tol = g.value("convergence_tol", cfg.gbm.convergence_tol);
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    cfg.loss.sigma = l.value("sigma", 1.0);
    cfg.loss.use_delta_ndcg = l.value("use_delta_ndcg", true);
    cfg.loss.gain =
        l.value("gain", std::string("exponential")) == "linear" ? NdcgGain::kLinear
                                                                : NdcgGain::kExponential;
  }
  cfg.nu = j.value("nu", 0.1);
  cfg.ec_mu = j.value("ec_mu", 10.0);
  cfg.dbgd_beta = j.value("dbgd_beta", 1.0);
  cfg.metric_ndcg_k = j.value("metric_ndcg_k", 5);
  cfg.workers = j.value("workers", 1);
  cfg.output_dir = j.value("output_dir", "mlltr-out");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

BaselineResult single_objective_baselines(const MultiLabelDataset& train_data,
                                          const GBMConfig& gbm,
                                          const std::vector<LossConfig>& losses) {
  const std::size_t k = train_data.label_count;
  BaselineResult result;
  result.ensembles.reserve(k);
  result.costs.reserve(k);
  for (std::size_t target = 0; target < k; ++target) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    r[static_cast<Eigen::Index>(target)] = 1.0;
    TrainResult tr =
        train(train_data, Preference::priorities(r), CombinatorKind::kLS, gbm, losses);
    result.costs.push_back(evaluate_costs(tr.ensemble, train_data, losses).costs);
    result.ensembles.push_back(std::move(tr.ensemble));
  }
  return result;
}

std::vector<Eigen::VectorXd> generate_rays(const std::vector<Eigen::VectorXd>& baseline_costs,
                                           int n) {
  if (n < 1) throw std::invalid_argument("generate_rays: n must be >= 1");
  const std::size_t k = baseline_costs.size();
  if (k != 2 && k != 3) throw std::invalid_argument("generate_rays: need 2 or 3 baselines");
  for (const auto& c : baseline_costs) {
    if (static_cast<std::size_t>(c.size()) != k)
      throw std::invalid_argument("generate_rays: baseline dimension mismatch");
    if ((c.array() <= 0.0).any())
      throw std::invalid_argument("generate_rays: baseline costs must be strictly positive");
  }

  std::vector<Eigen::VectorXd> rays;
  if (k == 2) {
    double theta_a = std::atan2(baseline_costs[0][1], baseline_costs[0][0]);
    double theta_b = std::atan2(baseline_costs[1][1], baseline_costs[1][0]);
    if (theta_a > theta_b) std::swap(theta_a, theta_b);
    if (theta_b - theta_a < 1e-12) {
      Log::Warning("generate_rays: colinear baselines, falling back to uniform weights");
      for (int i = 0; i < n; ++i) rays.push_back(Eigen::VectorXd::Constant(2, 0.5));
      return rays;
    }
    for (int i = 1; i <= n; ++i) {
      const double theta = theta_a + (theta_b - theta_a) * i / (n + 1);
      Eigen::VectorXd d(2);
      d << std::cos(theta), std::sin(theta);
      Eigen::VectorXd r = d.cwiseInverse();
      rays.push_back(r / r.sum());
    }
    return rays;
  }

  // K = 3: interior barycentric grid over the three baseline directions on
  // the sphere (normalized weighted sum of unit directions).
  std::vector<Eigen::VectorXd> units;
  for (const auto& c : baseline_costs) units.push_back(c / c.norm());
  const double span = (units[0] - units[1]).norm() + (units[1] - units[2]).norm() +
                      (units[0] - units[2]).norm();
  if (span < 1e-12) {
    Log::Warning("generate_rays: colinear baselines, falling back to uniform weights");
    for (int i = 0; i < n; ++i) rays.push_back(Eigen::VectorXd::Constant(3, 1.0 / 3.0));
    return rays;
  }
  int depth = 3;
  while ((depth - 1) * (depth - 2) / 2 < n) ++depth;
  std::vector<Eigen::VectorXd> grid;
  for (int i = 1; i <= depth - 2; ++i) {
    for (int j = 1; j <= depth - 1 - i; ++j) {
      const int l = depth - i - j;
      Eigen::VectorXd dir = (i * units[0] + j * units[1] + l * units[2]) /
                            static_cast<double>(depth);
      dir /= dir.norm();
      grid.push_back(std::move(dir));
    }
  }
  const std::size_t count = grid.size();
  for (int t = 0; t < n; ++t) {
    const std::size_t idx = (static_cast<std::size_t>(t) * count) / static_cast<std::size_t>(n);
    Eigen::VectorXd r = grid[idx].cwiseInverse();
    rays.push_back(r / r.sum());
  }
  return rays;
}

std::vector<Eigen::VectorXd> generate_epsilon_bounds(const Eigen::VectorXd& baseline_costs,
                                                     std::size_t primary_index, int n) {
  if (n < 1) throw std::invalid_argument("generate_epsilon_bounds: n must be >= 1");
  const std::size_t k = static_cast<std::size_t>(baseline_costs.size());
  if (primary_index >= k)
    throw std::invalid_argument("generate_epsilon_bounds: primary index out of range");
  std::vector<Eigen::VectorXd> sets;
  for (int i = 1; i <= n; ++i) {
    Eigen::VectorXd bounds(static_cast<Eigen::Index>(k - 1));
    Eigen::Index s = 0;
    for (std::size_t kk = 0; kk < k; ++kk) {
      if (kk == primary_index) continue;
      bounds[s++] = baseline_costs[static_cast<Eigen::Index>(kk)] * i / (n + 1);
    }
    sets.push_back(std::move(bounds));
  }
  return sets;
}

std::vector<Eigen::VectorXd> reference_rays(const Eigen::VectorXd& reference_losses, int n) {
  const Eigen::Index k = reference_losses.size();
  const double delta = std::max(1e-9 * reference_losses.maxCoeff(), 1e-12);
  std::vector<Eigen::VectorXd> projections;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd proj = Eigen::VectorXd::Constant(k, delta);
    proj[i] = std::max(reference_losses[i], delta);
    projections.push_back(std::move(proj));
  }
  return generate_rays(projections, n);
}

namespace {

// Shared single-run driver; returns the trained result plus metrics.
struct CellContext {
  const MultiLabelDataset* train = nullptr;
  const MultiLabelDataset* test = nullptr;
  std::vector<Eigen::VectorXd> rays;
  std::vector<Eigen::VectorXd> bound_sets;
  Eigen::VectorXd scaling;  // single-objective-worst per cost
  bool ok = false;
  std::string error;
};

void run_cell(const ExperimentConfig& cfg, const CellContext& ctx, RunRecord* rec) {
  const std::vector<LossConfig> losses{cfg.loss};
  Preference pref;
  if (is_priority_kind(rec->method.kind)) {
    rec->preference_weights = ctx.rays[static_cast<std::size_t>(rec->preference_id)];
    pref = Preference::priorities(rec->preference_weights);
  } else {
    rec->epsilon_bounds = ctx.bound_sets[static_cast<std::size_t>(rec->preference_id)];
    pref = Preference::epsilon_bounds(0, rec->epsilon_bounds, cfg.ec_mu);
  }

  GBMConfig gbm = cfg.gbm;
  gbm.rng_seed = rec->seed;
  CombinatorState state;
  state.smoothing = rec->method.smoothing;
  state.nu = cfg.nu;
  state.dbgd_beta = cfg.dbgd_beta;

  TrainResult tr = train(*ctx.train, pref, rec->method.kind, gbm, losses, state);
  rec->cost_trace = tr.trace.costs;

  const FlatDataset flat_train = FlatDataset::from(*ctx.train);
  const std::vector<double> train_scores = predict_all(tr.ensemble, flat_train);
  rec->train_costs = evaluate_costs_flat(flat_train, train_scores, losses).costs;

  const FlatDataset flat_test = FlatDataset::from(*ctx.test);
  const std::vector<double> test_scores = predict_all(tr.ensemble, flat_test);
  rec->test_costs = evaluate_costs_flat(flat_test, test_scores, losses).costs;
  rec->test_ndcg.resize(rec->test_costs.size());
  for (Eigen::Index k = 0; k < rec->test_ndcg.size(); ++k)
    rec->test_ndcg[k] = mean_ndcg_at_k(flat_test, test_scores, static_cast<std::size_t>(k),
                                       cfg.metric_ndcg_k, cfg.loss.gain);
  if (is_priority_kind(rec->method.kind)) {
    rec->mwl_test = mwl(rec->test_costs, rec->preference_weights);
    rec->has_mwl = true;
  }
  rec->ok = true;
}

struct PairSides {
  std::string name;
  std::optional<MethodSpec> orig;
  std::optional<MethodSpec> ma;
};

struct SideMetrics {
  std::vector<double> mwl_by_cell;       // indexed pref * n_seeds + seed, NaN when missing
  std::vector<double> hvi_cost_by_seed;  // NaN when missing
  std::vector<double> hvi_ndcg_by_seed;
  std::optional<double> mwl_mean, hvi_cost_mean, hvi_ndcg_mean;
};

std::vector<PairSides> method_pairs(const std::vector<MethodSpec>& methods) {
  auto find = [&](CombinatorKind kind, bool smoothing) -> std::optional<MethodSpec> {
    for (const auto& m : methods)
      if (m.kind == kind && m.smoothing == smoothing) return m;
    return std::nullopt;
  };
  std::vector<PairSides> pairs;
  // SLA pairs with LS: the static rule is the fully smoothed limit of the
  // stochastic one.
  if (find(CombinatorKind::kSLA, false) || find(CombinatorKind::kLS, false)) {
    pairs.push_back({"sla/ls", find(CombinatorKind::kSLA, false), find(CombinatorKind::kLS, false)});
  }
  for (CombinatorKind kind : {CombinatorKind::kWC, CombinatorKind::kEPO, CombinatorKind::kWCMGDA,
                              CombinatorKind::kECAL, CombinatorKind::kECDBGD}) {
    const auto orig = find(kind, false);
    const auto ma = find(kind, true);
    if (orig || ma) pairs.push_back({to_string(kind), orig, ma});
  }
  return pairs;
}

std::string csv_or_dash(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("--");
}

}  // namespace

GridOutcome run_grid(const ExperimentConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  fs::create_directories(config.output_dir + "/traces");
  {
    std::ofstream cfg_out(config.output_dir + "/resolved_config.json");
    cfg_out << config.to_json() << '\n';
  }

  // Materialize datasets.
  MultiLabelDataset file_train, file_test;
  if (!config.synthetic) {
    LabelPromotionSpec spec;
    spec.promoted_feature_indices = config.promote_features;
    spec.keep_original_label = config.keep_original_label;
    spec.quantize_levels = config.quantize_levels;
    file_train = promote_labels(parse_letor_file(config.train_path), spec);
    file_test = promote_labels(
        parse_letor_file(config.test_path.empty() ? config.train_path : config.test_path), spec);
  }

  std::vector<std::vector<std::size_t>> subsets = config.label_subsets;
  const std::size_t total_labels = config.synthetic ? 2 : file_train.label_count;
  if (subsets.empty()) {
    std::vector<std::size_t> all(total_labels);
    for (std::size_t i = 0; i < total_labels; ++i) all[i] = i;
    subsets.push_back(all);
  }
  for (const auto& subset : subsets) {
    for (std::size_t label : subset)
      if (label >= total_labels)
        throw std::invalid_argument("config: label " + std::to_string(label) + " does not exist");
  }

  const std::size_t n_subsets = subsets.size();
  const std::size_t n_seeds = config.seeds.size();

  // Per (subset, seed) contexts: datasets, baselines, rays, bounds, scaling.
  std::vector<CellContext> contexts(n_subsets * n_seeds);
  std::vector<MultiLabelDataset> train_store(n_subsets * n_seeds);
  std::vector<MultiLabelDataset> test_store(n_subsets * n_seeds);
  std::vector<BaselineResult> baseline_store(n_subsets * n_seeds);

  parallel_for(contexts.size(), config.workers, [&](std::size_t idx) {
    const std::size_t si = idx / n_seeds;
    const std::size_t di = idx % n_seeds;
    CellContext& ctx = contexts[idx];
    try {
      if (config.synthetic) {
        SyntheticConfig sc = config.synth;
        sc.seed = config.seeds[di];
        MultiLabelDataset train_full = make_synthetic_conflict(sc);
        sc.seed = config.seeds[di] + 1000003;
        sc.num_queries = config.synth_test_queries;
        MultiLabelDataset test_full = make_synthetic_conflict(sc);
        train_store[idx] = train_full.select_labels(subsets[si]);
        test_store[idx] = test_full.select_labels(subsets[si]);
      } else {
        train_store[idx] = file_train.select_labels(subsets[si]);
        test_store[idx] = file_test.select_labels(subsets[si]);
      }
      ctx.train = &train_store[idx];
      ctx.test = &test_store[idx];

      GBMConfig gbm = config.gbm;
      gbm.rng_seed = config.seeds[di];
      baseline_store[idx] =
          single_objective_baselines(*ctx.train, gbm, std::vector<LossConfig>{config.loss});
      const auto& bl = baseline_store[idx];

      const std::size_t k = ctx.train->label_count;
      if (k >= 2 && k <= 3) ctx.rays = generate_rays(bl.costs, config.n_preferences);
      ctx.bound_sets = generate_epsilon_bounds(bl.costs[0], 0, config.n_preferences);

      // "Worst performance of single objective methods" per cost.
      ctx.scaling = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
      for (const auto& c : bl.costs) ctx.scaling = ctx.scaling.cwiseMax(c);
      ctx.ok = true;
    } catch (const std::exception& e) {
      ctx.error = e.what();
    }
  });

  // Grid cells in deterministic order: subset, method, preference, seed.
  GridOutcome outcome;
  for (std::size_t si = 0; si < n_subsets; ++si) {
    for (const auto& method : config.methods) {
      for (int pref = 0; pref < config.n_preferences; ++pref) {
        for (std::size_t di = 0; di < n_seeds; ++di) {
          RunRecord rec;
          rec.subset_id = subset_name(subsets[si]);
          rec.method = method;
          rec.preference_id = pref;
          rec.seed = config.seeds[di];
          outcome.runs.push_back(std::move(rec));
        }
      }
    }
  }
  outcome.total_cells = static_cast<int>(outcome.runs.size());

  parallel_for(outcome.runs.size(), config.workers, [&](std::size_t i) {
    RunRecord& rec = outcome.runs[i];
    const std::size_t si = [&] {
      for (std::size_t s = 0; s < n_subsets; ++s)
        if (subset_name(subsets[s]) == rec.subset_id) return s;
      return std::size_t{0};
    }();
    std::size_t di = 0;
    for (std::size_t d = 0; d < n_seeds; ++d)
      if (config.seeds[d] == rec.seed) di = d;
    const CellContext& ctx = contexts[si * n_seeds + di];
    try {
      if (!ctx.ok) throw std::runtime_error("context failed: " + ctx.error);
      if (is_priority_kind(rec.method.kind) &&
          static_cast<std::size_t>(rec.preference_id) >= ctx.rays.size())
        throw std::runtime_error("no preference ray available (K not in {2,3}?)");
      run_cell(config, ctx, &rec);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });
  for (const auto& rec : outcome.runs)
    if (!rec.ok) ++outcome.failed_cells;

  // ---- runs.csv + per-run traces ----
  outcome.runs_csv = config.output_dir + "/runs.csv";
  {
    std::ofstream out(outcome.runs_csv);
    out << "subset,method,smoothing,pref_id,seed,status,error,preference_r,epsilon_bounds,"
           "train_costs,test_costs,test_ndcg,mwl_test\n";
    for (const auto& rec : outcome.runs) {
      out << rec.subset_id << ',' << to_string(rec.method.kind) << ','
          << (rec.method.smoothing ? "ma" : "orig") << ',' << rec.preference_id << ',' << rec.seed
          << ',' << (rec.ok ? "ok" : "failed") << ',' << rec.error << ','
          << join_vector(rec.preference_weights) << ',' << join_vector(rec.epsilon_bounds) << ','
          << join_vector(rec.train_costs) << ',' << join_vector(rec.test_costs) << ','
          << join_vector(rec.test_ndcg) << ','
          << (rec.has_mwl ? format_double(rec.mwl_test) : std::string("--")) << '\n';
    }
  }
  for (const auto& rec : outcome.runs) {
    if (!rec.ok) continue;
    std::ofstream out(config.output_dir + "/traces/" + rec.subset_id + "_" +
                      to_string(rec.method.kind) + "_" + (rec.method.smoothing ? "ma" : "orig") +
                      "_p" + std::to_string(rec.preference_id) + "_seed" +
                      std::to_string(rec.seed) + ".csv");
    out << "iter";
    for (Eigen::Index k = 0; k < rec.train_costs.size(); ++k) out << ",c_" << (k + 1);
    out << '\n';
    for (std::size_t t = 0; t < rec.cost_trace.size(); ++t) {
      out << t;
      for (Eigen::Index k = 0; k < rec.cost_trace[t].size(); ++k)
        out << ',' << format_double(rec.cost_trace[t][k]);
      out << '\n';
    }
  }

  // ---- baselines.csv ----
  outcome.baselines_csv = config.output_dir + "/baselines.csv";
  {
    std::ofstream out(outcome.baselines_csv);
    out << "subset,seed,baseline_label,train_costs\n";
    for (std::size_t si = 0; si < n_subsets; ++si) {
      for (std::size_t di = 0; di < n_seeds; ++di) {
        const auto& bl = baseline_store[si * n_seeds + di];
        for (std::size_t k = 0; k < bl.costs.size(); ++k) {
          out << subset_name(subsets[si]) << ',' << config.seeds[di] << ',' << k << ','
              << join_vector(bl.costs[k]) << '\n';
        }
      }
    }
  }

  // ---- aggregate.csv (Table-1 layout: orig / ma / gain%) ----
  outcome.aggregate_csv = config.output_dir + "/aggregate.csv";
  std::ofstream agg(outcome.aggregate_csv);
  agg << "subset,pair,mwl_orig,mwl_ma,mwl_gain_pct,mwl_p,"
         "hvi_cost_orig,hvi_cost_ma,hvi_cost_gain_pct,hvi_cost_p,"
         "hvi_ndcg_orig,hvi_ndcg_ma,hvi_ndcg_gain_pct,hvi_ndcg_p\n";

  auto find_run = [&](std::size_t si, const MethodSpec& m, int pref,
                      std::size_t di) -> const RunRecord* {
    const std::string sid = subset_name(subsets[si]);
    for (const auto& rec : outcome.runs) {
      if (rec.subset_id == sid && rec.method.kind == m.kind &&
          rec.method.smoothing == m.smoothing && rec.preference_id == pref &&
          rec.seed == config.seeds[di])
        return &rec;
    }
    return nullptr;
  };

  for (std::size_t si = 0; si < n_subsets; ++si) {
    // Reference points per seed, shared by every compared method.
    std::vector<Eigen::VectorXd> cost_ref(n_seeds), ndcg_ref(n_seeds);
    for (std::size_t di = 0; di < n_seeds; ++di) {
      const CellContext& ctx = contexts[si * n_seeds + di];
      if (!ctx.ok) continue;
      const Eigen::Index k = ctx.scaling.size();
      Eigen::VectorXd worst_cost = Eigen::VectorXd::Constant(k, 0.0);
      Eigen::VectorXd worst_ndcg = Eigen::VectorXd::Constant(k, 1.0);
      for (const auto& rec : outcome.runs) {
        if (!rec.ok || rec.subset_id != subset_name(subsets[si]) || rec.seed != config.seeds[di])
          continue;
        worst_cost = worst_cost.cwiseMax(rec.train_costs.cwiseQuotient(ctx.scaling));
        worst_ndcg = worst_ndcg.cwiseMin(rec.test_ndcg);
      }
      cost_ref[di] = worst_cost * 1.01;
      ndcg_ref[di] = worst_ndcg * 0.99;
    }

    auto side_metrics = [&](const MethodSpec& m) {
      SideMetrics side;
      side.mwl_by_cell.assign(static_cast<std::size_t>(config.n_preferences) * n_seeds,
                              std::numeric_limits<double>::quiet_NaN());
      side.hvi_cost_by_seed.assign(n_seeds, std::numeric_limits<double>::quiet_NaN());
      side.hvi_ndcg_by_seed.assign(n_seeds, std::numeric_limits<double>::quiet_NaN());
      double mwl_sum = 0.0;
      int mwl_n = 0;
      for (std::size_t di = 0; di < n_seeds; ++di) {
        const CellContext& ctx = contexts[si * n_seeds + di];
        if (!ctx.ok) continue;
        std::vector<Eigen::VectorXd> cost_points, ndcg_points;
        for (int pref = 0; pref < config.n_preferences; ++pref) {
          const RunRecord* rec = find_run(si, m, pref, di);
          if (!rec || !rec->ok) continue;
          cost_points.push_back(rec->train_costs.cwiseQuotient(ctx.scaling));
          ndcg_points.push_back(rec->test_ndcg);
          if (rec->has_mwl) {
            side.mwl_by_cell[static_cast<std::size_t>(pref) * n_seeds + di] = rec->mwl_test;
            mwl_sum += rec->mwl_test;
            ++mwl_n;
          }
        }
        if (!cost_points.empty()) {
          HVIConfig hvi_cfg;
          hvi_cfg.reference_point = cost_ref[di];
          side.hvi_cost_by_seed[di] = hypervolume(cost_points, hvi_cfg, Orientation::kCost);
          hvi_cfg.reference_point = ndcg_ref[di];
          side.hvi_ndcg_by_seed[di] = hypervolume(ndcg_points, hvi_cfg, Orientation::kGain);
        }
      }
      if (mwl_n > 0) side.mwl_mean = mwl_sum / mwl_n;
      auto mean_of = [](const std::vector<double>& v) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (double x : v)
          if (!std::isnan(x)) {
            sum += x;
            ++n;
          }
        if (n == 0) return std::nullopt;
        return sum / n;
      };
      side.hvi_cost_mean = mean_of(side.hvi_cost_by_seed);
      side.hvi_ndcg_mean = mean_of(side.hvi_ndcg_by_seed);
      return side;
    };

    auto paired_p = [](const std::vector<double>& a,
                       const std::vector<double>& b) -> std::optional<double> {
      std::vector<double> xa, xb;
      for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (!std::isnan(a[i]) && !std::isnan(b[i])) {
          xa.push_back(a[i]);
          xb.push_back(b[i]);
        }
      }
      if (xa.size() < 2) return std::nullopt;
      return paired_t_test(xa, xb).p_value;
    };

    auto gain_pct = [](const std::optional<double>& orig,
                       const std::optional<double>& ma) -> std::optional<double> {
      if (!orig || !ma || *orig == 0.0) return std::nullopt;
      return (*ma - *orig) / *orig * 100.0;
    };

    for (const auto& pair : method_pairs(config.methods)) {
      std::optional<SideMetrics> orig, ma;
      if (pair.orig) orig = side_metrics(*pair.orig);
      if (pair.ma) ma = side_metrics(*pair.ma);

      std::optional<double> mwl_o = orig ? orig->mwl_mean : std::nullopt;
      std::optional<double> mwl_m = ma ? ma->mwl_mean : std::nullopt;
      std::optional<double> hc_o = orig ? orig->hvi_cost_mean : std::nullopt;
      std::optional<double> hc_m = ma ? ma->hvi_cost_mean : std::nullopt;
      std::optional<double> hn_o = orig ? orig->hvi_ndcg_mean : std::nullopt;
      std::optional<double> hn_m = ma ? ma->hvi_ndcg_mean : std::nullopt;

      std::optional<double> p_mwl, p_hc, p_hn;
      if (orig && ma) {
        p_mwl = paired_p(orig->mwl_by_cell, ma->mwl_by_cell);
        p_hc = paired_p(orig->hvi_cost_by_seed, ma->hvi_cost_by_seed);
        p_hn = paired_p(orig->hvi_ndcg_by_seed, ma->hvi_ndcg_by_seed);
      }

      agg << subset_name(subsets[si]) << ',' << pair.name << ',' << csv_or_dash(mwl_o) << ','
          << csv_or_dash(mwl_m) << ',' << csv_or_dash(gain_pct(mwl_o, mwl_m)) << ','
          << csv_or_dash(p_mwl) << ',' << csv_or_dash(hc_o) << ',' << csv_or_dash(hc_m) << ','
          << csv_or_dash(gain_pct(hc_o, hc_m)) << ',' << csv_or_dash(p_hc) << ','
          << csv_or_dash(hn_o) << ',' << csv_or_dash(hn_m) << ','
          << csv_or_dash(gain_pct(hn_o, hn_m)) << ',' << csv_or_dash(p_hn) << '\n';
    }
  }
  agg.close();
  return outcome;
}

ReferenceOutcome explore_from_reference(const ExperimentConfig& config,
                                        const TreeEnsemble& reference) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  MultiLabelDataset train_data;
  if (config.synthetic) {
    SyntheticConfig sc = config.synth;
    sc.seed = config.seeds.front();
    train_data = make_synthetic_conflict(sc);
  } else {
    LabelPromotionSpec spec;
    spec.promoted_feature_indices = config.promote_features;
    spec.keep_original_label = config.keep_original_label;
    spec.quantize_levels = config.quantize_levels;
    train_data = promote_labels(parse_letor_file(config.train_path), spec);
  }
  if (!config.label_subsets.empty())
    train_data = train_data.select_labels(config.label_subsets.front());
  if (reference.feature_dim != train_data.feature_dim)
    throw std::invalid_argument("explore_from_reference: reference model feature dim mismatch");

  const std::vector<LossConfig> losses{config.loss};
  ReferenceOutcome outcome;
  outcome.reference_losses = evaluate_costs(reference, train_data, losses).costs;
  const std::vector<Eigen::VectorXd> rays =
      reference_rays(outcome.reference_losses, config.n_preferences);

  std::vector<MethodSpec> methods;
  for (const auto& m : config.methods) {
    if (m.kind == CombinatorKind::kWC || m.kind == CombinatorKind::kWCMGDA) {
      methods.push_back(m);
    } else {
      Log::Warning("explore_from_reference: skipping " + m.id() +
                   " (reference mode supports wc and wc-mgda)");
    }
  }
  if (methods.empty())
    throw std::invalid_argument("explore_from_reference: no wc / wc-mgda methods configured");

  std::vector<ReferenceRunRecord> runs(methods.size() * rays.size());
  parallel_for(runs.size(), config.workers, [&](std::size_t i) {
    const std::size_t mi = i / rays.size();
    const std::size_t ri = i % rays.size();
    ReferenceRunRecord& rec = runs[i];
    rec.method = methods[mi];
    rec.preference_id = static_cast<int>(ri);
    rec.preference_weights = rays[ri];

    Preference pref = Preference::priorities(rays[ri]);
    pref.reference_losses = outcome.reference_losses;
    GBMConfig gbm = config.gbm;
    gbm.rng_seed = config.seeds.front();
    CombinatorState state;
    state.smoothing = rec.method.smoothing;
    state.nu = config.nu;

    TrainResult tr = train(train_data, pref, rec.method.kind, gbm, losses, state);
    rec.train_costs = evaluate_costs(tr.ensemble, train_data, losses).costs;
    rec.improvement = outcome.reference_losses - rec.train_costs;
    rec.dominates_reference = dominates(rec.train_costs, outcome.reference_losses);
    rec.mwl_vs_reference =
        (rays[ri].cwiseProduct(rec.train_costs - outcome.reference_losses)).maxCoeff();
  });
  outcome.runs = std::move(runs);

  outcome.report_csv = config.output_dir + "/reference_report.csv";
  std::ofstream out(outcome.report_csv);
  out << "method,smoothing,pref_id,preference_r,train_costs,improvement,dominates_reference,"
         "mwl_vs_reference\n";
  for (const auto& rec : outcome.runs) {
    out << to_string(rec.method.kind) << ',' << (rec.method.smoothing ? "ma" : "orig") << ','
        << rec.preference_id << ',' << join_vector(rec.preference_weights) << ','
        << join_vector(rec.train_costs) << ',' << join_vector(rec.improvement) << ','
        << (rec.dominates_reference ? 1 : 0) << ',' << format_double(rec.mwl_vs_reference)
        << '\n';
  }
  return outcome;
}

}  // namespace mlltr
