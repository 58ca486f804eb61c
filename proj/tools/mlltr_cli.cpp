#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlltr/experiment.hpp"
#include "mlltr/pareto.hpp"
#include "mlltr/synthetic.hpp"
#include "mlltr/trainer.hpp"
#include "mlltr/util.hpp"

namespace {

using namespace mlltr;

struct DataArgs {
  std::string path;
  bool synthetic = false;
  std::uint64_t synth_seed = 1;
  std::size_t synth_queries = 200;
  std::size_t synth_items = 20;
  std::vector<std::size_t> promote;
  int levels = 5;
  bool drop_original_label = false;
  std::vector<std::size_t> labels;
};

void add_data_options(CLI::App* cmd, DataArgs* args) {
  cmd->add_option("--data", args->path, "LETOR/SVMlight input file");
  cmd->add_flag("--synthetic", args->synthetic, "use the in-tree synthetic conflict workload");
  cmd->add_option("--synth-seed", args->synth_seed, "synthetic workload seed");
  cmd->add_option("--synth-queries", args->synth_queries, "synthetic query count");
  cmd->add_option("--synth-items", args->synth_items, "synthetic items per query");
  cmd->add_option("--promote", args->promote,
                  "0-based feature columns promoted to relevance labels");
  cmd->add_option("--levels", args->levels, "quantization levels for promoted labels");
  cmd->add_flag("--drop-original-label", args->drop_original_label,
                "discard the file's own label after promotion");
  cmd->add_option("--labels", args->labels, "label subset to train on (0-based)");
}

MultiLabelDataset load_data(const DataArgs& args) {
  MultiLabelDataset ds;
  if (args.synthetic) {
    SyntheticConfig sc;
    sc.seed = args.synth_seed;
    sc.num_queries = args.synth_queries;
    sc.items_per_query = args.synth_items;
    ds = make_synthetic_conflict(sc);
  } else {
    if (args.path.empty()) throw CLI::ValidationError("--data or --synthetic is required");
    ds = parse_letor_file(args.path);
    if (!args.promote.empty() || args.drop_original_label) {
      LabelPromotionSpec spec;
      spec.promoted_feature_indices = args.promote;
      spec.keep_original_label = !args.drop_original_label;
      spec.quantize_levels = args.levels;
      ds = promote_labels(ds, spec);
    }
  }
  if (!args.labels.empty()) ds = ds.select_labels(args.labels);
  return ds;
}

struct MethodArgs {
  std::string method = "ls";
  bool ma = false;
  std::vector<double> weights;
  int ec_primary = 0;
  std::vector<double> ec_bounds;
  double mu = 10.0;
  double nu = 0.1;
};

void add_method_options(CLI::App* cmd, MethodArgs* args) {
  cmd->add_option("--method", args->method, "ls | sla | wc | epo | wc-mgda | ec-al | ec-dbgd");
  cmd->add_flag("--ma", args->ma, "smooth coefficients with the moving average");
  cmd->add_option("--weights", args->weights, "priority vector r");
  cmd->add_option("--ec-primary", args->ec_primary, "primary objective for EC methods");
  cmd->add_option("--ec-bounds", args->ec_bounds, "epsilon upper bounds (one per secondary)");
  cmd->add_option("--mu", args->mu, "EC-AL multiplier growth rate");
  cmd->add_option("--nu", args->nu, "moving-average factor");
}

Preference build_preference(const MethodArgs& args, std::size_t label_count) {
  const CombinatorKind kind = combinator_from_string(args.method);
  if (is_priority_kind(kind)) {
    Eigen::VectorXd r;
    if (args.weights.empty()) {
      r = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(label_count),
                                    1.0 / static_cast<double>(label_count));
    } else {
      r = Eigen::Map<const Eigen::VectorXd>(args.weights.data(),
                                            static_cast<Eigen::Index>(args.weights.size()));
    }
    return Preference::priorities(r);
  }
  if (args.ec_bounds.size() != label_count - 1)
    throw CLI::ValidationError("--ec-bounds must list one bound per secondary objective");
  Eigen::VectorXd bounds = Eigen::Map<const Eigen::VectorXd>(
      args.ec_bounds.data(), static_cast<Eigen::Index>(args.ec_bounds.size()));
  return Preference::epsilon_bounds(static_cast<std::size_t>(args.ec_primary), bounds, args.mu);
}

void add_gbm_options(CLI::App* cmd, GBMConfig* gbm) {
  cmd->add_option("--trees", gbm->n_trees, "boosting iterations");
  cmd->add_option("--learning-rate", gbm->learning_rate, "learning rate");
  cmd->add_option("--max-leaves", gbm->tree.max_leaves, "max leaves per tree");
  cmd->add_option("--max-depth", gbm->tree.max_depth, "max tree depth");
  cmd->add_option("--min-samples-leaf", gbm->tree.min_samples_leaf, "min samples per leaf");
  cmd->add_option("--tol", gbm->convergence_tol, "cost-vector convergence tolerance");
  cmd->add_option("--seed", gbm->rng_seed, "RNG seed");
}

int cmd_train(const DataArgs& data_args, const MethodArgs& method_args, const GBMConfig& gbm,
              double sigma, bool ranknet, const std::string& out_path,
              const std::string& trace_path) {
  MultiLabelDataset ds = load_data(data_args);
  LossConfig loss;
  loss.sigma = sigma;
  loss.use_delta_ndcg = !ranknet;
  CombinatorState state;
  state.smoothing = method_args.ma;
  state.nu = method_args.nu;
  const CombinatorKind kind = combinator_from_string(method_args.method);
  TrainResult result = train(ds, build_preference(method_args, ds.label_count), kind, gbm,
                             {loss}, state);
  if (!out_path.empty()) result.ensemble.save(out_path);
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    result.trace.write_csv(trace);
  }
  const Eigen::VectorXd final_costs = evaluate_costs(result.ensemble, ds, {loss}).costs;
  std::cout << "trained " << result.ensemble.trees.size() << " trees ("
            << (result.trace.converged_early ? "converged early" : "full run") << ")\n";
  std::cout << "final train costs:";
  for (Eigen::Index k = 0; k < final_costs.size(); ++k) std::cout << ' ' << final_costs[k];
  std::cout << '\n';
  for (const auto& note : result.trace.annotations) std::cout << "note: " << note << '\n';
  return 0;
}

int cmd_evaluate(const DataArgs& data_args, const std::string& model_path,
                 const std::vector<double>& weights, double sigma, bool ranknet, int ndcg_k) {
  MultiLabelDataset ds = load_data(data_args);
  TreeEnsemble model = TreeEnsemble::load(model_path);
  LossConfig loss;
  loss.sigma = sigma;
  loss.use_delta_ndcg = !ranknet;
  const FlatDataset flat = FlatDataset::from(ds);
  const std::vector<double> scores = predict_all(model, flat);
  const Eigen::VectorXd costs = evaluate_costs_flat(flat, scores, {loss}).costs;
  std::cout << "label,cost,ndcg@" << ndcg_k << '\n';
  for (std::size_t k = 0; k < ds.label_count; ++k) {
    std::cout << ds.label_names[k] << ',' << format_double(costs[static_cast<Eigen::Index>(k)])
              << ',' << format_double(mean_ndcg_at_k(flat, scores, k, ndcg_k, loss.gain)) << '\n';
  }
  if (!weights.empty()) {
    if (weights.size() != ds.label_count)
      throw CLI::ValidationError("--weights must match the label count");
    const Eigen::VectorXd r =
        Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    std::cout << "mwl," << format_double(mwl(costs, r)) << '\n';
  }
  return 0;
}

int cmd_rays(const std::string& baselines_arg, int n) {
  std::vector<Eigen::VectorXd> baselines;
  std::stringstream groups(baselines_arg);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<double> values;
    std::stringstream vs(group);
    std::string tok;
    while (std::getline(vs, tok, ',')) values.push_back(std::stod(tok));
    baselines.push_back(Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size())));
  }
  const auto rays = generate_rays(baselines, n);
  std::cout << "ray_id,r\n";
  for (std::size_t i = 0; i < rays.size(); ++i) {
    std::cout << i << ',';
    for (Eigen::Index k = 0; k < rays[i].size(); ++k) {
      if (k) std::cout << ';';
      std::cout << format_double(rays[i][k]);
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_synth_gen(const std::string& out_dir, std::uint64_t seed, std::size_t queries,
                  std::size_t items, std::size_t test_queries) {
  SyntheticConfig cfg;
  cfg.seed = seed;
  cfg.num_queries = queries;
  cfg.items_per_query = items;
  const MultiLabelDataset train_ds = make_synthetic_conflict(cfg);
  cfg.seed = seed + 1000003;
  cfg.num_queries = test_queries;
  const MultiLabelDataset test_ds = make_synthetic_conflict(cfg);

  // Second label rides along as the last feature column; promote it back
  // with `--promote <p>` when training.
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream train_out(out_dir + "/train.txt");
  write_letor(demote_label_to_feature(train_ds, 1), train_out);
  std::ofstream test_out(out_dir + "/test.txt");
  write_letor(demote_label_to_feature(test_ds, 1), test_out);
  std::cout << "wrote " << out_dir << "/train.txt and " << out_dir << "/test.txt\n"
            << "second objective stored as feature column " << train_ds.feature_dim
            << " (promote it back with --promote " << train_ds.feature_dim << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-label learning-to-rank trainer and experiment runner"};
  app.require_subcommand(1);

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train one model");
  DataArgs train_data;
  MethodArgs train_method;
  GBMConfig train_gbm;
  double train_sigma = 1.0;
  bool train_ranknet = false;
  std::string model_out, trace_out;
  add_data_options(train_cmd, &train_data);
  add_method_options(train_cmd, &train_method);
  add_gbm_options(train_cmd, &train_gbm);
  train_cmd->add_option("--sigma", train_sigma, "sigmoid spread");
  train_cmd->add_flag("--ranknet", train_ranknet, "drop the |dNDCG| pair weights");
  train_cmd->add_option("--out", model_out, "model output path");
  train_cmd->add_option("--trace", trace_out, "per-iteration cost/alpha trace CSV");

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a saved model");
  DataArgs eval_data;
  std::string eval_model;
  std::vector<double> eval_weights;
  double eval_sigma = 1.0;
  bool eval_ranknet = false;
  int eval_ndcg_k = 5;
  add_data_options(eval_cmd, &eval_data);
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--weights", eval_weights, "priority vector for MWL reporting");
  eval_cmd->add_option("--sigma", eval_sigma, "sigmoid spread");
  eval_cmd->add_flag("--ranknet", eval_ranknet, "drop the |dNDCG| pair weights");
  eval_cmd->add_option("--ndcg-k", eval_ndcg_k, "NDCG cutoff");

  // ---- grid ----
  auto* grid_cmd = app.add_subcommand("grid", "run an experiment grid from a JSON config");
  std::string grid_config, grid_out;
  grid_cmd->add_option("--config", grid_config, "experiment config JSON")->required();
  grid_cmd->add_option("--out", grid_out, "override output directory");

  // ---- rays ----
  auto* rays_cmd = app.add_subcommand("rays", "print preference rays for baseline costs");
  std::string rays_baselines;
  int rays_n = 5;
  rays_cmd
      ->add_option("--baselines", rays_baselines,
                   "baseline cost vectors, e.g. \"1.0,3.0;3.0,1.0\"")
      ->required();
  rays_cmd->add_option("-n,--n", rays_n, "number of rays");

  // ---- explore-ref ----
  auto* ref_cmd = app.add_subcommand("explore-ref", "explore the frontier around a reference model");
  std::string ref_config, ref_model, ref_out;
  ref_cmd->add_option("--config", ref_config, "experiment config JSON")->required();
  ref_cmd->add_option("--reference", ref_model, "reference model file")->required();
  ref_cmd->add_option("--out", ref_out, "override output directory");

  // ---- synth-gen ----
  auto* synth_cmd = app.add_subcommand("synth-gen", "write the synthetic workload as LETOR files");
  std::string synth_out = "synth";
  std::uint64_t synth_seed = 1;
  std::size_t synth_queries = 200, synth_items = 20, synth_test_queries = 100;
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->add_option("--seed", synth_seed, "seed");
  synth_cmd->add_option("--queries", synth_queries, "training queries");
  synth_cmd->add_option("--items", synth_items, "items per query");
  synth_cmd->add_option("--test-queries", synth_test_queries, "test queries");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed())
      return cmd_train(train_data, train_method, train_gbm, train_sigma, train_ranknet, model_out,
                       trace_out);
    if (eval_cmd->parsed())
      return cmd_evaluate(eval_data, eval_model, eval_weights, eval_sigma, eval_ranknet,
                          eval_ndcg_k);
    if (grid_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(grid_config);
      if (!grid_out.empty()) cfg.output_dir = grid_out;
      const GridOutcome outcome = run_grid(cfg);
      std::cout << "grid: " << outcome.total_cells - outcome.failed_cells << "/"
                << outcome.total_cells << " cells ok\n"
                << "runs: " << outcome.runs_csv << "\naggregate: " << outcome.aggregate_csv
                << '\n';
      return outcome.failed_cells == 0 ? 0 : 1;
    }
    if (ref_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(ref_config);
      if (!ref_out.empty()) cfg.output_dir = ref_out;
      const TreeEnsemble reference = TreeEnsemble::load(ref_model);
      const ReferenceOutcome outcome = explore_from_reference(cfg, reference);
      int dominated = 0;
      for (const auto& run : outcome.runs) dominated += run.dominates_reference ? 1 : 0;
      std::cout << "reference losses:";
      for (Eigen::Index k = 0; k < outcome.reference_losses.size(); ++k)
        std::cout << ' ' << outcome.reference_losses[k];
      std::cout << '\n'
                << dominated << "/" << outcome.runs.size() << " runs dominate the reference\n"
                << "report: " << outcome.report_csv << '\n';
      return 0;
    }
    if (rays_cmd->parsed()) return cmd_rays(rays_baselines, rays_n);
    if (synth_cmd->parsed())
      return cmd_synth_gen(synth_out, synth_seed, synth_queries, synth_items, synth_test_queries);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
