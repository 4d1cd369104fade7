#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace meshroute::ml {

enum class Role { A, B, C, D };
enum class Task { regression, classification };

/// Row-major feature matrix with one label per row.
struct Dataset {
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<double> y;
  Role role = Role::A;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  void add(std::span<const double> features, double label);
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Uniform width, finite values, and binary labels for roles A and D.
  void validate() const;
};

Task task_for(Role role);

enum class Algorithm { ridge, tree, forest, boosted };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

/// Algorithm plus named hyperparameters, spelled as in the tuning tables
/// (e.g. "max_features" = "log2", "max_depth" = "None").
struct LearnerSpec {
  Algorithm algorithm = Algorithm::ridge;
  std::map<std::string, std::string> hyperparameters;

  /// Throws ConfigError when a key required by the algorithm is absent.
  void validate() const;
  double number(const std::string& key) const;
  /// "None" maps to -1.
  int integer_or_none(const std::string& key) const;

  bool operator==(const LearnerSpec&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

/// Binary tree routing x[feature] <= threshold to the left child.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;
};

struct RidgeModel {
  double intercept = 0.0;
  std::vector<double> coefficients;

  double predict(std::span<const double> x) const;
  bool operator==(const RidgeModel&) const = default;
};

/// Single CART tree. Classification leaves hold the positive-class fraction.
struct TreeModel {
  Tree tree;
  double predict(std::span<const double> x) const { return tree.predict(x); }
  bool operator==(const TreeModel&) const = default;
};

/// Probability = fraction of trees whose leaf votes positive (> 0.5).
struct ForestModel {
  std::vector<Tree> trees;
  double predict(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

/// Additive Newton-boosted trees; leaf values already include the learning
/// rate. Classification passes the raw margin through the logistic link.
struct BoostedModel {
  Task task = Task::regression;
  double base_score = 0.0;
  std::vector<Tree> trees;

  double raw_margin(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
  bool operator==(const BoostedModel&) const = default;
};

class TrainedModel {
 public:
  using Parameters = std::variant<RidgeModel, TreeModel, ForestModel, BoostedModel>;

  TrainedModel() = default;
  TrainedModel(LearnerSpec spec, Task task, std::uint64_t seed, Parameters params);

  double predict(std::span<const double> x) const;

  const LearnerSpec& spec() const { return spec_; }
  Task task() const { return task_; }
  std::uint64_t seed() const { return seed_; }
  const Parameters& parameters() const { return params_; }

  /// Self-describing text: algorithm tag, hyperparameters, then parameters
  /// as shortest round-trip decimals.
  std::string serialize() const;
  static TrainedModel deserialize(const std::string& text);

  bool operator==(const TrainedModel&) const = default;

 private:
  LearnerSpec spec_;
  Task task_ = Task::regression;
  std::uint64_t seed_ = 0;
  Parameters params_;
};

struct TreeParams {
  int max_depth = -1;  // -1 = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 0;  // 0 = all features
};

struct BoostParams {
  int n_estimators = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double min_child_weight = 1.0;
  double gamma = 0.0;
  double reg_lambda = 1.0;
};

/// Solves (Xc'Xc + alpha I) beta = Xc'yc on centred data; the intercept is
/// recovered from the means and is not penalised.
RidgeModel fit_ridge(const Dataset& data, double alpha);
TrainedModel train_ridge(const Dataset& data, double alpha);

Tree fit_tree(const Dataset& data, const TreeParams& params, Task task, std::uint64_t seed = 0);
TrainedModel train_tree(const Dataset& data, const TreeParams& params, Task task);

/// Resolves "log2" / "sqrt" / "None" / integer against the feature count.
int resolve_max_features(const std::string& value, std::size_t n_features);

TrainedModel train_forest(const Dataset& data, const LearnerSpec& spec, std::uint64_t seed);

BoostParams boost_params_from(const LearnerSpec& spec);
/// `loss_history`, when given, receives the full-training-set loss after
/// each round (squared error, or log loss for classification).
BoostedModel fit_boosted(const Dataset& data, const BoostParams& params, Task task, std::uint64_t seed,
                         std::vector<double>* loss_history = nullptr);
TrainedModel train_boosted(const Dataset& data, const LearnerSpec& spec, std::uint64_t seed, Task task);

struct ClassifierMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double precision_pos = 0.0;
  double recall_pos = 0.0;
};

struct RegressorMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

/// Midrank Mann-Whitney AUC. Throws DataError if only one class is present.
double roc_auc(std::span<const double> scores, std::span<const double> labels);

/// Class decisions use probability >= 0.5.
ClassifierMetrics classifier_metrics(std::span<const double> probabilities, std::span<const double> labels);
RegressorMetrics regressor_metrics(std::span<const double> predictions, std::span<const double> labels);

ClassifierMetrics evaluate_classifier(const TrainedModel& model, const Dataset& data);
RegressorMetrics evaluate_regressor(const TrainedModel& model, const Dataset& data);

struct Split {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle then split. With `stratify`, each label value is split
/// separately (train share clamped to [1, n-1]) and both parts keep the
/// original row order.
Split split_train_test(const Dataset& data, double fraction, std::uint64_t seed, bool stratify);

}  // namespace meshroute::ml
