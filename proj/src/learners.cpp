#include "meshroute/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "meshroute/error.hpp"
#include "meshroute/rng.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute::ml {

void Dataset::add(std::span<const double> features, double label) {
  if (n_features == 0 && y.empty()) n_features = features.size();
  if (features.size() != n_features) throw ValidationError("dataset rows must have uniform width");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n_features = n_features;
  out.role = role;
  out.x.reserve(rows.size() * n_features);
  out.y.reserve(rows.size());
  for (auto r : rows) {
    const auto v = row(r);
    out.x.insert(out.x.end(), v.begin(), v.end());
    out.y.push_back(y[r]);
  }
  return out;
}

void Dataset::validate() const {
  if (x.size() != y.size() * n_features) throw ValidationError("dataset rows must have uniform width");
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("dataset contains a non-finite feature");
  }
  const bool binary = role == Role::A || role == Role::D;
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("dataset contains a non-finite label");
    if (binary && v != 0.0 && v != 1.0) throw ValidationError("classification labels must be 0 or 1");
  }
}

Task task_for(Role role) { return role == Role::A || role == Role::D ? Task::classification : Task::regression; }

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ridge:
      return "ridge";
    case Algorithm::tree:
      return "tree";
    case Algorithm::forest:
      return "forest";
    case Algorithm::boosted:
      return "boosted";
  }
  return "ridge";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "ridge") return Algorithm::ridge;
  if (s == "tree") return Algorithm::tree;
  if (s == "forest") return Algorithm::forest;
  if (s == "boosted") return Algorithm::boosted;
  throw SchemaError("unknown algorithm tag '" + s + "'");
}

void LearnerSpec::validate() const {
  std::vector<std::string> required;
  switch (algorithm) {
    case Algorithm::ridge:
      required = {"alpha"};
      break;
    case Algorithm::tree:
      break;
    case Algorithm::forest:
      required = {"n_estimators", "max_depth", "max_features", "min_samples_leaf", "min_samples_split"};
      break;
    case Algorithm::boosted:
      required = {"n_estimators", "max_depth", "learning_rate", "subsample", "colsample_bytree", "min_child_weight",
                  "gamma"};
      break;
  }
  for (const auto& key : required) {
    if (!hyperparameters.contains(key)) {
      throw ConfigError(to_string(algorithm) + " learner is missing hyperparameter '" + key + "'");
    }
  }
}

double LearnerSpec::number(const std::string& key) const {
  auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) throw ConfigError("missing hyperparameter '" + key + "'");
  return text::parse_double(it->second, key);
}

int LearnerSpec::integer_or_none(const std::string& key) const {
  auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) throw ConfigError("missing hyperparameter '" + key + "'");
  if (it->second == "None") return -1;
  return static_cast<int>(text::parse_int(it->second, key));
}

// ---------------------------------------------------------------------------
// Trees

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

/// Shared split finder for CART and Newton-boosted trees. Each sample slot
/// carries a gradient g and hessian h; a node's value is -G/(H+lambda) and a
/// split's gain is the usual second-order score improvement. CART is the
/// special case g = -y, h = 1, lambda = 0 (variance reduction, which on 0/1
/// labels is proportional to Gini decrease).
struct GrowConfig {
  int max_depth = -1;
  int min_samples_split = 2;
  double min_child_weight = 1.0;
  double lambda = 0.0;
  double gamma = 0.0;
  bool allow_zero_gain = true;
  int max_features = 0;
  double leaf_scale = 1.0;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::vector<std::size_t> slot_rows, std::vector<double> g, std::vector<double> h,
             std::vector<int> features, const GrowConfig& cfg, Rng* rng)
      : data_(data),
        rows_(std::move(slot_rows)),
        g_(std::move(g)),
        h_(std::move(h)),
        features_(std::move(features)),
        cfg_(cfg),
        rng_(rng) {
    const std::size_t n = rows_.size();
    sorted_.resize(data_.n_features);
    for (int f : features_) {
      auto& order = sorted_[static_cast<std::size_t>(f)];
      order.resize(n);
      std::iota(order.begin(), order.end(), 0U);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return value(a, f) < value(b, f); });
    }
    goes_left_.assign(n, 0);
    scratch_.resize(n);
  }

  Tree grow() {
    Tree t;
    if (!rows_.empty()) build(t, 0, rows_.size(), 0);
    return t;
  }

 private:
  struct Candidate {
    bool found = false;
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
  };

  double value(std::uint32_t slot, int f) const {
    return data_.x[rows_[slot] * data_.n_features + static_cast<std::size_t>(f)];
  }

  double score(double G, double H) const { return G * G / (H + cfg_.lambda); }

  void evaluate(int f, std::size_t b, std::size_t e, double G, double H, Candidate& best) const {
    const auto& order = sorted_[static_cast<std::size_t>(f)];
    double GL = 0.0, HL = 0.0;
    const double parent = score(G, H);
    for (std::size_t i = b; i + 1 < e; ++i) {
      GL += g_[order[i]];
      HL += h_[order[i]];
      const double here = value(order[i], f);
      const double next = value(order[i + 1], f);
      if (!(here < next)) continue;
      const double HR = H - HL;
      if (HL < cfg_.min_child_weight || HR < cfg_.min_child_weight) continue;
      const double gain = 0.5 * (score(GL, HL) + score(G - GL, HR) - parent) - cfg_.gamma;
      if (gain > best.gain) {
        double thr = here + (next - here) / 2.0;
        if (!(thr < next)) thr = here;
        best = {true, gain, f, thr, i + 1 - b};
      }
    }
  }

  int build(Tree& t, std::size_t b, std::size_t e, int depth) {
    const int index = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    const auto& any = sorted_[static_cast<std::size_t>(features_.front())];

    double G = 0.0, H = 0.0;
    double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
    for (std::size_t i = b; i < e; ++i) {
      const auto s = any[i];
      G += g_[s];
      H += h_[s];
      gmin = std::min(gmin, g_[s]);
      gmax = std::max(gmax, g_[s]);
    }
    t.nodes[static_cast<std::size_t>(index)].value = -G / (H + cfg_.lambda) * cfg_.leaf_scale;

    const std::size_t n = e - b;
    if ((cfg_.max_depth >= 0 && depth >= cfg_.max_depth) || n < static_cast<std::size_t>(cfg_.min_samples_split) ||
        n < 2 || gmin == gmax) {
      return index;
    }

    Candidate best;
    const bool subsample = cfg_.max_features > 0 && static_cast<std::size_t>(cfg_.max_features) < features_.size();
    if (!subsample) {
      for (int f : features_) evaluate(f, b, e, G, H, best);
    } else {
      std::vector<int> drawn = features_;
      rng_->shuffle(std::span<int>(drawn));
      std::vector<int> first(drawn.begin(), drawn.begin() + cfg_.max_features);
      std::sort(first.begin(), first.end());
      for (int f : first) evaluate(f, b, e, G, H, best);
      // Keep drawing features until one admits a split at all.
      for (std::size_t k = static_cast<std::size_t>(cfg_.max_features); !best.found && k < drawn.size(); ++k) {
        evaluate(drawn[k], b, e, G, H, best);
      }
    }
    const bool accept = best.found && (cfg_.allow_zero_gain ? best.gain >= -1e-12 : best.gain > 0.0);
    if (!accept) return index;

    const auto& chosen = sorted_[static_cast<std::size_t>(best.feature)];
    for (std::size_t i = b; i < e; ++i) goes_left_[chosen[i]] = i < b + best.left_count;
    for (int f : features_) {
      auto& order = sorted_[static_cast<std::size_t>(f)];
      std::size_t l = b, r = 0;
      for (std::size_t i = b; i < e; ++i) {
        if (goes_left_[order[i]]) {
          order[l++] = order[i];
        } else {
          scratch_[r++] = order[i];
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), order.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t mid = b + best.left_count;
    const int left = build(t, b, mid, depth + 1);
    const int right = build(t, mid, e, depth + 1);
    auto& node = t.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  const Dataset& data_;
  std::vector<std::size_t> rows_;
  std::vector<double> g_;
  std::vector<double> h_;
  std::vector<int> features_;
  GrowConfig cfg_;
  Rng* rng_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
};

std::vector<int> all_features(std::size_t n) {
  std::vector<int> f(n);
  std::iota(f.begin(), f.end(), 0);
  return f;
}

Tree grow_cart(const Dataset& data, std::vector<std::size_t> slot_rows, const TreeParams& params, Rng& rng) {
  std::vector<double> g(slot_rows.size()), h(slot_rows.size(), 1.0);
  for (std::size_t i = 0; i < slot_rows.size(); ++i) g[i] = -data.y[slot_rows[i]];
  GrowConfig cfg;
  cfg.max_depth = params.max_depth;
  cfg.min_samples_split = std::max(2, params.min_samples_split);
  cfg.min_child_weight = std::max(1, params.min_samples_leaf);
  cfg.lambda = 0.0;
  cfg.gamma = 0.0;
  cfg.allow_zero_gain = true;
  cfg.max_features = params.max_features;
  return TreeGrower(data, std::move(slot_rows), std::move(g), std::move(h), all_features(data.n_features), cfg, &rng)
      .grow();
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double boosting_loss(std::span<const double> margin, std::span<const double> y, Task task) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (task == Task::regression) {
      const double r = margin[i] - y[i];
      loss += r * r;
    } else {
      // log(1 + e^m) - y m, evaluated stably
      const double m = margin[i];
      loss += (m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m))) - y[i] * m;
    }
  }
  return loss / static_cast<double>(y.size());
}

void require_rows(const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
}

}  // namespace

// ---------------------------------------------------------------------------
// Ridge

double RidgeModel::predict(std::span<const double> x) const {
  double out = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) out += coefficients[j] * x[j];
  return out;
}

RidgeModel fit_ridge(const Dataset& data, double alpha) {
  require_rows(data);
  if (alpha < 0.0) throw ConfigError("ridge alpha must be >= 0");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.n_features);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(data.x.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n);

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd A = Xc.transpose() * Xc;
  A.diagonal().array() += alpha;
  const Eigen::VectorXd rhs = Xc.transpose() * yc;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < p) {
    throw DataError("ridge normal equations are singular; use alpha > 0");
  }
  const Eigen::VectorXd beta = qr.solve(rhs);

  RidgeModel m;
  m.coefficients.assign(beta.data(), beta.data() + p);
  m.intercept = y_mean - x_mean.dot(beta);
  return m;
}

TrainedModel train_ridge(const Dataset& data, double alpha) {
  LearnerSpec spec{Algorithm::ridge, {{"alpha", text::exact(alpha)}}};
  return TrainedModel(spec, Task::regression, 0, fit_ridge(data, alpha));
}

// ---------------------------------------------------------------------------
// CART and forest

Tree fit_tree(const Dataset& data, const TreeParams& params, Task task, std::uint64_t seed) {
  require_rows(data);
  if (task == Task::classification) {
    for (double v : data.y) {
      if (v != 0.0 && v != 1.0) throw ValidationError("classification tree needs 0/1 labels");
    }
  }
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0U);
  Rng rng(seed);
  return grow_cart(data, std::move(rows), params, rng);
}

TrainedModel train_tree(const Dataset& data, const TreeParams& params, Task task) {
  LearnerSpec spec{Algorithm::tree,
                   {{"max_depth", params.max_depth < 0 ? "None" : std::to_string(params.max_depth)},
                    {"min_samples_split", std::to_string(params.min_samples_split)},
                    {"min_samples_leaf", std::to_string(params.min_samples_leaf)}}};
  return TrainedModel(spec, task, 0, TreeModel{fit_tree(data, params, task)});
}

int resolve_max_features(const std::string& value, std::size_t n_features) {
  const double p = static_cast<double>(n_features);
  if (value == "log2") return std::max(1, static_cast<int>(std::floor(std::log2(p))));
  if (value == "sqrt") return std::max(1, static_cast<int>(std::floor(std::sqrt(p))));
  if (value == "None" || value == "all") return 0;
  const auto k = text::parse_int(value, "max_features");
  if (k < 1) throw ConfigError("max_features must be >= 1");
  return static_cast<int>(std::min<std::int64_t>(k, static_cast<std::int64_t>(n_features)));
}

double ForestModel::predict(std::span<const double> x) const {
  if (trees.empty()) return 0.0;
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.predict(x) > 0.5;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

TrainedModel train_forest(const Dataset& data, const LearnerSpec& spec, std::uint64_t seed) {
  spec.validate();
  require_rows(data);
  for (double v : data.y) {
    if (v != 0.0 && v != 1.0) throw ValidationError("forest classifier needs 0/1 labels");
  }
  TreeParams params;
  params.max_depth = spec.integer_or_none("max_depth");
  params.min_samples_split = spec.integer_or_none("min_samples_split");
  params.min_samples_leaf = spec.integer_or_none("min_samples_leaf");
  params.max_features = resolve_max_features(spec.hyperparameters.at("max_features"), data.n_features);
  const int n_estimators = spec.integer_or_none("n_estimators");
  if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");

  ForestModel forest;
  forest.trees.reserve(static_cast<std::size_t>(n_estimators));
  const auto n = static_cast<std::int64_t>(data.size());
  for (int t = 0; t < n_estimators; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sample(data.size());
    for (auto& s : sample) s = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    forest.trees.push_back(grow_cart(data, std::move(sample), params, rng));
  }
  return TrainedModel(spec, Task::classification, seed, std::move(forest));
}

// ---------------------------------------------------------------------------
// Boosting

double BoostedModel::raw_margin(std::span<const double> x) const {
  double m = base_score;
  for (const auto& t : trees) m += t.predict(x);
  return m;
}

double BoostedModel::predict(std::span<const double> x) const {
  const double m = raw_margin(x);
  return task == Task::classification ? sigmoid(m) : m;
}

BoostParams boost_params_from(const LearnerSpec& spec) {
  spec.validate();
  BoostParams p;
  p.n_estimators = spec.integer_or_none("n_estimators");
  p.max_depth = spec.integer_or_none("max_depth");
  p.learning_rate = spec.number("learning_rate");
  p.subsample = spec.number("subsample");
  p.colsample_bytree = spec.number("colsample_bytree");
  p.min_child_weight = spec.number("min_child_weight");
  p.gamma = spec.number("gamma");
  if (spec.hyperparameters.contains("reg_lambda")) p.reg_lambda = spec.number("reg_lambda");
  if (p.n_estimators < 0) throw ConfigError("n_estimators must be >= 0");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) throw ConfigError("subsample must be in (0,1]");
  if (!(p.colsample_bytree > 0.0 && p.colsample_bytree <= 1.0)) throw ConfigError("colsample_bytree must be in (0,1]");
  return p;
}

BoostedModel fit_boosted(const Dataset& data, const BoostParams& params, Task task, std::uint64_t seed,
                         std::vector<double>* loss_history) {
  require_rows(data);
  const std::size_t n = data.size();
  BoostedModel model;
  model.task = task;
  const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);
  if (task == Task::classification) {
    const double p = std::clamp(mean, 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(p / (1.0 - p));
  } else {
    model.base_score = mean;
  }

  std::vector<double> margin(n, model.base_score);
  const std::size_t n_cols = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.colsample_bytree * static_cast<double>(data.n_features))));

  GrowConfig cfg;
  cfg.max_depth = params.max_depth;
  cfg.min_samples_split = 2;
  cfg.min_child_weight = params.min_child_weight;
  cfg.lambda = params.reg_lambda;
  cfg.gamma = params.gamma;
  cfg.allow_zero_gain = false;
  cfg.leaf_scale = params.learning_rate;

  for (int round = 0; round < params.n_estimators; ++round) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
    std::vector<std::size_t> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (params.subsample >= 1.0 || rng.uniform01() < params.subsample) rows.push_back(i);
    }
    if (rows.empty()) rows.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));

    std::vector<int> cols = all_features(data.n_features);
    if (n_cols < cols.size()) {
      rng.shuffle(std::span<int>(cols));
      cols.resize(n_cols);
      std::sort(cols.begin(), cols.end());
    }

    std::vector<double> g(rows.size()), h(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto i = rows[k];
      if (task == Task::regression) {
        g[k] = margin[i] - data.y[i];
        h[k] = 1.0;
      } else {
        const double p = sigmoid(margin[i]);
        g[k] = p - data.y[i];
        h[k] = std::max(p * (1.0 - p), 1e-16);
      }
    }
    Tree tree = TreeGrower(data, std::move(rows), std::move(g), std::move(h), std::move(cols), cfg, &rng).grow();
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(data.row(i));
    model.trees.push_back(std::move(tree));
    if (loss_history) loss_history->push_back(boosting_loss(margin, data.y, task));
  }
  return model;
}

TrainedModel train_boosted(const Dataset& data, const LearnerSpec& spec, std::uint64_t seed, Task task) {
  const auto params = boost_params_from(spec);
  if (task == Task::classification) {
    for (double v : data.y) {
      if (v != 0.0 && v != 1.0) throw ValidationError("boosted classifier needs 0/1 labels");
    }
  }
  return TrainedModel(spec, task, seed, fit_boosted(data, params, task, seed));
}

// ---------------------------------------------------------------------------
// TrainedModel

TrainedModel::TrainedModel(LearnerSpec spec, Task task, std::uint64_t seed, Parameters params)
    : spec_(std::move(spec)), task_(task), seed_(seed), params_(std::move(params)) {}

double TrainedModel::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, params_);
}

namespace {

void write_tree(std::ostringstream& out, const Tree& t) {
  out << "tree " << t.nodes.size() << '\n';
  for (const auto& n : t.nodes) {
    out << n.feature << ' ' << text::exact(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
        << text::exact(n.value) << '\n';
  }
}

class Reader {
 public:
  explicit Reader(const std::string& s) : in_(s) {}
  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw SchemaError("model file ended unexpectedly");
    return w;
  }
  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) throw SchemaError("model file: expected '" + w + "', found '" + got + "'");
  }
  double real() { return text::parse_double(word(), "model parameter"); }
  std::int64_t integer() { return text::parse_int(word(), "model parameter"); }
  Tree tree() {
    expect("tree");
    Tree t;
    const auto n = integer();
    for (std::int64_t i = 0; i < n; ++i) {
      TreeNode node;
      node.feature = static_cast<int>(integer());
      node.threshold = real();
      node.left = static_cast<int>(integer());
      node.right = static_cast<int>(integer());
      node.value = real();
      t.nodes.push_back(node);
    }
    return t;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string TrainedModel::serialize() const {
  std::ostringstream out;
  out << "meshroute-model 1\n";
  out << "algorithm " << to_string(spec_.algorithm) << '\n';
  out << "task " << (task_ == Task::classification ? "classification" : "regression") << '\n';
  out << "seed " << seed_ << '\n';
  out << "hyperparameters " << spec_.hyperparameters.size() << '\n';
  for (const auto& [k, v] : spec_.hyperparameters) out << k << ' ' << v << '\n';
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RidgeModel>) {
          out << "intercept " << text::exact(m.intercept) << '\n';
          out << "coefficients " << m.coefficients.size();
          for (double c : m.coefficients) out << ' ' << text::exact(c);
          out << '\n';
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          write_tree(out, m.tree);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          out << "trees " << m.trees.size() << '\n';
          for (const auto& t : m.trees) write_tree(out, t);
        } else {
          out << "base_score " << text::exact(m.base_score) << '\n';
          out << "trees " << m.trees.size() << '\n';
          for (const auto& t : m.trees) write_tree(out, t);
        }
      },
      params_);
  return out.str();
}

TrainedModel TrainedModel::deserialize(const std::string& text_in) {
  Reader r(text_in);
  r.expect("meshroute-model");
  r.expect("1");
  r.expect("algorithm");
  LearnerSpec spec;
  spec.algorithm = parse_algorithm(r.word());
  r.expect("task");
  const auto task_word = r.word();
  if (task_word != "classification" && task_word != "regression") throw SchemaError("model file: bad task");
  const Task task = task_word == "classification" ? Task::classification : Task::regression;
  r.expect("seed");
  const auto seed = static_cast<std::uint64_t>(std::stoull(r.word()));
  r.expect("hyperparameters");
  const auto n_hp = r.integer();
  for (std::int64_t i = 0; i < n_hp; ++i) {
    auto k = r.word();
    spec.hyperparameters[k] = r.word();
  }
  Parameters params;
  switch (spec.algorithm) {
    case Algorithm::ridge: {
      RidgeModel m;
      r.expect("intercept");
      m.intercept = r.real();
      r.expect("coefficients");
      const auto n = r.integer();
      for (std::int64_t i = 0; i < n; ++i) m.coefficients.push_back(r.real());
      params = m;
      break;
    }
    case Algorithm::tree:
      params = TreeModel{r.tree()};
      break;
    case Algorithm::forest: {
      ForestModel m;
      r.expect("trees");
      const auto n = r.integer();
      for (std::int64_t i = 0; i < n; ++i) m.trees.push_back(r.tree());
      params = std::move(m);
      break;
    }
    case Algorithm::boosted: {
      BoostedModel m;
      m.task = task;
      r.expect("base_score");
      m.base_score = r.real();
      r.expect("trees");
      const auto n = r.integer();
      for (std::int64_t i = 0; i < n; ++i) m.trees.push_back(r.tree());
      params = std::move(m);
      break;
    }
  }
  return TrainedModel(spec, task, seed, std::move(params));
}

// ---------------------------------------------------------------------------
// Evaluation

double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = midrank;
    i = j + 1;
  }
  double n_pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 0.5) {
      n_pos += 1.0;
      rank_sum += rank[i];
    }
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("ROC AUC is undefined when only one class is present");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

ClassifierMetrics classifier_metrics(std::span<const double> probabilities, std::span<const double> labels) {
  if (probabilities.size() != labels.size() || labels.empty()) throw DataError("classifier metrics need paired rows");
  ClassifierMetrics m;
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= 0.5;
    const bool actual = labels[i] > 0.5;
    correct += predicted == actual;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  m.accuracy = correct / static_cast<double>(labels.size());
  m.precision_pos = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall_pos = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision_pos + m.recall_pos > 0 ? 2 * m.precision_pos * m.recall_pos / (m.precision_pos + m.recall_pos) : 0.0;
  m.roc_auc = roc_auc(probabilities, labels);
  return m;
}

RegressorMetrics regressor_metrics(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size() || labels.size() < 2) throw DataError("regressor metrics need >= 2 rows");
  const double n = static_cast<double>(labels.size());
  const double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / n;
  double ss_res = 0, ss_tot = 0, abs_err = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double e = predictions[i] - labels[i];
    ss_res += e * e;
    abs_err += std::abs(e);
    ss_tot += (labels[i] - mean) * (labels[i] - mean);
  }
  if (ss_tot == 0.0) throw DataError("R^2 is undefined for zero-variance labels");
  return {std::sqrt(ss_res / n), abs_err / n, 1.0 - ss_res / ss_tot};
}

namespace {
std::vector<double> predict_all(const TrainedModel& model, const Dataset& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = model.predict(data.row(i));
  return out;
}
}  // namespace

ClassifierMetrics evaluate_classifier(const TrainedModel& model, const Dataset& data) {
  return classifier_metrics(predict_all(model, data), data.y);
}

RegressorMetrics evaluate_regressor(const TrainedModel& model, const Dataset& data) {
  return regressor_metrics(predict_all(model, data), data.y);
}

Split split_train_test(const Dataset& data, double fraction, std::uint64_t seed, bool stratify) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must be in (0,1)");
  Rng rng(seed);
  std::vector<std::size_t> train, test;
  auto take = [&](std::vector<std::size_t> idx, bool clamp) {
    rng.shuffle(std::span<std::size_t>(idx));
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (clamp) k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  };
  if (!stratify) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0U);
    take(std::move(idx), false);
  } else {
    std::map<double, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.y[i]].push_back(i);
    for (auto& [label, idx] : by_class) {
      if (idx.size() < 2) {
        throw DataError("stratified split needs >= 2 rows of class " + text::exact(label));
      }
      take(std::move(idx), true);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

}  // namespace meshroute::ml
