#pragma once

#include "labelstack/execution.hpp"
#include "labelstack/table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace labelstack {

enum class ForestKind { Regression, Classification };

/// Unset fields take kind-dependent defaults: mtry = ceil(sqrt(p)) and
/// min_leaf = 1 for classification, mtry = ceil(p / 3) and min_leaf = 5 for
/// regression.
struct ForestParams {
    std::size_t n_trees = 100;
    std::optional<std::size_t> mtry;
    std::optional<std::size_t> min_leaf;
    std::optional<std::size_t> max_depth;
    bool bootstrap = true;
};

struct ResolvedForestParams {
    std::size_t n_trees;
    std::size_t mtry;
    std::size_t min_leaf;
    std::optional<std::size_t> max_depth;
    bool bootstrap;
};

ResolvedForestParams resolve(const ForestParams& params, ForestKind kind, std::size_t n_features);

enum class Direction : std::uint8_t { Left, Right };

struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;
    double threshold = 0.0;                     // continuous: value <= threshold goes left
    std::vector<std::uint8_t> left_categories;  // categorical: code c goes left iff flag set
    std::int32_t left = -1;
    std::int32_t right = -1;
    Direction majority = Direction::Left;  // route for a missing split feature

    double prediction = 0.0;           // leaf mean, or leaf majority class code
    std::vector<double> class_counts;  // classification leaves only

    bool is_leaf() const noexcept { return feature == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

    /// Evaluates row r of X. Missing split features follow the node's
    /// majority direction when allow_missing, else throw.
    double predict_row(const DataTable& X, std::size_t r, bool allow_missing) const;

    bool uses_feature(std::size_t f) const noexcept;
    std::size_t depth() const noexcept;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

class ForestModel {
public:
    ForestModel(ForestKind kind, Schema features, std::vector<std::string> classes,
                std::vector<DecisionTree> trees, std::vector<std::uint64_t> tree_seeds);

    ForestKind kind() const noexcept { return kind_; }
    const Schema& features() const noexcept { return features_; }
    const std::vector<std::string>& classes() const noexcept { return classes_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const std::vector<std::uint64_t>& tree_seeds() const noexcept { return tree_seeds_; }

    /// Regression: mean of tree outputs. Classification: majority vote,
    /// ties to the smallest class code.
    LabelVector predict(const DataTable& X) const;

    /// Like predict, but a row whose split feature is Missing follows that
    /// node's majority direction.
    LabelVector predict_with_missing(const DataTable& X) const;

    /// Debug dump; the format is not stable.
    std::string to_json() const;

    bool operator==(const ForestModel&) const = default;

private:
    LabelVector predict_impl(const DataTable& X, bool allow_missing) const;
    void check_arity(const DataTable& X) const;

    ForestKind kind_;
    Schema features_;
    std::vector<std::string> classes_;
    std::vector<DecisionTree> trees_;
    std::vector<std::uint64_t> tree_seeds_;
};

/// Per-tree seed: a pure function of the master seed and tree index.
std::uint64_t tree_seed(std::uint64_t master, std::size_t tree_index) noexcept;

/// Grow a forest on complete data. Class labels give a classification
/// forest, regression targets a regression forest.
ForestModel fit_forest(const DataTable& X, const LabelVector& y, const ForestParams& params,
                       std::uint64_t seed, Execution exec = Execution::Parallel);

/// Grow a forest on X that may contain Missing cells. At each node a
/// candidate split is scored on the rows observing its feature; rows missing
/// it are routed to the child that received the majority of observed rows.
/// On complete X this is identical to fit_forest.
ForestModel fit_forest_on_missing(const DataTable& X, const LabelVector& y, const ForestParams& params,
                                  std::uint64_t seed, Execution exec = Execution::Parallel);

namespace detail {

/// Weighted Gini impurity n * (1 - sum p_k^2) from class counts.
double gini_impurity(const std::vector<double>& counts) noexcept;

/// Sum of squared deviations from the mean, from n, sum y and sum y^2.
double sse_impurity(double n, double sum, double sum_sq) noexcept;

}  // namespace detail

}  // namespace labelstack
