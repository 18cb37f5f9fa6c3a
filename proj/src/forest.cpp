#include "labelstack/forest.hpp"

#include "labelstack/error.hpp"
#include "labelstack/parallel.hpp"
#include "labelstack/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace labelstack {

namespace detail {

double gini_impurity(const std::vector<double>& counts) noexcept
{
    double n = 0.0;
    double sq = 0.0;
    for (double c : counts) {
        n += c;
        sq += c * c;
    }
    return n > 0.0 ? n - sq / n : 0.0;
}

double sse_impurity(double n, double sum, double sum_sq) noexcept
{
    if (n <= 0.0) {
        return 0.0;
    }
    return std::max(0.0, sum_sq - sum * sum / n);
}

}  // namespace detail

ResolvedForestParams resolve(const ForestParams& params, ForestKind kind, std::size_t n_features)
{
    if (params.n_trees < 1) {
        throw UsageError("forest: n_trees must be >= 1");
    }
    const double p = static_cast<double>(n_features);
    const std::size_t default_mtry =
        kind == ForestKind::Classification ? static_cast<std::size_t>(std::ceil(std::sqrt(p)))
                                           : static_cast<std::size_t>(std::ceil(p / 3.0));
    ResolvedForestParams r{
        params.n_trees,
        params.mtry.value_or(std::max<std::size_t>(default_mtry, n_features ? 1 : 0)),
        params.min_leaf.value_or(kind == ForestKind::Classification ? 1 : 5),
        params.max_depth,
        params.bootstrap,
    };
    if (n_features > 0 && (r.mtry < 1 || r.mtry > n_features)) {
        throw UsageError("forest: mtry must lie in [1, p]");
    }
    if (r.min_leaf < 1) {
        throw UsageError("forest: min_leaf must be >= 1");
    }
    return r;
}

std::uint64_t tree_seed(std::uint64_t master, std::size_t tree_index) noexcept
{
    return derive_seed(master, {0x7265657400ULL, tree_index});
}

namespace {

struct Problem {
    const DataTable& X;
    std::vector<double> y;
    ForestKind kind;
    std::size_t n_classes;
    ResolvedForestParams params;
    bool allow_missing;
};

struct Split {
    bool valid = false;
    double score = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::vector<std::uint8_t> left_categories;
    double n_left = 0.0;
    double n_right = 0.0;
};

constexpr double kMinRelativeGain = 1e-10;

class TreeBuilder {
public:
    TreeBuilder(const Problem& problem, std::uint64_t seed) : pb_(problem), rng_(seed)
    {
        const std::size_t n = pb_.X.n_rows();
        samples_.resize(n);
        if (pb_.params.bootstrap) {
            for (auto& s : samples_) {
                s = rng_.below(n);
            }
        } else {
            std::iota(samples_.begin(), samples_.end(), std::size_t{0});
        }
        features_.resize(pb_.X.n_cols());
    }

    DecisionTree build()
    {
        grow(0, samples_.size(), 0);
        return DecisionTree(std::move(nodes_));
    }

private:
    std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth)
    {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        make_leaf(id, begin, end);

        const std::size_t count = end - begin;
        const bool depth_capped = pb_.params.max_depth && depth >= *pb_.params.max_depth;
        if (depth_capped || count < 2 * pb_.params.min_leaf || node_impurity(begin, end) <= 0.0) {
            return id;
        }

        Split best = find_split(begin, end);
        if (!best.valid) {
            return id;
        }

        const Direction majority = best.n_left >= best.n_right ? Direction::Left : Direction::Right;
        auto first = samples_.begin() + static_cast<std::ptrdiff_t>(begin);
        auto last = samples_.begin() + static_cast<std::ptrdiff_t>(end);
        auto mid = std::stable_partition(first, last, [&](std::size_t r) {
            if (pb_.X.is_missing(r, best.feature)) {
                return majority == Direction::Left;
            }
            return goes_left(best, pb_.X.value(r, best.feature));
        });
        const auto split_at = begin + static_cast<std::size_t>(mid - first);
        if (split_at == begin || split_at == end) {
            return id;
        }

        {
            auto& node = nodes_[static_cast<std::size_t>(id)];
            node.feature = static_cast<std::int32_t>(best.feature);
            node.threshold = best.threshold;
            node.left_categories = std::move(best.left_categories);
            node.majority = majority;
            node.class_counts.clear();
        }
        const auto left = grow(begin, split_at, depth + 1);
        const auto right = grow(split_at, end, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = left;
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    static bool goes_left(const Split& s, double v)
    {
        if (!s.left_categories.empty()) {
            const auto code = static_cast<std::size_t>(v);
            return code < s.left_categories.size() && s.left_categories[code] != 0;
        }
        return v <= s.threshold;
    }

    void make_leaf(std::int32_t id, std::size_t begin, std::size_t end)
    {
        auto& node = nodes_[static_cast<std::size_t>(id)];
        if (pb_.kind == ForestKind::Regression) {
            // Offset mean: exact when every target is equal.
            const double base = pb_.y[samples_[begin]];
            double dev = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                dev += pb_.y[samples_[i]] - base;
            }
            node.prediction = base + dev / static_cast<double>(end - begin);
            return;
        }
        node.class_counts.assign(pb_.n_classes, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            node.class_counts[static_cast<std::size_t>(pb_.y[samples_[i]])] += 1.0;
        }
        const auto top = std::max_element(node.class_counts.begin(), node.class_counts.end());
        node.prediction = static_cast<double>(top - node.class_counts.begin());
    }

    double node_impurity(std::size_t begin, std::size_t end) const
    {
        if (pb_.kind == ForestKind::Regression) {
            double s = 0.0;
            double sq = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const double v = pb_.y[samples_[i]];
                s += v;
                sq += v * v;
            }
            // Tiny negative/positive rounding noise on constant targets.
            const double n = static_cast<double>(end - begin);
            const double imp = detail::sse_impurity(n, s, sq);
            return imp <= 1e-14 * std::max(1.0, sq) ? 0.0 : imp;
        }
        std::vector<double> counts(pb_.n_classes, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            counts[static_cast<std::size_t>(pb_.y[samples_[i]])] += 1.0;
        }
        return detail::gini_impurity(counts);
    }

    Split find_split(std::size_t begin, std::size_t end)
    {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        rng_.shuffle(std::span<std::size_t>(features_));

        Split best;
        for (std::size_t j = 0; j < features_.size(); ++j) {
            if (j >= pb_.params.mtry && best.valid) {
                break;
            }
            Split s = pb_.X.column(features_[j]).is_categorical()
                          ? categorical_split(features_[j], begin, end)
                          : continuous_split(features_[j], begin, end);
            if (s.valid && (!best.valid || s.score > best.score)) {
                best = std::move(s);
            }
        }
        return best;
    }

    Split continuous_split(std::size_t f, std::size_t begin, std::size_t end)
    {
        pairs_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = samples_[i];
            if (!pb_.X.is_missing(r, f)) {
                pairs_.emplace_back(pb_.X.value(r, f), pb_.y[r]);
            }
        }
        Split best;
        const std::size_t m = pairs_.size();
        const std::size_t min_leaf = pb_.params.min_leaf;
        if (m < 2 * min_leaf) {
            return best;
        }
        std::sort(pairs_.begin(), pairs_.end());
        if (pairs_.front().first == pairs_.back().first) {
            return best;
        }

        auto consider = [&](std::size_t i, double score, double parent) {
            if (!(score > kMinRelativeGain * parent) || (best.valid && !(score > best.score))) {
                return;
            }
            const double lo = pairs_[i].first;
            const double hi = pairs_[i + 1].first;
            double t = lo + (hi - lo) * 0.5;
            if (!(t < hi)) {
                t = lo;
            }
            best.valid = true;
            best.score = score;
            best.feature = f;
            best.threshold = t;
            best.n_left = static_cast<double>(i + 1);
            best.n_right = static_cast<double>(m - i - 1);
        };

        if (pb_.kind == ForestKind::Regression) {
            double total = 0.0;
            double total_sq = 0.0;
            for (const auto& [x, y] : pairs_) {
                total += y;
                total_sq += y * y;
            }
            const double parent = detail::sse_impurity(static_cast<double>(m), total, total_sq);
            if (parent <= 0.0) {
                return best;
            }
            double ls = 0.0;
            double lsq = 0.0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                ls += pairs_[i].second;
                lsq += pairs_[i].second * pairs_[i].second;
                const std::size_t nl = i + 1;
                if (pairs_[i].first == pairs_[i + 1].first || nl < min_leaf || m - nl < min_leaf) {
                    continue;
                }
                const double child =
                    detail::sse_impurity(static_cast<double>(nl), ls, lsq) +
                    detail::sse_impurity(static_cast<double>(m - nl), total - ls, total_sq - lsq);
                consider(i, parent - child, parent);
            }
            return best;
        }

        std::vector<double> lc(pb_.n_classes, 0.0);
        std::vector<double> rc(pb_.n_classes, 0.0);
        for (const auto& [x, y] : pairs_) {
            rc[static_cast<std::size_t>(y)] += 1.0;
        }
        const double parent = detail::gini_impurity(rc);
        if (parent <= 0.0) {
            return best;
        }
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const auto k = static_cast<std::size_t>(pairs_[i].second);
            lc[k] += 1.0;
            rc[k] -= 1.0;
            const std::size_t nl = i + 1;
            if (pairs_[i].first == pairs_[i + 1].first || nl < min_leaf || m - nl < min_leaf) {
                continue;
            }
            consider(i, parent - detail::gini_impurity(lc) - detail::gini_impurity(rc), parent);
        }
        return best;
    }

    Split categorical_split(std::size_t f, std::size_t begin, std::size_t end)
    {
        const std::size_t K = pb_.X.column(f).category_count();
        const bool regression = pb_.kind == ForestKind::Regression;
        const std::size_t width = regression ? 3 : pb_.n_classes;

        // Per-category sufficient statistics: (n, sum, sum_sq) or class counts.
        std::vector<double> stats(K * width, 0.0);
        std::vector<double> n_cat(K, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = samples_[i];
            if (pb_.X.is_missing(r, f)) {
                continue;
            }
            const auto c = pb_.X.category(r, f);
            const double y = pb_.y[r];
            n_cat[c] += 1.0;
            if (regression) {
                stats[c * 3] += 1.0;
                stats[c * 3 + 1] += y;
                stats[c * 3 + 2] += y * y;
            } else {
                stats[c * width + static_cast<std::size_t>(y)] += 1.0;
            }
        }
        std::vector<std::size_t> present;
        for (std::size_t c = 0; c < K; ++c) {
            if (n_cat[c] > 0.0) {
                present.push_back(c);
            }
        }
        Split best;
        if (present.size() < 2) {
            return best;
        }

        std::vector<double> total(width, 0.0);
        for (auto c : present) {
            for (std::size_t w = 0; w < width; ++w) {
                total[w] += stats[c * width + w];
            }
        }
        auto impurity = [&](const std::vector<double>& s) {
            return regression ? detail::sse_impurity(s[0], s[1], s[2]) : detail::gini_impurity(s);
        };
        const double parent = impurity(total);
        if (parent <= 0.0) {
            return best;
        }
        const auto min_leaf = static_cast<double>(pb_.params.min_leaf);

        std::vector<double> left(width);
        std::vector<double> right(width);
        auto evaluate = [&](const std::vector<std::uint8_t>& in_left) {
            std::fill(left.begin(), left.end(), 0.0);
            double nl = 0.0;
            for (auto c : present) {
                if (in_left[c]) {
                    nl += n_cat[c];
                    for (std::size_t w = 0; w < width; ++w) {
                        left[w] += stats[c * width + w];
                    }
                }
            }
            double n_total = 0.0;
            for (auto c : present) {
                n_total += n_cat[c];
            }
            const double nr = n_total - nl;
            if (nl < min_leaf || nr < min_leaf) {
                return;
            }
            for (std::size_t w = 0; w < width; ++w) {
                right[w] = total[w] - left[w];
            }
            const double score = parent - impurity(left) - impurity(right);
            if (!(score > kMinRelativeGain * parent) || (best.valid && !(score > best.score))) {
                return;
            }
            best.valid = true;
            best.score = score;
            best.feature = f;
            best.left_categories = in_left;
            best.n_left = nl;
            best.n_right = nr;
        };

        std::vector<std::uint8_t> in_left(K, 0);
        if (K <= 10) {
            // Every bipartition of the present categories; the last one stays
            // on the right so each partition is visited once.
            const std::size_t m = present.size();
            const std::uint32_t limit = 1U << (m - 1);
            for (std::uint32_t mask = 1; mask < limit; ++mask) {
                std::fill(in_left.begin(), in_left.end(), 0);
                for (std::size_t b = 0; b + 1 < m; ++b) {
                    if (mask & (1U << b)) {
                        in_left[present[b]] = 1;
                    }
                }
                evaluate(in_left);
            }
        } else {
            for (auto c : present) {
                std::fill(in_left.begin(), in_left.end(), 0);
                in_left[c] = 1;
                evaluate(in_left);
            }
        }
        return best;
    }

    const Problem& pb_;
    Rng rng_;
    std::vector<std::size_t> samples_;
    std::vector<std::size_t> features_;
    std::vector<std::pair<double, double>> pairs_;
    std::vector<TreeNode> nodes_;
};

ForestModel fit_impl(const DataTable& X, const LabelVector& y, const ForestParams& params,
                     std::uint64_t seed, Execution exec, bool allow_missing)
{
    if (X.n_rows() == 0) {
        throw DataError("fit_forest: empty training data");
    }
    if (y.size() != X.n_rows()) {
        throw UsageError("fit_forest: label length differs from row count");
    }
    if (!y.complete()) {
        throw DataError("fit_forest: labels contain missing entries");
    }
    if (!allow_missing && !X.complete()) {
        throw DataError("fit_forest: training inputs contain missing cells");
    }
    const ForestKind kind =
        y.kind == LabelKind::ClassLabel ? ForestKind::Classification : ForestKind::Regression;
    if (kind == ForestKind::Classification && y.classes.empty()) {
        throw DataError("fit_forest: class labels carry no class set");
    }

    std::vector<double> response(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        response[i] = *y.values[i];
        if (!std::isfinite(response[i])) {
            throw DataError("fit_forest: non-finite response");
        }
    }
    const Problem problem{X,    std::move(response), kind, y.classes.size(),
                          resolve(params, kind, X.n_cols()), allow_missing};

    const std::size_t n_trees = problem.params.n_trees;
    std::vector<DecisionTree> trees(n_trees);
    std::vector<std::uint64_t> seeds(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        seeds[t] = tree_seed(seed, t);
    }

    for_each_index(n_trees, exec, [&](std::size_t t) { trees[t] = TreeBuilder(problem, seeds[t]).build(); });
    return ForestModel(kind, X.schema(), y.classes, std::move(trees), std::move(seeds));
}

}  // namespace

double DecisionTree::predict_row(const DataTable& X, std::size_t r, bool allow_missing) const
{
    std::size_t i = 0;
    while (true) {
        const TreeNode& node = nodes_[i];
        if (node.is_leaf()) {
            return node.prediction;
        }
        const auto f = static_cast<std::size_t>(node.feature);
        bool left = false;
        if (X.is_missing(r, f)) {
            if (!allow_missing) {
                throw DataError("predict: row " + std::to_string(r) + " has a missing cell");
            }
            left = node.majority == Direction::Left;
        } else if (!node.left_categories.empty()) {
            const auto code = X.category(r, f);
            left = code < node.left_categories.size() && node.left_categories[code] != 0;
        } else {
            left = X.value(r, f) <= node.threshold;
        }
        i = static_cast<std::size_t>(left ? node.left : node.right);
    }
}

bool DecisionTree::uses_feature(std::size_t f) const noexcept
{
    return std::any_of(nodes_.begin(), nodes_.end(), [f](const TreeNode& n) {
        return !n.is_leaf() && static_cast<std::size_t>(n.feature) == f;
    });
}

std::size_t DecisionTree::depth() const noexcept
{
    if (nodes_.empty()) {
        return 0;
    }
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
        }
    }
    return deepest;
}

ForestModel::ForestModel(ForestKind kind, Schema features, std::vector<std::string> classes,
                         std::vector<DecisionTree> trees, std::vector<std::uint64_t> tree_seeds)
    : kind_(kind),
      features_(std::move(features)),
      classes_(std::move(classes)),
      trees_(std::move(trees)),
      tree_seeds_(std::move(tree_seeds))
{
    if (trees_.empty()) {
        throw UsageError("forest needs at least one tree");
    }
}

void ForestModel::check_arity(const DataTable& X) const
{
    if (X.n_cols() != features_.size()) {
        throw DataError("predict: table has " + std::to_string(X.n_cols()) + " columns, model expects " +
                        std::to_string(features_.size()));
    }
    for (std::size_t c = 0; c < features_.size(); ++c) {
        if (X.column(c).kind != features_[c].kind) {
            throw DataError("predict: column " + std::to_string(c) + " kind differs from training");
        }
    }
}

LabelVector ForestModel::predict(const DataTable& X) const
{
    return predict_impl(X, false);
}

LabelVector ForestModel::predict_with_missing(const DataTable& X) const
{
    return predict_impl(X, true);
}

LabelVector ForestModel::predict_impl(const DataTable& X, bool allow_missing) const
{
    check_arity(X);
    const std::size_t n = X.n_rows();
    std::vector<std::optional<double>> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (kind_ == ForestKind::Regression) {
            const double base = trees_.front().predict_row(X, r, allow_missing);
            double dev = 0.0;
            for (std::size_t t = 1; t < trees_.size(); ++t) {
                dev += trees_[t].predict_row(X, r, allow_missing) - base;
            }
            out[r] = base + dev / static_cast<double>(trees_.size());
        } else {
            std::vector<std::size_t> votes(classes_.size(), 0);
            for (const auto& tree : trees_) {
                ++votes[static_cast<std::size_t>(tree.predict_row(X, r, allow_missing))];
            }
            out[r] = static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        }
    }
    if (kind_ == ForestKind::Regression) {
        return LabelVector::regression(std::move(out));
    }
    return LabelVector::class_labels(std::move(out), classes_);
}

std::string ForestModel::to_json() const
{
    nlohmann::json doc;
    doc["kind"] = kind_ == ForestKind::Regression ? "regression" : "classification";
    doc["classes"] = classes_;
    auto& trees = doc["trees"] = nlohmann::json::array();
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        auto nodes = nlohmann::json::array();
        for (const auto& n : trees_[t].nodes()) {
            if (n.is_leaf()) {
                nlohmann::json leaf{{"prediction", n.prediction}};
                if (!n.class_counts.empty()) {
                    leaf["counts"] = n.class_counts;
                }
                nodes.push_back(std::move(leaf));
                continue;
            }
            nlohmann::json inner{{"feature", features_[static_cast<std::size_t>(n.feature)].name},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"missing", n.majority == Direction::Left ? "left" : "right"}};
            if (n.left_categories.empty()) {
                inner["threshold"] = n.threshold;
            } else {
                std::vector<std::string> cats;
                const auto& names = features_[static_cast<std::size_t>(n.feature)].categories;
                for (std::size_t c = 0; c < n.left_categories.size(); ++c) {
                    if (n.left_categories[c]) {
                        cats.push_back(names[c]);
                    }
                }
                inner["left_categories"] = cats;
            }
            nodes.push_back(std::move(inner));
        }
        trees.push_back({{"seed", tree_seeds_[t]}, {"nodes", std::move(nodes)}});
    }
    return doc.dump(2);
}

ForestModel fit_forest(const DataTable& X, const LabelVector& y, const ForestParams& params,
                       std::uint64_t seed, Execution exec)
{
    return fit_impl(X, y, params, seed, exec, false);
}

ForestModel fit_forest_on_missing(const DataTable& X, const LabelVector& y, const ForestParams& params,
                                  std::uint64_t seed, Execution exec)
{
    return fit_impl(X, y, params, seed, exec, true);
}

}  // namespace labelstack
