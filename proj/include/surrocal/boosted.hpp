#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#if defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>
#endif

#include <json.hpp>

#include "surrocal/common.hpp"
#include "surrocal/io.hpp"
#include "surrocal/prng.hpp"

namespace surrocal {

struct MatrixView {
    const double* data = nullptr;
    std::size_t n_rows = 0;
    int n_cols = 0;

    const double* row(std::size_t i) const { return data + i * static_cast<std::size_t>(n_cols); }
    double at(std::size_t i, int j) const { return row(i)[j]; }
};

enum class Loss { logistic, squared };

inline std::string loss_name(Loss l) { return l == Loss::logistic ? "logistic" : "squared"; }

inline Loss parse_loss(const std::string& s) {
    if (s == "logistic") return Loss::logistic;
    if (s == "squared") return Loss::squared;
    fail("unknown loss '" + s + "'");
}

struct Hyperparams {
    int n_trees = 100;
    int max_depth = 4;
    double min_child_weight = 1.0;
    double shrinkage = 0.1;
    double subsample = 1.0;
    double l2_reg = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        require(n_trees >= 1, "hyperparams: n_trees must be >= 1");
        require(max_depth >= 1, "hyperparams: max_depth must be >= 1");
        require(shrinkage > 0.0 && shrinkage <= 1.0, "hyperparams: shrinkage must lie in (0,1]");
        require(subsample > 0.0 && subsample <= 1.0, "hyperparams: subsample must lie in (0,1]");
        require(l2_reg >= 0.0, "hyperparams: l2_reg must be >= 0");
        require(min_child_weight >= 0.0, "hyperparams: min_child_weight must be >= 0");
    }
};

// Internal nodes route value < threshold left, >= threshold right.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0; // leaf value before shrinkage

    bool is_leaf() const { return feature < 0; }
};

using Tree = std::vector<TreeNode>;

inline double tree_value(const Tree& tree, const double* x) {
    int node = 0;
    while (!tree[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = tree[static_cast<std::size_t>(node)];
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return tree[static_cast<std::size_t>(node)].weight;
}

struct PlattCalibrator {
    double a = 0.0;
    double b = 0.0;

    double operator()(double score) const { return sigmoid(-(a * score + b)); }
};

// Boosted CART ensemble. Raw prediction is base_score + shrinkage * sum of
// tree outputs; logistic loss maps it through a sigmoid and, when present,
// the Platt layer rescales that probability.
struct TreeEnsemble {
    Loss loss = Loss::logistic;
    double base_score = 0.0;
    double shrinkage = 0.1;
    int n_features = 0;
    std::vector<Tree> trees;
    std::optional<PlattCalibrator> calibrator;

    double margin(const double* x) const {
        double acc = 0.0;
        for (const Tree& t : trees) acc += tree_value(t, x);
        return base_score + shrinkage * acc;
    }

    // probability for logistic loss, raw value for squared loss
    double score(const double* x) const {
        const double m = margin(x);
        if (loss == Loss::squared) return m;
        const double p = sigmoid(m);
        return calibrator ? (*calibrator)(p) : p;
    }
};

namespace boosted_detail {

// Compact node for batch traversal: internal nodes hold the threshold and
// the left-child index (the right child always sits at left+1); leaves hold
// the weight with feature = -1.
struct PackedNode {
    double value;
    std::int32_t feature;
    std::int32_t left;
};

inline void pack_tree(const Tree& tree, std::vector<PackedNode>& out) {
    for (const TreeNode& nd : tree) {
        if (nd.is_leaf()) {
            out.push_back({nd.weight, -1, 0});
        } else {
            // builder emits sibling pairs, so right == left + 1 holds
            out.push_back({nd.threshold, nd.feature, nd.left});
        }
    }
}

inline int tree_depth(const Tree& tree, int node = 0) {
    const TreeNode& nd = tree[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return 0;
    return 1 + std::max(tree_depth(tree, nd.left), tree_depth(tree, nd.right));
}

// Perfect-heap layout for shallow trees: level-order slots with child index
// arithmetic (2i+1 / 2i+2), so descent is branchless and runs a fixed number
// of levels. Padded internal slots route left on a +inf threshold; the
// reachable descendant leaf carries the original weight.
struct HeapSlot {
    double threshold;
    std::int64_t feature;
};

struct HeapTree {
    int depth = 0;
    std::vector<HeapSlot> slots;     // 2^depth - 1 internal slots
    std::vector<double> leaf_weight; // 2^depth leaves
};

inline void heap_fill(const Tree& tree, int node, std::size_t slot, int level, int depth, HeapTree& out) {
    const TreeNode& nd = tree[static_cast<std::size_t>(node)];
    if (level == depth) {
        out.leaf_weight[slot - (static_cast<std::size_t>(1) << depth) + 1] = nd.weight;
        return;
    }
    if (nd.is_leaf()) {
        // pad: always route left, weight lands on the left spine's leaf
        out.slots[slot] = {std::numeric_limits<double>::infinity(), 0};
        heap_fill(tree, node, 2 * slot + 1, level + 1, depth, out);
        return;
    }
    out.slots[slot] = {nd.threshold, nd.feature};
    heap_fill(tree, nd.left, 2 * slot + 1, level + 1, depth, out);
    heap_fill(tree, nd.right, 2 * slot + 2, level + 1, depth, out);
}

inline HeapTree heap_tree(const Tree& tree, int depth) {
    HeapTree out;
    out.depth = depth;
    out.slots.assign((static_cast<std::size_t>(1) << depth) - 1,
                     {std::numeric_limits<double>::infinity(), 0});
    out.leaf_weight.assign(static_cast<std::size_t>(1) << depth, 0.0);
    heap_fill(tree, 0, 0, 0, depth, out);
    return out;
}

} // namespace boosted_detail

inline void predict_margin(const TreeEnsemble& model, const MatrixView& x, std::span<double> out) {
    require(x.n_cols == model.n_features, "predict: feature count mismatch");
    require(out.size() == x.n_rows, "predict: output size mismatch");
    std::fill(out.begin(), out.end(), 0.0);

    const std::size_t n = x.n_rows;
    if (n < 64) {
        for (const Tree& t : model.trees)
            for (std::size_t i = 0; i < n; ++i) out[i] += tree_value(t, x.row(i));
        for (std::size_t i = 0; i < n; ++i) out[i] = model.base_score + model.shrinkage * out[i];
        return;
    }

    // batch layouts: shallow trees go into a pointer-free perfect-heap form
    // with branchless fixed-depth descent; deeper or irregular trees use a
    // packed pointer walk with interleaved lanes
    using boosted_detail::HeapTree;
    using boosted_detail::PackedNode;
    std::vector<HeapTree> heaps;
    std::vector<PackedNode> packed;
    // per model tree, in order: heap index (>=0) or ~packed_root (<0), so
    // accumulation keeps the original tree order bit-for-bit
    std::vector<std::ptrdiff_t> dispatch;
    for (const Tree& t : model.trees) {
        bool siblings = true;
        for (const TreeNode& nd : t)
            if (!nd.is_leaf() && nd.right != nd.left + 1) siblings = false;
        const int depth = siblings ? boosted_detail::tree_depth(t) : 99;
        if (siblings && depth <= 6) {
            dispatch.push_back(static_cast<std::ptrdiff_t>(heaps.size()));
            heaps.push_back(boosted_detail::heap_tree(t, depth));
        } else if (siblings) {
            dispatch.push_back(~static_cast<std::ptrdiff_t>(packed.size()));
            boosted_detail::pack_tree(t, packed);
        } else {
            dispatch.push_back(std::numeric_limits<std::ptrdiff_t>::min());
        }
    }

    constexpr std::size_t kLanes = 8; // independent walks to hide node-load latency
    for (std::size_t b = 0; b < n; b += kLanes) {
        const std::size_t hi = std::min(n, b + kLanes);
        const std::size_t lanes = hi - b;
        const double* rows[kLanes] = {};
        double acc[kLanes] = {};
        for (std::size_t l = 0; l < lanes; ++l) rows[l] = x.row(b + l);
        for (std::size_t ti = 0; ti < model.trees.size(); ++ti) {
            const std::ptrdiff_t tag = dispatch[ti];
            if (tag == std::numeric_limits<std::ptrdiff_t>::min()) {
                for (std::size_t l = 0; l < lanes; ++l) acc[l] += tree_value(model.trees[ti], rows[l]);
            } else if (tag >= 0) {
                const HeapTree& ht = heaps[static_cast<std::size_t>(tag)];
                const boosted_detail::HeapSlot* slots = ht.slots.data();
                std::size_t cur[kLanes] = {};
                for (int level = 0; level < ht.depth; ++level)
                    for (std::size_t l = 0; l < lanes; ++l) {
                        const std::size_t c = cur[l];
                        cur[l] = 2 * c + 1 + (rows[l][slots[c].feature] >= slots[c].threshold ? 1 : 0);
                    }
                const std::size_t base = (static_cast<std::size_t>(1) << ht.depth) - 1;
                for (std::size_t l = 0; l < lanes; ++l) acc[l] += ht.leaf_weight[cur[l] - base];
            } else {
                const PackedNode* nodes = packed.data() + ~tag;
                std::int32_t cur[kLanes] = {};
                bool done = false;
                while (!done) {
                    done = true;
                    for (std::size_t l = 0; l < lanes; ++l) {
                        const PackedNode nd = nodes[cur[l]];
                        if (nd.feature >= 0) {
                            cur[l] = nd.left + (rows[l][nd.feature] >= nd.value ? 1 : 0);
                            done = false;
                        }
                    }
                }
                for (std::size_t l = 0; l < lanes; ++l) acc[l] += nodes[cur[l]].value;
            }
        }
        for (std::size_t l = 0; l < lanes; ++l) out[b + l] += acc[l];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = model.base_score + model.shrinkage * out[i];
}

inline std::vector<double> predict(const TreeEnsemble& model, const MatrixView& x) {
    std::vector<double> out(x.n_rows);
    predict_margin(model, x, out);
    if (model.loss == Loss::logistic) {
        for (double& v : out) v = sigmoid(v);
        if (model.calibrator)
            for (double& v : out) v = (*model.calibrator)(v);
    }
    return out;
}

namespace boosted_detail {

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
    int depth = 0;
};

struct ScanState {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
    double last_value = 0.0;
};

struct BestSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double g_left = 0.0;
    double h_left = 0.0;
};

inline double leaf_weight(double g, double h, double l2) {
    const double denom = h + l2;
    if (denom <= 1e-12) return 0.0;
    return -g / denom;
}

inline double split_gain(double gl, double hl, double gr, double hr, double l2) {
    auto part = [l2](double g, double h) {
        const double denom = h + l2;
        return denom > 0.0 ? g * g / denom : 0.0;
    };
    return 0.5 * (part(gl, hl) + part(gr, hr) - part(gl + gr, hl + hr));
}

inline double training_loss(Loss loss, std::span<const double> margins, std::span<const double> y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (loss == Loss::squared) {
            const double d = margins[i] - y[i];
            total += 0.5 * d * d;
        } else {
            // log(1+exp(-m)) computed stably
            const double m = margins[i];
            const double z = y[i] > 0.5 ? -m : m;
            total += z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        }
    }
    return total / static_cast<double>(y.size());
}

} // namespace boosted_detail

// Second-order gradient boosting with exhaustive greedy split search over
// presorted feature indices. Deterministic in (X, y, hp): features are
// scanned in ascending index order and thresholds in ascending value order,
// so equal gains resolve to the lowest (feature, threshold).
inline TreeEnsemble fit_boosted(const MatrixView& x, std::span<const double> y, const Hyperparams& hp,
                                Loss loss) {
    using namespace boosted_detail;
    hp.validate();
    require(x.n_rows == y.size(), "fit_boosted: X/y size mismatch");
    require(x.n_rows >= 2, "fit_boosted: need at least two samples");
    require(x.n_cols >= 1, "fit_boosted: need at least one feature");
    for (std::size_t i = 0; i < x.n_rows; ++i)
        for (int j = 0; j < x.n_cols; ++j)
            require(std::isfinite(x.at(i, j)), "fit_boosted: non-finite feature value");

    const std::size_t n = x.n_rows;
    const int d = x.n_cols;

    TreeEnsemble model;
    model.loss = loss;
    model.shrinkage = hp.shrinkage;
    model.n_features = d;

    double ymean = 0.0;
    bool all_same = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (loss == Loss::logistic)
            require(y[i] == 0.0 || y[i] == 1.0, "fit_boosted: logistic loss needs 0/1 labels");
        ymean += y[i];
        if (y[i] != y[0]) all_same = false;
    }
    ymean /= static_cast<double>(n);
    if (loss == Loss::squared) {
        model.base_score = ymean;
    } else {
        // margin 0 (probability one half) keeps per-row hessians at their
        // maximum, so rare positives stay separable under min_child_weight
        model.base_score = all_same ? logit(std::clamp(ymean, 1e-12, 1.0 - 1e-12)) : 0.0;
    }
    if (all_same) return model; // constant-label data: base score alone

    // presorted row indices per feature, ties broken by row index
    std::vector<std::uint32_t> order(static_cast<std::size_t>(d) * n);
    for (int f = 0; f < d; ++f) {
        std::uint32_t* ord = &order[static_cast<std::size_t>(f) * n];
        for (std::size_t i = 0; i < n; ++i) ord[i] = static_cast<std::uint32_t>(i);
        std::sort(ord, ord + n, [&](std::uint32_t a, std::uint32_t b) {
            const double va = x.at(a, f), vb = x.at(b, f);
            return va < vb || (va == vb && a < b);
        });
    }

    std::vector<double> margins(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> node_of(n);
    const int max_nodes = (2 << hp.max_depth) + 1;

    const bool check_monotone = hp.subsample >= 1.0; // exact only without row sampling
    double prev_loss = training_loss(loss, margins, y);

    for (int m = 0; m < hp.n_trees; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            if (loss == Loss::squared) {
                grad[i] = margins[i] - y[i];
                hess[i] = 1.0;
            } else {
                const double p = sigmoid(margins[i]);
                grad[i] = p - y[i];
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
        }

        // row subsampling per tree, seeded by (hp.seed, tree index)
        std::fill(node_of.begin(), node_of.end(), 0);
        if (hp.subsample < 1.0) {
            Rng rng(mix_seed(hp.seed, static_cast<std::uint64_t>(m)));
            std::size_t kept = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (rng.uniform() < hp.subsample) ++kept;
                else node_of[i] = -1;
            }
            if (kept < 2) std::fill(node_of.begin(), node_of.end(), 0);
        }

        Tree tree;
        tree.emplace_back();
        std::vector<NodeStats> stats(1);
        for (std::size_t i = 0; i < n; ++i) {
            if (node_of[i] != 0) continue;
            stats[0].g += grad[i];
            stats[0].h += hess[i];
            ++stats[0].count;
        }

        std::vector<int> frontier{0};
        while (!frontier.empty()) {
            std::vector<char> splittable(stats.size(), 0);
            bool any = false;
            for (int nid : frontier) {
                const NodeStats& ns = stats[static_cast<std::size_t>(nid)];
                if (ns.depth < hp.max_depth && ns.count >= 2 && ns.h >= 2.0 * hp.min_child_weight) {
                    splittable[static_cast<std::size_t>(nid)] = 1;
                    any = true;
                }
            }
            if (!any) break;

            std::vector<BestSplit> best(stats.size());
            std::vector<ScanState> scan(stats.size());
            for (int f = 0; f < d; ++f) {
                for (auto& s : scan) s = ScanState{};
                const std::uint32_t* ord = &order[static_cast<std::size_t>(f) * n];
                for (std::size_t k = 0; k < n; ++k) {
                    const std::uint32_t i = ord[k];
                    const int nid = node_of[i];
                    if (nid < 0 || !splittable[static_cast<std::size_t>(nid)]) continue;
                    const double v = x.at(i, f);
                    ScanState& st = scan[static_cast<std::size_t>(nid)];
                    const NodeStats& ns = stats[static_cast<std::size_t>(nid)];
                    if (st.count > 0 && v > st.last_value) {
                        const double hl = st.h, hr = ns.h - st.h;
                        if (hl >= hp.min_child_weight && hr >= hp.min_child_weight) {
                            const double gain = split_gain(st.g, hl, ns.g - st.g, hr, hp.l2_reg);
                            BestSplit& b = best[static_cast<std::size_t>(nid)];
                            // strict improvement keeps the lowest (feature, threshold) on ties
                            if (gain > b.gain) {
                                b.gain = gain;
                                b.feature = f;
                                b.threshold = 0.5 * (st.last_value + v);
                                b.g_left = st.g;
                                b.h_left = st.h;
                            }
                        }
                    }
                    st.g += grad[i];
                    st.h += hess[i];
                    ++st.count;
                    st.last_value = v;
                }
            }

            std::vector<int> next;
            for (int nid : frontier) {
                if (!splittable[static_cast<std::size_t>(nid)]) continue;
                const BestSplit& b = best[static_cast<std::size_t>(nid)];
                if (b.feature < 0 || !(b.gain > 0.0)) continue;
                if (static_cast<int>(stats.size()) + 2 > max_nodes) break;
                const int left = static_cast<int>(tree.size());
                const int right = left + 1;
                {
                    TreeNode& nd = tree[static_cast<std::size_t>(nid)];
                    nd.feature = b.feature;
                    nd.threshold = b.threshold;
                    nd.left = left;
                    nd.right = right;
                }
                tree.emplace_back(); // invalidates references into the tree
                tree.emplace_back();
                const NodeStats parent = stats[static_cast<std::size_t>(nid)];
                NodeStats ls, rs;
                ls.depth = rs.depth = parent.depth + 1;
                ls.g = b.g_left;
                ls.h = b.h_left;
                rs.g = parent.g - b.g_left;
                rs.h = parent.h - b.h_left;
                stats.push_back(ls);
                stats.push_back(rs);
                next.push_back(left);
                next.push_back(right);
            }

            // reassign rows of nodes that actually split
            for (std::size_t i = 0; i < n; ++i) {
                int nid = node_of[i];
                if (nid < 0) continue;
                const TreeNode& nd = tree[static_cast<std::size_t>(nid)];
                if (nd.is_leaf()) continue;
                const int child = x.at(i, nd.feature) < nd.threshold ? nd.left : nd.right;
                node_of[i] = child;
                ++stats[static_cast<std::size_t>(child)].count;
            }
            frontier = std::move(next);
        }

        for (std::size_t nid = 0; nid < tree.size(); ++nid) {
            if (tree[nid].is_leaf())
                tree[nid].weight = leaf_weight(stats[nid].g, stats[nid].h, hp.l2_reg);
        }

        for (std::size_t i = 0; i < n; ++i)
            margins[i] += hp.shrinkage * tree_value(tree, x.row(i));
        model.trees.push_back(std::move(tree));

        if (check_monotone) {
            const double cur_loss = training_loss(loss, margins, y);
            require(cur_loss <= prev_loss + 1e-9 * std::max(1.0, std::abs(prev_loss)),
                    "fit_boosted: training loss increased at tree " + std::to_string(m));
            prev_loss = cur_loss;
        }
    }
    return model;
}

// Relative split frequencies per feature; a rank statistic over the ensemble.
inline std::vector<double> importance(const TreeEnsemble& model) {
    std::vector<double> counts(static_cast<std::size_t>(model.n_features), 0.0);
    double total = 0.0;
    for (const Tree& t : model.trees)
        for (const TreeNode& nd : t)
            if (!nd.is_leaf()) {
                counts[static_cast<std::size_t>(nd.feature)] += 1.0;
                total += 1.0;
            }
    require(total > 0.0, "importance: ensemble has no internal nodes");
    for (double& c : counts) c /= total;
    return counts;
}

inline nlohmann::json ensemble_to_json(const TreeEnsemble& model) {
    nlohmann::json j;
    j["format"] = "surrocal-ensemble";
    j["version"] = 1;
    j["loss"] = loss_name(model.loss);
    j["base_score"] = model.base_score;
    j["shrinkage"] = model.shrinkage;
    j["n_features"] = model.n_features;
    if (model.calibrator)
        j["calibrator"] = {{"a", model.calibrator->a}, {"b", model.calibrator->b}};
    else
        j["calibrator"] = nullptr;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& t : model.trees) {
        nlohmann::json jt;
        auto& feature = jt["feature"] = nlohmann::json::array();
        auto& threshold = jt["threshold"] = nlohmann::json::array();
        auto& left = jt["left"] = nlohmann::json::array();
        auto& right = jt["right"] = nlohmann::json::array();
        auto& weight = jt["weight"] = nlohmann::json::array();
        for (const TreeNode& nd : t) {
            feature.push_back(nd.feature);
            threshold.push_back(nd.threshold);
            left.push_back(nd.left);
            right.push_back(nd.right);
            weight.push_back(nd.weight);
        }
        trees.push_back(std::move(jt));
    }
    j["trees"] = std::move(trees);
    return j;
}

inline TreeEnsemble ensemble_from_json(const nlohmann::json& j) {
    require(j.value("format", "") == "surrocal-ensemble", "model JSON: unknown format");
    TreeEnsemble model;
    model.loss = parse_loss(j.at("loss").get<std::string>());
    model.base_score = j.at("base_score").get<double>();
    model.shrinkage = j.at("shrinkage").get<double>();
    model.n_features = j.at("n_features").get<int>();
    if (!j.at("calibrator").is_null()) {
        PlattCalibrator c;
        c.a = j["calibrator"].at("a").get<double>();
        c.b = j["calibrator"].at("b").get<double>();
        require(model.loss == Loss::logistic, "model JSON: calibrator on a regression model");
        model.calibrator = c;
    }
    for (const auto& jt : j.at("trees")) {
        const auto& feature = jt.at("feature");
        const auto& threshold = jt.at("threshold");
        const auto& left = jt.at("left");
        const auto& right = jt.at("right");
        const auto& weight = jt.at("weight");
        const std::size_t sz = feature.size();
        require(threshold.size() == sz && left.size() == sz && right.size() == sz && weight.size() == sz,
                "model JSON: ragged tree arrays");
        Tree t(sz);
        for (std::size_t i = 0; i < sz; ++i) {
            t[i].feature = feature[i].get<int>();
            t[i].threshold = threshold[i].get<double>();
            t[i].left = left[i].get<int>();
            t[i].right = right[i].get<int>();
            t[i].weight = weight[i].get<double>();
            require(t[i].feature < model.n_features, "model JSON: feature index out of range");
            if (!t[i].is_leaf())
                require(t[i].left >= 0 && t[i].right >= 0 && static_cast<std::size_t>(t[i].left) < sz &&
                            static_cast<std::size_t>(t[i].right) < sz,
                        "model JSON: child index out of range");
        }
        model.trees.push_back(std::move(t));
    }
    return model;
}

inline void save_model(const TreeEnsemble& model, const std::filesystem::path& path) {
    write_file(path, ensemble_to_json(model).dump(2) + "\n");
}

inline TreeEnsemble load_model(const std::filesystem::path& path) {
    return ensemble_from_json(nlohmann::json::parse(read_file(path)));
}

} // namespace surrocal
