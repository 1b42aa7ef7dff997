#include "valuescape/spatialcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "valuescape/error.hpp"

namespace valuescape::cluster {

namespace {

double dist(const geometry::Point& a, const geometry::Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

// density ties at distance zero (exact duplicates) merge at this lambda
constexpr double kLambdaCap = 1e12;

double lambda_of(double d) { return d <= 0.0 ? kLambdaCap : std::min(1.0 / d, kLambdaCap); }

std::vector<double> core_distances_impl(std::span<const geometry::Point> pts, int k, bool omp) {
    const auto n = static_cast<int>(pts.size());
    if (n <= k) throw Error("core_distances: need more than min_samples points");
    std::vector<double> core(static_cast<std::size_t>(n));
    #pragma omp parallel for schedule(static) if (omp)
    for (int i = 0; i < n; ++i) {
        std::vector<double> d;
        d.reserve(static_cast<std::size_t>(n) - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) d.push_back(dist(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]));
        }
        std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
        core[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(k - 1)];
    }
    return core;
}

struct MstEdge {
    int a = 0, b = 0;
    double w = 0.0;
};

// Prim over the complete mutual-reachability graph; ties by point index.
std::vector<MstEdge> mutual_reachability_mst(std::span<const geometry::Point> pts,
                                             const std::vector<double>& core) {
    const auto n = static_cast<int>(pts.size());
    std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::vector<MstEdge> edges;
    edges.reserve(static_cast<std::size_t>(n) - 1);

    int cur = 0;
    in_tree[0] = 1;
    for (int added = 1; added < n; ++added) {
        int next = -1;
        for (int j = 0; j < n; ++j) {
            if (in_tree[static_cast<std::size_t>(j)]) continue;
            const double d_mr = std::max({core[static_cast<std::size_t>(cur)],
                                          core[static_cast<std::size_t>(j)],
                                          dist(pts[static_cast<std::size_t>(cur)],
                                               pts[static_cast<std::size_t>(j)])});
            if (d_mr < best[static_cast<std::size_t>(j)]) {
                best[static_cast<std::size_t>(j)] = d_mr;
                parent[static_cast<std::size_t>(j)] = cur;
            }
            if (next < 0 || best[static_cast<std::size_t>(j)] < best[static_cast<std::size_t>(next)])
                next = j;
        }
        in_tree[static_cast<std::size_t>(next)] = 1;
        edges.push_back({parent[static_cast<std::size_t>(next)], next, best[static_cast<std::size_t>(next)]});
        cur = next;
    }
    std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
        const auto kx = std::tuple(x.w, std::min(x.a, x.b), std::max(x.a, x.b));
        const auto ky = std::tuple(y.w, std::min(y.a, y.b), std::max(y.a, y.b));
        return kx < ky;
    });
    return edges;
}

// single-linkage dendrogram node (internal nodes only)
struct DendroNode {
    int left = -1;   // node id: < n means point, >= n means internal
    int right = -1;
    double d = 0.0;  // merge distance
    int size = 0;
};

struct CondCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    double stability = 0.0;
    std::vector<int> children;
    bool selected = false;
    double subtree_value = 0.0;
};

class CondensedTree {
public:
    CondensedTree(const std::vector<DendroNode>& nodes, int n, int min_cluster_size)
        : nodes_(nodes), n_(n), m_(min_cluster_size),
          fallout_cluster_(static_cast<std::size_t>(n), -1),
          fallout_lambda_(static_cast<std::size_t>(n), 0.0) {}

    void build(int root_node) {
        clusters_.push_back(CondCluster{-1, 0.0, 0.0, {}, false, 0.0});
        walk(root_node, 0, 0.0);
    }

    // Excess-of-mass: a cluster beats the summed value of its children;
    // the root is never selectable.
    void select_eom() {
        for (int c = static_cast<int>(clusters_.size()) - 1; c >= 0; --c) {
            auto& cl = clusters_[static_cast<std::size_t>(c)];
            if (cl.children.empty()) {
                cl.subtree_value = cl.stability;
                cl.selected = c != 0;
                continue;
            }
            double child_sum = 0.0;
            for (const int ch : cl.children)
                child_sum += clusters_[static_cast<std::size_t>(ch)].subtree_value;
            if (c != 0 && cl.stability >= child_sum) {
                cl.selected = true;
                cl.subtree_value = cl.stability;
                unselect_descendants(c);
            } else {
                cl.selected = false;
                cl.subtree_value = child_sum;
            }
        }
    }

    // label = lowest selected ancestor in the condensed tree, noise otherwise
    ClusterResult label_points() const {
        ClusterResult result;
        result.labels.assign(static_cast<std::size_t>(n_), -1);
        std::vector<int> label_of(clusters_.size(), -1);
        int next = 0;
        for (std::size_t c = 0; c < clusters_.size(); ++c) {
            if (clusters_[c].selected) {
                label_of[c] = next++;
                result.stabilities.push_back(clusters_[c].stability);
            }
        }
        result.n_clusters = next;
        for (int p = 0; p < n_; ++p) {
            int c = fallout_cluster_[static_cast<std::size_t>(p)];
            while (c >= 0) {
                if (clusters_[static_cast<std::size_t>(c)].selected) {
                    result.labels[static_cast<std::size_t>(p)] = label_of[static_cast<std::size_t>(c)];
                    break;
                }
                c = clusters_[static_cast<std::size_t>(c)].parent;
            }
        }
        return result;
    }

private:
    const std::vector<DendroNode>& nodes_;
    int n_;
    int m_;
    std::vector<CondCluster> clusters_;
    std::vector<int> fallout_cluster_;
    std::vector<double> fallout_lambda_;

    int node_size(int id) const {
        return id < n_ ? 1 : nodes_[static_cast<std::size_t>(id - n_)].size;
    }

    void leaves_of(int id, std::vector<int>& out) const {
        std::vector<int> stack{id};
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            if (cur < n_) {
                out.push_back(cur);
            } else {
                stack.push_back(nodes_[static_cast<std::size_t>(cur - n_)].left);
                stack.push_back(nodes_[static_cast<std::size_t>(cur - n_)].right);
            }
        }
    }

    void shed(int subtree, int cluster, double lambda) {
        std::vector<int> pts;
        leaves_of(subtree, pts);
        for (const int p : pts) {
            fallout_cluster_[static_cast<std::size_t>(p)] = cluster;
            fallout_lambda_[static_cast<std::size_t>(p)] = lambda;
        }
    }

    void walk(int start_node, int start_cluster, double start_lambda) {
        struct Frame {
            int node;
            int cluster;
            double birth;
        };
        std::vector<Frame> stack{{start_node, start_cluster, start_lambda}};
        while (!stack.empty()) {
            auto [node, cluster, birth] = stack.back();
            stack.pop_back();
            int cur = node;
            while (true) {
                const auto& dn = nodes_[static_cast<std::size_t>(cur - n_)];
                const double lambda = lambda_of(dn.d);
                const int sl = node_size(dn.left);
                const int sr = node_size(dn.right);
                auto& cl = clusters_[static_cast<std::size_t>(cluster)];
                if (sl >= m_ && sr >= m_) {
                    // true split: the cluster dies, two children are born
                    cl.stability += static_cast<double>(sl + sr) * (lambda - birth);
                    const int left_id = new_cluster(cluster, lambda);
                    const int right_id = new_cluster(cluster, lambda);
                    clusters_[static_cast<std::size_t>(cluster)].children = {left_id, right_id};
                    stack.push_back({dn.left, left_id, lambda});
                    stack.push_back({dn.right, right_id, lambda});
                    break;
                }
                if (sl < m_ && sr < m_) {
                    // everything falls out; the cluster ends here
                    cl.stability += static_cast<double>(sl + sr) * (lambda - birth);
                    shed(dn.left, cluster, lambda);
                    shed(dn.right, cluster, lambda);
                    break;
                }
                const int small = sl < m_ ? dn.left : dn.right;
                const int big = sl < m_ ? dn.right : dn.left;
                cl.stability += static_cast<double>(node_size(small)) * (lambda - birth);
                shed(small, cluster, lambda);
                cur = big;  // big is internal: size >= m >= 2
            }
        }
    }

    int new_cluster(int parent, double birth) {
        clusters_.push_back(CondCluster{parent, birth, 0.0, {}, false, 0.0});
        return static_cast<int>(clusters_.size()) - 1;
    }

    void unselect_descendants(int c) {
        std::vector<int> stack(clusters_[static_cast<std::size_t>(c)].children);
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            clusters_[static_cast<std::size_t>(cur)].selected = false;
            for (const int ch : clusters_[static_cast<std::size_t>(cur)].children)
                stack.push_back(ch);
        }
    }
};

}  // namespace

void ClusterConfig::validate() const {
    if (min_cluster_size < 2) throw Error("min_cluster_size must be >= 2");
    if (min_samples < 1) throw Error("min_samples must be >= 1");
    if (min_samples > min_cluster_size) throw Error("min_samples must be <= min_cluster_size");
}

std::vector<double> core_distances(std::span<const geometry::Point> pts, int k, ExecMode mode) {
    if (k < 1) throw Error("core_distances: min_samples must be >= 1");
    return core_distances_impl(pts, k, mode == ExecMode::openmp);
}

ClusterResult hdbscan(std::span<const geometry::Point> pts, const ClusterConfig& config,
                      ExecMode mode) {
    config.validate();
    const auto n = static_cast<int>(pts.size());
    ClusterResult all_noise;
    all_noise.labels.assign(pts.size(), -1);

    if (n <= config.min_samples) return all_noise;  // too few points even for core distances

    const auto core = core_distances(pts, config.min_samples, mode);
    const auto edges = mutual_reachability_mst(pts, core);
    double mst_weight = 0.0;
    for (const auto& e : edges) mst_weight += e.w;

    if (n < config.min_cluster_size) {
        all_noise.mst_weight = mst_weight;
        return all_noise;
    }

    // union-find builds the single-linkage dendrogram in edge order
    std::vector<DendroNode> nodes;
    nodes.reserve(pts.size());
    std::vector<int> rep(2 * pts.size() - 1);
    std::iota(rep.begin(), rep.end(), 0);
    std::vector<int> rep_node(2 * pts.size() - 1);
    std::iota(rep_node.begin(), rep_node.end(), 0);
    auto find = [&](int x) {
        while (rep[static_cast<std::size_t>(x)] != x) {
            rep[static_cast<std::size_t>(x)] = rep[static_cast<std::size_t>(rep[static_cast<std::size_t>(x)])];
            x = rep[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& e : edges) {
        const int ra = find(e.a);
        const int rb = find(e.b);
        const int na = rep_node[static_cast<std::size_t>(ra)];
        const int nb = rep_node[static_cast<std::size_t>(rb)];
        DendroNode dn;
        dn.left = na;
        dn.right = nb;
        dn.d = e.w;
        dn.size = (na < n ? 1 : nodes[static_cast<std::size_t>(na - n)].size) +
                  (nb < n ? 1 : nodes[static_cast<std::size_t>(nb - n)].size);
        nodes.push_back(dn);
        const int new_id = n + static_cast<int>(nodes.size()) - 1;
        rep[static_cast<std::size_t>(rb)] = ra;
        rep_node[static_cast<std::size_t>(ra)] = new_id;
    }

    CondensedTree tree(nodes, n, config.min_cluster_size);
    tree.build(n + static_cast<int>(nodes.size()) - 1);
    tree.select_eom();
    ClusterResult result = tree.label_points();
    result.mst_weight = mst_weight;
    return result;
}

LayerClustering cluster_value_layers(const std::vector<LayerInput>& assignments,
                                     const ingest::Projection& projection,
                                     const ClusterConfig& config, ExecMode mode) {
    config.validate();
    std::map<std::string, const ingest::ProjectedPoint*> by_id;
    for (const auto& p : projection.points) by_id[p.contribution_id] = &p;

    LayerClustering out;
    for (const auto& a : assignments) {
        if (a.value_id.empty()) continue;
        const auto it = by_id.find(a.contribution_id);
        if (it == by_id.end()) {
            ++out.skipped_without_location;
            continue;
        }
        auto& layer = out.layers[a.value_id];
        layer.value_id = a.value_id;
        layer.contribution_ids.push_back(a.contribution_id);
        layer.points.push_back(geometry::Point{it->second->x, it->second->y});
    }
    for (auto& [value_id, layer] : out.layers) {
        (void)value_id;
        layer.clusters = hdbscan(layer.points, config, mode);
    }
    return out;
}

nlohmann::ordered_json ClusterResult::to_json() const {
    nlohmann::ordered_json j;
    j["labels"] = labels;
    j["n_clusters"] = n_clusters;
    j["stabilities"] = stabilities;
    j["mst_weight"] = mst_weight;
    return j;
}

}  // namespace valuescape::cluster
