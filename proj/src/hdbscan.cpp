#include "scenalloc/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scenalloc/errors.hpp"

namespace scenalloc::prep {

namespace {

struct MstEdge {
    int a, b;
    double dist;  // mutual reachability
};

// Single-linkage merge node over the MST. Leaves are points 0..m-1; internal
// nodes are m..2m-2 with the merge distance.
struct LinkNode {
    int left = -1, right = -1;
    double dist = 0.0;
    int size = 1;
};

// One condensed cluster: born when its parent split at lambda_birth; rows of
// the condensed tree record points (or child clusters) leaving at some lambda.
struct CondensedCluster {
    int parent = -1;
    double lambda_birth = 0.0;
    double stability = 0.0;
    std::vector<int> children;            // condensed child cluster ids
    std::vector<std::pair<int, double>> points;  // (point, lambda at which it leaves)
    bool selected = false;
};

double lambda_of(double dist) {
    return dist > 0.0 ? 1.0 / dist : std::numeric_limits<double>::infinity();
}

}  // namespace

ClusterLabels hdbscan_cluster(const Eigen::MatrixXd& points, int min_cluster_size) {
    const int m = static_cast<int>(points.rows());
    if (min_cluster_size < 2) throw Error(ErrorKind::Parameter, "min_cluster_size must be >= 2");
    if (m < min_cluster_size)
        throw Error(ErrorKind::InsufficientData,
                    strfmt("%d samples < min_cluster_size %d", m, min_cluster_size));

    // Pairwise distances and core distances (min_samples = min_cluster_size).
    Eigen::MatrixXd dist(m, m);
    for (int i = 0; i < m; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < m; ++j) {
            double d = (points.row(i) - points.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    const int k_core = std::min(min_cluster_size, m - 1);
    Eigen::VectorXd core(m);
    std::vector<double> buf(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) buf[static_cast<size_t>(j)] = dist(i, j);
        std::nth_element(buf.begin(), buf.begin() + k_core, buf.end());
        core(i) = buf[static_cast<size_t>(k_core)];
    }

    // Prim's MST on the mutual-reachability graph.
    std::vector<MstEdge> mst;
    mst.reserve(static_cast<size_t>(m - 1));
    {
        std::vector<bool> in_tree(static_cast<size_t>(m), false);
        std::vector<double> best(static_cast<size_t>(m), std::numeric_limits<double>::infinity());
        std::vector<int> best_from(static_cast<size_t>(m), 0);
        in_tree[0] = true;
        for (int j = 1; j < m; ++j) {
            best[static_cast<size_t>(j)] = std::max({core(0), core(j), dist(0, j)});
            best_from[static_cast<size_t>(j)] = 0;
        }
        for (int step = 1; step < m; ++step) {
            int next = -1;
            double next_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j)
                if (!in_tree[static_cast<size_t>(j)] && best[static_cast<size_t>(j)] < next_d) {
                    next_d = best[static_cast<size_t>(j)];
                    next = j;
                }
            in_tree[static_cast<size_t>(next)] = true;
            mst.push_back({best_from[static_cast<size_t>(next)], next, next_d});
            for (int j = 0; j < m; ++j) {
                if (in_tree[static_cast<size_t>(j)]) continue;
                double mr = std::max({core(next), core(j), dist(next, j)});
                if (mr < best[static_cast<size_t>(j)]) {
                    best[static_cast<size_t>(j)] = mr;
                    best_from[static_cast<size_t>(j)] = next;
                }
            }
        }
    }
    std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) { return x.dist < y.dist; });

    // Single-linkage hierarchy via union-find over the sorted MST.
    std::vector<LinkNode> nodes(static_cast<size_t>(2 * m - 1));
    std::vector<int> find(static_cast<size_t>(2 * m - 1));
    std::iota(find.begin(), find.end(), 0);
    auto root_of = [&](int x) {
        while (find[static_cast<size_t>(x)] != x) {
            find[static_cast<size_t>(x)] = find[static_cast<size_t>(find[static_cast<size_t>(x)])];
            x = find[static_cast<size_t>(x)];
        }
        return x;
    };
    int next_node = m;
    for (const auto& e : mst) {
        int ra = root_of(e.a), rb = root_of(e.b);
        LinkNode& n = nodes[static_cast<size_t>(next_node)];
        n.left = ra;
        n.right = rb;
        n.dist = e.dist;
        n.size = nodes[static_cast<size_t>(ra)].size + nodes[static_cast<size_t>(rb)].size;
        find[static_cast<size_t>(ra)] = next_node;
        find[static_cast<size_t>(rb)] = next_node;
        ++next_node;
    }
    const int root = 2 * m - 2;

    // Condense the hierarchy: only splits where both sides reach
    // min_cluster_size spawn new clusters; smaller offshoots shed points.
    std::vector<CondensedCluster> clusters;
    clusters.push_back({});  // root cluster, lambda_birth 0
    // Walk with explicit stack: (hierarchy node, condensed cluster it feeds).
    std::vector<std::pair<int, int>> stack{{root, 0}};
    // Collect every point of a hierarchy subtree into cluster `cid`, leaving at `lam`.
    auto shed_points = [&](int node, int cid, double lam) {
        std::vector<int> st{node};
        while (!st.empty()) {
            int nd = st.back();
            st.pop_back();
            if (nd < m) {
                clusters[static_cast<size_t>(cid)].points.push_back({nd, lam});
            } else {
                st.push_back(nodes[static_cast<size_t>(nd)].left);
                st.push_back(nodes[static_cast<size_t>(nd)].right);
            }
        }
    };
    while (!stack.empty()) {
        auto [nd, cid] = stack.back();
        stack.pop_back();
        if (nd < m) {
            // Lone point at the top of a cluster's subtree: it leaves when the
            // edge that attached it vanished; approximate with birth lambda.
            clusters[static_cast<size_t>(cid)].points.push_back({nd, clusters[static_cast<size_t>(cid)].lambda_birth});
            continue;
        }
        const LinkNode& n = nodes[static_cast<size_t>(nd)];
        double lam = lambda_of(n.dist);
        int lsize = nodes[static_cast<size_t>(n.left)].size;
        int rsize = nodes[static_cast<size_t>(n.right)].size;
        bool lbig = lsize >= min_cluster_size;
        bool rbig = rsize >= min_cluster_size;
        if (lbig && rbig) {
            for (int child_node : {n.left, n.right}) {
                CondensedCluster c;
                c.parent = cid;
                c.lambda_birth = lam;
                clusters.push_back(c);
                int child_id = static_cast<int>(clusters.size()) - 1;
                clusters[static_cast<size_t>(cid)].children.push_back(child_id);
                stack.push_back({child_node, child_id});
            }
        } else if (lbig || rbig) {
            int keep = lbig ? n.left : n.right;
            int shed = lbig ? n.right : n.left;
            shed_points(shed, cid, lam);
            stack.push_back({keep, cid});
        } else {
            shed_points(n.left, cid, lam);
            shed_points(n.right, cid, lam);
        }
    }

    // Stability: sum over everything that leaves the cluster of
    // (lambda_leave - lambda_birth) * mass.
    std::vector<int> total_points(clusters.size(), 0);
    for (int cid = static_cast<int>(clusters.size()) - 1; cid >= 0; --cid) {
        total_points[static_cast<size_t>(cid)] += static_cast<int>(clusters[static_cast<size_t>(cid)].points.size());
        for (int ch : clusters[static_cast<size_t>(cid)].children)
            total_points[static_cast<size_t>(cid)] += total_points[static_cast<size_t>(ch)];
    }
    for (size_t cid = 0; cid < clusters.size(); ++cid) {
        auto& c = clusters[cid];
        double s = 0.0;
        for (auto& [p, lam] : c.points) {
            double contribution = lam - c.lambda_birth;
            if (std::isfinite(contribution)) s += contribution;
        }
        for (int ch : c.children) {
            double contribution = (clusters[static_cast<size_t>(ch)].lambda_birth - c.lambda_birth) *
                                  total_points[static_cast<size_t>(ch)];
            if (std::isfinite(contribution)) s += contribution;
        }
        c.stability = s;
    }

    // Excess-of-mass selection, leaves upward. The root is not selectable;
    // a dataset with no sub-cluster structure ends up all noise and falls
    // back to a single cluster below.
    std::vector<double> subtree_stability(clusters.size(), 0.0);
    for (int cid = static_cast<int>(clusters.size()) - 1; cid >= 1; --cid) {
        auto& c = clusters[static_cast<size_t>(cid)];
        if (c.children.empty()) {
            c.selected = true;
            subtree_stability[static_cast<size_t>(cid)] = c.stability;
            continue;
        }
        double child_sum = 0.0;
        for (int ch : c.children) child_sum += subtree_stability[static_cast<size_t>(ch)];
        if (c.stability >= child_sum) {
            c.selected = true;
            // Deselect all descendants.
            std::vector<int> st(c.children.begin(), c.children.end());
            while (!st.empty()) {
                int x = st.back();
                st.pop_back();
                clusters[static_cast<size_t>(x)].selected = false;
                for (int ch : clusters[static_cast<size_t>(x)].children) st.push_back(ch);
            }
            subtree_stability[static_cast<size_t>(cid)] = c.stability;
        } else {
            subtree_stability[static_cast<size_t>(cid)] = child_sum;
        }
    }

    // Points label as the selected ancestor (if any) of the condensed cluster
    // they were shed from.
    std::vector<int> selected_ancestor(clusters.size(), -1);
    for (size_t cid = 0; cid < clusters.size(); ++cid) {
        if (clusters[cid].selected)
            selected_ancestor[cid] = static_cast<int>(cid);
        else if (clusters[cid].parent >= 0)
            selected_ancestor[cid] = selected_ancestor[static_cast<size_t>(clusters[cid].parent)];
    }

    ClusterLabels out;
    out.labels.assign(static_cast<size_t>(m), -1);
    for (size_t cid = 0; cid < clusters.size(); ++cid) {
        int anc = selected_ancestor[cid];
        if (anc < 0) continue;
        for (auto& [p, lam] : clusters[cid].points) out.labels[static_cast<size_t>(p)] = anc;
    }

    // Dense renumbering, ordered by smallest member index for determinism.
    std::vector<int> cluster_ids;
    for (int lbl : out.labels)
        if (lbl >= 0 && std::find(cluster_ids.begin(), cluster_ids.end(), lbl) == cluster_ids.end())
            cluster_ids.push_back(lbl);

    if (cluster_ids.empty()) {
        // Everything ended up noise: single-cluster fallback.
        out.labels.assign(static_cast<size_t>(m), 0);
        out.k = 1;
        out.noise_reassigned = 0;
        out.single_cluster_fallback = true;
        return out;
    }

    std::vector<int> remap(clusters.size(), -1);
    for (size_t i = 0; i < cluster_ids.size(); ++i) remap[static_cast<size_t>(cluster_ids[i])] = static_cast<int>(i);
    for (auto& lbl : out.labels)
        if (lbl >= 0) lbl = remap[static_cast<size_t>(lbl)];
    out.k = static_cast<int>(cluster_ids.size());

    // Reassign noise to the nearest cluster medoid.
    std::vector<std::vector<int>> members(static_cast<size_t>(out.k));
    for (int i = 0; i < m; ++i)
        if (out.labels[static_cast<size_t>(i)] >= 0)
            members[static_cast<size_t>(out.labels[static_cast<size_t>(i)])].push_back(i);
    std::vector<int> medoids(static_cast<size_t>(out.k));
    for (int c = 0; c < out.k; ++c) {
        const auto& mem = members[static_cast<size_t>(c)];
        double best_sum = std::numeric_limits<double>::infinity();
        int best = mem.front();
        for (int cand : mem) {
            double s = 0.0;
            for (int other : mem) s += dist(cand, other);
            if (s < best_sum) {
                best_sum = s;
                best = cand;
            }
        }
        medoids[static_cast<size_t>(c)] = best;
    }
    for (int i = 0; i < m; ++i) {
        if (out.labels[static_cast<size_t>(i)] >= 0) continue;
        double best_d = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < out.k; ++c) {
            double d = dist(i, medoids[static_cast<size_t>(c)]);
            if (d < best_d) {
                best_d = d;
                best_c = c;
            }
        }
        out.labels[static_cast<size_t>(i)] = best_c;
        ++out.noise_reassigned;
    }
    return out;
}

}  // namespace scenalloc::prep
