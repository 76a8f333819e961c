#ifndef TVFCGCG_MAXFLOW_HPP
#define TVFCGCG_MAXFLOW_HPP

// Exact s-t max-flow on integer capacities.
//
// Two interchangeable algorithms: a Boykov-Kolmogorov style augmenting-path
// search that reuses its two search trees across augmentations (fast on
// mesh-dual graphs), and plain Edmonds-Karp as a correctness cross-check.
// Integer capacities guarantee termination and an exact min-cut value.

#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace tvfcgcg {

enum class MaxFlowAlg { boykov_kolmogorov, edmonds_karp };

class MaxFlowGraph {
public:
    explicit MaxFlowGraph(int node_count)
        : first_(node_count, -1), node_count_(node_count)
    {
    }

    int node_count() const { return node_count_; }
    int arc_count() const { return static_cast<int>(to_.size()); }

    // Adds the arc pair (from->to, cap) / (to->from, rev_cap).
    int add_edge(int from, int to, std::int64_t cap, std::int64_t rev_cap = 0)
    {
        if (cap < 0 || rev_cap < 0) throw std::invalid_argument("negative capacity");
        int id = arc_count();
        push_arc(from, to, cap);
        push_arc(to, from, rev_cap);
        return id;
    }

    std::int64_t arc_residual(int arc) const { return cap_[arc]; }
    int arc_to(int arc) const { return to_[arc]; }
    int arc_from(int arc) const { return to_[arc ^ 1]; }

    std::int64_t max_flow(int s, int t, MaxFlowAlg alg = MaxFlowAlg::boykov_kolmogorov)
    {
        if (s == t) throw std::invalid_argument("source equals sink");
        return alg == MaxFlowAlg::boykov_kolmogorov ? bk(s, t) : edmonds_karp(s, t);
    }

    // Nodes reachable from src through positive residual arcs. After max_flow
    // with src = s this is the inclusion-minimal source side of the min cut.
    std::vector<char> residual_reachable(int src) const
    {
        std::vector<char> seen(node_count_, 0);
        std::vector<int> stack{src};
        seen[src] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int a = first_[v]; a >= 0; a = next_[a]) {
                if (cap_[a] > 0 && !seen[to_[a]]) {
                    seen[to_[a]] = 1;
                    stack.push_back(to_[a]);
                }
            }
        }
        return seen;
    }

    // Nodes with a positive-residual path to dst. After max_flow with
    // dst = t this is the inclusion-minimal sink side of the min cut.
    std::vector<char> residual_reaches(int dst) const
    {
        std::vector<char> seen(node_count_, 0);
        std::vector<int> stack{dst};
        seen[dst] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            // u -> v arcs are the reverses of v's outgoing arc slots.
            for (int a = first_[v]; a >= 0; a = next_[a]) {
                int u = to_[a];
                if (cap_[a ^ 1] > 0 && !seen[u]) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        return seen;
    }

private:
    void push_arc(int from, int to, std::int64_t cap)
    {
        to_.push_back(to);
        cap_.push_back(cap);
        next_.push_back(first_[from]);
        first_[from] = arc_count() - 1;
    }

    std::int64_t edmonds_karp(int s, int t)
    {
        std::int64_t flow = 0;
        std::vector<int> parent_arc(node_count_);
        for (;;) {
            std::fill(parent_arc.begin(), parent_arc.end(), -1);
            parent_arc[s] = -2;
            std::queue<int> q;
            q.push(s);
            while (!q.empty() && parent_arc[t] == -1) {
                int v = q.front();
                q.pop();
                for (int a = first_[v]; a >= 0; a = next_[a]) {
                    if (cap_[a] > 0 && parent_arc[to_[a]] == -1) {
                        parent_arc[to_[a]] = a;
                        q.push(to_[a]);
                    }
                }
            }
            if (parent_arc[t] == -1) return flow;
            std::int64_t push = std::numeric_limits<std::int64_t>::max();
            for (int v = t; v != s; v = arc_from(parent_arc[v]))
                push = std::min(push, cap_[parent_arc[v]]);
            for (int v = t; v != s; v = arc_from(parent_arc[v])) {
                cap_[parent_arc[v]] -= push;
                cap_[parent_arc[v] ^ 1] += push;
            }
            flow += push;
        }
    }

    // --- Boykov-Kolmogorov ------------------------------------------------
    // tree_: 0 free, 1 source tree, 2 sink tree. parent_[v] is the arc that
    // connects v towards its tree root (arc v->parent for the source tree,
    // arc parent->v ... stored uniformly as the arc OUT of the parent for the
    // sink tree would complicate residual checks, so we store, for both trees,
    // the arc id whose residual must stay positive for v to remain connected:
    //   source tree: arc parent->v
    //   sink tree:   arc v->parent
    std::int64_t bk(int s, int t)
    {
        const int n = node_count_;
        tree_.assign(n, 0);
        parent_.assign(n, -1);
        dist_.assign(n, 0);
        stamp_.assign(n, 0);
        time_ = 1;

        tree_[s] = 1;
        tree_[t] = 2;
        stamp_[s] = stamp_[t] = time_;
        active_.clear();
        active_.push_back(s);
        active_.push_back(t);

        std::int64_t flow = 0;
        std::vector<int> orphans;

        while (true) {
            int join_arc = grow();
            if (join_arc < 0) break;
            ++time_;
            flow += augment(join_arc, s, t, orphans);
            adopt(orphans, s, t);
        }
        return flow;
    }

    // Expands the trees from active nodes until they touch; returns the arc
    // (source-tree node -> sink-tree node) with positive residual, or -1.
    int grow()
    {
        while (!active_.empty()) {
            int v = active_.front();
            if (tree_[v] == 0) { // lazily deactivated
                active_.pop_front();
                continue;
            }
            for (int a = first_[v]; a >= 0; a = next_[a]) {
                // Residual arc in growth direction: v->u for the source tree,
                // u->v (the reverse arc) for the sink tree.
                int res_arc = tree_[v] == 1 ? a : (a ^ 1);
                if (cap_[res_arc] <= 0) continue;
                int u = to_[a];
                if (tree_[u] == 0) {
                    tree_[u] = tree_[v];
                    parent_[u] = res_arc;
                    dist_[u] = dist_[v] + 1;
                    stamp_[u] = stamp_[v];
                    active_.push_back(u);
                } else if (tree_[u] != tree_[v]) {
                    return tree_[v] == 1 ? res_arc : (a ^ 1);
                }
            }
            active_.pop_front();
        }
        return -1;
    }

    std::int64_t augment(int join_arc, int s, int t, std::vector<int>& orphans)
    {
        // Bottleneck over: source-side path, the join arc, sink-side path.
        std::int64_t push = cap_[join_arc];
        int u = arc_from(join_arc);
        for (int v = u; v != s; v = arc_from(parent_[v])) push = std::min(push, cap_[parent_[v]]);
        int w = to_[join_arc];
        for (int v = w; v != t; v = to_[parent_[v]]) push = std::min(push, cap_[parent_[v]]);

        cap_[join_arc] -= push;
        cap_[join_arc ^ 1] += push;
        int v = u;
        while (v != s) {
            int a = parent_[v];
            int p = arc_from(a);
            cap_[a] -= push;
            cap_[a ^ 1] += push;
            if (cap_[a] == 0) { // disconnected from the tree until adopted
                parent_[v] = -1;
                orphans.push_back(v);
            }
            v = p;
        }
        v = w;
        while (v != t) {
            int a = parent_[v];
            int p = to_[a];
            cap_[a] -= push;
            cap_[a ^ 1] += push;
            if (cap_[a] == 0) {
                parent_[v] = -1;
                orphans.push_back(v);
            }
            v = p;
        }
        return push;
    }

    // True when v has a parent chain ending at its tree root (s or t); marks
    // the chain with the current timestamp to amortize repeated checks.
    bool rooted(int v, int s, int t)
    {
        chain_.clear();
        int cur = v;
        while (!(stamp_[cur] == time_ || cur == s || cur == t)) {
            if (parent_[cur] < 0) return false;
            chain_.push_back(cur);
            cur = tree_[cur] == 1 ? arc_from(parent_[cur]) : to_[parent_[cur]];
        }
        int d = (cur == s || cur == t) ? 0 : dist_[cur];
        for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) {
            stamp_[*it] = time_;
            dist_[*it] = ++d;
        }
        return true;
    }

    void adopt(std::vector<int>& orphans, int s, int t)
    {
        while (!orphans.empty()) {
            int v = orphans.back();
            orphans.pop_back();
            int side = tree_[v];
            if (side == 0) continue;

            // Look for a new parent: a same-tree neighbor with a positive
            // residual arc in the right direction and a rooted chain.
            int best_arc = -1, best_dist = std::numeric_limits<int>::max();
            for (int a = first_[v]; a >= 0; a = next_[a]) {
                int u = to_[a];
                if (tree_[u] != side) continue;
                int res_arc = side == 1 ? (a ^ 1) : a; // u->v or v->u
                if (cap_[res_arc] <= 0) continue;
                if (!rooted(u, s, t)) continue;
                if (dist_[u] < best_dist) {
                    best_dist = dist_[u];
                    best_arc = res_arc;
                }
            }
            if (best_arc >= 0) {
                parent_[v] = best_arc;
                dist_[v] = best_dist + 1;
                stamp_[v] = time_;
                continue;
            }

            // No parent found: v becomes free, its tree children become
            // orphans, potential reconnection points become active.
            for (int a = first_[v]; a >= 0; a = next_[a]) {
                int u = to_[a];
                if (tree_[u] != side) continue;
                int res_arc = side == 1 ? (a ^ 1) : a;
                if (cap_[res_arc] > 0) active_.push_back(u);
                if (parent_[u] >= 0) {
                    int pu = side == 1 ? arc_from(parent_[u]) : to_[parent_[u]];
                    if (pu == v) {
                        parent_[u] = -1;
                        orphans.push_back(u);
                    }
                }
            }
            tree_[v] = 0;
            parent_[v] = -1;
        }
    }

    std::vector<int> to_;
    std::vector<std::int64_t> cap_;
    std::vector<int> next_;
    std::vector<int> first_;
    int node_count_;

    // BK scratch state
    std::vector<char> tree_;
    std::vector<int> parent_;
    std::vector<int> dist_;
    std::vector<std::uint32_t> stamp_;
    std::vector<int> chain_;
    std::deque<int> active_;
    std::uint32_t time_ = 0;
};

} // namespace tvfcgcg

#endif
