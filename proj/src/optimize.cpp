#include "geocut/optimize.hpp"

#include "geocut/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace geocut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// lexicographic order on the membership sequence (m[0], m[1], ...)
bool mask_lex_less(std::uint32_t a, std::uint32_t b, int n) {
    for (int i = 0; i < n; ++i) {
        int ba = (a >> i) & 1, bb = (b >> i) & 1;
        if (ba != bb) return ba < bb;
    }
    return false;
}

Partition mask_to_partition(std::uint32_t mask, Index n) {
    Partition y(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i)
        if ((mask >> i) & 1) y[static_cast<std::size_t>(i)] = 1;
    return y;
}

double eval_ratio(double cut, double vol_in, double vol_total, int b) {
    double out = vol_total - vol_in;
    double bal = b == 1 ? std::min(vol_in, out) / vol_total
                        : vol_in * out / (vol_total * vol_total);
    if (cut == 0.0) return 0.0;
    if (!(bal > 0.0)) return std::numeric_limits<double>::infinity();
    return cut / bal;
}

}  // namespace

OptimizerResult exact_cheeger(const GeoGraph& g, int v, int b) {
    const auto t0 = Clock::now();
    const Index n = g.n();
    if (n > 22) throw budget_error("exact_cheeger enumeration budget is n <= 22");
    if (n < 2) throw std::invalid_argument("exact_cheeger needs n >= 2");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = g.weight(i, j);
    const double vol2_total = g.total_volume2();
    if (v == 2 && !(vol2_total > 0.0))
        throw degenerate_graph_error("total volume is zero (edgeless graph)");
    const Eigen::VectorXd deg = w.rowwise().sum();

    double cut = 0.0, vol2 = 0.0;
    Index count = 0;
    std::uint32_t mask = 0;
    const std::uint32_t full = (n == 32 ? ~0u : (1u << n) - 1u);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 0;
    Index visited = 0;
    for (std::uint32_t k = 1; k <= full; ++k) {
        const int t = __builtin_ctz(k);
        const bool add = !((mask >> t) & 1);
        double delta = 0.0;
        for (Index x = 0; x < n; ++x) {
            if (x == t) continue;
            delta += ((mask >> x) & 1) ? -w(t, x) : w(t, x);
        }
        if (add) {
            cut += delta;
            vol2 += deg[t];
            ++count;
            mask |= (1u << t);
        } else {
            cut -= delta;
            vol2 -= deg[t];
            --count;
            mask &= ~(1u << t);
        }
        if (count == 0 || count == n) continue;
        ++visited;
        double val = v == 1 ? eval_ratio(cut, static_cast<double>(count),
                                         static_cast<double>(n), b)
                            : eval_ratio(cut, vol2, vol2_total, b);
        if (val == 0.0 && best == 0.0) {
            // incremental zeros are exact (only exact-zero weights sum here)
            if (mask_lex_less(mask, best_mask, n)) best_mask = mask;
        } else if (val < best * (1.0 + 1e-9) || val < best + 1e-12) {
            // the running sums drift at machine precision; settle candidates
            // through the history-free evaluation so exact ties (e.g. a set
            // and its complement) resolve the same way everywhere
            double exact = objective(g, mask_to_partition(mask, n), v, b);
            if (exact < best || (exact == best && mask_lex_less(mask, best_mask, n))) {
                best = exact;
                best_mask = mask;
            }
        }
    }
    OptimizerResult res;
    res.partition = mask_to_partition(best_mask, n);
    res.value = objective(g, res.partition, v, b);
    res.method = "exact";
    res.iterations = visited;
    res.wall_seconds = seconds_since(t0);
    return res;
}

namespace {

struct MbisSearch {
    const GeoGraph& g;
    const Eigen::MatrixXd& w;
    Index n, k;
    Partition current;
    Partition best;
    double best_cut = std::numeric_limits<double>::infinity();
    bool have_best = false;

    void settle(double total) {
        // history-free re-evaluation so drifting running sums cannot flip
        // exact ties; the DFS visits masks in ascending lexicographic order
        if (have_best && total == 0.0 && best_cut == 0.0) return;  // exact zeros
        if (have_best && !(total < best_cut * (1.0 + 1e-9) || total < best_cut + 1e-12))
            return;
        double exact = cut_weight(g, current);
        if (!have_best || exact < best_cut ||
            (exact == best_cut &&
             std::lexicographical_compare(current.begin(), current.end(), best.begin(),
                                          best.end()))) {
            best_cut = exact;
            best = current;
            have_best = true;
        }
    }

    void dfs(Index i, Index blacks, double cut) {
        if (have_best && cut > best_cut * (1.0 + 1e-9) + 1e-12)
            return;  // weights are nonnegative
        if (blacks == k) {
            // remaining points are all white; cross edges to them are fixed
            double total = cut;
            for (Index a = i; a < n; ++a) {
                for (Index b2 = 0; b2 < i; ++b2)
                    if (current[static_cast<std::size_t>(b2)]) total += w(a, b2);
                current[static_cast<std::size_t>(a)] = 0;
            }
            settle(total);
            return;
        }
        if (n - i == k - blacks) {
            double total = cut;
            for (Index a = i; a < n; ++a) {
                for (Index b2 = 0; b2 < i; ++b2)
                    if (!current[static_cast<std::size_t>(b2)]) total += w(a, b2);
                current[static_cast<std::size_t>(a)] = 1;
            }
            settle(total);
            return;
        }
        // white branch first: masks are visited in ascending lexicographic
        // order, so the first strict minimum is the lex-smallest argmin
        double to_black = 0.0, to_white = 0.0;
        for (Index j = 0; j < i; ++j) {
            if (current[static_cast<std::size_t>(j)])
                to_black += w(i, j);
            else
                to_white += w(i, j);
        }
        current[static_cast<std::size_t>(i)] = 0;
        dfs(i + 1, blacks, cut + to_black);
        current[static_cast<std::size_t>(i)] = 1;
        dfs(i + 1, blacks + 1, cut + to_white);
        current[static_cast<std::size_t>(i)] = 0;
    }
};

}  // namespace

OptimizerResult exact_mbis(const GeoGraph& g) {
    const auto t0 = Clock::now();
    const Index n = g.n();
    if (n > 24) throw budget_error("exact_mbis enumeration budget is n <= 24");
    if (n < 2) throw std::invalid_argument("exact_mbis needs n >= 2");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = g.weight(i, j);
    MbisSearch search{g,
                      w,
                      n,
                      n / 2,
                      Partition(static_cast<std::size_t>(n), 0),
                      {},
                      std::numeric_limits<double>::infinity(),
                      false};
    search.dfs(0, 0, 0.0);
    OptimizerResult res;
    res.partition = search.best;
    res.value = cut_weight(g, res.partition);
    res.method = "exact";
    res.iterations = 0;
    res.wall_seconds = seconds_since(t0);
    return res;
}

namespace {

// deflated power iteration for the second-smallest Laplacian eigenvector
std::optional<Eigen::VectorXd> fiedler_vector(const GeoGraph& g) {
    const Index n = g.n();
    // adjacency snapshot (positive weights)
    std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        g.for_each_neighbor(i, [&](Index j, double w) {
            if (w > 0.0) adj[static_cast<std::size_t>(i)].emplace_back(j, w);
        });
    double max_deg = 0.0;
    for (Index i = 0; i < n; ++i) max_deg = std::max(max_deg, g.weighted_degree(i));
    const double shift = 2.0 * max_deg + 1.0;

    auto rng = make_rng(0x5eedULL);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform01(rng) - 0.5;
    v.array() -= v.mean();
    v.normalize();

    const double tol = 1e-6;
    const Index cap = 10 * n;
    Eigen::VectorXd lv(n);
    for (Index it = 0; it < cap; ++it) {
        for (Index i = 0; i < n; ++i) {
            double acc = g.weighted_degree(i) * v[i];
            for (auto [j, w] : adj[static_cast<std::size_t>(i)]) acc -= w * v[j];
            lv[i] = acc;
        }
        double lambda = v.dot(lv);
        if ((lv - lambda * v).norm() <= tol) return v;
        Eigen::VectorXd u = shift * v - lv;
        u.array() -= u.mean();
        double nrm = u.norm();
        if (!(nrm > 0.0)) return std::nullopt;
        v = u / nrm;
    }
    return std::nullopt;
}

bool graph_connected(const GeoGraph& g) {
    const Index n = g.n();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index found = 1;
    while (!stack.empty()) {
        Index i = stack.back();
        stack.pop_back();
        g.for_each_neighbor(i, [&](Index j, double w) {
            if (w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = 1;
                ++found;
                stack.push_back(j);
            }
        });
    }
    return found == n;
}

struct SweepBest {
    double value = std::numeric_limits<double>::infinity();
    int order_id = -1;
    Index prefix = 0;  // points order[0..prefix] inclusive are in Y
};

void sweep_order(const GeoGraph& g, const std::vector<Index>& order, int order_id, int v, int b,
                 double vol2_total, SweepBest& best, Index& evals) {
    const Index n = g.n();
    std::vector<double> w_to_y(static_cast<std::size_t>(n), 0.0);
    double cut = 0.0, vol2 = 0.0;
    for (Index t = 0; t + 1 < n; ++t) {
        Index p = order[static_cast<std::size_t>(t)];
        cut += g.weighted_degree(p) - 2.0 * w_to_y[static_cast<std::size_t>(p)];
        vol2 += g.weighted_degree(p);
        g.for_each_neighbor(p, [&](Index j, double w) {
            w_to_y[static_cast<std::size_t>(j)] += w;
        });
        double val = v == 1 ? eval_ratio(cut, static_cast<double>(t + 1),
                                         static_cast<double>(n), b)
                            : eval_ratio(cut, vol2, vol2_total, b);
        ++evals;
        if (val < best.value) {
            best.value = val;
            best.order_id = order_id;
            best.prefix = t;
        }
    }
}

std::vector<Index> order_by_score(const GeoGraph& g, const Eigen::VectorXd& score) {
    std::vector<Index> order(static_cast<std::size_t>(g.n()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });
    return order;
}

}  // namespace

OptimizerResult sweep_cut(const GeoGraph& g, int v, int b, SweepMode mode) {
    const auto t0 = Clock::now();
    const Index n = g.n();
    if (n < 2) throw std::invalid_argument("sweep_cut needs n >= 2");
    const double vol2_total = g.total_volume2();
    if (v == 2 && !(vol2_total > 0.0))
        throw degenerate_graph_error("total volume is zero (edgeless graph)");

    bool fallback = false;
    std::vector<std::vector<Index>> orders;
    if (mode == SweepMode::Fiedler) {
        if (!graph_connected(g)) {
            fallback = true;
        } else if (auto f = fiedler_vector(g)) {
            orders.push_back(order_by_score(g, *f));
        } else {
            fallback = true;
        }
    }
    if (mode == SweepMode::Axis || fallback) {
        orders.clear();
        for (int a = 0; a < g.dim(); ++a)
            orders.push_back(order_by_score(g, g.cloud().pts.col(a)));
    }

    SweepBest best;
    Index evals = 0;
    for (int oid = 0; oid < static_cast<int>(orders.size()); ++oid)
        sweep_order(g, orders[static_cast<std::size_t>(oid)], oid, v, b, vol2_total, best,
                    evals);

    OptimizerResult res;
    res.partition.assign(static_cast<std::size_t>(n), 0);
    const auto& ord = orders[static_cast<std::size_t>(best.order_id)];
    for (Index t = 0; t <= best.prefix; ++t)
        res.partition[static_cast<std::size_t>(ord[static_cast<std::size_t>(t)])] = 1;
    res.value = objective(g, res.partition, v, b);
    res.method = mode == SweepMode::Fiedler && !fallback ? "sweep:fiedler" : "sweep:axis";
    res.iterations = evals;
    res.wall_seconds = seconds_since(t0);
    res.fallback = fallback;
    return res;
}

Partition greyscale_removal(const GeoGraph& g, const BoxGrid& grid, const Partition& y,
                            RemovalMode mode, int v) {
    if (static_cast<Index>(y.size()) != g.n())
        throw std::invalid_argument("partition size mismatch");
    const Index n = g.n();
    const Index nb = grid.box_count();
    Partition out = y;
    BoxColors colors = classify_boxes(grid, out, n);

    std::vector<double> blacks(static_cast<std::size_t>(nb), 0.0),
        whites(static_cast<std::size_t>(nb), 0.0);
    for (Index bx = 0; bx < nb; ++bx) {
        Index bl = 0;
        for (Index p : grid.points_in_box(bx)) bl += out[static_cast<std::size_t>(p)] ? 1 : 0;
        blacks[static_cast<std::size_t>(bx)] = static_cast<double>(bl);
        whites[static_cast<std::size_t>(bx)] =
            static_cast<double>(grid.points_in_box(bx).size()) - bl;
    }

    auto phi = [&](Index i, Index j) {
        return kernel_box_bounds(grid, g.kernel(), g.r(), i, j).first;
    };

    auto recolor = [&](Index bx, bool to_black) {
        for (Index p : grid.points_in_box(bx))
            out[static_cast<std::size_t>(p)] = to_black ? 1 : 0;
        double m = blacks[static_cast<std::size_t>(bx)] + whites[static_cast<std::size_t>(bx)];
        blacks[static_cast<std::size_t>(bx)] = to_black ? m : 0.0;
        whites[static_cast<std::size_t>(bx)] = to_black ? 0.0 : m;
        // reclassify just this box
        BoxColors single = classify_boxes(grid, out, n);
        colors.color[static_cast<std::size_t>(bx)] = single.color[static_cast<std::size_t>(bx)];
        colors.unclassifiable[static_cast<std::size_t>(bx)] =
            single.unclassifiable[static_cast<std::size_t>(bx)];
    };

    // boxes grey w.r.t. the input partition, ascending id
    std::vector<Index> grey_ids;
    for (Index bx = 0; bx < nb; ++bx)
        if (colors.color[static_cast<std::size_t>(bx)] == BoxColor::Grey) grey_ids.push_back(bx);

    for (Index bx : grey_ids) {
        const auto sbx = static_cast<std::size_t>(bx);
        if (blacks[sbx] + whites[sbx] == 0.0) continue;  // empty box, nothing to recolor
        StableSum lsum, wsum;
        for (Index j = 0; j < nb; ++j) {
            if (j == bx) continue;
            double p = phi(bx, j);
            if (p == 0.0) continue;
            lsum.add(p * blacks[static_cast<std::size_t>(j)]);
            wsum.add(p * whites[static_cast<std::size_t>(j)]);
        }
        const double lprime = lsum.value(), wprime = wsum.value();
        bool to_black;
        if (mode == RemovalMode::Cut) {
            // endpoint minimization of l(w'-l') + m l'; ties -> white
            to_black = wprime < lprime;
        } else {
            StableSum l2sum, beta2;
            for (Index j = 0; j < nb; ++j) {
                if (j == bx) continue;
                double p = phi(bx, j);
                if (p == 0.0) continue;
                auto sj = static_cast<std::size_t>(j);
                if (colors.color[sj] != BoxColor::White) l2sum.add(p * blacks[sj]);
                beta2.add(p * blacks[sj]);
            }
            const double alpha = wprime - l2sum.value();
            const double beta = v == 1 ? 1.0 : beta2.value();
            // x: phi_n-weight of between-box cut pairs whose black endpoint
            // sits in a black or grey box; y: modified volume of those blacks
            StableSum xs, ys;
            for (Index a = 0; a < nb; ++a) {
                auto sa = static_cast<std::size_t>(a);
                if (colors.color[sa] == BoxColor::White) continue;
                if (blacks[sa] == 0.0) continue;
                StableSum cross, massw;
                for (Index j = 0; j < nb; ++j) {
                    if (j == a) continue;
                    double p = phi(a, j);
                    if (p == 0.0) continue;
                    auto sj = static_cast<std::size_t>(j);
                    cross.add(p * whites[sj]);
                    massw.add(p * (blacks[sj] + whites[sj]));
                }
                xs.add(blacks[sa] * cross.value());
                ys.add(v == 1 ? blacks[sa] : blacks[sa] * massw.value());
            }
            const double x = xs.value(), yv = ys.value();
            const double s = alpha * yv - beta * x;
            const double k_black = whites[sbx], k_white = -blacks[sbx];
            if (yv + beta * k_black == 0.0 && yv + beta * k_white == 0.0) {
                to_black = false;  // no black boxes anywhere; terminate white
            } else if (s > 0.0) {
                to_black = false;  // k < 0 makes k*s <= 0
            } else if (s < 0.0) {
                to_black = true;
            } else {
                to_black = false;  // tie -> white
            }
        }
        recolor(bx, to_black);
    }
    return out;
}

OptimizerResult local_search_bisection(const GeoGraph& g, const Partition& y0,
                                       Index max_passes) {
    const auto t0 = Clock::now();
    const Index n = g.n();
    if (static_cast<Index>(y0.size()) != n)
        throw std::invalid_argument("partition size mismatch");
    if (partition_count(y0) != n / 2)
        throw std::invalid_argument("bisection needs |Y| = floor(n/2)");
    Partition y = y0;

    std::vector<double> w_to_y(static_cast<std::size_t>(n), 0.0);
    g.for_each_pair([&](Index i, Index j, double w) {
        if (y[static_cast<std::size_t>(j)]) w_to_y[static_cast<std::size_t>(i)] += w;
        if (y[static_cast<std::size_t>(i)]) w_to_y[static_cast<std::size_t>(j)] += w;
    });
    auto gain_term = [&](Index p) {
        // D > 0 means moving p across would reduce the cut
        double d = g.weighted_degree(p) - 2.0 * w_to_y[static_cast<std::size_t>(p)];
        return y[static_cast<std::size_t>(p)] ? d : -d;
    };

    Index swaps = 0;
    const double tol = 1e-12;
    for (Index pass = 0; pass < max_passes; ++pass) {
        // candidates: points within 2r of a cross-edge endpoint
        std::vector<char> cross(static_cast<std::size_t>(n), 0);
        for (Index i = 0; i < n; ++i)
            g.for_each_neighbor(i, [&](Index j, double w) {
                if (w > 0.0 && y[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)])
                    cross[static_cast<std::size_t>(i)] = 1;
            });
        std::vector<char> cand(static_cast<std::size_t>(n), 0);
        for (Index i = 0; i < n; ++i) {
            if (!cross[static_cast<std::size_t>(i)]) continue;
            cand[static_cast<std::size_t>(i)] = 1;
            g.for_each_within(i, 2.0 * g.r(), [&](Index j, double) {
                cand[static_cast<std::size_t>(j)] = 1;
            });
        }
        bool improved_any = false;
        for (;;) {
            std::vector<Index> cb, cw;
            for (Index i = 0; i < n; ++i) {
                if (!cand[static_cast<std::size_t>(i)]) continue;
                (y[static_cast<std::size_t>(i)] ? cb : cw).push_back(i);
            }
            auto by_gain = [&](Index a, Index b2) {
                double ga = gain_term(a), gb = gain_term(b2);
                if (ga != gb) return ga > gb;
                return a < b2;
            };
            std::sort(cb.begin(), cb.end(), by_gain);
            std::sort(cw.begin(), cw.end(), by_gain);
            double best_gain = tol;
            Index bu = -1, bw = -1;
            for (Index u : cb) {
                double du = gain_term(u);
                if (cw.empty() || du + gain_term(cw.front()) <= best_gain) break;
                for (Index x : cw) {
                    double bound = du + gain_term(x);
                    if (bound <= best_gain) break;
                    double gain = bound - 2.0 * g.weight(u, x);
                    if (gain > best_gain) {
                        best_gain = gain;
                        bu = u;
                        bw = x;
                    }
                }
            }
            if (bu < 0) break;
            y[static_cast<std::size_t>(bu)] = 0;
            y[static_cast<std::size_t>(bw)] = 1;
            g.for_each_neighbor(bu, [&](Index j, double w) {
                w_to_y[static_cast<std::size_t>(j)] -= w;
            });
            g.for_each_neighbor(bw, [&](Index j, double w) {
                w_to_y[static_cast<std::size_t>(j)] += w;
            });
            ++swaps;
            improved_any = true;
        }
        if (!improved_any) break;
    }

    OptimizerResult res;
    res.partition = std::move(y);
    res.value = cut_weight(g, res.partition);
    res.method = "local-swap";
    res.iterations = swaps;
    res.wall_seconds = seconds_since(t0);
    return res;
}

Partition median_axis_bisection(const GeoGraph& g) {
    const Index n = g.n();
    const Index k = n / 2;
    double best_cut = std::numeric_limits<double>::infinity();
    Partition best;
    for (int a = 0; a < g.dim(); ++a) {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index p, Index q) {
            double cp = g.cloud().pts(p, a), cq = g.cloud().pts(q, a);
            if (cp != cq) return cp < cq;
            return p < q;
        });
        Partition y(static_cast<std::size_t>(n), 0);
        for (Index t = 0; t < k; ++t)
            y[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = 1;
        double cut = cut_weight(g, y);
        if (cut < best_cut) {
            best_cut = cut;
            best = std::move(y);
        }
    }
    return best;
}

OptimizerResult refine_pipeline(const GeoGraph& g, const BoxGrid& grid, int v, int b,
                                SweepMode mode) {
    const auto t0 = Clock::now();
    OptimizerResult sweep = sweep_cut(g, v, b, mode);
    Partition refined = greyscale_removal(g, grid, sweep.partition, RemovalMode::Cut, v);
    OptimizerResult res = sweep;
    Index k = partition_count(refined);
    if (k > 0 && k < g.n()) {
        double val = objective(g, refined, v, b);
        if (val < sweep.value) {
            res.partition = std::move(refined);
            res.value = val;
            res.method = sweep.method + "+greyscale";
        }
    }
    res.wall_seconds = seconds_since(t0);
    return res;
}

}  // namespace geocut
