#include "fusim/memory_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace fusim {

namespace {

// Least squares via Householder QR with column equilibration. A is n x p
// row-major, n >= p. Throws FitError on (numerical) rank deficiency.
std::vector<double> lstsq(std::vector<double> a, int n, int p, std::vector<double> y) {
    std::vector<double> scale(p, 0.0);
    for (int j = 0; j < p; ++j) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += a[i * p + j] * a[i * p + j];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw FitError("lstsq: zero column in design matrix");
        scale[j] = norm;
        for (int i = 0; i < n; ++i) a[i * p + j] /= norm;
    }

    for (int j = 0; j < p; ++j) {
        double norm = 0.0;
        for (int i = j; i < n; ++i) norm += a[i * p + j] * a[i * p + j];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw FitError("lstsq: rank-deficient design matrix");
        double alpha = a[j * p + j] > 0 ? -norm : norm;
        std::vector<double> v(n - j, 0.0);
        v[0] = a[j * p + j] - alpha;
        for (int i = j + 1; i < n; ++i) v[i - j] = a[i * p + j];
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 > 0.0) {
            for (int c = j; c < p; ++c) {
                double dot = 0.0;
                for (int i = j; i < n; ++i) dot += v[i - j] * a[i * p + c];
                const double f = 2.0 * dot / vnorm2;
                for (int i = j; i < n; ++i) a[i * p + c] -= f * v[i - j];
            }
            double dot = 0.0;
            for (int i = j; i < n; ++i) dot += v[i - j] * y[i];
            const double f = 2.0 * dot / vnorm2;
            for (int i = j; i < n; ++i) y[i] -= f * v[i - j];
        }
        a[j * p + j] = alpha;
    }

    std::vector<double> beta(p, 0.0);
    for (int j = p - 1; j >= 0; --j) {
        double sum = y[j];
        for (int c = j + 1; c < p; ++c) sum -= a[j * p + c] * beta[c];
        if (std::abs(a[j * p + j]) < 1e-12)
            throw FitError("lstsq: rank-deficient design matrix");
        beta[j] = sum / a[j * p + j];
    }
    for (int j = 0; j < p; ++j) beta[j] /= scale[j];
    return beta;
}

double residual_rmse(const std::vector<MemSample>& samples, double b0, double b1,
                     double b2) {
    double ss = 0.0;
    for (const auto& s : samples) {
        const double u = static_cast<double>(s.batch_size) * s.seq_len;
        const double pred = b0 + b1 * u + b2 * u * s.seq_len;
        ss += (pred - s.mem_gb) * (pred - s.mem_gb);
    }
    return std::sqrt(ss / samples.size());
}

} // namespace

MemoryModel fit_memory_model(const std::vector<MemSample>& samples,
                             FitConstraint constraint) {
    const int n = static_cast<int>(samples.size());
    if (n < 3) throw FitError("fit: need at least 3 samples");
    std::set<long> distinct;
    for (const auto& s : samples) {
        if (s.batch_size < 1 || s.seq_len < 1 || s.mem_gb <= 0)
            throw FitError("fit: invalid sample");
        distinct.insert(static_cast<long>(s.batch_size) * s.seq_len);
    }
    if (distinct.size() < 3)
        throw FitError("fit: need at least 3 distinct batch_size*seq_len values");

    // design: (1, u, u*Ln) with u = Bt*Ln, i.e. (1, Bt*Ln, Bt*Ln^2)
    auto build = [&](const std::vector<int>& cols) {
        std::vector<double> a;
        a.reserve(static_cast<std::size_t>(n) * cols.size());
        for (const auto& s : samples) {
            const double u = static_cast<double>(s.batch_size) * s.seq_len;
            const double feats[3] = {1.0, u, u * s.seq_len};
            for (int c : cols) a.push_back(feats[c]);
        }
        return a;
    };
    std::vector<double> y;
    y.reserve(n);
    for (const auto& s : samples) y.push_back(s.mem_gb);

    MemoryModel model;
    model.sample_count = n;

    if (constraint == FitConstraint::Unconstrained) {
        const auto beta = lstsq(build({0, 1, 2}), n, 3, y);
        model.beta0 = beta[0];
        model.beta1 = beta[1];
        model.beta2 = beta[2];
    } else {
        // exact NNLS for 3 unknowns: enumerate active sets, keep the feasible
        // solution with the smallest residual
        bool found = false;
        double best_rmse = 0.0;
        double best[3] = {0, 0, 0};
        for (int mask = 0; mask < 8; ++mask) {
            std::vector<int> free_cols;
            for (int c = 0; c < 3; ++c)
                if (!(mask & (1 << c))) free_cols.push_back(c);
            double coef[3] = {0, 0, 0};
            if (!free_cols.empty()) {
                std::vector<double> beta;
                try {
                    beta = lstsq(build(free_cols), n, static_cast<int>(free_cols.size()), y);
                } catch (const FitError&) {
                    continue;  // this reduced design is degenerate; other sets cover it
                }
                bool ok = true;
                for (std::size_t i = 0; i < free_cols.size(); ++i) {
                    if (beta[i] < 0) { ok = false; break; }
                    coef[free_cols[i]] = beta[i];
                }
                if (!ok) continue;
            }
            const double r = residual_rmse(samples, coef[0], coef[1], coef[2]);
            if (!found || r < best_rmse) {
                found = true;
                best_rmse = r;
                std::copy(coef, coef + 3, best);
            }
        }
        if (!found) throw FitError("fit: no feasible nonnegative solution");
        model.beta0 = best[0];
        model.beta1 = best[1];
        model.beta2 = best[2];
    }

    model.rmse = residual_rmse(samples, model.beta0, model.beta1, model.beta2);
    return model;
}

double predict_memory(const MemoryModel& model, int batch_size, int seq_len) {
    const double u = static_cast<double>(batch_size) * seq_len;
    return model.beta0 + model.beta1 * u + model.beta2 * u * seq_len;
}

double predict_memory_clamped(const MemoryModel& model, int batch_size, int seq_len,
                              double floor_gb, bool* clamped) {
    const double raw = predict_memory(model, batch_size, seq_len);
    const bool below = raw < floor_gb;
    if (clamped) *clamped = below;
    return below ? floor_gb : raw;
}

bool feasible(const PackingQuery& query, const std::vector<std::size_t>& subset) {
    double total = 0.0;
    for (auto i : subset) {
        if (i >= query.item_mem_gb.size())
            throw UsageError("feasible: index out of range");
        total += query.item_mem_gb[i];
    }
    // tiny slack absorbs floating-point accumulation from packing results
    return total <= query.budget_gb + 1e-9;
}

std::vector<std::size_t> max_packing_greedy(const PackingQuery& query) {
    std::vector<std::size_t> order(query.item_mem_gb.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (query.item_mem_gb[a] != query.item_mem_gb[b])
            return query.item_mem_gb[a] > query.item_mem_gb[b];
        return a < b;
    });
    std::vector<std::size_t> chosen;
    double total = 0.0;
    for (auto i : order) {
        if (query.item_mem_gb[i] < 0)
            throw UsageError("max_packing: negative item size");
        if (total + query.item_mem_gb[i] <= query.budget_gb) {
            total += query.item_mem_gb[i];
            chosen.push_back(i);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<std::size_t> max_packing(const PackingQuery& query) {
    const std::size_t n = query.item_mem_gb.size();
    if (query.budget_gb < 0) throw UsageError("max_packing: negative budget");
    if (n > 30) return max_packing_greedy(query);

    // subset-sum DP at 0.01 GB granularity; items round up, budget rounds
    // down, so the reconstructed subset is feasible in real GB
    const long cap = static_cast<long>(std::floor(query.budget_gb * 100.0 + 1e-9));
    std::vector<long> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (query.item_mem_gb[i] < 0)
            throw UsageError("max_packing: negative item size");
        w[i] = static_cast<long>(std::ceil(query.item_mem_gb[i] * 100.0 - 1e-9));
    }
    if (cap < 0) return {};

    // from[s] = index of the last item producing sum s, -1 = empty base
    std::vector<int> from(cap + 1, -2);
    from[0] = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > cap) continue;
        for (long s = cap; s >= w[i]; --s) {
            if (from[s] == -2 && from[s - w[i]] != -2 &&
                from[s - w[i]] != static_cast<int>(i))
                from[s] = static_cast<int>(i);
        }
    }
    long best = 0;
    for (long s = cap; s >= 0; --s)
        if (from[s] != -2) { best = s; break; }

    std::vector<std::size_t> chosen;
    for (long s = best; s > 0;) {
        const int i = from[s];
        chosen.push_back(static_cast<std::size_t>(i));
        s -= w[i];
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

WarmupPlan warmup_plan(const std::vector<int>& batch_sizes,
                       const std::vector<int>& seq_lens) {
    if (batch_sizes.empty() || seq_lens.empty())
        throw UsageError("warmup_plan: empty probe lists");
    std::set<std::pair<int, int>> seen;
    std::set<long> products;
    WarmupPlan plan;
    for (int bt : batch_sizes) {
        for (int ln : seq_lens) {
            if (bt < 1 || ln < 1) throw UsageError("warmup_plan: probes must be >= 1");
            if (seen.insert({bt, ln}).second) {
                plan.probes.emplace_back(bt, ln);
                products.insert(static_cast<long>(bt) * ln);
            }
        }
    }
    plan.sufficient = products.size() >= 3;
    return plan;
}

} // namespace fusim
