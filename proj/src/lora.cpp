#include "fusim/lora.hpp"

#include <algorithm>
#include <cmath>

namespace fusim {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " * " + std::to_string(b.rows) +
                         "x" + std::to_string(b.cols));
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j)
                c.at(i, j) += aik * b.at(k, j);
        }
    }
    return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError("add: incompatible shapes");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

double max_rel_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError("max_rel_diff: incompatible shapes");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double denom = std::max({std::abs(a.data[i]), std::abs(b.data[i]), 1.0});
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]) / denom);
    }
    return worst;
}

void AdapterWeights::validate(int d, int k) const {
    if (rank < 1) throw UsageError("adapter rank must be >= 1");
    if (rank > std::min(d, k))
        throw UsageError("adapter rank exceeds min(d, k)");
    if (A.rows != rank || A.cols != k)
        throw ShapeError("adapter A must be rank x k");
    if (B.rows != d || B.cols != rank)
        throw ShapeError("adapter B must be d x rank");
}

FusedShape fused_shape(const std::vector<std::vector<int>>& per_group_lengths) {
    FusedShape s;
    for (const auto& group : per_group_lengths)
        for (int len : group) {
            s.max_len = std::max(s.max_len, len);
            ++s.sequences;
        }
    long real = 0;
    for (const auto& group : per_group_lengths)
        for (int len : group) real += len;
    s.total_tokens = s.sequences * s.max_len;
    s.padding_tokens = s.total_tokens - real;
    return s;
}

int FusedBatch::real_length(int seq) const {
    int n = 0;
    for (int p = 0; p < max_len; ++p)
        if (mask[static_cast<std::size_t>(seq) * max_len + p]) ++n;
    return n;
}

Matrix FusedBatch::sequence(int seq) const {
    Matrix m(max_len, dim);
    const auto base = static_cast<std::size_t>(seq) * max_len * dim;
    std::copy(data.begin() + base, data.begin() + base + static_cast<std::size_t>(max_len) * dim,
              m.data.begin());
    return m;
}

Matrix lora_forward(const Matrix& W0, const AdapterWeights& adapter, const Matrix& x) {
    const int d = W0.rows;
    const int k = W0.cols;
    adapter.validate(d, k);
    if (x.rows != k) throw ShapeError("lora_forward: x must be k x m");
    if (!W0.all_finite() || !x.all_finite() || !adapter.A.all_finite() ||
        !adapter.B.all_finite())
        throw NumericError("lora_forward: non-finite input");
    // h = W0*x + B*(A*x): the low-rank delta stays factored
    return add(matmul(W0, x), matmul(adapter.B, matmul(adapter.A, x)));
}

FusedBatch fuse(const std::vector<JobBatch>& batches) {
    if (batches.empty()) throw UsageError("fuse: empty batch list");
    long num_seq = 0;
    int dim = -1;
    std::vector<std::vector<int>> lengths;
    for (const auto& b : batches) {
        std::vector<int> ls;
        for (const auto& seq : b.sequences) {
            if (dim < 0) dim = seq.cols;
            if (seq.cols != dim)
                throw ShapeError("fuse: embedding dims differ across sequences");
            if (seq.rows < 1) throw UsageError("fuse: empty sequence");
            ls.push_back(seq.rows);
            ++num_seq;
        }
        lengths.push_back(std::move(ls));
    }
    if (num_seq == 0) throw UsageError("fuse: no sequences");

    const FusedShape shape = fused_shape(lengths);
    FusedBatch fb;
    fb.num_sequences = static_cast<int>(num_seq);
    fb.max_len = shape.max_len;
    fb.dim = dim;
    fb.total_tokens = shape.total_tokens;
    fb.padding_tokens = shape.padding_tokens;
    fb.data.assign(static_cast<std::size_t>(num_seq) * shape.max_len * dim, 0.0);
    fb.mask.assign(static_cast<std::size_t>(num_seq) * shape.max_len, 0);

    int s = 0;
    for (const auto& b : batches) {
        for (const auto& seq : b.sequences) {
            fb.routing.push_back(b.job_id);
            const auto row_base = static_cast<std::size_t>(s) * fb.max_len;
            for (int r = 0; r < seq.rows; ++r) {
                fb.mask[row_base + r] = 1;
                std::copy(seq.data.begin() + static_cast<std::size_t>(r) * dim,
                          seq.data.begin() + static_cast<std::size_t>(r + 1) * dim,
                          fb.data.begin() + (row_base + r) * dim);
            }
            ++s;
        }
    }
    return fb;
}

std::vector<Matrix> fused_forward(const Matrix& W0,
                                  const std::map<std::string, AdapterWeights>& adapters,
                                  const FusedBatch& fb) {
    if (W0.cols != fb.dim)
        throw ShapeError("fused_forward: W0 column dim does not match batch dim");
    for (const auto& job : fb.routing)
        if (!adapters.count(job))
            throw RoutingError("fused_forward: no adapter for job " + job);

    const Matrix W0t = transpose(W0);
    std::vector<Matrix> outputs;
    outputs.reserve(fb.routing.size());
    for (int s = 0; s < fb.num_sequences; ++s) {
        const Matrix xs = fb.sequence(s);           // max_len x k
        Matrix out = matmul(xs, W0t);               // shared base pass
        const AdapterWeights& ad = adapters.at(fb.routing[s]);
        ad.validate(W0.rows, W0.cols);
        // per-job low-rank pass on this segment
        out = add(out, matmul(matmul(xs, transpose(ad.A)), transpose(ad.B)));
        outputs.push_back(std::move(out));
    }
    return outputs;
}

LaunchCount count_launches(int num_jobs, LaunchMode mode) {
    if (num_jobs < 1) throw UsageError("count_launches: need at least one job");
    const long k = num_jobs;
    if (mode == LaunchMode::PerJob) return {4 * k, 0};
    return {2 * k, 2};
}

} // namespace fusim
