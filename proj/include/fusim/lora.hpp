#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusim/errors.hpp"

namespace fusim {

// Dense row-major matrix. Desk-scale; no BLAS needed.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    static Matrix identity(int n);

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool all_finite() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);       // ShapeError on mismatch
Matrix add(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double max_rel_diff(const Matrix& a, const Matrix& b); // inf-norm relative difference

struct AdapterWeights {
    std::string job_id;
    Matrix A;  // rank x k
    Matrix B;  // d x rank
    int rank = 1;

    void validate(int d, int k) const;  // ShapeError / UsageError
};

// Per-job input batch: each sequence is seq_len x k, rows are token positions.
struct JobBatch {
    std::string job_id;
    std::vector<Matrix> sequences;
};

// Token accounting of a fused batch; shared by the dense fuse, the batch
// selector, and the simulator so padding is counted identically everywhere.
struct FusedShape {
    int max_len = 0;
    long sequences = 0;
    long total_tokens = 0;    // sequences * max_len
    long padding_tokens = 0;  // sum over sequences of (max_len - length)

    double padding_ratio() const {
        return total_tokens == 0 ? 0.0
                                 : static_cast<double>(padding_tokens) / total_tokens;
    }
};

FusedShape fused_shape(const std::vector<std::vector<int>>& per_group_lengths);

// Dimension-aligned fused batch: all sequences zero-padded to max_len.
struct FusedBatch {
    int num_sequences = 0;
    int max_len = 0;
    int dim = 0;                        // embedding dim k
    std::vector<double> data;           // num_sequences * max_len * dim
    std::vector<std::string> routing;   // job id per sequence, input order
    std::vector<std::uint8_t> mask;     // num_sequences * max_len, 1 = real token
    long total_tokens = 0;
    long padding_tokens = 0;

    double padding_ratio() const {
        return total_tokens == 0 ? 0.0
                                 : static_cast<double>(padding_tokens) / total_tokens;
    }
    int real_length(int seq) const;
    Matrix sequence(int seq) const;     // max_len x dim view copy
};

// h = W0*x + B*(A*x), W0: d x k, x: k x m. Association order is fixed: the
// low-rank product is never materialized as a dense d x k delta.
Matrix lora_forward(const Matrix& W0, const AdapterWeights& adapter, const Matrix& x);

FusedBatch fuse(const std::vector<JobBatch>& batches);

// One base-model pass over the fused block plus one low-rank pass per job
// segment. Returns one max_len x d output per sequence, parallel to routing;
// padded rows come out zero.
std::vector<Matrix> fused_forward(const Matrix& W0,
                                  const std::map<std::string, AdapterWeights>& adapters,
                                  const FusedBatch& fb);

enum class LaunchMode { PerJob, Fused };

struct LaunchCount {
    long small_launches = 0;
    long large_launches = 0;
    long total() const { return small_launches + large_launches; }
};

// per-job: 4k small launches; fused: 2k small + 2 large
LaunchCount count_launches(int num_jobs, LaunchMode mode);

} // namespace fusim
