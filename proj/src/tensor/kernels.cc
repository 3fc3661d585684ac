// tensor/kernels.cc

// Copyright 2026  The kwsdistill Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tensor/kernels.h"

#include <cmath>
#include <cstring>

namespace kwsd {

namespace {
bool g_parallel_enabled = true;
}

void SetParallelEnabled(bool enabled) { g_parallel_enabled = enabled; }
bool ParallelEnabled() { return g_parallel_enabled; }

namespace kern {

// Row of C as the unit of work: per element the k index ascends, so the
// accumulation order never depends on the schedule.
static inline void MatMulRowAcc(const double *a_row, const double *b, double *c_row,
                                int64_t k, int64_t n) {
  for (int64_t kk = 0; kk < k; kk++) {
    const double av = a_row[kk];
    const double *b_row = b + kk * n;
    for (int64_t j = 0; j < n; j++) c_row[j] = std::fma(av, b_row[j], c_row[j]);
  }
}

void MatMulAcc(const double *a, const double *b, double *c, int64_t m,
               int64_t k, int64_t n) {
  ParallelFor(m, [&](int64_t i) { MatMulRowAcc(a + i * k, b, c + i * n, k, n); });
}

void MatMul(const double *a, const double *b, double *c, int64_t m, int64_t k,
            int64_t n) {
  std::memset(c, 0, sizeof(double) * static_cast<size_t>(m * n));
  MatMulAcc(a, b, c, m, k, n);
}

void MatMulNTAcc(const double *a, const double *b, double *c, int64_t m,
                 int64_t k, int64_t n) {
  ParallelFor(m, [&](int64_t i) {
    const double *a_row = a + i * k;
    double *c_row = c + i * n;
    for (int64_t j = 0; j < n; j++) {
      const double *b_row = b + j * k;
      double acc = c_row[j];
      for (int64_t kk = 0; kk < k; kk++) acc = std::fma(a_row[kk], b_row[kk], acc);
      c_row[j] = acc;
    }
  });
}

void MatMulTNAcc(const double *a, const double *b, double *c, int64_t m,
                 int64_t k, int64_t n) {
  ParallelFor(k, [&](int64_t i) {
    double *c_row = c + i * n;
    for (int64_t mm = 0; mm < m; mm++) {
      const double av = a[mm * k + i];
      const double *b_row = b + mm * n;
      for (int64_t j = 0; j < n; j++) c_row[j] = std::fma(av, b_row[j], c_row[j]);
    }
  });
}

void MatMulAccSerial(const double *a, const double *b, double *c, int64_t m,
                     int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; i++)
    for (int64_t j = 0; j < n; j++) {
      double acc = c[i * n + j];
      for (int64_t kk = 0; kk < k; kk++)
        acc = std::fma(a[i * k + kk], b[kk * n + j], acc);
      c[i * n + j] = acc;
    }
}

void MatMulSerial(const double *a, const double *b, double *c, int64_t m,
                  int64_t k, int64_t n) {
  std::memset(c, 0, sizeof(double) * static_cast<size_t>(m * n));
  MatMulAccSerial(a, b, c, m, k, n);
}

void MatMulNTAccSerial(const double *a, const double *b, double *c, int64_t m,
                       int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; i++)
    for (int64_t j = 0; j < n; j++) {
      double acc = c[i * n + j];
      for (int64_t kk = 0; kk < k; kk++)
        acc = std::fma(a[i * k + kk], b[j * k + kk], acc);
      c[i * n + j] = acc;
    }
}

void MatMulTNAccSerial(const double *a, const double *b, double *c, int64_t m,
                       int64_t k, int64_t n) {
  for (int64_t i = 0; i < k; i++)
    for (int64_t j = 0; j < n; j++) {
      double acc = c[i * n + j];
      for (int64_t mm = 0; mm < m; mm++)
        acc = std::fma(a[mm * k + i], b[mm * n + j], acc);
      c[i * n + j] = acc;
    }
}

// Segment lookup table: for each packed row, the [begin,end) of its segment.
static void SegmentBounds(const std::vector<int64_t> &offsets,
                          std::vector<int64_t> *begin,
                          std::vector<int64_t> *end) {
  const int64_t rows = offsets.back();
  begin->resize(rows);
  end->resize(rows);
  for (size_t s = 0; s + 1 < offsets.size(); s++)
    for (int64_t r = offsets[s]; r < offsets[s + 1]; r++) {
      (*begin)[r] = offsets[s];
      (*end)[r] = offsets[s + 1];
    }
}

static inline void Conv1dRow(const double *x, const double *w,
                             const double *bias, double *y_row, int64_t r,
                             int64_t seg_begin, int64_t seg_end, int64_t cin,
                             int64_t cout, int64_t ksize) {
  const int64_t half = ksize / 2;
  for (int64_t oc = 0; oc < cout; oc++) {
    double acc = bias[oc];
    const double *w_oc = w + oc * cin * ksize;
    for (int64_t kk = 0; kk < ksize; kk++) {
      const int64_t src = r + kk - half;
      if (src < seg_begin || src >= seg_end) continue;
      const double *x_row = x + src * cin;
      for (int64_t ic = 0; ic < cin; ic++)
        acc = std::fma(w_oc[ic * ksize + kk], x_row[ic], acc);
    }
    y_row[oc] = acc;
  }
}

void Conv1dForward(const double *x, const double *w, const double *bias,
                   double *y, const std::vector<int64_t> &offsets, int64_t cin,
                   int64_t cout, int64_t ksize) {
  std::vector<int64_t> begin, end;
  SegmentBounds(offsets, &begin, &end);
  ParallelFor(offsets.back(), [&](int64_t r) {
    Conv1dRow(x, w, bias, y + r * cout, r, begin[r], end[r], cin, cout, ksize);
  });
}

void Conv1dForwardSerial(const double *x, const double *w, const double *bias,
                         double *y, const std::vector<int64_t> &offsets,
                         int64_t cin, int64_t cout, int64_t ksize) {
  std::vector<int64_t> begin, end;
  SegmentBounds(offsets, &begin, &end);
  for (int64_t r = 0; r < offsets.back(); r++)
    Conv1dRow(x, w, bias, y + r * cout, r, begin[r], end[r], cin, cout, ksize);
}

void Conv1dBackward(const double *x, const double *w, const double *dy,
                    double *dx, double *dw, double *dbias,
                    const std::vector<int64_t> &offsets, int64_t cin,
                    int64_t cout, int64_t ksize) {
  std::vector<int64_t> begin, end;
  SegmentBounds(offsets, &begin, &end);
  const int64_t rows = offsets.back();
  const int64_t half = ksize / 2;
  if (dx != nullptr) {
    // dx[r,ic] = sum_{kk,oc} w[oc,ic,kk] * dy[r - kk + half, oc]
    ParallelFor(rows, [&](int64_t r) {
      double *dx_row = dx + r * cin;
      for (int64_t kk = 0; kk < ksize; kk++) {
        const int64_t dst = r - kk + half;
        if (dst < begin[r] || dst >= end[r]) continue;
        const double *dy_row = dy + dst * cout;
        for (int64_t oc = 0; oc < cout; oc++) {
          const double g = dy_row[oc];
          const double *w_oc = w + oc * cin * ksize;
          for (int64_t ic = 0; ic < cin; ic++)
            dx_row[ic] = std::fma(w_oc[ic * ksize + kk], g, dx_row[ic]);
        }
      }
    });
  }
  if (dw != nullptr) {
    ParallelFor(cout, [&](int64_t oc) {
      double *dw_oc = dw + oc * cin * ksize;
      for (int64_t r = 0; r < rows; r++) {
        const double g = dy[r * cout + oc];
        for (int64_t kk = 0; kk < ksize; kk++) {
          const int64_t src = r + kk - half;
          if (src < begin[r] || src >= end[r]) continue;
          const double *x_row = x + src * cin;
          for (int64_t ic = 0; ic < cin; ic++)
            dw_oc[ic * ksize + kk] = std::fma(g, x_row[ic], dw_oc[ic * ksize + kk]);
        }
      }
    });
  }
  if (dbias != nullptr) {
    ParallelFor(cout, [&](int64_t oc) {
      double acc = dbias[oc];
      for (int64_t r = 0; r < rows; r++) acc += dy[r * cout + oc];
      dbias[oc] = acc;
    });
  }
}

int64_t AttentionProbsSize(const std::vector<int64_t> &offsets, int64_t heads) {
  int64_t total = 0;
  for (size_t s = 0; s + 1 < offsets.size(); s++) {
    const int64_t t = offsets[s + 1] - offsets[s];
    total += heads * t * t;
  }
  return total;
}

namespace {
struct HeadTask {
  int64_t row_begin;   // first packed row of the segment
  int64_t len;         // segment length T
  int64_t head;        // head index
  int64_t prob_off;    // offset into the probs buffer for this (segment, head)
};

std::vector<HeadTask> MakeHeadTasks(const std::vector<int64_t> &offsets,
                                    int64_t heads) {
  std::vector<HeadTask> tasks;
  int64_t prob_off = 0;
  for (size_t s = 0; s + 1 < offsets.size(); s++) {
    const int64_t t = offsets[s + 1] - offsets[s];
    for (int64_t h = 0; h < heads; h++) {
      tasks.push_back({offsets[s], t, h, prob_off});
      prob_off += t * t;
    }
  }
  return tasks;
}
}  // namespace

static inline void AttentionHeadForward(const double *q, const double *k,
                                        const double *v, double *ctx,
                                        double *probs, const HeadTask &task,
                                        int64_t dim, int64_t dh) {
  const int64_t t = task.len;
  const int64_t base = task.row_begin;
  const int64_t col = task.head * dh;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int64_t i = 0; i < t; i++) {
    double *p_row = probs + task.prob_off + i * t;
    const double *q_row = q + (base + i) * dim + col;
    double maxv = -HUGE_VAL;
    for (int64_t j = 0; j < t; j++) {
      const double *k_row = k + (base + j) * dim + col;
      double acc = 0.0;
      for (int64_t c = 0; c < dh; c++) acc = std::fma(q_row[c], k_row[c], acc);
      p_row[j] = acc * scale;
      if (p_row[j] > maxv) maxv = p_row[j];
    }
    double denom = 0.0;
    for (int64_t j = 0; j < t; j++) {
      p_row[j] = std::exp(p_row[j] - maxv);
      denom += p_row[j];
    }
    const double inv = 1.0 / denom;
    for (int64_t j = 0; j < t; j++) p_row[j] *= inv;
    double *c_row = ctx + (base + i) * dim + col;
    for (int64_t c = 0; c < dh; c++) c_row[c] = 0.0;
    for (int64_t j = 0; j < t; j++) {
      const double p = p_row[j];
      const double *v_row = v + (base + j) * dim + col;
      for (int64_t c = 0; c < dh; c++) c_row[c] = std::fma(p, v_row[c], c_row[c]);
    }
  }
}

void AttentionForward(const double *q, const double *k, const double *v,
                      double *ctx, double *probs,
                      const std::vector<int64_t> &offsets, int64_t dim,
                      int64_t heads) {
  const int64_t dh = dim / heads;
  const auto tasks = MakeHeadTasks(offsets, heads);
  ParallelFor(static_cast<int64_t>(tasks.size()), [&](int64_t ti) {
    AttentionHeadForward(q, k, v, ctx, probs, tasks[ti], dim, dh);
  });
}

void AttentionForwardSerial(const double *q, const double *k, const double *v,
                            double *ctx, double *probs,
                            const std::vector<int64_t> &offsets, int64_t dim,
                            int64_t heads) {
  const int64_t dh = dim / heads;
  const auto tasks = MakeHeadTasks(offsets, heads);
  for (const auto &task : tasks)
    AttentionHeadForward(q, k, v, ctx, probs, task, dim, dh);
}

void AttentionBackward(const double *q, const double *k, const double *v,
                       const double *probs, const double *dctx, double *dq,
                       double *dk, double *dv,
                       const std::vector<int64_t> &offsets, int64_t dim,
                       int64_t heads) {
  const int64_t dh = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto tasks = MakeHeadTasks(offsets, heads);
  ParallelFor(static_cast<int64_t>(tasks.size()), [&](int64_t ti) {
    const HeadTask &task = tasks[ti];
    const int64_t t = task.len;
    const int64_t base = task.row_begin;
    const int64_t col = task.head * dh;
    std::vector<double> dp(t), ds(t);
    for (int64_t i = 0; i < t; i++) {
      const double *p_row = probs + task.prob_off + i * t;
      const double *dc_row = dctx + (base + i) * dim + col;
      // dV and dP from the context gradient.
      for (int64_t j = 0; j < t; j++) {
        const double *v_row = v + (base + j) * dim + col;
        double acc = 0.0;
        for (int64_t c = 0; c < dh; c++) acc = std::fma(dc_row[c], v_row[c], acc);
        dp[j] = acc;
      }
      double dot = 0.0;
      for (int64_t j = 0; j < t; j++) dot = std::fma(dp[j], p_row[j], dot);
      for (int64_t j = 0; j < t; j++) ds[j] = p_row[j] * (dp[j] - dot) * scale;
      double *dq_row = dq + (base + i) * dim + col;
      for (int64_t j = 0; j < t; j++) {
        const double p = p_row[j];
        const double s = ds[j];
        const double *k_row = k + (base + j) * dim + col;
        const double *q_row = q + (base + i) * dim + col;
        double *dv_row = dv + (base + j) * dim + col;
        double *dk_row = dk + (base + j) * dim + col;
        for (int64_t c = 0; c < dh; c++) {
          dv_row[c] = std::fma(p, dc_row[c], dv_row[c]);
          dk_row[c] = std::fma(s, q_row[c], dk_row[c]);
          dq_row[c] = std::fma(s, k_row[c], dq_row[c]);
        }
      }
    }
  });
}

static inline void SoftmaxRow(const double *x_row, double *y_row, int64_t cols) {
  double maxv = x_row[0];
  for (int64_t j = 1; j < cols; j++)
    if (x_row[j] > maxv) maxv = x_row[j];
  double denom = 0.0;
  for (int64_t j = 0; j < cols; j++) {
    y_row[j] = std::exp(x_row[j] - maxv);
    denom += y_row[j];
  }
  const double inv = 1.0 / denom;
  for (int64_t j = 0; j < cols; j++) y_row[j] *= inv;
}

void SoftmaxRows(const double *x, double *y, int64_t rows, int64_t cols) {
  ParallelFor(rows, [&](int64_t i) { SoftmaxRow(x + i * cols, y + i * cols, cols); });
}

void SoftmaxRowsSerial(const double *x, double *y, int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; i++) SoftmaxRow(x + i * cols, y + i * cols, cols);
}

void LogSoftmaxRows(const double *x, double *y, int64_t rows, int64_t cols) {
  ParallelFor(rows, [&](int64_t i) {
    const double *x_row = x + i * cols;
    double *y_row = y + i * cols;
    double maxv = x_row[0];
    for (int64_t j = 1; j < cols; j++)
      if (x_row[j] > maxv) maxv = x_row[j];
    double denom = 0.0;
    for (int64_t j = 0; j < cols; j++) denom += std::exp(x_row[j] - maxv);
    const double lse = maxv + std::log(denom);
    for (int64_t j = 0; j < cols; j++) y_row[j] = x_row[j] - lse;
  });
}

static inline void LayerNormRow(const double *x_row, double *y_row,
                                double *mean, double *rstd, int64_t cols,
                                double eps) {
  double sum = 0.0;
  for (int64_t j = 0; j < cols; j++) sum += x_row[j];
  const double mu = sum / static_cast<double>(cols);
  double var = 0.0;
  for (int64_t j = 0; j < cols; j++) {
    const double d = x_row[j] - mu;
    var = std::fma(d, d, var);
  }
  var /= static_cast<double>(cols);
  const double rs = 1.0 / std::sqrt(var + eps);
  *mean = mu;
  *rstd = rs;
  for (int64_t j = 0; j < cols; j++) y_row[j] = (x_row[j] - mu) * rs;
}

void LayerNormRows(const double *x, double *y, double *mean, double *rstd,
                   int64_t rows, int64_t cols, double eps) {
  ParallelFor(rows, [&](int64_t i) {
    LayerNormRow(x + i * cols, y + i * cols, mean + i, rstd + i, cols, eps);
  });
}

void LayerNormRowsSerial(const double *x, double *y, double *mean,
                         double *rstd, int64_t rows, int64_t cols, double eps) {
  for (int64_t i = 0; i < rows; i++)
    LayerNormRow(x + i * cols, y + i * cols, mean + i, rstd + i, cols, eps);
}

}  // namespace kern
}  // namespace kwsd
