// tests/unit_kernels.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "base/rng.h"
#include "tensor/kernels.h"

using namespace kwsd;

namespace {

std::vector<double> RandomVec(Rng *rng, int64_t n, double scale = 1.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double &x : v) x = rng->NextGaussian() * scale;
  return v;
}

bool Bitwise(const std::vector<double> &a, const std::vector<double> &b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("matmul parallel kernels match serial references bitwise") {
  Rng rng(11);
  for (int trial = 0; trial < 8; trial++) {
    const int64_t m = 1 + static_cast<int64_t>(rng.NextBelow(40));
    const int64_t k = 1 + static_cast<int64_t>(rng.NextBelow(40));
    const int64_t n = 1 + static_cast<int64_t>(rng.NextBelow(40));
    auto a = RandomVec(&rng, m * k);
    auto b = RandomVec(&rng, k * n);
    auto bt = RandomVec(&rng, n * k);
    auto seed_c = RandomVec(&rng, m * n);

    std::vector<double> c1(m * n), c2(m * n);
    SetParallelEnabled(true);
    kern::MatMul(a.data(), b.data(), c1.data(), m, k, n);
    SetParallelEnabled(false);
    kern::MatMul(a.data(), b.data(), c2.data(), m, k, n);
    SetParallelEnabled(true);
    std::vector<double> c3(m * n);
    kern::MatMulSerial(a.data(), b.data(), c3.data(), m, k, n);
    CHECK(Bitwise(c1, c2));
    CHECK(Bitwise(c1, c3));

    std::vector<double> d1 = seed_c, d2 = seed_c;
    kern::MatMulNTAcc(a.data(), bt.data(), d1.data(), m, k, n);
    kern::MatMulNTAccSerial(a.data(), bt.data(), d2.data(), m, k, n);
    CHECK(Bitwise(d1, d2));

    auto b2 = RandomVec(&rng, m * n);
    std::vector<double> e1(k * n, 0.5), e2(k * n, 0.5);
    kern::MatMulTNAcc(a.data(), b2.data(), e1.data(), m, k, n);
    kern::MatMulTNAccSerial(a.data(), b2.data(), e2.data(), m, k, n);
    CHECK(Bitwise(e1, e2));
  }
}

TEST_CASE("matmul agrees with plain summation oracle") {
  Rng rng(12);
  const int64_t m = 7, k = 9, n = 5;
  auto a = RandomVec(&rng, m * k);
  auto b = RandomVec(&rng, k * n);
  std::vector<double> c(m * n);
  kern::MatMul(a.data(), b.data(), c.data(), m, k, n);
  for (int64_t i = 0; i < m; i++)
    for (int64_t j = 0; j < n; j++) {
      double acc = 0.0;
      for (int64_t kk = 0; kk < k; kk++) acc += a[i * k + kk] * b[kk * n + j];
      CHECK(c[i * n + j] == doctest::Approx(acc).epsilon(1e-13));
    }
}

TEST_CASE("conv1d parallel matches serial and a naive oracle") {
  Rng rng(13);
  const std::vector<int64_t> offsets = {0, 6, 15, 17};
  const int64_t cin = 5, cout = 4, ksize = 3, rows = offsets.back();
  auto x = RandomVec(&rng, rows * cin);
  auto w = RandomVec(&rng, cout * cin * ksize);
  auto bias = RandomVec(&rng, cout);

  std::vector<double> y1(rows * cout), y2(rows * cout);
  kern::Conv1dForward(x.data(), w.data(), bias.data(), y1.data(), offsets, cin,
                      cout, ksize);
  kern::Conv1dForwardSerial(x.data(), w.data(), bias.data(), y2.data(), offsets,
                            cin, cout, ksize);
  CHECK(Bitwise(y1, y2));

  // Oracle: zero padding never crosses a segment boundary.
  for (size_t s = 0; s + 1 < offsets.size(); s++) {
    for (int64_t r = offsets[s]; r < offsets[s + 1]; r++) {
      for (int64_t oc = 0; oc < cout; oc++) {
        double acc = bias[oc];
        for (int64_t kk = 0; kk < ksize; kk++) {
          const int64_t src = r + kk - ksize / 2;
          if (src < offsets[s] || src >= offsets[s + 1]) continue;
          for (int64_t ic = 0; ic < cin; ic++)
            acc += w[oc * cin * ksize + ic * ksize + kk] * x[src * cin + ic];
        }
        CHECK(y1[r * cout + oc] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("attention parallel matches serial bitwise and dense oracle") {
  Rng rng(14);
  const std::vector<int64_t> offsets = {0, 5, 12};
  const int64_t dim = 8, heads = 2, rows = offsets.back();
  auto q = RandomVec(&rng, rows * dim);
  auto k = RandomVec(&rng, rows * dim);
  auto v = RandomVec(&rng, rows * dim);

  std::vector<double> ctx1(rows * dim), ctx2(rows * dim);
  std::vector<double> p1(kern::AttentionProbsSize(offsets, heads));
  std::vector<double> p2(p1.size());
  kern::AttentionForward(q.data(), k.data(), v.data(), ctx1.data(), p1.data(),
                         offsets, dim, heads);
  kern::AttentionForwardSerial(q.data(), k.data(), v.data(), ctx2.data(),
                               p2.data(), offsets, dim, heads);
  CHECK(Bitwise(ctx1, ctx2));
  CHECK(Bitwise(p1, p2));

  const int64_t dh = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (size_t s = 0; s + 1 < offsets.size(); s++) {
    const int64_t base = offsets[s], t = offsets[s + 1] - offsets[s];
    for (int64_t h = 0; h < heads; h++) {
      for (int64_t i = 0; i < t; i++) {
        std::vector<double> logits(t);
        for (int64_t j = 0; j < t; j++) {
          double acc = 0.0;
          for (int64_t c = 0; c < dh; c++)
            acc += q[(base + i) * dim + h * dh + c] * k[(base + j) * dim + h * dh + c];
          logits[j] = acc * scale;
        }
        double denom = 0.0;
        for (int64_t j = 0; j < t; j++) denom += std::exp(logits[j]);
        for (int64_t c = 0; c < dh; c++) {
          double acc = 0.0;
          for (int64_t j = 0; j < t; j++)
            acc += std::exp(logits[j]) / denom * v[(base + j) * dim + h * dh + c];
          CHECK(ctx1[(base + i) * dim + h * dh + c] ==
                doctest::Approx(acc).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("row softmax and layer norm parallel match serial bitwise") {
  Rng rng(15);
  const int64_t rows = 33, cols = 17;
  auto x = RandomVec(&rng, rows * cols, 3.0);
  std::vector<double> y1(rows * cols), y2(rows * cols);
  kern::SoftmaxRows(x.data(), y1.data(), rows, cols);
  kern::SoftmaxRowsSerial(x.data(), y2.data(), rows, cols);
  CHECK(Bitwise(y1, y2));
  for (int64_t i = 0; i < rows; i++) {
    double sum = 0.0;
    for (int64_t j = 0; j < cols; j++) sum += y1[i * cols + j];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  std::vector<double> n1(rows * cols), n2(rows * cols);
  std::vector<double> mean1(rows), rstd1(rows), mean2(rows), rstd2(rows);
  kern::LayerNormRows(x.data(), n1.data(), mean1.data(), rstd1.data(), rows,
                      cols, 1e-6);
  kern::LayerNormRowsSerial(x.data(), n2.data(), mean2.data(), rstd2.data(),
                            rows, cols, 1e-6);
  CHECK(Bitwise(n1, n2));
  CHECK(Bitwise(mean1, mean2));
}
