// Copyright 2026 The a2asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "a2/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "a2/error.hpp"

namespace a2 {

namespace {

struct Rec {
  GradTape* tape = nullptr;
  bool on = false;
};

Rec StartRec(std::initializer_list<const Tensor*> inputs) {
  Rec r;
  r.tape = GradTape::Active();
  if (r.tape == nullptr) return r;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) {
      r.on = true;
      return r;
    }
  }
  return r;
}

void CheckSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.ShapeString() +
                         " vs " + b.ShapeString());
  }
}

void CheckRank2(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                         a.ShapeString());
  }
}

// Resolves a softmax axis against rank 1 or 2; returns true if the reduction
// runs along rows (last axis).
bool LastAxis(const char* op, const Tensor& a, int axis) {
  if (a.rank() == 0 || a.rank() > 2) {
    throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " +
                         a.ShapeString());
  }
  int rank = static_cast<int>(a.rank());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw DimensionError(std::string(op) + ": axis out of range");
  }
  return axis == rank - 1;
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape("add", a, b);
  const auto& ad = a.data();
  const auto& bd = b.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] + bd[i];
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a, &b});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int ib = rec.tape->NodeFor(b);
    int id = rec.tape->Record({ia, ib}, result.shape(), [ia, ib](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      if (ia >= 0) t.AccumGrad(ia, g);
      if (ib >= 0) t.AccumGrad(ib, g);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSameShape("sub", a, b);
  const auto& ad = a.data();
  const auto& bd = b.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] - bd[i];
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a, &b});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int ib = rec.tape->NodeFor(b);
    int id = rec.tape->Record({ia, ib}, result.shape(), [ia, ib](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      if (ia >= 0) t.AccumGrad(ia, g);
      if (ib >= 0) {
        std::vector<double> neg(g.size());
        for (size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
        t.AccumGrad(ib, neg);
      }
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSameShape("mul", a, b);
  const auto& ad = a.data();
  const auto& bd = b.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] * bd[i];
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a, &b});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int ib = rec.tape->NodeFor(b);
    Tensor sa = a, sb = b;
    int id = rec.tape->Record({ia, ib}, result.shape(),
                              [ia, ib, sa, sb](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      if (ia >= 0) {
        std::vector<double> da(g.size());
        const auto& bv = sb.data();
        for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] * bv[i];
        t.AccumGrad(ia, da);
      }
      if (ib >= 0) {
        std::vector<double> db(g.size());
        const auto& av = sa.data();
        for (size_t i = 0; i < g.size(); ++i) db[i] = g[i] * av[i];
        t.AccumGrad(ib, db);
      }
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Scale(const Tensor& a, double c) {
  const auto& ad = a.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] * c;
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia, c](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      std::vector<double> da(g.size());
      for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] * c;
      t.AccumGrad(ia, da);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor AddScalar(const Tensor& a, double c) {
  const auto& ad = a.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] + c;
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia](GradTape& t, int self) {
      t.AccumGrad(ia, t.GradData(self));
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckRank2("matmul", a);
  CheckRank2("matmul", b);
  int64_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw DimensionError("matmul: inner extents disagree, " + a.ShapeString() +
                         " vs " + b.ShapeString());
  }
  const auto& ad = a.data();
  const auto& bd = b.data();
  std::vector<double> out(static_cast<size_t>(m * n), 0.0);
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = ad.data() + i * k;
    double* orow = out.data() + i * n;
    for (int64_t p = 0; p < k; ++p) {
      double aip = arow[p];
      if (aip == 0.0) continue;
      const double* brow = bd.data() + p * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  Tensor result = Tensor::FromData({m, n}, std::move(out));
  auto rec = StartRec({&a, &b});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int ib = rec.tape->NodeFor(b);
    Tensor sa = a, sb = b;
    int id = rec.tape->Record({ia, ib}, result.shape(),
                              [ia, ib, sa, sb, m, k, n](GradTape& t, int self) {
      const auto& g = t.GradData(self);  // m x n
      if (ia >= 0) {
        // dA = g * B^T
        std::vector<double> da(static_cast<size_t>(m * k), 0.0);
        const auto& bv = sb.data();
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* grow = g.data() + i * n;
            const double* brow = bv.data() + p * n;
            for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            da[static_cast<size_t>(i * k + p)] = acc;
          }
        }
        t.AccumGrad(ia, da);
      }
      if (ib >= 0) {
        // dB = A^T * g
        std::vector<double> db(static_cast<size_t>(k * n), 0.0);
        const auto& av = sa.data();
        for (int64_t i = 0; i < m; ++i) {
          const double* arow = av.data() + i * k;
          const double* grow = g.data() + i * n;
          for (int64_t p = 0; p < k; ++p) {
            double aip = arow[p];
            if (aip == 0.0) continue;
            double* drow = db.data() + p * n;
            for (int64_t j = 0; j < n; ++j) drow[j] += aip * grow[j];
          }
        }
        t.AccumGrad(ib, db);
      }
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Transpose(const Tensor& a) {
  CheckRank2("transpose", a);
  int64_t m = a.dim(0), n = a.dim(1);
  const auto& ad = a.data();
  std::vector<double> out(ad.size());
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j)
      out[static_cast<size_t>(j * m + i)] = ad[static_cast<size_t>(i * n + j)];
  Tensor result = Tensor::FromData({n, m}, std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia, m, n](GradTape& t, int self) {
      const auto& g = t.GradData(self);  // n x m
      std::vector<double> da(g.size());
      for (int64_t j = 0; j < n; ++j)
        for (int64_t i = 0; i < m; ++i)
          da[static_cast<size_t>(i * n + j)] = g[static_cast<size_t>(j * m + i)];
      t.AccumGrad(ia, da);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Relu(const Tensor& a) {
  const auto& ad = a.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] > 0.0 ? ad[i] : 0.0;
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    Tensor sa = a;
    int id = rec.tape->Record({ia}, result.shape(), [ia, sa](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      const auto& av = sa.data();
      std::vector<double> da(g.size());
      for (size_t i = 0; i < g.size(); ++i) da[i] = av[i] > 0.0 ? g[i] : 0.0;
      t.AccumGrad(ia, da);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

namespace {

// Shared softmax/log-softmax kernel over the last axis.
void SoftmaxRows(const std::vector<double>& in, int64_t rows, int64_t cols,
                 bool log_domain, std::vector<double>* out) {
  out->resize(in.size());
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out->data() + r * cols;
    double m = x[0];
    for (int64_t j = 1; j < cols; ++j) m = std::max(m, x[j]);
    double s = 0.0;
    for (int64_t j = 0; j < cols; ++j) s += std::exp(x[j] - m);
    if (log_domain) {
      double ls = std::log(s);
      for (int64_t j = 0; j < cols; ++j) y[j] = x[j] - m - ls;
    } else {
      for (int64_t j = 0; j < cols; ++j) y[j] = std::exp(x[j] - m) / s;
    }
  }
}

void CheckFinite(const char* op, const Tensor& a) {
  for (double v : a.data()) {
    if (std::isnan(v)) throw NumericError(std::string(op) + ": NaN input");
  }
}

}  // namespace

Tensor Softmax(const Tensor& a, int axis) {
  CheckFinite("softmax", a);
  if (!LastAxis("softmax", a, axis)) {
    return Transpose(Softmax(Transpose(a), -1));
  }
  int64_t cols = a.shape().back();
  int64_t rows = a.size() / cols;
  std::vector<double> out;
  SoftmaxRows(a.data(), rows, cols, /*log_domain=*/false, &out);
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    Tensor p = result;  // saved probabilities
    int id = rec.tape->Record({ia}, result.shape(),
                              [ia, p, rows, cols](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      const auto& pv = p.data();
      std::vector<double> da(g.size());
      for (int64_t r = 0; r < rows; ++r) {
        const double* gr = g.data() + r * cols;
        const double* pr = pv.data() + r * cols;
        double dot = 0.0;
        for (int64_t j = 0; j < cols; ++j) dot += gr[j] * pr[j];
        double* dr = da.data() + r * cols;
        for (int64_t j = 0; j < cols; ++j) dr[j] = pr[j] * (gr[j] - dot);
      }
      t.AccumGrad(ia, da);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor LogSoftmax(const Tensor& a, int axis) {
  CheckFinite("log_softmax", a);
  if (!LastAxis("log_softmax", a, axis)) {
    return Transpose(LogSoftmax(Transpose(a), -1));
  }
  int64_t cols = a.shape().back();
  int64_t rows = a.size() / cols;
  std::vector<double> out;
  SoftmaxRows(a.data(), rows, cols, /*log_domain=*/true, &out);
  Tensor result = Tensor::FromData(a.shape(), std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    Tensor lp = result;
    int id = rec.tape->Record({ia}, result.shape(),
                              [ia, lp, rows, cols](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      const auto& lv = lp.data();
      std::vector<double> da(g.size());
      for (int64_t r = 0; r < rows; ++r) {
        const double* gr = g.data() + r * cols;
        const double* lr = lv.data() + r * cols;
        double gsum = 0.0;
        for (int64_t j = 0; j < cols; ++j) gsum += gr[j];
        double* dr = da.data() + r * cols;
        for (int64_t j = 0; j < cols; ++j) dr[j] = gr[j] - std::exp(lr[j]) * gsum;
      }
      t.AccumGrad(ia, da);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() < 1) throw DimensionError("layernorm: rank-0 input");
  int64_t d = x.shape().back();
  if (gamma.rank() != 1 || gamma.dim(0) != d || beta.rank() != 1 || beta.dim(0) != d) {
    throw DimensionError("layernorm: gamma/beta must be [d], d=" + std::to_string(d));
  }
  int64_t rows = x.size() / d;
  const auto& xd = x.data();
  const auto& gd = gamma.data();
  const auto& bd = beta.data();
  std::vector<double> out(xd.size());
  std::vector<double> xhat(xd.size());
  std::vector<double> inv_std(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = xd.data() + r * d;
    double mu = 0.0;
    for (int64_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(r)] = inv;
    for (int64_t j = 0; j < d; ++j) {
      double h = (xr[j] - mu) * inv;
      xhat[static_cast<size_t>(r * d + j)] = h;
      out[static_cast<size_t>(r * d + j)] = gd[static_cast<size_t>(j)] * h +
                                            bd[static_cast<size_t>(j)];
    }
  }
  Tensor result = Tensor::FromData(x.shape(), std::move(out));
  auto rec = StartRec({&x, &gamma, &beta});
  if (rec.on) {
    int ix = rec.tape->NodeFor(x);
    int ig = rec.tape->NodeFor(gamma);
    int ib = rec.tape->NodeFor(beta);
    Tensor sg = gamma;
    auto sxhat = std::make_shared<std::vector<double>>(std::move(xhat));
    auto sinv = std::make_shared<std::vector<double>>(std::move(inv_std));
    int id = rec.tape->Record({ix, ig, ib}, result.shape(),
                              [ix, ig, ib, sg, sxhat, sinv, rows, d](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      const auto& gv = sg.data();
      if (ib >= 0) {
        std::vector<double> db(static_cast<size_t>(d), 0.0);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t j = 0; j < d; ++j) db[static_cast<size_t>(j)] += g[r * d + j];
        t.AccumGrad(ib, db);
      }
      if (ig >= 0) {
        std::vector<double> dg(static_cast<size_t>(d), 0.0);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t j = 0; j < d; ++j)
            dg[static_cast<size_t>(j)] += g[r * d + j] * (*sxhat)[r * d + j];
        t.AccumGrad(ig, dg);
      }
      if (ix >= 0) {
        std::vector<double> dx(g.size());
        for (int64_t r = 0; r < rows; ++r) {
          const double* gr = g.data() + r * d;
          const double* hr = sxhat->data() + r * d;
          double inv = (*sinv)[static_cast<size_t>(r)];
          double mean_h = 0.0, mean_hx = 0.0;
          for (int64_t j = 0; j < d; ++j) {
            double hj = gv[static_cast<size_t>(j)] * gr[j];
            mean_h += hj;
            mean_hx += hj * hr[j];
          }
          mean_h /= static_cast<double>(d);
          mean_hx /= static_cast<double>(d);
          for (int64_t j = 0; j < d; ++j) {
            double hj = gv[static_cast<size_t>(j)] * gr[j];
            dx[static_cast<size_t>(r * d + j)] =
                inv * (hj - mean_h - hr[j] * mean_hx);
          }
        }
        t.AccumGrad(ix, dx);
      }
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Sum(const Tensor& a) {
  const auto& ad = a.data();
  double s = 0.0;
  for (double v : ad) s += v;
  Tensor result = Tensor::Scalar(s);
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    size_t n = ad.size();
    int id = rec.tape->Record({ia}, result.shape(), [ia, n](GradTape& t, int self) {
      double g = t.GradData(self)[0];
      t.AccumGrad(ia, std::vector<double>(n, g));
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Mean(const Tensor& a) {
  const auto& ad = a.data();
  double s = 0.0;
  for (double v : ad) s += v;
  double n = static_cast<double>(ad.size());
  Tensor result = Tensor::Scalar(s / n);
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    size_t count = ad.size();
    int id = rec.tape->Record({ia}, result.shape(), [ia, count](GradTape& t, int self) {
      double g = t.GradData(self)[0] / static_cast<double>(count);
      t.AccumGrad(ia, std::vector<double>(count, g));
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor Reshape(const Tensor& a, std::vector<int64_t> shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  if (n != a.size()) {
    throw DimensionError("reshape: size mismatch " + a.ShapeString() + " -> " +
                         ShapeStr(shape));
  }
  Tensor result = Tensor::FromData(std::move(shape), a.data());
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia](GradTape& t, int self) {
      t.AccumGrad(ia, t.GradData(self));
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor SliceRows(const Tensor& a, int64_t r0, int64_t r1) {
  CheckRank2("slice_rows", a);
  int64_t m = a.dim(0), n = a.dim(1);
  if (r0 < 0 || r1 > m || r0 >= r1) throw DimensionError("slice_rows: bad range");
  const auto& ad = a.data();
  std::vector<double> out(ad.begin() + r0 * n, ad.begin() + r1 * n);
  Tensor result = Tensor::FromData({r1 - r0, n}, std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia, r0, n](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      t.AccumGradRange(ia, r0 * n, g.data(), static_cast<int64_t>(g.size()));
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor SliceCols(const Tensor& a, int64_t c0, int64_t c1) {
  CheckRank2("slice_cols", a);
  int64_t m = a.dim(0), n = a.dim(1);
  if (c0 < 0 || c1 > n || c0 >= c1) throw DimensionError("slice_cols: bad range");
  int64_t w = c1 - c0;
  const auto& ad = a.data();
  std::vector<double> out(static_cast<size_t>(m * w));
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < w; ++j)
      out[static_cast<size_t>(i * w + j)] = ad[static_cast<size_t>(i * n + c0 + j)];
  Tensor result = Tensor::FromData({m, w}, std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(),
                              [ia, m, n, c0, w](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      for (int64_t i = 0; i < m; ++i)
        t.AccumGradRange(ia, i * n + c0, g.data() + i * w, w);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor ConcatCols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: empty input");
  int64_t m = parts[0].dim(0);
  int64_t total = 0;
  for (const Tensor& p : parts) {
    CheckRank2("concat_cols", p);
    if (p.dim(0) != m) throw DimensionError("concat_cols: row mismatch");
    total += p.dim(1);
  }
  std::vector<double> out(static_cast<size_t>(m * total));
  int64_t off = 0;
  for (const Tensor& p : parts) {
    int64_t w = p.dim(1);
    const auto& pd = p.data();
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < w; ++j)
        out[static_cast<size_t>(i * total + off + j)] = pd[static_cast<size_t>(i * w + j)];
    off += w;
  }
  Tensor result = Tensor::FromData({m, total}, std::move(out));
  GradTape* tape = GradTape::Active();
  bool any = false;
  if (tape != nullptr) {
    for (const Tensor& p : parts) any = any || p.requires_grad();
  }
  if (tape != nullptr && any) {
    std::vector<int> ids;
    std::vector<int64_t> widths;
    for (const Tensor& p : parts) {
      ids.push_back(tape->NodeFor(p));
      widths.push_back(p.dim(1));
    }
    int id = tape->Record(ids, result.shape(),
                          [ids, widths, m, total](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      int64_t off = 0;
      for (size_t k = 0; k < ids.size(); ++k) {
        int64_t w = widths[k];
        if (ids[k] >= 0) {
          for (int64_t i = 0; i < m; ++i)
            t.AccumGradRange(ids[k], i * w, g.data() + i * total + off, w);
        }
        off += w;
      }
    });
    tape->Bind(result, id);
  }
  return result;
}

Tensor PadRows(const Tensor& a, int64_t rows) {
  CheckRank2("pad_rows", a);
  int64_t m = a.dim(0), n = a.dim(1);
  if (rows < m) throw DimensionError("pad_rows: target smaller than input");
  if (rows == m) return a;
  std::vector<double> out(static_cast<size_t>(rows * n), 0.0);
  std::copy(a.data().begin(), a.data().end(), out.begin());
  Tensor result = Tensor::FromData({rows, n}, std::move(out));
  auto rec = StartRec({&a});
  if (rec.on) {
    int ia = rec.tape->NodeFor(a);
    int id = rec.tape->Record({ia}, result.shape(), [ia, m, n](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      t.AccumGradRange(ia, 0, g.data(), m * n);
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor AddRowBroadcast(const Tensor& m, const Tensor& v) {
  CheckRank2("add_row_broadcast", m);
  if (v.rank() != 1 || v.dim(0) != m.dim(1)) {
    throw DimensionError("add_row_broadcast: vector " + v.ShapeString() +
                         " vs matrix " + m.ShapeString());
  }
  int64_t rows = m.dim(0), cols = m.dim(1);
  const auto& md = m.data();
  const auto& vd = v.data();
  std::vector<double> out(md.size());
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j)
      out[static_cast<size_t>(i * cols + j)] =
          md[static_cast<size_t>(i * cols + j)] + vd[static_cast<size_t>(j)];
  Tensor result = Tensor::FromData(m.shape(), std::move(out));
  auto rec = StartRec({&m, &v});
  if (rec.on) {
    int im = rec.tape->NodeFor(m);
    int iv = rec.tape->NodeFor(v);
    int id = rec.tape->Record({im, iv}, result.shape(),
                              [im, iv, rows, cols](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      if (im >= 0) t.AccumGrad(im, g);
      if (iv >= 0) {
        std::vector<double> dv(static_cast<size_t>(cols), 0.0);
        for (int64_t i = 0; i < rows; ++i)
          for (int64_t j = 0; j < cols; ++j) dv[static_cast<size_t>(j)] += g[i * cols + j];
        t.AccumGrad(iv, dv);
      }
    });
    rec.tape->Bind(result, id);
  }
  return result;
}

Tensor EmbeddingLookup(const Tensor& table, std::span<const int> ids) {
  CheckRank2("embedding_lookup", table);
  int64_t v = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * static_cast<size_t>(d));
  const auto& td = table.data();
  for (size_t i = 0; i < ids.size(); ++i) {
    int id = ids[i];
    if (id < 0 || id >= v) {
      throw DimensionError("embedding_lookup: id " + std::to_string(id) +
                           " out of vocabulary size " + std::to_string(v));
    }
    std::copy(td.begin() + id * d, td.begin() + (id + 1) * d, out.begin() + i * d);
  }
  Tensor result = Tensor::FromData({static_cast<int64_t>(ids.size()), d}, std::move(out));
  auto rec = StartRec({&table});
  if (rec.on) {
    int it = rec.tape->NodeFor(table);
    std::vector<int> saved_ids(ids.begin(), ids.end());
    int node = rec.tape->Record({it}, result.shape(),
                                [it, saved_ids, d](GradTape& t, int self) {
      const auto& g = t.GradData(self);
      for (size_t i = 0; i < saved_ids.size(); ++i)
        t.AccumGradRange(it, static_cast<int64_t>(saved_ids[i]) * d,
                         g.data() + i * static_cast<size_t>(d), d);
    });
    rec.tape->Bind(result, node);
  }
  return result;
}

}  // namespace a2
