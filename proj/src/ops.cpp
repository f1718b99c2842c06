// Copyright 2026 The abnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abnn::ops {

using detail::Buffer;

namespace {

template <class T>
const std::vector<T>& values(const Tensor& t) {
  return std::get<std::vector<T>>(*t.impl().data);
}

template <class T>
std::vector<T>& values(Buffer& b) {
  return std::get<std::vector<T>>(b);
}

template <class T>
const std::vector<T>& values(const Buffer& b) {
  return std::get<std::vector<T>>(b);
}

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  fail(ErrorCode::kShapeMismatch, std::string(op) + ": incompatible shapes " +
                                      to_string(a.shape()) + " and " +
                                      to_string(b.shape()));
}

void same_dtype(const char* op, const Tensor& a, const Tensor& b) {
  if (a.dtype() != b.dtype()) {
    fail(ErrorCode::kDTypeMismatch, std::string(op) + ": mixed dtypes " +
                                        to_string(a.dtype()) + " and " +
                                        to_string(b.dtype()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    fail(ErrorCode::kShapeMismatch,
         std::string(op) + ": expected rank " + std::to_string(rank) +
             ", got shape " + to_string(a.shape()));
  }
}

// Elementwise unary op evaluated in double precision and stored in the
// operand dtype. deriv(x) is dy/dx at x.
template <class Fwd, class Deriv>
Tensor unary(const char* name, const Tensor& a, Fwd fwd, Deriv deriv) {
  auto compute = [a, fwd]() -> Buffer {
    return dispatch(a.dtype(), [&]<class T>() -> Buffer {
      const auto& x = values<T>(a);
      std::vector<T> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = static_cast<T>(fwd(static_cast<double>(x[i])));
      }
      return y;
    });
  };
  auto back = [a, deriv](const Buffer& gout, std::span<Buffer* const> g) {
    dispatch(a.dtype(), [&]<class T>() {
      const auto& x = values<T>(a);
      const auto& go = values<T>(gout);
      auto& ga = values<T>(*g[0]);
      for (std::size_t i = 0; i < x.size(); ++i) {
        ga[i] += static_cast<T>(go[i] * deriv(static_cast<double>(x[i])));
      }
    });
  };
  return Trace::emit(name, {a}, a.shape(), compute(), compute, back);
}

enum class Binary { kAdd, kSub, kMul };

Tensor binary(const char* name, Binary kind, const Tensor& a,
              const Tensor& b) {
  same_dtype(name, a, b);
  if (a.shape() != b.shape()) shape_error(name, a, b);
  auto compute = [a, b, kind]() -> Buffer {
    return dispatch(a.dtype(), [&]<class T>() -> Buffer {
      const auto& x = values<T>(a);
      const auto& y = values<T>(b);
      std::vector<T> z(x.size());
      switch (kind) {
        case Binary::kAdd:
          for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
          break;
        case Binary::kSub:
          for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
          break;
        case Binary::kMul:
          for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
          break;
      }
      return z;
    });
  };
  auto back = [a, b, kind](const Buffer& gout, std::span<Buffer* const> g) {
    dispatch(a.dtype(), [&]<class T>() {
      const auto& go = values<T>(gout);
      const std::size_t n = go.size();
      if (g[0] != nullptr) {
        auto& ga = values<T>(*g[0]);
        if (kind == Binary::kMul) {
          const auto& y = values<T>(b);
          for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * y[i];
        } else {
          for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
        }
      }
      if (g[1] != nullptr) {
        auto& gb = values<T>(*g[1]);
        if (kind == Binary::kMul) {
          const auto& x = values<T>(a);
          for (std::size_t i = 0; i < n; ++i) gb[i] += go[i] * x[i];
        } else if (kind == Binary::kSub) {
          for (std::size_t i = 0; i < n; ++i) gb[i] -= go[i];
        } else {
          for (std::size_t i = 0; i < n; ++i) gb[i] += go[i];
        }
      }
    });
  };
  return Trace::emit(name, {a, b}, a.shape(), compute(), compute, back);
}

}  // namespace

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_value(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  same_dtype("matmul", a, b);
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) shape_error("matmul", a, b);
  auto compute = [a, b, m, k, n]() -> Buffer {
    return dispatch(a.dtype(), [&]<class T>() -> Buffer {
      const auto& x = values<T>(a);
      const auto& w = values<T>(b);
      std::vector<T> c(m * n, T(0));
      for (std::size_t i = 0; i < m; ++i) {
        T* row = c.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const T xv = x[i * k + p];
          const T* wrow = w.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) row[j] += xv * wrow[j];
        }
      }
      return c;
    });
  };
  auto back = [a, b, m, k, n](const Buffer& gout, std::span<Buffer* const> g) {
    dispatch(a.dtype(), [&]<class T>() {
      const auto& go = values<T>(gout);
      if (g[0] != nullptr) {
        const auto& w = values<T>(b);
        auto& ga = values<T>(*g[0]);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            T acc = 0;
            for (std::size_t j = 0; j < n; ++j) {
              acc += go[i * n + j] * w[p * n + j];
            }
            ga[i * k + p] += acc;
          }
        }
      }
      if (g[1] != nullptr) {
        const auto& x = values<T>(a);
        auto& gb = values<T>(*g[1]);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const T xv = x[i * k + p];
            for (std::size_t j = 0; j < n; ++j) {
              gb[p * n + j] += xv * go[i * n + j];
            }
          }
        }
      }
    });
  };
  return Trace::emit("matmul", {a, b}, {m, n}, compute(), compute, back);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary("add", Binary::kAdd, a, b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary("sub", Binary::kSub, a, b);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary("mul", Binary::kMul, a, b);
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  same_dtype("add_bias", a, bias);
  require_rank("add_bias", a, 2);
  require_rank("add_bias", bias, 1);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (bias.shape()[0] != n) shape_error("add_bias", a, bias);
  auto compute = [a, bias, m, n]() -> Buffer {
    return dispatch(a.dtype(), [&]<class T>() -> Buffer {
      const auto& x = values<T>(a);
      const auto& bv = values<T>(bias);
      std::vector<T> y(m * n);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] + bv[j];
      }
      return y;
    });
  };
  auto back = [a, m, n](const Buffer& gout, std::span<Buffer* const> g) {
    dispatch(a.dtype(), [&]<class T>() {
      const auto& go = values<T>(gout);
      if (g[0] != nullptr) {
        auto& ga = values<T>(*g[0]);
        for (std::size_t i = 0; i < m * n; ++i) ga[i] += go[i];
      }
      if (g[1] != nullptr) {
        auto& gb = values<T>(*g[1]);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += go[i * n + j];
        }
      }
    });
  };
  return Trace::emit("add_bias", {a, bias}, a.shape(), compute(), compute,
                     back);
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(
      "add_scalar", a, [value](double x) { return x + value; },
      [](double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
  return unary(
      "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Tensor softplus(const Tensor& a) {
  return unary("softplus", a, softplus_value, sigmoid_value);
}

Tensor exp(const Tensor& a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x) { return 1.0 / x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) {
    fail(ErrorCode::kInvalidArgument, "clamp: lo must not exceed hi");
  }
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

namespace {

// Row-wise max-subtracted softmax in T.
template <class T>
void softmax_rows(const std::vector<T>& z, std::size_t m, std::size_t n,
                  std::vector<T>& out) {
  out.resize(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = z.data() + i * n;
    T mx = *std::max_element(row, row + n);
    T total = 0;
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = std::exp(row[j] - mx);
      total += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= total;
  }
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  require_rank("softmax", logits, 2);
  const std::size_t m = logits.shape()[0], n = logits.shape()[1];
  auto compute = [logits, m, n]() -> Buffer {
    return dispatch(logits.dtype(), [&]<class T>() -> Buffer {
      std::vector<T> y;
      softmax_rows(values<T>(logits), m, n, y);
      return y;
    });
  };
  auto back = [logits, m, n](const Buffer& gout, std::span<Buffer* const> g) {
    dispatch(logits.dtype(), [&]<class T>() {
      std::vector<T> y;
      softmax_rows(values<T>(logits), m, n, y);
      const auto& go = values<T>(gout);
      auto& gz = values<T>(*g[0]);
      for (std::size_t i = 0; i < m; ++i) {
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += go[i * n + j] * y[i * n + j];
        for (std::size_t j = 0; j < n; ++j) {
          gz[i * n + j] += y[i * n + j] * (go[i * n + j] - dot);
        }
      }
    });
  };
  return Trace::emit("softmax", {logits}, logits.shape(), compute(), compute,
                     back);
}

Tensor cross_entropy_with_logits(const Tensor& logits,
                                 std::span<const int> labels) {
  require_rank("cross_entropy_with_logits", logits, 2);
  const std::size_t m = logits.shape()[0], n = logits.shape()[1];
  if (labels.size() != m) {
    fail(ErrorCode::kShapeMismatch,
         "cross_entropy_with_logits: " + std::to_string(labels.size()) +
             " labels for logits of shape " + to_string(logits.shape()));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n) {
      fail(ErrorCode::kInvalidArgument,
           "cross_entropy_with_logits: label " + std::to_string(y) +
               " out of range for " + std::to_string(n) + " classes");
    }
  }
  std::vector<int> ys(labels.begin(), labels.end());
  auto compute = [logits, ys, m, n]() -> Buffer {
    return dispatch(logits.dtype(), [&]<class T>() -> Buffer {
      const auto& z = values<T>(logits);
      std::vector<T> loss(m);
      for (std::size_t i = 0; i < m; ++i) {
        const T* row = z.data() + i * n;
        T mx = *std::max_element(row, row + n);
        T total = 0;
        for (std::size_t j = 0; j < n; ++j) total += std::exp(row[j] - mx);
        loss[i] = std::log(total) + mx - row[ys[i]];
      }
      return loss;
    });
  };
  auto back = [logits, ys, m, n](const Buffer& gout,
                                 std::span<Buffer* const> g) {
    dispatch(logits.dtype(), [&]<class T>() {
      std::vector<T> p;
      softmax_rows(values<T>(logits), m, n, p);
      const auto& go = values<T>(gout);
      auto& gz = values<T>(*g[0]);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          T target = static_cast<std::size_t>(ys[i]) == j ? T(1) : T(0);
          gz[i * n + j] += go[i] * (p[i * n + j] - target);
        }
      }
    });
  };
  return Trace::emit("cross_entropy_with_logits", {logits}, {m}, compute(),
                     compute, back);
}

namespace {

Tensor reduce(const char* name, const Tensor& a, bool average) {
  const std::size_t count = a.numel();
  auto compute = [a, average, count]() -> Buffer {
    return dispatch(a.dtype(), [&]<class T>() -> Buffer {
      T total = 0;
      for (T v : values<T>(a)) total += v;
      if (average) total /= static_cast<T>(count);
      return std::vector<T>{total};
    });
  };
  auto back = [a, average, count](const Buffer& gout,
                                  std::span<Buffer* const> g) {
    dispatch(a.dtype(), [&]<class T>() {
      T go = values<T>(gout)[0];
      if (average) go /= static_cast<T>(count);
      for (T& v : values<T>(*g[0])) v += go;
    });
  };
  return Trace::emit(name, {a}, {1}, compute(), compute, back);
}

}  // namespace

Tensor sum(const Tensor& a) { return reduce("sum", a, false); }
Tensor mean(const Tensor& a) { return reduce("mean", a, true); }

}  // namespace abnn::ops
