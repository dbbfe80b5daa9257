#include "ecpe/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecpe/errors.hpp"

namespace ecpe::ad {

namespace {

[[noreturn]] void dimension_error(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                       shape_string(b));
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

Tape& tape_of(Var v) {
  if (v.tape == nullptr) throw ContractError("operation on an unbound variable");
  return *v.tape;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var elementwise(Elementwise kind, Var x, std::optional<Var> y) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  auto o = out.values();
  auto a = xv.values();
  const std::size_t n = xv.size();

  const bool binary = kind == Elementwise::add || kind == Elementwise::sub || kind == Elementwise::mul;
  if (binary) {
    if (!y) throw ContractError("elementwise: binary operation needs two operands");
    const Tensor& yv = y->value();
    if (yv.shape() != xv.shape()) dimension_error("elementwise", xv.shape(), yv.shape());
    auto b = yv.values();
    switch (kind) {
      case Elementwise::add:
        for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
        return tape.record("add", std::move(out), {x, *y}, [xi = x.id, yi = y->id](Tape& t, std::size_t self) {
          auto g = t.grad(self);
          for (std::size_t id : {xi, yi}) {
            auto d = t.grad_buffer(id);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
          }
        });
      case Elementwise::sub:
        for (std::size_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
        return tape.record("sub", std::move(out), {x, *y}, [xi = x.id, yi = y->id](Tape& t, std::size_t self) {
          auto g = t.grad(self);
          auto dx = t.grad_buffer(xi);
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i];
          auto dy = t.grad_buffer(yi);
          for (std::size_t i = 0; i < dy.size(); ++i) dy[i] -= g[i];
        });
      default:
        for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
        return tape.record("mul", std::move(out), {x, *y}, [xi = x.id, yi = y->id](Tape& t, std::size_t self) {
          auto g = t.grad(self);
          auto xs = t.value(xi).values();
          auto ys = t.value(yi).values();
          auto dx = t.grad_buffer(xi);
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * ys[i];
          auto dy = t.grad_buffer(yi);
          for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += g[i] * xs[i];
        });
    }
  }

  switch (kind) {
    case Elementwise::relu:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] > 0.0 ? a[i] : 0.0;
      return tape.record("relu", std::move(out), {x}, [xi = x.id](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto xs = t.value(xi).values();
        auto dx = t.grad_buffer(xi);
        for (std::size_t i = 0; i < dx.size(); ++i) {
          if (xs[i] > 0.0) dx[i] += g[i];
        }
      });
    case Elementwise::sigmoid:
      for (std::size_t i = 0; i < n; ++i) o[i] = sigmoid(a[i]);
      return tape.record("sigmoid", std::move(out), {x}, [xi = x.id](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto ys = t.value(self).values();
        auto dx = t.grad_buffer(xi);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * ys[i] * (1.0 - ys[i]);
      });
    default:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(a[i]);
      return tape.record("tanh", std::move(out), {x}, [xi = x.id](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto ys = t.value(self).values();
        auto dx = t.grad_buffer(xi);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * (1.0 - ys[i] * ys[i]);
      });
  }
}

Var scale(Var x, double factor) {
  Tensor out(x.shape());
  auto a = x.value().values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] * factor;
  return tape_of(x).record("scale", std::move(out), {x}, [xi = x.id, factor](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * factor;
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rank() != 1 || xv.rank() > 2 || xv.cols() != bv.size()) {
    dimension_error("add_bias", xv.shape(), bv.shape());
  }
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  Tensor out = xv;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  return tape_of(x).record("add_bias", std::move(out), {x, bias},
                           [xi = x.id, bi = bias.id, rows, cols](Tape& t, std::size_t self) {
                             auto g = t.grad(self);
                             auto dx = t.grad_buffer(xi);
                             for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i];
                             auto db = t.grad_buffer(bi);
                             if (db.empty()) return;
                             for (std::size_t r = 0; r < rows; ++r) {
                               for (std::size_t c = 0; c < cols; ++c) db[c] += g[r * cols + c];
                             }
                           });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    dimension_error("matmul", av.shape(), bv.shape());
  }
  const std::size_t m = av.rows();
  const std::size_t k = av.cols();
  const std::size_t n = bv.cols();
  Tensor out(av.rank() == 1 ? Shape{n} : Shape{m, n});
  auto o = out.values();
  auto as = av.values();
  auto bs = bv.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double s = as[i * k + p];
      if (s == 0.0) continue;
      const double* brow = &bs[p * n];
      double* orow = &o[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  return tape_of(a).record("matmul", std::move(out), {a, b},
                           [ai = a.id, bi = b.id, m, k, n](Tape& t, std::size_t self) {
                             auto g = t.grad(self);
                             auto as = t.value(ai).values();
                             auto bs = t.value(bi).values();
                             auto da = t.grad_buffer(ai);
                             if (!da.empty()) {
                               // dA = G·Bᵀ
                               for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t p = 0; p < k; ++p) {
                                   double acc = 0.0;
                                   for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bs[p * n + j];
                                   da[i * k + p] += acc;
                                 }
                               }
                             }
                             auto db = t.grad_buffer(bi);
                             if (!db.empty()) {
                               // dB = Aᵀ·G
                               for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t p = 0; p < k; ++p) {
                                   const double s = as[i * k + p];
                                   for (std::size_t j = 0; j < n; ++j) db[p * n + j] += s * g[i * n + j];
                                 }
                               }
                             }
                           });
}

Var transpose(Var x) {
  const Tensor& xv = x.value();
  require_rank("transpose", xv, 2);
  const std::size_t r = xv.dim(0);
  const std::size_t c = xv.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xv[i * c + j];
  }
  return tape_of(x).record("transpose", std::move(out), {x}, [xi = x.id, r, c](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += g[j * r + i];
    }
  });
}

Var linear(Var x, Var weight, std::optional<Var> bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  if (xv.rank() > 2 || wv.rank() != 2 || xv.cols() != wv.dim(1)) {
    dimension_error("linear", xv.shape(), wv.shape());
  }
  const std::size_t n = xv.rows();
  const std::size_t in = wv.dim(1);
  const std::size_t out_dim = wv.dim(0);
  if (bias && (bias->value().rank() != 1 || bias->value().size() != out_dim)) {
    dimension_error("linear", wv.shape(), bias->value().shape());
  }
  Tensor out(xv.rank() == 1 ? Shape{out_dim} : Shape{n, out_dim});
  auto o = out.values();
  auto xs = xv.values();
  auto ws = wv.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xrow = &xs[i * in];
    for (std::size_t r = 0; r < out_dim; ++r) {
      const double* wrow = &ws[r * in];
      double acc = bias ? bias->value()[r] : 0.0;
      for (std::size_t p = 0; p < in; ++p) acc += xrow[p] * wrow[p];
      o[i * out_dim + r] = acc;
    }
  }
  std::vector<Var> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  const std::size_t bias_id = bias ? bias->id : 0;
  const bool has_bias = bias.has_value();
  return tape_of(x).record(
      "linear", std::move(out), std::move(inputs),
      [xi = x.id, wi = weight.id, bias_id, has_bias, n, in, out_dim](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto xs = t.value(xi).values();
        auto ws = t.value(wi).values();
        auto dx = t.grad_buffer(xi);
        if (!dx.empty()) {
          for (std::size_t i = 0; i < n; ++i) {
            double* dxrow = &dx[i * in];
            for (std::size_t r = 0; r < out_dim; ++r) {
              const double gv = g[i * out_dim + r];
              if (gv == 0.0) continue;
              const double* wrow = &ws[r * in];
              for (std::size_t p = 0; p < in; ++p) dxrow[p] += gv * wrow[p];
            }
          }
        }
        auto dw = t.grad_buffer(wi);
        if (!dw.empty()) {
          for (std::size_t i = 0; i < n; ++i) {
            const double* xrow = &xs[i * in];
            for (std::size_t r = 0; r < out_dim; ++r) {
              const double gv = g[i * out_dim + r];
              if (gv == 0.0) continue;
              double* dwrow = &dw[r * in];
              for (std::size_t p = 0; p < in; ++p) dwrow[p] += gv * xrow[p];
            }
          }
        }
        if (has_bias) {
          auto db = t.grad_buffer(bias_id);
          if (!db.empty()) {
            for (std::size_t i = 0; i < n; ++i) {
              for (std::size_t r = 0; r < out_dim; ++r) db[r] += g[i * out_dim + r];
            }
          }
        }
      });
}

Var conv1d_same(Var seq, Var kernel, Var bias) {
  const Tensor& sv = seq.value();
  const Tensor& kv = kernel.value();
  const Tensor& bv = bias.value();
  if (sv.rank() != 2) {
    throw DegenerateInputError("conv1d_same: expected a [L×d] sequence, got " + shape_string(sv.shape()));
  }
  if (kv.rank() != 3 || kv.dim(1) != sv.dim(1)) dimension_error("conv1d_same", sv.shape(), kv.shape());
  if (bv.rank() != 1 || bv.size() != kv.dim(2)) dimension_error("conv1d_same", kv.shape(), bv.shape());

  const std::size_t len = sv.dim(0);
  const std::size_t d_in = sv.dim(1);
  const std::size_t width = kv.dim(0);
  const std::size_t d_out = kv.dim(2);
  const std::ptrdiff_t left = static_cast<std::ptrdiff_t>((width - 1) / 2);

  Tensor out({len, d_out});
  auto o = out.values();
  auto xs = sv.values();
  auto ks = kv.values();
  for (std::size_t i = 0; i < len; ++i) {
    double* orow = &o[i * d_out];
    for (std::size_t f = 0; f < d_out; ++f) orow[f] = bv[f];
    for (std::size_t j = 0; j < width; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + j) - left;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      const double* xrow = &xs[static_cast<std::size_t>(src) * d_in];
      for (std::size_t e = 0; e < d_in; ++e) {
        const double xval = xrow[e];
        if (xval == 0.0) continue;
        const double* krow = &ks[(j * d_in + e) * d_out];
        for (std::size_t f = 0; f < d_out; ++f) orow[f] += xval * krow[f];
      }
    }
  }
  return tape_of(seq).record(
      "conv1d_same", std::move(out), {seq, kernel, bias},
      [si = seq.id, ki = kernel.id, bi = bias.id, len, d_in, width, d_out, left](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto xs = t.value(si).values();
        auto ks = t.value(ki).values();
        auto dx = t.grad_buffer(si);
        auto dk = t.grad_buffer(ki);
        for (std::size_t i = 0; i < len; ++i) {
          const double* grow = &g[i * d_out];
          for (std::size_t j = 0; j < width; ++j) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + j) - left;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
            const std::size_t s = static_cast<std::size_t>(src);
            for (std::size_t e = 0; e < d_in; ++e) {
              const std::size_t kofs = (j * d_in + e) * d_out;
              if (!dx.empty()) {
                double acc = 0.0;
                for (std::size_t f = 0; f < d_out; ++f) acc += ks[kofs + f] * grow[f];
                dx[s * d_in + e] += acc;
              }
              if (!dk.empty()) {
                const double xval = xs[s * d_in + e];
                if (xval == 0.0) continue;
                for (std::size_t f = 0; f < d_out; ++f) dk[kofs + f] += xval * grow[f];
              }
            }
          }
        }
        auto db = t.grad_buffer(bi);
        if (!db.empty()) {
          for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t f = 0; f < d_out; ++f) db[f] += g[i * d_out + f];
          }
        }
      });
}

Var max_over_time(Var seq) {
  const Tensor& sv = seq.value();
  if (sv.rank() != 2) {
    throw DegenerateInputError("max_over_time: expected a [L×d] sequence, got " + shape_string(sv.shape()));
  }
  const std::size_t len = sv.dim(0);
  const std::size_t d = sv.dim(1);
  Tensor out({d});
  std::vector<std::size_t> argmax(d, 0);
  for (std::size_t f = 0; f < d; ++f) {
    double best = sv[f];
    for (std::size_t i = 1; i < len; ++i) {
      if (sv[i * d + f] > best) {
        best = sv[i * d + f];
        argmax[f] = i;
      }
    }
    out[f] = best;
  }
  return tape_of(seq).record("max_over_time", std::move(out), {seq},
                             [si = seq.id, d, argmax = std::move(argmax)](Tape& t, std::size_t self) {
                               auto g = t.grad(self);
                               auto dx = t.grad_buffer(si);
                               for (std::size_t f = 0; f < d; ++f) dx[argmax[f] * d + f] += g[f];
                             });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DegenerateInputError("concat: no parts");
  std::vector<std::size_t> offsets;
  std::vector<double> values;
  std::vector<Var> inputs(parts.begin(), parts.end());
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    if (pv.rank() != 1) throw DimensionError("concat: parts must be vectors, got " + shape_string(pv.shape()));
    offsets.push_back(values.size());
    values.insert(values.end(), pv.values().begin(), pv.values().end());
  }
  const std::size_t total = values.size();
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return tape_of(parts.front())
      .record("concat", Tensor({total}, std::move(values)), std::move(inputs),
              [ids = std::move(ids), offsets = std::move(offsets)](Tape& t, std::size_t self) {
                auto g = t.grad(self);
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  auto d = t.grad_buffer(ids[k]);
                  for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[offsets[k] + i];
                }
              });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DegenerateInputError("stack_rows: no rows");
  const std::size_t width = rows.front().size();
  std::vector<double> values;
  values.reserve(width * rows.size());
  std::vector<std::size_t> ids;
  for (const Var& r : rows) {
    const Tensor& rv = r.value();
    if (rv.rank() != 1 || rv.size() != width) dimension_error("stack_rows", rows.front().shape(), rv.shape());
    values.insert(values.end(), rv.values().begin(), rv.values().end());
    ids.push_back(r.id);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return tape_of(rows.front())
      .record("stack_rows", Tensor({rows.size(), width}, std::move(values)), std::move(inputs),
              [ids = std::move(ids), width](Tape& t, std::size_t self) {
                auto g = t.grad(self);
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  auto d = t.grad_buffer(ids[k]);
                  for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[k * width + i];
                }
              });
}

Var row(Var x, std::size_t i) {
  const Tensor& xv = x.value();
  require_rank("row", xv, 2);
  if (i >= xv.dim(0)) throw IndexError("row: index " + std::to_string(i) + " out of " + shape_string(xv.shape()));
  const std::size_t width = xv.dim(1);
  std::vector<double> values(xv.values().begin() + i * width, xv.values().begin() + (i + 1) * width);
  return tape_of(x).record("row", Tensor({width}, std::move(values)), {x},
                           [xi = x.id, offset = i * width](Tape& t, std::size_t self) {
                             auto g = t.grad(self);
                             auto d = t.grad_buffer(xi);
                             for (std::size_t k = 0; k < g.size(); ++k) d[offset + k] += g[k];
                           });
}

Var slice(Var x, std::size_t offset, std::size_t length) {
  const Tensor& xv = x.value();
  require_rank("slice", xv, 1);
  if (length == 0 || offset + length > xv.size()) {
    throw IndexError("slice: range [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                     ") out of " + shape_string(xv.shape()));
  }
  std::vector<double> values(xv.values().begin() + offset, xv.values().begin() + offset + length);
  return tape_of(x).record("slice", Tensor({length}, std::move(values)), {x},
                           [xi = x.id, offset](Tape& t, std::size_t self) {
                             auto g = t.grad(self);
                             auto d = t.grad_buffer(xi);
                             for (std::size_t k = 0; k < g.size(); ++k) d[offset + k] += g[k];
                           });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() > 2) throw DimensionError("softmax_rows: expected vector or matrix, got " + shape_string(xv.shape()));
  const std::size_t rows = xv.rows();
  const std::size_t k = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = &xv.values()[r * k];
    double* o = &out.values()[r * k];
    const double mx = *std::max_element(in, in + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < k; ++j) o[j] /= total;
  }
  return tape_of(x).record("softmax_rows", std::move(out), {x}, [xi = x.id, rows, k](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto y = t.value(self).values();
    auto dx = t.grad_buffer(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += g[r * k + j] * y[r * k + j];
      for (std::size_t j = 0; j < k; ++j) dx[r * k + j] += y[r * k + j] * (g[r * k + j] - dot);
    }
  });
}

Var dropout(Var x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ParameterError("dropout: probability must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  const Tensor& xv = x.value();
  std::vector<double> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    out[i] = xv[i] * mask[i];
  }
  return tape_of(x).record("dropout", std::move(out), {x}, [xi = x.id, mask = std::move(mask)](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i] * mask[i];
  });
}

Var gather_rows(Var table, std::span<const std::int32_t> ids) {
  const Tensor& tv = table.value();
  require_rank("gather_rows", tv, 2);
  if (ids.empty()) throw DegenerateInputError("gather_rows: no ids");
  const std::size_t width = tv.dim(1);
  Tensor out({ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.dim(0)) {
      throw IndexError("gather_rows: token id " + std::to_string(ids[r]) + " outside vocabulary of " +
                       std::to_string(tv.dim(0)));
    }
    std::copy_n(&tv.values()[static_cast<std::size_t>(ids[r]) * width], width, &out.values()[r * width]);
  }
  return tape_of(table).record("gather_rows", std::move(out), {table},
                               [ti = table.id, rows = std::vector<std::int32_t>(ids.begin(), ids.end()), width](
                                   Tape& t, std::size_t self) {
                                 auto g = t.grad(self);
                                 auto d = t.grad_buffer(ti);
                                 for (std::size_t r = 0; r < rows.size(); ++r) {
                                   double* drow = &d[static_cast<std::size_t>(rows[r]) * width];
                                   for (std::size_t c = 0; c < width; ++c) drow[c] += g[r * width + c];
                                 }
                               });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape_of(x).record("sum", Tensor::scalar(total), {x}, [xi = x.id](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    auto dx = t.grad_buffer(xi);
    for (double& d : dx) d += g;
  });
}

Var sum_squares(Var x, std::size_t skip_rows) {
  const Tensor& xv = x.value();
  const std::size_t start = xv.rank() == 2 ? std::min(skip_rows, xv.dim(0)) * xv.dim(1) : 0;
  double total = 0.0;
  for (std::size_t i = start; i < xv.size(); ++i) total += xv[i] * xv[i];
  return tape_of(x).record("sum_squares", Tensor::scalar(total), {x}, [xi = x.id, start](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    auto xs = t.value(xi).values();
    auto dx = t.grad_buffer(xi);
    for (std::size_t i = start; i < dx.size(); ++i) dx[i] += 2.0 * g * xs[i];
  });
}

LstmState lstm_step(Var x, const LstmState& prev, const LstmCell& cell) {
  const Tensor& wih = cell.w_ih.value();
  const Tensor& whh = cell.w_hh.value();
  const std::size_t hidden = prev.h.size();
  if (wih.rank() != 2 || whh.rank() != 2 || wih.dim(0) != 4 * hidden || whh.dim(0) != 4 * hidden ||
      whh.dim(1) != hidden || cell.bias.size() != 4 * hidden || prev.c.size() != hidden) {
    throw DimensionError("lstm_step: weight block " + shape_string(wih.shape()) + "/" + shape_string(whh.shape()) +
                         " does not fit hidden size " + std::to_string(hidden));
  }
  if (x.value().rank() != 1 || x.size() != wih.dim(1)) dimension_error("lstm_step", x.shape(), wih.shape());

  Var gates = add(linear(x, cell.w_ih, cell.bias), linear(prev.h, cell.w_hh));
  Var in_gate = sigmoid(slice(gates, 0, hidden));
  Var forget_gate = sigmoid(slice(gates, hidden, hidden));
  Var candidate = tanh(slice(gates, 2 * hidden, hidden));
  Var out_gate = sigmoid(slice(gates, 3 * hidden, hidden));
  Var c = add(mul(forget_gate, prev.c), mul(in_gate, candidate));
  Var h = mul(out_gate, tanh(c));
  return {h, c};
}

}  // namespace ecpe::ad
