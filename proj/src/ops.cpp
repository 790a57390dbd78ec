#include "kws/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kws/errors.hpp"

namespace kws {

namespace {

using detail::TensorImpl;

bool want_grad(const Tensor& t) { return grad_enabled() && t.impl->requires_grad; }

std::string shape_str(const std::vector<int>& s) {
  std::string r = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) r += "x";
    r += std::to_string(s[i]);
  }
  return r + "]";
}

Tensor make_out(std::vector<int> shape, std::vector<double> values,
                std::vector<Tensor> parents,
                std::function<void(TensorImpl&)> backward) {
  bool rg = false;
  for (const auto& p : parents) rg = rg || want_grad(p);
  Tensor out = Tensor::from_values(std::move(shape), std::move(values), false);
  if (rg) {
    out.impl->requires_grad = true;
    out.impl->parents.reserve(parents.size());
    for (const auto& p : parents) out.impl->parents.push_back(p.impl);
    out.impl->backward_fn = std::move(backward);
  }
  return out;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

void check_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2, got " +
                                      shape_str(t.shape()));
}

// Elementwise op with value-dependent local derivative.
template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& t, Fwd fwd, Bwd dydx_from_in_out) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = fwd(t.at(i));
  return make_out(t.shape(), std::move(out), {t},
                  [dydx_from_in_out](TensorImpl& o) {
                    TensorImpl& p = *o.parents[0];
                    if (!p.requires_grad) return;
                    for (std::size_t i = 0; i < o.values.size(); ++i) {
                      p.grad[i] += o.grad[i] * dydx_from_in_out(p.values[i], o.values[i]);
                    }
                  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  return make_out(a.shape(), std::move(out), {a, b}, [](TensorImpl& o) {
    for (int k = 0; k < 2; ++k) {
      TensorImpl& p = *o.parents[k];
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < o.values.size(); ++i) p.grad[i] += o.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  return make_out(a.shape(), std::move(out), {a, b}, [](TensorImpl& o) {
    TensorImpl& pa = *o.parents[0];
    TensorImpl& pb = *o.parents[1];
    for (std::size_t i = 0; i < o.values.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += o.grad[i];
      if (pb.requires_grad) pb.grad[i] -= o.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  return make_out(a.shape(), std::move(out), {a, b}, [](TensorImpl& o) {
    TensorImpl& pa = *o.parents[0];
    TensorImpl& pb = *o.parents[1];
    for (std::size_t i = 0; i < o.values.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += o.grad[i] * pb.values[i];
      if (pb.requires_grad) pb.grad[i] += o.grad[i] * pa.values[i];
    }
  });
}

Tensor affine(const Tensor& t, double scale, double shift) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * t.at(i) + shift;
  return make_out(t.shape(), std::move(out), {t}, [scale](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.values.size(); ++i) p.grad[i] += scale * o.grad[i];
  });
}

Tensor sigmoid(const Tensor& t) {
  return unary_op(
      t, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& t) {
  return unary_op(
      t, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& t) {
  return unary_op(
      t, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor log(const Tensor& t) {
  return unary_op(
      t, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor pow_const(const Tensor& t, double exponent) {
  if (exponent == 0.0) {
    return make_out(t.shape(), std::vector<double>(t.size(), 1.0), {t},
                    [](TensorImpl&) {});
  }
  return unary_op(
      t, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); });
}

Tensor clamp(const Tensor& t, double lo, double hi) {
  if (lo > hi) throw ParamError("clamp: lo > hi");
  return unary_op(
      t, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      double ail = av[static_cast<std::size_t>(i) * k + l];
      if (ail == 0.0) continue;
      const double* brow = &bv[static_cast<std::size_t>(l) * n];
      double* orow = &out[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += ail * brow[j];
    }
  }
  return make_out({m, n}, std::move(out), {a, b}, [m, k, n](TensorImpl& o) {
    TensorImpl& pa = *o.parents[0];
    TensorImpl& pb = *o.parents[1];
    if (pa.requires_grad) {
      // dA = dOut · Bᵀ
      for (int i = 0; i < m; ++i) {
        for (int l = 0; l < k; ++l) {
          double s = 0.0;
          const double* grow = &o.grad[static_cast<std::size_t>(i) * n];
          const double* brow = &pb.values[static_cast<std::size_t>(l) * n];
          for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
          pa.grad[static_cast<std::size_t>(i) * k + l] += s;
        }
      }
    }
    if (pb.requires_grad) {
      // dB = Aᵀ · dOut
      for (int i = 0; i < m; ++i) {
        const double* arow = &pa.values[static_cast<std::size_t>(i) * k];
        const double* grow = &o.grad[static_cast<std::size_t>(i) * n];
        for (int l = 0; l < k; ++l) {
          double ail = arow[l];
          if (ail == 0.0) continue;
          double* brow = &pb.grad[static_cast<std::size_t>(l) * n];
          for (int j = 0; j < n; ++j) brow[j] += ail * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  check_rank2(a, "transpose");
  const int m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(j) * m + i] = a.at(i, j);
  return make_out({n, m}, std::move(out), {a}, [m, n](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        p.grad[static_cast<std::size_t>(i) * n + j] +=
            o.grad[static_cast<std::size_t>(j) * m + i];
  });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  check_rank2(x, "add_row_bias");
  if (bias.rank() != 1 || bias.shape()[0] != x.cols()) {
    throw ShapeError("add_row_bias: bias " + shape_str(bias.shape()) +
                     " does not match row width of " + shape_str(x.shape()));
  }
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] = x.at(i, j) + bias.at(j);
  return make_out({m, n}, std::move(out), {x, bias}, [m, n](TensorImpl& o) {
    TensorImpl& px = *o.parents[0];
    TensorImpl& pb = *o.parents[1];
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        double g = o.grad[static_cast<std::size_t>(i) * n + j];
        if (px.requires_grad) px.grad[static_cast<std::size_t>(i) * n + j] += g;
        if (pb.requires_grad) pb.grad[j] += g;
      }
    }
  });
}

Tensor softmax_rows(const Tensor& x, double temperature) {
  if (!(temperature > 0.0)) throw ParamError("softmax_rows: temperature must be positive");
  check_rank2(x, "softmax_rows");
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  for (int i = 0; i < m; ++i) {
    const double* row = &x.values()[static_cast<std::size_t>(i) * n];
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* orow = &out[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) {
      orow[j] = std::exp((row[j] - mx) / temperature);
      sum += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= sum;
  }
  return make_out({m, n}, std::move(out), {x}, [m, n, temperature](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < m; ++i) {
      const double* y = &o.values[static_cast<std::size_t>(i) * n];
      const double* g = &o.grad[static_cast<std::size_t>(i) * n];
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g[j] * y[j];
      double* px = &p.grad[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) px[j] += y[j] * (g[j] - dot) / temperature;
    }
  });
}

Tensor logsumexp_rows(const Tensor& x) {
  check_rank2(x, "logsumexp_rows");
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double* row = &x.values()[static_cast<std::size_t>(i) * n];
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
    out[i] = mx + std::log(sum);
  }
  return make_out({m}, std::move(out), {x}, [m, n](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < m; ++i) {
      const double* row = &p.values[static_cast<std::size_t>(i) * n];
      double* px = &p.grad[static_cast<std::size_t>(i) * n];
      double lse = o.values[i];
      double g = o.grad[i];
      for (int j = 0; j < n; ++j) px[j] += g * std::exp(row[j] - lse);
    }
  });
}

Tensor diag(const Tensor& x) {
  check_rank2(x, "diag");
  if (x.rows() != x.cols()) throw ShapeError("diag: matrix is not square");
  const int n = x.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = x.at(i, i);
  return make_out({n}, std::move(out), {x}, [n](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < n; ++i)
      p.grad[static_cast<std::size_t>(i) * n + i] += o.grad[i];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (!(eps > 0.0)) throw ParamError("layer_norm: eps must be positive");
  if (x.rank() < 1) throw ShapeError("layer_norm: rank-0 input");
  const int d = x.shape().back();
  if (gain.rank() != 1 || gain.shape()[0] != d || bias.rank() != 1 || bias.shape()[0] != d) {
    throw ShapeError("layer_norm: gain/bias width does not match last axis " +
                     std::to_string(d));
  }
  const std::size_t rows = x.size() / static_cast<std::size_t>(d);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &x.values()[r * d];
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= d;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j) {
      out[r * d + j] = (row[j] - mean) * inv * gain.at(j) + bias.at(j);
    }
  }
  return make_out(x.shape(), std::move(out), {x, gain, bias},
                  [d, rows, eps](TensorImpl& o) {
                    TensorImpl& px = *o.parents[0];
                    TensorImpl& pg = *o.parents[1];
                    TensorImpl& pb = *o.parents[2];
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* row = &px.values[r * d];
                      const double* g = &o.grad[r * d];
                      double mean = 0.0;
                      for (int j = 0; j < d; ++j) mean += row[j];
                      mean /= d;
                      double var = 0.0;
                      for (int j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
                      var /= d;
                      double inv = 1.0 / std::sqrt(var + eps);
                      // xhat_j and the two row means that appear in the LN jacobian
                      double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                      for (int j = 0; j < d; ++j) {
                        double xhat = (row[j] - mean) * inv;
                        double dxhat = g[j] * pg.values[j];
                        mean_dxhat += dxhat;
                        mean_dxhat_xhat += dxhat * xhat;
                      }
                      mean_dxhat /= d;
                      mean_dxhat_xhat /= d;
                      for (int j = 0; j < d; ++j) {
                        double xhat = (row[j] - mean) * inv;
                        if (px.requires_grad) {
                          double dxhat = g[j] * pg.values[j];
                          px.grad[r * d + j] +=
                              (dxhat - mean_dxhat - xhat * mean_dxhat_xhat) * inv;
                        }
                        if (pg.requires_grad) pg.grad[j] += g[j] * xhat;
                        if (pb.requires_grad) pb.grad[j] += g[j];
                      }
                    }
                  });
}

Tensor l2_normalize_rows(const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw ParamError("l2_normalize_rows: eps must be positive");
  check_rank2(x, "l2_normalize_rows");
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  for (int i = 0; i < m; ++i) {
    const double* row = &x.values()[static_cast<std::size_t>(i) * n];
    double norm = 0.0;
    for (int j = 0; j < n; ++j) norm += row[j] * row[j];
    norm = std::sqrt(norm);
    double den = std::max(norm, eps);
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = row[j] / den;
  }
  return make_out({m, n}, std::move(out), {x}, [m, n, eps](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < m; ++i) {
      const double* row = &p.values[static_cast<std::size_t>(i) * n];
      const double* y = &o.values[static_cast<std::size_t>(i) * n];
      const double* g = &o.grad[static_cast<std::size_t>(i) * n];
      double norm = 0.0;
      for (int j = 0; j < n; ++j) norm += row[j] * row[j];
      norm = std::sqrt(norm);
      double* px = &p.grad[static_cast<std::size_t>(i) * n];
      if (norm >= eps) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += g[j] * y[j];
        for (int j = 0; j < n; ++j) px[j] += (g[j] - dot * y[j]) / norm;
      } else {
        for (int j = 0; j < n; ++j) px[j] += g[j] / eps;
      }
    }
  });
}

Tensor max_over_cols(const Tensor& x) {
  check_rank2(x, "max_over_cols");
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(static_cast<std::size_t>(m));
  std::vector<int> argmax(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double* row = &x.values()[static_cast<std::size_t>(i) * n];
    int best = 0;
    for (int j = 1; j < n; ++j) {
      if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
    }
    argmax[i] = best;
    out[i] = row[best];
  }
  return make_out({m}, std::move(out), {x}, [n, argmax](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.values.size(); ++i) {
      p.grad[i * n + argmax[i]] += o.grad[i];
    }
  });
}

Tensor pad_cols(const Tensor& x, int width, double fill) {
  check_rank2(x, "pad_cols");
  const int m = x.rows(), n = x.cols();
  if (width < n) {
    throw ShapeError("pad_cols: target width " + std::to_string(width) +
                     " is narrower than input " + shape_str(x.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(m) * width, fill);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * width + j] = x.at(i, j);
  return make_out({m, width}, std::move(out), {x}, [m, n, width](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        p.grad[static_cast<std::size_t>(i) * n + j] +=
            o.grad[static_cast<std::size_t>(i) * width + j];
  });
}

Tensor mean_rows_by_span(const Tensor& x, const std::vector<std::pair<int, int>>& spans) {
  check_rank2(x, "mean_rows_by_span");
  const int t = x.rows(), d = x.cols();
  for (const auto& [b, e] : spans) {
    if (b < 0 || e > t || e <= b) {
      throw AlignmentError("mean_rows_by_span: span [" + std::to_string(b) + "," +
                           std::to_string(e) + ") out of range for " + std::to_string(t) +
                           " rows");
    }
  }
  const int s = static_cast<int>(spans.size());
  std::vector<double> out(static_cast<std::size_t>(s) * d, 0.0);
  for (int i = 0; i < s; ++i) {
    const auto& [b, e] = spans[i];
    for (int r = b; r < e; ++r)
      for (int j = 0; j < d; ++j)
        out[static_cast<std::size_t>(i) * d + j] += x.at(r, j);
    double inv = 1.0 / (e - b);
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i) * d + j] *= inv;
  }
  return make_out({s, d}, std::move(out), {x}, [d, spans](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const auto& [b, e] = spans[i];
      double inv = 1.0 / (e - b);
      for (int r = b; r < e; ++r)
        for (int j = 0; j < d; ++j)
          p.grad[static_cast<std::size_t>(r) * d + j] +=
              o.grad[i * d + j] * inv;
    }
  });
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (detail::numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(shape));
  }
  std::vector<double> out = x.values();
  return make_out(std::move(shape), std::move(out), {x}, [](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.values.size(); ++i) p.grad[i] += o.grad[i];
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  int cols = -1, total_rows = 0;
  for (const auto& p : parts) {
    check_rank2(p, "concat_rows");
    if (cols < 0) cols = p.cols();
    if (p.cols() != cols) {
      throw ShapeError("concat_rows: column mismatch, " + std::to_string(cols) + " vs " +
                       std::to_string(p.cols()));
    }
    total_rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total_rows) * cols);
  std::vector<int> part_rows;
  for (const auto& p : parts) {
    out.insert(out.end(), p.values().begin(), p.values().end());
    part_rows.push_back(p.rows());
  }
  return make_out({total_rows, cols}, std::move(out), parts,
                  [cols, part_rows](TensorImpl& o) {
                    std::size_t offset = 0;
                    for (std::size_t k = 0; k < o.parents.size(); ++k) {
                      TensorImpl& p = *o.parents[k];
                      std::size_t n = static_cast<std::size_t>(part_rows[k]) * cols;
                      if (p.requires_grad) {
                        for (std::size_t i = 0; i < n; ++i) p.grad[i] += o.grad[offset + i];
                      }
                      offset += n;
                    }
                  });
}

Tensor select_row(const Tensor& x, int row) {
  check_rank2(x, "select_row");
  if (row < 0 || row >= x.rows()) throw ShapeError("select_row: row out of range");
  const int n = x.cols();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[j] = x.at(row, j);
  return make_out({n}, std::move(out), {x}, [row, n](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (int j = 0; j < n; ++j)
      p.grad[static_cast<std::size_t>(row) * n + j] += o.grad[j];
  });
}

Tensor select_element(const Tensor& x, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= x.size()) {
    throw ShapeError("select_element: index out of range");
  }
  return make_out({}, {x.at(static_cast<std::size_t>(index))}, {x},
                  [index](TensorImpl& o) {
                    TensorImpl& p = *o.parents[0];
                    if (!p.requires_grad) return;
                    p.grad[static_cast<std::size_t>(index)] += o.grad[0];
                  });
}

Tensor sum_all(const Tensor& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t.at(i);
  return make_out({}, {s}, {t}, [](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < p.values.size(); ++i) p.grad[i] += o.grad[0];
  });
}

Tensor mean_all(const Tensor& t) {
  if (t.size() == 0) throw ContractError("mean_all: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t.at(i);
  double inv = 1.0 / static_cast<double>(t.size());
  return make_out({}, {s * inv}, {t}, [inv](TensorImpl& o) {
    TensorImpl& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < p.values.size(); ++i) p.grad[i] += o.grad[0] * inv;
  });
}

Tensor embedding(const Tensor& table, const std::vector<int>& ids) {
  check_rank2(table, "embedding");
  const int k = table.rows(), d = table.cols();
  for (int id : ids) {
    if (id < 0 || id >= k) {
      throw VocabError("embedding: id " + std::to_string(id) + " out of range [0," +
                       std::to_string(k) + ")");
    }
  }
  std::vector<double> out(ids.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < d; ++j)
      out[i * d + j] = table.at(ids[i], j);
  return make_out({static_cast<int>(ids.size()), d}, std::move(out), {table},
                  [d, ids](TensorImpl& o) {
                    TensorImpl& p = *o.parents[0];
                    if (!p.requires_grad) return;
                    for (std::size_t i = 0; i < ids.size(); ++i)
                      for (int j = 0; j < d; ++j)
                        p.grad[static_cast<std::size_t>(ids[i]) * d + j] +=
                            o.grad[i * d + j];
                  });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
  if (!(eps > 0.0)) throw ParamError("cosine_similarity: eps must be positive");
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size() || a.size() < 1) {
    throw ShapeError("cosine_similarity: expected equal-length vectors, got " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t d = a.size();
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += a.at(i) * b.at(i);
    na2 += a.at(i) * a.at(i);
    nb2 += b.at(i) * b.at(i);
  }
  double na = std::sqrt(na2), nb = std::sqrt(nb2);
  double da = std::max(na, eps), db = std::max(nb, eps);
  double y = dot / (da * db);
  return make_out({}, {y}, {a, b}, [eps](TensorImpl& o) {
    TensorImpl& pa = *o.parents[0];
    TensorImpl& pb = *o.parents[1];
    const std::size_t d = pa.values.size();
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dot += pa.values[i] * pb.values[i];
      na2 += pa.values[i] * pa.values[i];
      nb2 += pb.values[i] * pb.values[i];
    }
    double na = std::sqrt(na2), nb = std::sqrt(nb2);
    double da = std::max(na, eps), db = std::max(nb, eps);
    double g = o.grad[0];
    // y = dot/(da·db); the norm only contributes when it is above eps.
    for (std::size_t i = 0; i < d; ++i) {
      if (pa.requires_grad) {
        double term = pb.values[i] / (da * db);
        if (na >= eps) term -= dot * pa.values[i] / (na * da * da * db);
        pa.grad[i] += g * term;
      }
      if (pb.requires_grad) {
        double term = pa.values[i] / (da * db);
        if (nb >= eps) term -= dot * pb.values[i] / (nb * db * db * da);
        pb.grad[i] += g * term;
      }
    }
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  check_rank2(q, "attention");
  check_rank2(k, "attention");
  check_rank2(v, "attention");
  if (q.cols() != k.cols()) {
    throw ShapeError("attention: query/key feature mismatch, " + shape_str(q.shape()) +
                     " vs " + shape_str(k.shape()));
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("attention: key/value row mismatch, " + shape_str(k.shape()) +
                     " vs " + shape_str(v.shape()));
  }
  Tensor scores = affine(matmul(q, transpose(k)), 1.0 / std::sqrt(double(q.cols())), 0.0);
  Tensor weights = softmax_rows(scores, 1.0);
  return matmul(weights, v);
}

namespace {

Tensor vecmat(const Tensor& x, const Tensor& w) {
  if (x.rank() != 1 || w.rank() != 2 || x.shape()[0] != w.rows()) {
    throw ShapeError("gru_step: input width " + shape_str(x.shape()) +
                     " does not match weight " + shape_str(w.shape()));
  }
  return reshape(matmul(reshape(x, {1, x.shape()[0]}), w), {w.cols()});
}

}  // namespace

Tensor gru_step(const Tensor& x, const Tensor& h, const GruParams& p) {
  Tensor z = sigmoid(add(add(vecmat(x, p.wz), vecmat(h, p.uz)), p.bz));
  Tensor r = sigmoid(add(add(vecmat(x, p.wr), vecmat(h, p.ur)), p.br));
  Tensor cand = tanh(add(add(vecmat(x, p.wh), vecmat(mul(r, h), p.uh)), p.bh));
  return add(mul(affine(z, -1.0, 1.0), h), mul(z, cand));
}

Tensor gru_sequence(const GruParams& p, const Tensor& x) {
  check_rank2(x, "gru_sequence");
  const int d_h = p.uz.rows();
  Tensor h = Tensor::zeros({d_h});
  std::vector<Tensor> states;
  states.reserve(static_cast<std::size_t>(x.rows()));
  for (int t = 0; t < x.rows(); ++t) {
    h = gru_step(select_row(x, t), h, p);
    states.push_back(reshape(h, {1, d_h}));
  }
  return concat_rows(states);
}

void sgd_update(Tensor& w, double lr) {
  if (!w.has_grad()) return;  // parameter unused by the current objective
  auto& v = w.values();
  const auto& g = w.grad();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
}

}  // namespace kws
