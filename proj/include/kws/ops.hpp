#pragma once

#include <utility>
#include <vector>

#include "kws/tensor.hpp"

namespace kws {

// Elementwise and scalar ops. All ops record autograd nodes when any input
// requires grad and gradient recording is enabled.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& t, double scale, double shift);  // scale*t + shift

Tensor sigmoid(const Tensor& t);
Tensor tanh(const Tensor& t);
Tensor relu(const Tensor& t);
Tensor log(const Tensor& t);
Tensor pow_const(const Tensor& t, double exponent);
Tensor clamp(const Tensor& t, double lo, double hi);  // zero gradient outside [lo,hi]

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);  // [m×k]·[k×n]
Tensor transpose(const Tensor& a);
Tensor add_row_bias(const Tensor& x, const Tensor& bias);  // [m×n] + {n} per row

// Row-structured ops.
Tensor softmax_rows(const Tensor& x, double temperature);
Tensor logsumexp_rows(const Tensor& x);  // [m×n] -> {m}
Tensor diag(const Tensor& x);            // [n×n] -> {n}
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
Tensor l2_normalize_rows(const Tensor& x, double eps);
Tensor max_over_cols(const Tensor& x);  // [m×n] -> {m}; ties break to the lowest column
Tensor pad_cols(const Tensor& x, int width, double fill);
Tensor mean_rows_by_span(const Tensor& x, const std::vector<std::pair<int, int>>& spans);

// Shape ops.
Tensor reshape(const Tensor& x, std::vector<int> shape);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor select_row(const Tensor& x, int row);        // [m×n] -> {n}
Tensor select_element(const Tensor& x, int index);  // flat index -> scalar

// Reductions.
Tensor sum_all(const Tensor& t);
Tensor mean_all(const Tensor& t);

// Lookup.
Tensor embedding(const Tensor& table, const std::vector<int>& ids);  // [K×d], ids -> [T×d]

// Similarity: a·b / (max(‖a‖,eps)·max(‖b‖,eps)), rank-1 inputs, scalar out.
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps);

// Scaled dot-product attention: softmax_rows(q·kᵀ/√d)·v.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v);

/// One GRU cell: z and r gates, candidate h̃, h' = (1-z)⊙h + z⊙h̃.
/// z==0 carries the old state through; z==1 overwrites with the candidate.
struct GruParams {
  Tensor wz, uz, bz;  // [d_in×d_h], [d_h×d_h], {d_h}
  Tensor wr, ur, br;
  Tensor wh, uh, bh;
};
Tensor gru_step(const Tensor& x, const Tensor& h, const GruParams& p);

/// Runs the cell over the rows of x from a zero initial state and stacks
/// every hidden state; output has one row per input row.
Tensor gru_sequence(const GruParams& p, const Tensor& x);

// In-place leaf update: w <- w - lr*grad. No graph participation.
void sgd_update(Tensor& w, double lr);

}  // namespace kws
