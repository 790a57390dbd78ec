#include <doctest.h>

#include <cmath>
#include <vector>

#include "kws/errors.hpp"
#include "kws/grad_check.hpp"
#include "kws/ops.hpp"
#include "kws/rng.hpp"
#include "kws/tensor.hpp"

using namespace kws;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, bool requires_grad = true) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return Tensor::from_values(std::move(shape), std::move(v), requires_grad);
}

// Values spread out so finite differences never straddle a relu/max kink.
Tensor random_spread_tensor(std::vector<int> shape, Rng& rng, bool requires_grad = true) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mag = rng.uniform(0.2, 1.5);
    v[i] = (rng.uniform() < 0.5 ? -mag : mag) + 0.01 * static_cast<double>(i);
  }
  return Tensor::from_values(std::move(shape), std::move(v), requires_grad);
}

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-4;

}  // namespace

TEST_SUITE("numerics") {

// ---------------------------------------------------------------- matmul

TEST_CASE("matmul identity and hand case") {
  Tensor eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
  Tensor b = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  Tensor r = matmul(eye, b);
  for (int i = 0; i < 4; ++i) CHECK(r.at(i) == b.at(i));

  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor ones = Tensor::from_values({2, 1}, {1, 1});
  Tensor p = matmul(a, ones);
  CHECK(p.at(0) == doctest::Approx(3.0));
  CHECK(p.at(1) == doctest::Approx(7.0));

  Tensor z = Tensor::zeros({2, 2});
  Tensor pz = matmul(z, b);
  for (int i = 0; i < 4; ++i) CHECK(pz.at(i) == 0.0);

  CHECK_THROWS_AS(matmul(a, Tensor::zeros({3, 2})), ShapeError);
}

// ------------------------------------------------------- cosine similarity

TEST_CASE("cosine similarity closed forms") {
  Tensor a = Tensor::from_values({2}, {3, 4});
  CHECK(cosine_similarity(a, a, 1e-8).scalar_value() == doctest::Approx(1.0));

  Tensor e1 = Tensor::from_values({2}, {1, 0});
  Tensor e2 = Tensor::from_values({2}, {0, 1});
  CHECK(cosine_similarity(e1, e2, 1e-8).scalar_value() == doctest::Approx(0.0));

  Tensor diag_v = Tensor::from_values({2}, {1, 1});
  CHECK(cosine_similarity(e1, diag_v, 1e-8).scalar_value() ==
        doctest::Approx(0.7071067811865475).epsilon(1e-6));

  // eps guard: zero vector yields 0 similarity, not NaN
  Tensor zero = Tensor::zeros({2});
  CHECK(cosine_similarity(zero, e1, 1e-8).scalar_value() == 0.0);
}

TEST_CASE("cosine similarity symmetry and scale invariance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tensor a = random_tensor({5}, rng, false);
    Tensor b = random_tensor({5}, rng, false);
    double ab = cosine_similarity(a, b, 1e-8).scalar_value();
    double ba = cosine_similarity(b, a, 1e-8).scalar_value();
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));

    double c = rng.uniform(0.1, 10.0);
    std::vector<double> scaled = a.values();
    for (auto& x : scaled) x *= c;
    Tensor ca = Tensor::from_values({5}, scaled);
    double cab = cosine_similarity(ca, b, 1e-8).scalar_value();
    CHECK(cab == doctest::Approx(ab).epsilon(1e-6));
  }
}

// ----------------------------------------------------------- softmax rows

TEST_CASE("softmax closed forms") {
  Tensor equal = Tensor::from_values({1, 4}, {2.5, 2.5, 2.5, 2.5});
  Tensor u = softmax_rows(equal, 0.37);
  for (int j = 0; j < 4; ++j) CHECK(u.at(0, j) == doctest::Approx(0.25));

  Tensor x = Tensor::from_values({1, 2}, {0.0, std::log(3.0)});
  Tensor s = softmax_rows(x, 1.0);
  CHECK(s.at(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(s.at(0, 1) == doctest::Approx(0.75).epsilon(1e-9));

  Tensor hot = softmax_rows(Tensor::from_values({1, 2}, {0.0, 100.0}), 1.0);
  CHECK(hot.at(0, 0) < 1e-15);
  CHECK(hot.at(0, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(softmax_rows(x, 0.0), ParamError);
  CHECK_THROWS_AS(softmax_rows(x, -1.0), ParamError);
}

TEST_CASE("softmax rows sum to one under large magnitudes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> v(8);
    for (auto& x : v) x = rng.uniform(-1e4, 1e4);
    Tensor s = softmax_rows(Tensor::from_values({2, 4}, v), 0.5);
    for (int i = 0; i < 2; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) {
        sum += s.at(i, j);
        CHECK(s.at(i, j) >= 0.0);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

// ------------------------------------------------------------- layer norm

TEST_CASE("layer norm closed forms") {
  Tensor gain = Tensor::from_values({2}, {1, 1});
  Tensor bias = Tensor::zeros({2});

  Tensor constant = Tensor::from_values({1, 2}, {4.0, 4.0});
  Tensor zc = layer_norm(constant, gain, bias, 1e-5);
  CHECK(zc.at(0, 0) == doctest::Approx(0.0));
  CHECK(zc.at(0, 1) == doctest::Approx(0.0));

  Tensor row = Tensor::from_values({1, 2}, {1.0, 3.0});
  Tensor z = layer_norm(row, gain, bias, 1e-5);
  CHECK(z.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(z.at(0, 1) == doctest::Approx(1.0).epsilon(1e-4));

  Tensor beta = Tensor::from_values({2}, {0.7, -0.3});
  Tensor collapsed = layer_norm(row, Tensor::zeros({2}), beta, 1e-5);
  CHECK(collapsed.at(0, 0) == doctest::Approx(0.7));
  CHECK(collapsed.at(0, 1) == doctest::Approx(-0.3));

  CHECK_THROWS_AS(layer_norm(row, Tensor::zeros({3}), bias, 1e-5), ShapeError);
}

// --------------------------------------------------------------- gru step

namespace {

GruParams random_gru(int d_in, int d_h, Rng& rng) {
  auto mk = [&](int r, int c) {
    std::vector<double> v(static_cast<std::size_t>(r) * c);
    for (auto& x : v) x = rng.uniform(-0.5, 0.5);
    return Tensor::from_values({r, c}, std::move(v), true);
  };
  auto mkb = [&](int d) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.uniform(-0.5, 0.5);
    return Tensor::from_values({d}, std::move(v), true);
  };
  return GruParams{mk(d_in, d_h), mk(d_h, d_h), mkb(d_h),
                   mk(d_in, d_h), mk(d_h, d_h), mkb(d_h),
                   mk(d_in, d_h), mk(d_h, d_h), mkb(d_h)};
}

// Scalar-by-scalar reference evaluation of the gate equations, written
// independently of the tensor ops.
std::vector<double> gru_reference(const std::vector<double>& x, const std::vector<double>& h,
                                  const GruParams& p) {
  int d_in = static_cast<int>(x.size());
  int d_h = static_cast<int>(h.size());
  auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b,
                  const std::vector<double>& hin) {
    std::vector<double> pre(static_cast<std::size_t>(d_h), 0.0);
    for (int j = 0; j < d_h; ++j) {
      for (int i = 0; i < d_in; ++i) pre[j] += x[i] * w.at(i, j);
      for (int i = 0; i < d_h; ++i) pre[j] += hin[i] * u.at(i, j);
      pre[j] += b.at(j);
    }
    return pre;
  };
  auto z_pre = gate(p.wz, p.uz, p.bz, h);
  auto r_pre = gate(p.wr, p.ur, p.br, h);
  std::vector<double> z(d_h), r(d_h);
  for (int j = 0; j < d_h; ++j) {
    z[j] = 1.0 / (1.0 + std::exp(-z_pre[j]));
    r[j] = 1.0 / (1.0 + std::exp(-r_pre[j]));
  }
  std::vector<double> rh(d_h);
  for (int j = 0; j < d_h; ++j) rh[j] = r[j] * h[j];
  auto c_pre = gate(p.wh, p.uh, p.bh, rh);
  std::vector<double> out(d_h);
  for (int j = 0; j < d_h; ++j) {
    double cand = std::tanh(c_pre[j]);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * cand;
  }
  return out;
}

}  // namespace

TEST_CASE("gru gates carry and overwrite") {
  Rng rng(11);
  GruParams p = random_gru(3, 4, rng);
  Tensor x = random_tensor({3}, rng, false);
  Tensor h = random_tensor({4}, rng, false);

  // z -> 0: output equals the previous hidden state
  for (auto& v : p.bz.values()) v = -50.0;
  Tensor carry = gru_step(x, h, p);
  for (int j = 0; j < 4; ++j) CHECK(carry.at(j) == doctest::Approx(h.at(j)).epsilon(1e-12));

  // z -> 1: output equals the candidate
  for (auto& v : p.bz.values()) v = 50.0;
  Tensor overwrite = gru_step(x, h, p);
  auto ref = gru_reference(x.values(), h.values(), p);
  for (int j = 0; j < 4; ++j) CHECK(overwrite.at(j) == doctest::Approx(ref[j]).epsilon(1e-12));
}

TEST_CASE("gru matches the scalar reference") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    GruParams p = random_gru(3, 5, rng);
    Tensor x = random_tensor({3}, rng, false);
    Tensor h = random_tensor({5}, rng, false);
    Tensor out = gru_step(x, h, p);
    auto ref = gru_reference(x.values(), h.values(), p);
    for (int j = 0; j < 5; ++j) {
      CHECK(out.at(j) == doctest::Approx(ref[j]).epsilon(1e-12));
      // convex mix of previous state and a tanh candidate
      CHECK(std::abs(out.at(j)) <= std::max(std::abs(h.at(j)), 1.0) + 1e-12);
    }
  }
}

// -------------------------------------------------------------- attention

TEST_CASE("attention degeneracies and hand case") {
  Rng rng(3);
  Tensor q = random_tensor({3, 4}, rng, false);
  Tensor k1 = random_tensor({1, 4}, rng, false);
  Tensor v1 = Tensor::from_values({1, 2}, {0.5, -1.5});
  Tensor single = attention(q, k1, v1);
  for (int i = 0; i < 3; ++i) {
    CHECK(single.at(i, 0) == doctest::Approx(0.5));
    CHECK(single.at(i, 1) == doctest::Approx(-1.5));
  }

  // identical keys: output is the uniform average of the value rows
  Tensor krow = random_tensor({1, 4}, rng, false);
  Tensor kk = concat_rows({krow, krow, krow});
  Tensor vv = Tensor::from_values({3, 1}, {1.0, 2.0, 6.0});
  Tensor avg = attention(q, kk, vv);
  for (int i = 0; i < 3; ++i) CHECK(avg.at(i, 0) == doctest::Approx(3.0).epsilon(1e-9));

  // 2x2 hand case evaluated directly with std::exp in the test
  Tensor q2 = Tensor::from_values({2, 2}, {1.0, 0.0, 0.0, 2.0});
  Tensor k2 = Tensor::from_values({2, 2}, {1.0, 1.0, -1.0, 0.5});
  Tensor v2 = Tensor::from_values({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor got = attention(q2, k2, v2);
  double scale = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 2; ++i) {
    double s0 = scale * (q2.at(i, 0) * k2.at(0, 0) + q2.at(i, 1) * k2.at(0, 1));
    double s1 = scale * (q2.at(i, 0) * k2.at(1, 0) + q2.at(i, 1) * k2.at(1, 1));
    double m = std::max(s0, s1);
    double w0 = std::exp(s0 - m), w1 = std::exp(s1 - m);
    double z = w0 + w1;
    w0 /= z;
    w1 /= z;
    for (int j = 0; j < 2; ++j) {
      double expect = w0 * v2.at(0, j) + w1 * v2.at(1, j);
      CHECK(got.at(i, j) == doctest::Approx(expect).epsilon(1e-6));
    }
  }

  CHECK_THROWS_AS(attention(q2, Tensor::zeros({2, 3}), v2), ShapeError);
  CHECK_THROWS_AS(attention(q2, k2, Tensor::zeros({3, 2})), ShapeError);
}

// ---------------------------------------------------------- max over cols

TEST_CASE("max over cols ties break to the lowest index") {
  Tensor x = Tensor::from_values({2, 3}, {1.0, 5.0, 5.0, -2.0, -2.0, -7.0}, true);
  Tensor m = max_over_cols(x);
  CHECK(m.at(0) == 5.0);
  CHECK(m.at(1) == -2.0);
  Tensor loss = sum_all(m);
  loss.backward();
  // gradient routed only to the first argmax per row
  std::vector<double> expect = {0, 1, 0, 1, 0, 0};
  for (int i = 0; i < 6; ++i) CHECK(x.grad()[i] == expect[i]);
}

// ------------------------------------------------- misc structural ops

TEST_CASE("pad concat select reshape round out") {
  Tensor x = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor p = pad_cols(x, 4, 0.0);
  CHECK(p.cols() == 4);
  CHECK(p.at(0, 1) == 2.0);
  CHECK(p.at(0, 2) == 0.0);
  CHECK_THROWS_AS(pad_cols(x, 1, 0.0), ShapeError);

  Tensor c = concat_rows({x, p.defined() ? x : x});
  CHECK(c.rows() == 4);
  CHECK(c.at(3, 1) == 4.0);

  Tensor r = select_row(x, 1);
  CHECK(r.shape()[0] == 2);
  CHECK(r.at(1) == 4.0);

  Tensor rs = reshape(x, {4});
  CHECK(rs.at(3) == 4.0);
  CHECK_THROWS_AS(reshape(x, {3}), ShapeError);

  Tensor e = select_element(x, 2);
  CHECK(e.scalar_value() == 3.0);
}

TEST_CASE("embedding checks vocabulary") {
  Tensor table = Tensor::from_values({3, 2}, {0, 1, 10, 11, 20, 21}, true);
  Tensor got = embedding(table, {2, 0, 2});
  CHECK(got.rows() == 3);
  CHECK(got.at(0, 1) == 21.0);
  CHECK(got.at(1, 0) == 0.0);
  CHECK_THROWS_AS(embedding(table, {3}), VocabError);
  CHECK_THROWS_AS(embedding(table, {-1}), VocabError);

  // repeated ids accumulate gradient into the same table row
  Tensor loss = sum_all(got);
  loss.backward();
  CHECK(table.grad()[4] == 2.0);  // row 2 used twice
  CHECK(table.grad()[0] == 1.0);
}

// ----------------------------------------------------------- grad checks

TEST_CASE("grad_check is exact on a linear function") {
  // dyadic values and a dyadic step make central differences exact
  Tensor x = Tensor::from_values({4}, {1.0, 2.0, -3.0, 0.5}, true);
  auto f = [](const std::vector<Tensor>& in) { return sum_all(in[0]); };
  auto rep = grad_check("sum", f, {x}, 0.0001220703125, 1e-12);
  CHECK(rep.passed);
  CHECK(rep.max_rel_error == 0.0);
}

TEST_CASE("grad_check rejects non-scalar outputs and bad steps") {
  Tensor x = Tensor::from_values({2}, {1.0, 2.0}, true);
  auto bad = [](const std::vector<Tensor>& in) { return mul(in[0], in[0]); };
  CHECK_THROWS_AS(grad_check("id", bad, {x}, 1e-5, 1e-4), ContractError);
  auto ok = [](const std::vector<Tensor>& in) { return sum_all(in[0]); };
  CHECK_THROWS_AS(grad_check("sum", ok, {x}, 1e-7, 1e-4), ParamError);
  CHECK_THROWS_AS(grad_check("sum", ok, {x}, 1e-2, 1e-4), ParamError);
}

TEST_CASE("every differentiable op passes finite-difference checks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed * 7919 + 1);

    {
      Tensor a = random_tensor({3, 2}, rng);
      Tensor b = random_tensor({3, 2}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return mean_all(mul(add(in[0], in[1]), sub(in[0], in[1])));
      };
      auto rep = grad_check("add/sub/mul/mean", f, {a, b}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({2, 3}, rng);
      Tensor b = random_tensor({3, 2}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(matmul(in[0], in[1]));
      };
      auto rep = grad_check("matmul", f, {a, b}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({2, 3}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(transpose(in[0]), transpose(in[0])));
      };
      auto rep = grad_check("transpose", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(sigmoid(in[0]), tanh(in[0])));
      };
      auto rep = grad_check("sigmoid/tanh", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_spread_tensor({6}, rng);
      auto f = [](const std::vector<Tensor>& in) { return sum_all(relu(in[0])); };
      auto rep = grad_check("relu", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({2, 4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(softmax_rows(in[0], 0.7), in[0]));
      };
      auto rep = grad_check("softmax_rows", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({3, 4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(logsumexp_rows(in[0]));
      };
      auto rep = grad_check("logsumexp_rows", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({3, 3}, rng);
      auto f = [](const std::vector<Tensor>& in) { return sum_all(diag(in[0])); };
      auto rep = grad_check("diag", f, {a}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_tensor({2, 5}, rng);
      Tensor g = random_tensor({5}, rng);
      Tensor b = random_tensor({5}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(layer_norm(in[0], in[1], in[2], 1e-5), in[0]));
      };
      auto rep = grad_check("layer_norm", f, {x, g, b}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_tensor({3, 4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(l2_normalize_rows(in[0], 1e-8), in[0]));
      };
      auto rep = grad_check("l2_normalize_rows", f, {x}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({4}, rng);
      Tensor b = random_tensor({4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return cosine_similarity(in[0], in[1], 1e-8);
      };
      auto rep = grad_check("cosine_similarity", f, {a, b}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_spread_tensor({3, 5}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(max_over_cols(in[0]));
      };
      auto rep = grad_check("max_over_cols", f, {x}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_tensor({3, 6}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        std::vector<std::pair<int, int>> spans = {{0, 2}, {2, 3}};
        return sum_all(mul(mean_rows_by_span(in[0], spans),
                           mean_rows_by_span(in[0], spans)));
      };
      auto rep = grad_check("mean_rows_by_span", f, {x}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor q = random_tensor({2, 3}, rng);
      Tensor k = random_tensor({4, 3}, rng);
      Tensor v = random_tensor({4, 2}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(attention(in[0], in[1], in[2]), attention(in[0], in[1], in[2])));
      };
      auto rep = grad_check("attention", f, {q, k, v}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      GruParams p = random_gru(3, 4, rng);
      Tensor x = random_tensor({3}, rng);
      Tensor h = random_tensor({4}, rng);
      auto f = [&p](const std::vector<Tensor>& in) {
        GruParams q{in[2], in[3], in[4], in[5], in[6], in[7], in[8], in[9], in[10]};
        return sum_all(gru_step(in[0], in[1], q));
      };
      std::vector<Tensor> inputs = {x, h, p.wz, p.uz, p.bz, p.wr, p.ur, p.br, p.wh, p.uh, p.bh};
      auto rep = grad_check("gru_step", f, inputs, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor table = random_tensor({4, 3}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return sum_all(mul(embedding(in[0], {1, 3, 1}), embedding(in[0], {1, 3, 1})));
      };
      auto rep = grad_check("embedding", f, {table}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor a = random_tensor({2, 3}, rng);
      Tensor b = random_tensor({1, 3}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        Tensor c = concat_rows({in[0], in[1]});
        return sum_all(mul(pad_cols(c, 5, 0.25), pad_cols(c, 5, 0.25)));
      };
      auto rep = grad_check("concat/pad", f, {a, b}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_tensor({3, 2}, rng);
      Tensor bias = random_tensor({2}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        return mean_all(mul(add_row_bias(in[0], in[1]), add_row_bias(in[0], in[1])));
      };
      auto rep = grad_check("add_row_bias", f, {x, bias}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
    {
      Tensor x = random_spread_tensor({4}, rng);
      auto f = [](const std::vector<Tensor>& in) {
        Tensor soft = sigmoid(in[0]);
        return sum_all(mul(pow_const(soft, 2.0), log(clamp(soft, 1e-7, 1.0 - 1e-7))));
      };
      auto rep = grad_check("pow/log/clamp", f, {x}, kStep, kTol);
      CHECK_MESSAGE(rep.passed, rep.op_name, " rel=", rep.max_rel_error, " seed=", seed);
    }
  }
}

}  // TEST_SUITE
