#include <doctest.h>

#include <cmath>
#include <vector>

#include "kws/contrastive.hpp"
#include "kws/errors.hpp"
#include "kws/grad_check.hpp"
#include "kws/ops.hpp"
#include "kws/rng.hpp"

using namespace kws;

namespace {

Tensor random_rows(int r, int c, Rng& rng, bool requires_grad = false) {
  std::vector<double> v(static_cast<std::size_t>(r) * c);
  for (auto& x : v) x = rng.uniform(-1.5, 1.5);
  return Tensor::from_values({r, c}, std::move(v), requires_grad);
}

PhonemeBatch batch_of(Tensor anchors, Tensor keys) {
  PhonemeBatch b;
  b.anchors = std::move(anchors);
  b.keys = std::move(keys);
  for (int i = 0; i < b.anchors.rows(); ++i) {
    b.phoneme_ids.push_back(i);
    b.pair_index.push_back(0);
  }
  return b;
}

}  // namespace

TEST_SUITE("contrastive") {

TEST_CASE("batch collection concatenates in batch order") {
  Rng rng(1);
  Tensor a1 = random_rows(3, 4, rng), a2 = random_rows(4, 4, rng);
  Tensor k1 = random_rows(3, 4, rng), k2 = random_rows(4, 4, rng);
  PhonemeBatch b = collect_phoneme_batch({a1, a2}, {k1, k2}, {{5, 6, 7}, {8, 9, 10, 11}});
  CHECK(b.anchors.rows() == 7);
  CHECK(b.keys.rows() == 7);
  CHECK(b.phoneme_ids == std::vector<int>{5, 6, 7, 8, 9, 10, 11});
  CHECK(b.pair_index == std::vector<int>{0, 0, 0, 1, 1, 1, 1});
  CHECK(b.anchors.at(0, 0) == a1.at(0, 0));
  CHECK(b.anchors.at(3, 0) == a2.at(0, 0));

  PhonemeBatch single = collect_phoneme_batch({a1}, {k1}, {{1, 2, 3}});
  CHECK(single.anchors.rows() == 3);

  CHECK_THROWS_AS(collect_phoneme_batch({a1}, {k2}, {{1, 2, 3}}), AlignmentError);
  CHECK_THROWS_AS(collect_phoneme_batch({a1}, {k1}, {{1, 2}}), AlignmentError);
}

TEST_CASE("loss closed forms") {
  // single pair: numerator equals denominator, exactly zero
  PhonemeBatch one = batch_of(Tensor::from_values({1, 3}, {0.2, -0.4, 1.0}),
                              Tensor::from_values({1, 3}, {0.2, -0.4, 1.0}));
  CHECK(info_nce(one, {1.0, 1e-8}).scalar_value() == 0.0);

  // orthogonal unit pairs at tau=1: loss is 2*log(1+e^-1)
  PhonemeBatch orth = batch_of(Tensor::from_values({2, 2}, {1, 0, 0, 1}),
                               Tensor::from_values({2, 2}, {1, 0, 0, 1}));
  double got = info_nce(orth, {1.0, 1e-8}).scalar_value();
  double expect = 2.0 * std::log(1.0 + std::exp(-1.0));
  CHECK(got == doctest::Approx(expect).epsilon(1e-5));
  CHECK(got == doctest::Approx(0.6265233750364456).epsilon(1e-5));

  // identical vectors everywhere: uniform softmax, N*log(N)
  PhonemeBatch same = batch_of(Tensor::full({4, 3}, 0.7), Tensor::full({4, 3}, 0.7));
  CHECK(info_nce(same, {0.25, 1e-8}).scalar_value() ==
        doctest::Approx(4.0 * std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("loss is nonnegative and positive beyond one pair") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    int n = rng.uniform_int(2, 8);
    PhonemeBatch b = batch_of(random_rows(n, 5, rng), random_rows(n, 5, rng));
    double l = info_nce(b, {0.07, 1e-8}).scalar_value();
    CHECK(l > 0.0);
  }
}

TEST_CASE("permutation equivariance of paired rows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    const int n = 6, d = 4;
    Tensor a = random_rows(n, d, rng), k = random_rows(n, d, rng);
    double base = info_nce(batch_of(a, k), {0.3, 1e-8}).scalar_value();

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    std::vector<double> av(static_cast<std::size_t>(n) * d), kv(av.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        av[static_cast<std::size_t>(i) * d + j] = a.at(perm[static_cast<std::size_t>(i)], j);
        kv[static_cast<std::size_t>(i) * d + j] = k.at(perm[static_cast<std::size_t>(i)], j);
      }
    }
    double permuted = info_nce(batch_of(Tensor::from_values({n, d}, av),
                                        Tensor::from_values({n, d}, kv)),
                               {0.3, 1e-8})
                          .scalar_value();
    CHECK(permuted == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("anchor scale invariance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 500);
    Tensor a = random_rows(5, 4, rng), k = random_rows(5, 4, rng);
    double base = info_nce(batch_of(a, k), {0.2, 1e-8}).scalar_value();
    double c = rng.uniform(0.2, 5.0);
    std::vector<double> scaled = a.values();
    for (auto& x : scaled) x *= c;
    double after = info_nce(batch_of(Tensor::from_values({5, 4}, scaled), k), {0.2, 1e-8})
                       .scalar_value();
    CHECK(after == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("gradients pass finite differences on a 4-pair batch") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed * 13 + 3);
    Tensor a = random_rows(4, 5, rng, true);
    Tensor k = random_rows(4, 5, rng, true);
    auto f = [](const std::vector<Tensor>& in) {
      PhonemeBatch b;
      b.anchors = in[0];
      b.keys = in[1];
      for (int i = 0; i < 4; ++i) {
        b.phoneme_ids.push_back(i);
        b.pair_index.push_back(0);
      }
      return info_nce(b, {0.5, 1e-8});
    };
    auto rep = grad_check("info_nce", f, {a, k}, 1e-5, 1e-4);
    CHECK_MESSAGE(rep.passed, "rel=", rep.max_rel_error, " seed=", seed);
  }
}

TEST_CASE("temperature is monotone on the orthogonal case") {
  PhonemeBatch orth = batch_of(Tensor::from_values({2, 2}, {1, 0, 0, 1}),
                               Tensor::from_values({2, 2}, {1, 0, 0, 1}));
  double taus[5] = {0.05, 0.2, 0.4, 0.7, 1.0};
  double prev = -1.0;
  for (double tau : taus) {
    double l = info_nce(orth, {tau, 1e-8}).scalar_value();
    // direct evaluation: 2*log(1 + exp(-1/tau))
    CHECK(l == doctest::Approx(2.0 * std::log(1.0 + std::exp(-1.0 / tau))).epsilon(1e-9));
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("temperature must be positive") {
  PhonemeBatch b = batch_of(Tensor::full({1, 2}, 1.0), Tensor::full({1, 2}, 1.0));
  CHECK_THROWS_AS(info_nce(b, {0.0, 1e-8}), ParamError);
}

}  // TEST_SUITE
