#include <doctest.h>

#include <string>
#include <vector>

#include "kws/alignment.hpp"
#include "kws/errors.hpp"
#include "kws/grad_check.hpp"
#include "kws/ops.hpp"
#include "kws/rng.hpp"

using namespace kws;

TEST_SUITE("alignment") {

TEST_CASE("pooling closed forms") {
  // 4 frames, spans [0,2) [2,4): hand-computed means
  Tensor e = Tensor::from_values({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  PooledSequence p = pool_by_alignment(e, {{0, 2}, {2, 4}}, {9, 3});
  CHECK(p.embeddings.rows() == 2);
  CHECK(p.phoneme_ids == std::vector<int>{9, 3});
  CHECK(p.embeddings.at(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p.embeddings.at(0, 1) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(p.embeddings.at(1, 0) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(p.embeddings.at(1, 1) == doctest::Approx(7.0).epsilon(1e-6));

  // one span covering everything: the column mean
  PooledSequence full = pool_by_alignment(e, {{0, 4}}, {0});
  CHECK(full.embeddings.at(0, 0) == doctest::Approx(4.0));
  CHECK(full.embeddings.at(0, 1) == doctest::Approx(5.0));

  // constant frames: every pooled row equals the frame
  Tensor c = Tensor::full({3, 2}, 0.5);
  PooledSequence pc = pool_by_alignment(c, {{0, 1}, {1, 3}}, {1, 2});
  for (int r = 0; r < 2; ++r)
    for (int j = 0; j < 2; ++j) CHECK(pc.embeddings.at(r, j) == doctest::Approx(0.5));
}

TEST_CASE("identity spans make pooling the identity map") {
  Rng rng(4);
  std::vector<double> v(12);
  for (auto& x : v) x = rng.uniform(-1, 1);
  Tensor e = Tensor::from_values({4, 3}, v);
  PooledSequence p = pool_by_alignment(e, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0, 1, 2, 3});
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) CHECK(p.embeddings.at(r, c) == e.at(r, c));
}

TEST_CASE("pooling commutes with per-row linear maps") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<double> ev(10 * 3), lv(3 * 2);
    for (auto& x : ev) x = rng.uniform(-2, 2);
    for (auto& x : lv) x = rng.uniform(-2, 2);
    Tensor e = Tensor::from_values({10, 3}, ev);
    Tensor l = Tensor::from_values({3, 2}, lv);
    std::vector<Span> spans = {{0, 3}, {3, 4}, {4, 8}, {8, 10}};
    std::vector<int> ids = {0, 1, 2, 3};
    Tensor a = pool_by_alignment(matmul(e, l), spans, ids).embeddings;
    Tensor b = matmul(pool_by_alignment(e, spans, ids).embeddings, l);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-6));
    }
  }
}

TEST_CASE("pooling is differentiable with 1/len routing") {
  Rng rng(9);
  std::vector<double> v(8);
  for (auto& x : v) x = rng.uniform(-1, 1);
  Tensor e = Tensor::from_values({4, 2}, v, true);
  Tensor pooled = pool_by_alignment(e, {{0, 3}, {3, 4}}, {0, 1}).embeddings;
  sum_all(pooled).backward();
  // first span: 3 frames share the mean, each gets 1/3
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(e.grad()[static_cast<std::size_t>(r) * 2 + c] == doctest::Approx(1.0 / 3.0));
  CHECK(e.grad()[6] == doctest::Approx(1.0));

  auto f = [](const std::vector<Tensor>& in) {
    Tensor p = pool_by_alignment(in[0], {{0, 3}, {3, 4}}, {0, 1}).embeddings;
    return sum_all(mul(p, p));
  };
  Tensor x = Tensor::from_values({4, 2}, v, true);
  auto rep = grad_check("pool_by_alignment", f, {x}, 1e-5, 1e-4);
  CHECK(rep.passed);
}

TEST_CASE("alignment errors name the first defect") {
  Tensor e = Tensor::from_values({4, 2}, std::vector<double>(8, 0.0));
  CHECK_THROWS_WITH_AS(pool_by_alignment(e, {{0, 2}, {3, 4}}, {0, 1}).embeddings.defined(),
                       doctest::Contains("gap"), AlignmentError);
  CHECK_THROWS_WITH_AS(pool_by_alignment(e, {{0, 2}, {1, 4}}, {0, 1}).embeddings.defined(),
                       doctest::Contains("overlap"), AlignmentError);
  CHECK_THROWS_AS(pool_by_alignment(e, {{0, 2}, {2, 3}}, {0, 1}).embeddings.defined(),
                  AlignmentError);  // does not cover all frames
  CHECK_THROWS_AS(pool_by_alignment(e, {{0, 4}}, {0, 1}).embeddings.defined(),
                  AlignmentError);  // span/id count mismatch
}

}  // TEST_SUITE
