#include <doctest.h>

#include "kws/errors.hpp"
#include "kws/ops.hpp"
#include "kws/tensor.hpp"

using namespace kws;

TEST_SUITE("numerics") {

TEST_CASE("tensor shape bookkeeping") {
  Tensor t = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 6.0);
  CHECK_THROWS_AS(Tensor::from_values({2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("backward requires a scalar output") {
  Tensor t = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor y = mul(t, t);
  CHECK_THROWS_AS(y.backward(), ContractError);
}

TEST_CASE("backward populates every reachable leaf once") {
  Tensor a = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor b = Tensor::from_values({2}, {3.0, 4.0}, true);
  // y = sum(a*b) + sum(a): d/da = b + 1, d/db = a. The shared `a` node must
  // accumulate across both uses in a single sweep.
  Tensor y = add(sum_all(mul(a, b)), sum_all(a));
  y.backward();
  CHECK(a.grad()[0] == doctest::Approx(4.0));
  CHECK(a.grad()[1] == doctest::Approx(5.0));
  CHECK(b.grad()[0] == doctest::Approx(1.0));
  CHECK(b.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("repeated backward does not double-accumulate") {
  Tensor a = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor y = sum_all(mul(a, a));
  y.backward();
  y.backward();
  CHECK(a.grad()[0] == doctest::Approx(2.0));
  CHECK(a.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("no-grad guard suppresses graph construction") {
  Tensor a = Tensor::from_values({2}, {1.0, 2.0}, true);
  NoGradGuard ng;
  Tensor y = sum_all(mul(a, a));
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("sgd update moves against the gradient") {
  Tensor w = Tensor::from_values({2}, {1.0, -1.0}, true);
  Tensor loss = sum_all(mul(w, w));
  loss.backward();
  sgd_update(w, 0.1);
  CHECK(w.values()[0] == doctest::Approx(1.0 - 0.1 * 2.0));
  CHECK(w.values()[1] == doctest::Approx(-1.0 + 0.1 * 2.0));
}

}  // TEST_SUITE
