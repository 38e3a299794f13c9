#include <cmath>
#include <random>

#include "dgat/grad_check.hpp"
#include "dgat/param_store.hpp"
#include "dgat/tape.hpp"
#include "doctest.h"

using namespace dgat;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data) v = gauss(rng);
  return m;
}

}  // namespace

TEST_CASE("matmul values") {
  Tape tape;
  Tensor eye = tape.constant(Matrix(2, 2, {1, 0, 0, 1}));
  Tensor x = tape.constant(Matrix(2, 2, {3, 4, 5, 6}));
  CHECK(tape.value(tape.matmul(eye, x)).data == std::vector<double>{3, 4, 5, 6});

  Tensor a = tape.constant(Matrix(1, 2, {1, 2}));
  Tensor b = tape.constant(Matrix(2, 1, {3, 4}));
  CHECK(tape.value(tape.matmul(a, b)).data[0] == 11.0);

  CHECK_THROWS_AS(tape.matmul(a, a), std::invalid_argument);
}

TEST_CASE("matmul gradient of sum(a*b) wrt a is ones * b^T") {
  std::mt19937_64 rng(1);
  ParamStore params;
  params.insert("a", random_matrix(rng, 4, 3));
  Matrix b = random_matrix(rng, 3, 2);

  params.zero_grads();
  Tape tape;
  Tensor loss = tape.sum(tape.matmul(tape.param(params, "a"), tape.constant(b)));
  tape.backward(loss);
  Matrix expected = matmul(Matrix::filled(4, 2, 1.0), transpose(b));
  for (size_t i = 0; i < expected.data.size(); ++i)
    CHECK(params.at("a").grad.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-12));

  auto report = grad_check(
      [&](Tape& t, ParamStore& p) {
        return t.sum(t.matmul(t.param(p, "a"), t.constant(b)));
      },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("gather_rows") {
  Tape tape;
  Tensor x = tape.constant(Matrix(3, 2, {0, 1, 10, 11, 20, 21}));
  Tensor g = tape.gather_rows(x, {2, 0});
  CHECK(tape.value(g).data == std::vector<double>{20, 21, 0, 1});
  CHECK_THROWS_AS(tape.gather_rows(x, {3}), std::out_of_range);

  // repeated index scatter-adds in backward
  ParamStore params;
  params.insert("x", Matrix(3, 1, {1, 2, 3}));
  params.zero_grads();
  Tape t2;
  Tensor loss = t2.sum(t2.gather_rows(t2.param(params, "x"), {1, 1}));
  t2.backward(loss);
  CHECK(params.at("x").grad.data == std::vector<double>{0, 2, 0});

  std::mt19937_64 rng(2);
  ParamStore p3;
  p3.insert("x", random_matrix(rng, 5, 3));
  auto report = grad_check(
      [](Tape& t, ParamStore& p) {
        return t.sum(t.mul(t.gather_rows(t.param(p, "x"), {4, 0, 0, 2}),
                           t.constant(Matrix(4, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}))));
      },
      p3, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("leaky_relu") {
  Tape tape;
  Tensor x = tape.constant(Matrix(1, 2, {1, -1}));
  CHECK(tape.value(tape.leaky_relu(x, 0.2)).data == std::vector<double>{1.0, -0.2});
  CHECK(tape.value(tape.leaky_relu(x, 1.0)).data == std::vector<double>{1.0, -1.0});

  ParamStore params;
  params.insert("x", Matrix(1, 2, {0.5, -0.5}));
  auto report = grad_check(
      [](Tape& t, ParamStore& p) { return t.sum(t.leaky_relu(t.param(p, "x"), 0.2)); },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("segment_softmax values") {
  Tape tape;
  Tensor two = tape.constant(Matrix(2, 1, {0, 0}));
  auto v = tape.value(tape.segment_softmax(two, {0, 0}, 1));
  CHECK(v.data[0] == doctest::Approx(0.5));
  CHECK(v.data[1] == doctest::Approx(0.5));

  Tensor one = tape.constant(Matrix(1, 1, {42.0}));
  CHECK(tape.value(tape.segment_softmax(one, {0}, 1)).data[0] == doctest::Approx(1.0));

  Tensor three = tape.constant(Matrix(3, 1, {1, 2, 3}));
  auto p = tape.value(tape.segment_softmax(three, {0, 0, 0}, 1));
  CHECK(p.data[0] == doctest::Approx(0.0900).epsilon(1e-2));
  CHECK(std::abs(p.data[0] - 0.09003057) < 1e-4);
  CHECK(std::abs(p.data[1] - 0.24472847) < 1e-4);
  CHECK(std::abs(p.data[2] - 0.66524096) < 1e-4);
}

TEST_CASE("segment_softmax sums to one per segment, extreme scores included") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(-1e3, 1e3);
  std::uniform_int_distribution<int> seg_count(1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    int segments = seg_count(rng);
    std::vector<int> seg;
    std::vector<double> scores;
    for (int s = 0; s < segments; ++s) {
      int size = seg_count(rng);
      for (int k = 0; k < size; ++k) {
        seg.push_back(s);
        scores.push_back(score(rng));
      }
    }
    Tape tape;
    Tensor t = tape.constant(Matrix(static_cast<int>(scores.size()), 1, scores));
    auto out = tape.value(tape.segment_softmax(t, seg, segments));
    std::vector<double> sums(segments, 0.0);
    for (size_t e = 0; e < seg.size(); ++e) sums[seg[e]] += out.data[e];
    for (double s : sums) CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("segment_softmax gradient") {
  std::mt19937_64 rng(4);
  ParamStore params;
  params.insert("s", random_matrix(rng, 6, 1));
  Matrix coeff = random_matrix(rng, 6, 1);
  auto report = grad_check(
      [&](Tape& t, ParamStore& p) {
        Tensor sm = t.segment_softmax(t.param(p, "s"), {0, 0, 1, 1, 1, 2}, 3);
        return t.sum(t.mul(sm, t.constant(coeff)));
      },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("segment_weighted_sum") {
  Tape tape;
  Tensor w = tape.constant(Matrix(2, 1, {1, 1}));
  Tensor m = tape.constant(Matrix(2, 2, {1, 2, 3, 4}));
  auto out = tape.value(tape.segment_weighted_sum(w, m, {0, 0}, 1));
  CHECK(out.data == std::vector<double>{4, 6});

  // empty segment yields a zero row
  auto out2 = tape.value(tape.segment_weighted_sum(w, m, {1, 1}, 2));
  CHECK(out2.at(0, 0) == 0.0);
  CHECK(out2.at(0, 1) == 0.0);

  std::mt19937_64 rng(5);
  ParamStore params;
  params.insert("w", random_matrix(rng, 5, 1));
  params.insert("m", random_matrix(rng, 5, 3));
  Matrix coeff = random_matrix(rng, 3, 3);
  auto report = grad_check(
      [&](Tape& t, ParamStore& p) {
        Tensor out = t.segment_weighted_sum(t.param(p, "w"), t.param(p, "m"), {2, 0, 0, 1, 2}, 3);
        return t.sum(t.mul(out, t.constant(coeff)));
      },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("add and concat") {
  Tape tape;
  Tensor x = tape.constant(Matrix(2, 1, {1, 2}));
  Tensor z = tape.constant(Matrix(2, 1, {0, 0}));
  CHECK(tape.value(tape.add(x, z)).data == std::vector<double>{1, 2});

  Tensor y = tape.constant(Matrix(2, 2, {3, 4, 5, 6}));
  Tensor c = tape.concat_cols(x, y);
  CHECK(c.rows == 2);
  CHECK(c.cols == 3);
  CHECK(tape.value(c).data == std::vector<double>{1, 3, 4, 2, 5, 6});

  std::mt19937_64 rng(6);
  ParamStore params;
  params.insert("a", random_matrix(rng, 2, 1));
  params.insert("b", random_matrix(rng, 2, 2));
  Matrix coeff = random_matrix(rng, 2, 3);
  auto report = grad_check(
      [&](Tape& t, ParamStore& p) {
        return t.sum(t.mul(t.concat_cols(t.param(p, "a"), t.param(p, "b")), t.constant(coeff)));
      },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("softmax_cross_entropy values") {
  Tape tape;
  Tensor uniform = tape.constant(Matrix(1, 2, {0, 0}));
  CHECK(tape.value(tape.softmax_cross_entropy(uniform, {0}, {1, 1})).data[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Tensor confident = tape.constant(Matrix(1, 2, {10, -10}));
  double loss = tape.value(tape.softmax_cross_entropy(confident, {0}, {1, 1})).data[0];
  CHECK(loss == doctest::Approx(2.061e-9).epsilon(1e-2));

  CHECK_THROWS_AS(tape.softmax_cross_entropy(uniform, {2}, {1, 1}), std::out_of_range);

  std::mt19937_64 rng(7);
  ParamStore params;
  params.insert("logits", random_matrix(rng, 3, 2));
  auto report = grad_check(
      [](Tape& t, ParamStore& p) {
        return t.softmax_cross_entropy(t.param(p, "logits"), {0, 1, 0}, {0.5, 2.0});
      },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("backward basics") {
  ParamStore params;
  params.insert("W", Matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  params.zero_grads();
  {
    Tape tape;
    Tensor loss = tape.sum(tape.param(params, "W"));
    tape.backward(loss);
    for (double g : params.at("W").grad.data) CHECK(g == 1.0);
  }
  params.zero_grads();
  {
    Tape tape;
    Tensor loss = tape.scale(tape.sum(tape.param(params, "W")), 0.0);
    tape.backward(loss);
    for (double g : params.at("W").grad.data) CHECK(g == 0.0);
  }
  {
    Tape tape;
    Tensor notscalar = tape.constant(Matrix(2, 1, {1, 2}));
    CHECK_THROWS_AS(tape.backward(notscalar), std::invalid_argument);
  }
}

TEST_CASE("grad_check: linear function is near-exact") {
  ParamStore params;
  params.insert("x", Matrix(2, 2, {1, -2, 3, 4}));
  Matrix coeff(2, 2, {2, -1, 0.5, 3});
  auto report = grad_check(
      [&](Tape& t, ParamStore& p) { return t.sum(t.mul(t.param(p, "x"), t.constant(coeff))); },
      params, 1e-6, 1e-4);
  CHECK(report.passed);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check: corrupted gradient rule is flagged") {
  ParamStore params;
  params.insert("x", Matrix(1, 2, {1.0, 2.0}));
  auto report = grad_check(
      [](Tape& t, ParamStore& p) {
        Tensor x = t.param(p, "x");
        // doubles the value but claims unit gradient
        Matrix v = t.value(x);
        for (double& e : v.data) e *= 2.0;
        Tensor bad = t.raw_op(std::move(v),
                              [x](Tape& tt, const Matrix& g) {
                                Matrix& dx = tt.grad_ref(x);
                                for (size_t i = 0; i < g.data.size(); ++i)
                                  dx.data[i] += g.data[i];  // wrong: missing factor 2
                              },
                              true);
        return t.sum(bad);
      },
      params, 1e-6, 1e-4);
  CHECK_FALSE(report.passed);
  CHECK(report.failures.size() == 2);
}

TEST_CASE("tape replay determinism") {
  std::mt19937_64 rng(8);
  Matrix a = random_matrix(rng, 6, 4);
  Matrix b = random_matrix(rng, 4, 3);
  auto run = [&]() {
    Tape tape;
    Tensor out = tape.leaky_relu(tape.matmul(tape.constant(a), tape.constant(b)), 0.2);
    Tensor sm = tape.segment_softmax(tape.matmul(out, tape.constant(Matrix(3, 1, {1, 1, 1}))),
                                     {0, 0, 1, 1, 2, 2}, 3);
    return tape.value(sm).data;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite detection at op boundaries") {
  Tape tape;
  tape.set_check_finite(true);
  Tensor big = tape.constant(Matrix(1, 1, {1e308}));
  CHECK_THROWS_AS(tape.mul(big, big), std::runtime_error);
}
