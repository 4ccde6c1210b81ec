#include <doctest.h>

#include <cmath>
#include <numeric>

#include "docconv/activations.hpp"
#include "docconv/conv.hpp"
#include "docconv/errors.hpp"
#include "docconv/gradcheck.hpp"
#include "docconv/kmax.hpp"
#include "support/oracles.hpp"

using namespace docconv;

namespace {

Matrix row_matrix(std::vector<double> v) {
  const std::size_t n = v.size();
  return Matrix(1, n, std::move(v));
}

std::vector<double> as_vector(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

}  // namespace

TEST_SUITE("wide convolution") {
  TEST_CASE("scalar case") {
    FilterBank bank(1, 1, 1);
    bank.weight(0, 0, 0) = 3.0;
    CHECK(as_vector(wide_conv_forward(row_matrix({2.0}), bank)) == std::vector<double>{6.0});
  }

  TEST_CASE("hand-evaluated impulse response") {
    FilterBank bank(1, 3, 1);
    bank.weight(0, 0, 0) = 1.0;
    bank.weight(0, 1, 0) = 2.0;
    bank.weight(0, 2, 0) = 3.0;
    CHECK(as_vector(wide_conv_forward(row_matrix({0, 1, 0}), bank)) == std::vector<double>{0, 3, 2, 1, 0});
  }

  TEST_CASE("output width is n + w - 1 including empty input") {
    for (std::size_t n = 0; n <= 6; ++n) {
      for (std::size_t w = 1; w <= 4; ++w) {
        FilterBank bank(2, w, 3);
        bank.bias()[1] = 0.5;
        const Matrix out = wide_conv_forward(Matrix(2, n), bank);
        CHECK(out.rows() == 3);
        CHECK(out.cols() == n + w - 1);
        if (n == 0) {
          for (std::size_t t = 0; t < out.cols(); ++t) CHECK(out(1, t) == 0.5);
        }
      }
    }
    FilterBank bank(1, 3, 1);
    CHECK(wide_conv_forward(Matrix(1, 4), bank).cols() == 6);
  }

  TEST_CASE("zero second channel matches single-channel result") {
    Rng rng(4);
    const Matrix one = oracle::random_matrix(rng, 1, 5);
    Matrix two(2, 5);
    for (std::size_t t = 0; t < 5; ++t) two(0, t) = one(0, t);
    FilterBank b1(1, 3, 2), b2(2, 3, 2);
    oracle::randomize(rng, b1);
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t m = 0; m < 2; ++m) {
        b2.weight(0, j, m) = b1.weight(0, j, m);
        b2.weight(1, j, m) = rng.uniform(-1, 1);
      }
    }
    b2.bias()[0] = b1.bias()[0];
    b2.bias()[1] = b1.bias()[1];
    CHECK(wide_conv_forward(two, b2) == wide_conv_forward(one, b1));
  }

  TEST_CASE("depth mismatch names both shapes") {
    FilterBank bank(3, 2, 1);
    CHECK_THROWS_AS(wide_conv_forward(Matrix(2, 4), bank), ConfigError);
    try {
      wide_conv_forward(Matrix(2, 4), bank);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find('2') != std::string::npos);
      CHECK(msg.find('3') != std::string::npos);
    }
  }

  TEST_CASE("agrees with the naive oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t d = 1 + rng.below(4), n = rng.below(7), w = 1 + rng.below(5), maps = 1 + rng.below(4);
      const Matrix in = oracle::random_matrix(rng, d, n);
      FilterBank bank(d, w, maps);
      oracle::randomize(rng, bank);
      const Matrix got = wide_conv_forward(in, bank);
      const Matrix want = oracle::wide_conv(in, bank);
      REQUIRE(got.cols() == want.cols());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) < 1e-12);
    }
  }

  TEST_CASE("linear in the input when bias is zero") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 1 + rng.below(3), n = 1 + rng.below(6), w = 1 + rng.below(4);
      FilterBank bank(d, w, 2);
      for (auto& v : bank.weights()) v = rng.uniform(-1, 1);
      const Matrix a = oracle::random_matrix(rng, d, n), b = oracle::random_matrix(rng, d, n);
      const double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
      Matrix mix(d, n);
      for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = alpha * a.values()[i] + beta * b.values()[i];
      const Matrix fa = wide_conv_forward(a, bank), fb = wide_conv_forward(b, bank), fm = wide_conv_forward(mix, bank);
      for (std::size_t i = 0; i < fm.size(); ++i) {
        CHECK(fm.values()[i] == doctest::Approx(alpha * fa.values()[i] + beta * fb.values()[i]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("backward by hand") {
    FilterBank bank(1, 1, 1);
    bank.weight(0, 0, 0) = 3.0;
    const auto g = wide_conv_backward(row_matrix({1.0}), row_matrix({5.0}), bank);
    CHECK(g.input(0, 0) == 3.0);
    CHECK(g.bank.weight(0, 0, 0) == 5.0);
    CHECK(g.bank.bias()[0] == 1.0);
  }

  TEST_CASE("backward of zero gradient is zero") {
    Rng rng(3);
    FilterBank bank(2, 3, 2);
    oracle::randomize(rng, bank);
    const Matrix in = oracle::random_matrix(rng, 2, 4);
    const auto g = wide_conv_backward(Matrix(2, 6), in, bank);
    for (double v : g.input.values()) CHECK(v == 0.0);
    for (double v : g.bank.weights()) CHECK(v == 0.0);
    for (double v : g.bank.bias()) CHECK(v == 0.0);
  }

  TEST_CASE("backward matches finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix in = oracle::random_matrix(rng, 3, 5);
      FilterBank bank(3, 2, 2);
      oracle::randomize(rng, bank);
      const Matrix upstream = oracle::random_matrix(rng, 2, 6);
      auto objective = [&] {
        const Matrix out = wide_conv_forward(in, bank);
        return std::inner_product(out.values().begin(), out.values().end(), upstream.values().begin(), 0.0);
      };
      const auto g = wide_conv_backward(upstream, in, bank);
      std::vector<double*> xs;
      std::vector<double> analytic;
      for (std::size_t i = 0; i < in.size(); ++i) {
        xs.push_back(&in.values()[i]);
        analytic.push_back(g.input.values()[i]);
      }
      for (std::size_t i = 0; i < bank.weights().size(); ++i) {
        xs.push_back(&bank.weights()[i]);
        analytic.push_back(g.bank.weights()[i]);
      }
      for (std::size_t i = 0; i < bank.bias().size(); ++i) {
        xs.push_back(&bank.bias()[i]);
        analytic.push_back(g.bank.bias()[i]);
      }
      const auto numeric = oracle::numeric_gradient(objective, xs);
      for (std::size_t i = 0; i < numeric.size(); ++i) CHECK(oracle::rel_error(analytic[i], numeric[i]) < 1e-6);
    }
  }

  TEST_CASE("backward rejects mismatched shapes") {
    FilterBank bank(2, 3, 2);
    CHECK_THROWS_AS(wide_conv_backward(Matrix(2, 5), Matrix(2, 4), bank), ConfigError);
  }
}

TEST_SUITE("k-max pooling") {
  TEST_CASE("order is preserved") {
    const auto r = kmax_forward(row_matrix({3, 1, 5, 2}), 2);
    CHECK(as_vector(r.output) == std::vector<double>{3, 5});
  }

  TEST_CASE("short rows are zero padded") {
    CHECK(as_vector(kmax_forward(row_matrix({3, 1}), 4).output) == std::vector<double>{3, 1, 0, 0});
    const auto empty = kmax_forward(Matrix(2, 0), 3);
    CHECK(empty.output.rows() == 2);
    for (double v : empty.output.values()) CHECK(v == 0.0);
  }

  TEST_CASE("negative values") {
    CHECK(as_vector(kmax_forward(row_matrix({-1, -5, -2}), 2).output) == std::vector<double>{-1, -2});
  }

  TEST_CASE("ties go to the lower index") {
    const auto r = kmax_forward(row_matrix({2, 7, 2, 2}), 2);
    CHECK(r.selection.indices[0] == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("backward routes to the selected columns") {
    const auto r = kmax_forward(row_matrix({3, 1, 5, 2}), 2);
    CHECK(as_vector(kmax_backward(row_matrix({10, 20}), r.selection)) == std::vector<double>{10, 0, 20, 0});
    CHECK(as_vector(kmax_backward(row_matrix({0, 0}), r.selection)) == std::vector<double>{0, 0, 0, 0});
    const auto padded = kmax_forward(row_matrix({3, 1}), 4);
    CHECK(as_vector(kmax_backward(row_matrix({1.5, 2.5, 3.5, 4.5}), padded.selection)) ==
          std::vector<double>{1.5, 2.5});
  }

  TEST_CASE("backward rejects a mismatched gradient") {
    const auto r = kmax_forward(row_matrix({3, 1, 5, 2}), 2);
    CHECK_THROWS_AS(kmax_backward(row_matrix({1, 2, 3}), r.selection), ConfigError);
  }

  TEST_CASE("idempotent at width k") {
    Rng rng(8);
    for (std::size_t k = 1; k <= 5; ++k) {
      const Matrix m = oracle::random_matrix(rng, 3, k);
      CHECK(kmax_forward(m, k).output == m);
    }
  }

  TEST_CASE("selections are strictly increasing with length min(k, n)") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = rng.below(9), k = 1 + rng.below(5);
      Matrix m(2, n);
      for (auto& v : m.values()) v = static_cast<double>(rng.below(4));
      const auto r = kmax_forward(m, k);
      for (const auto& idx : r.selection.indices) {
        CHECK(idx.size() == std::min(k, n));
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i - 1] < idx[i]);
      }
    }
  }

  TEST_CASE("matches the brute-force oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = rng.below(9), k = 1 + rng.below(4);
      std::vector<double> row(n);
      for (auto& v : row) v = static_cast<double>(rng.below(5)) - 2.0;
      CHECK(as_vector(kmax_forward(row_matrix(row), k).output) == oracle::kmax_row(row, k));
    }
  }

  TEST_CASE("resolve_k") {
    CHECK(resolve_k(PoolSpec::fixed(4), 100) == 4);
    CHECK(resolve_k(PoolSpec::dynamic(4, 0.5), 10) == 5);
    CHECK(resolve_k(PoolSpec::dynamic(4, 0.5), 3) == 4);
    CHECK(resolve_k(PoolSpec::dynamic(1, 0.3), 10) == 3);
    CHECK(resolve_k(PoolSpec::dynamic(1, 0.5), 0) == 1);
  }

  TEST_CASE("invalid pool specs are rejected") {
    CHECK_THROWS_AS(PoolSpec::fixed(0).validate(), ConfigError);
    CHECK_THROWS_AS(PoolSpec::dynamic(2, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(PoolSpec::dynamic(2, 1.5).validate(), ConfigError);
  }
}

TEST_SUITE("activations") {
  TEST_CASE("tanh at zero") {
    const Matrix z(2, 3);
    const Matrix out = tanh_forward(z);
    for (double v : out.values()) CHECK(v == 0.0);
    Rng rng(1);
    const Matrix g = oracle::random_matrix(rng, 2, 3);
    CHECK(tanh_backward(g, out) == g);
  }

  TEST_CASE("tanh backward matches finite differences") {
    Rng rng(5);
    Matrix x = oracle::random_matrix(rng, 2, 3, -2, 2);
    const Matrix up = oracle::random_matrix(rng, 2, 3);
    auto f = [&] {
      const Matrix y = tanh_forward(x);
      return std::inner_product(y.values().begin(), y.values().end(), up.values().begin(), 0.0);
    };
    const Matrix g = tanh_backward(up, tanh_forward(x));
    std::vector<double*> xs;
    for (auto& v : x.values()) xs.push_back(&v);
    const auto num = oracle::numeric_gradient(f, xs);
    for (std::size_t i = 0; i < num.size(); ++i) CHECK(oracle::rel_error(g.values()[i], num[i]) < 1e-6);
  }

  TEST_CASE("softmax cross-entropy at symmetric logits") {
    const std::vector<double> logits{0.0, 0.0};
    const auto r = softmax_xent(logits, 0);
    CHECK(r.probabilities[0] == doctest::Approx(0.5));
    CHECK(r.probabilities[1] == doctest::Approx(0.5));
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("confident correct prediction has vanishing loss and gradient") {
    const std::vector<double> logits{60.0, -60.0};
    const auto r = softmax_xent(logits, 0);
    CHECK(r.loss < 1e-12);
    CHECK(std::abs(r.grad_logits[0]) < 1e-12);
    CHECK(std::abs(r.grad_logits[1]) < 1e-12);
  }

  TEST_CASE("gradient is p minus one-hot") {
    std::vector<double> logits{1.0, -1.0};
    const auto r = softmax_xent(logits, 1);
    CHECK(r.probabilities[0] == doctest::Approx(0.8807970779778824).epsilon(1e-14));
    CHECK(r.probabilities[1] == doctest::Approx(0.11920292202211756).epsilon(1e-14));
    CHECK(r.grad_logits[0] == doctest::Approx(0.8807970779778824).epsilon(1e-14));
    CHECK(r.grad_logits[1] == doctest::Approx(0.11920292202211756 - 1.0).epsilon(1e-14));
    auto f = [&] { return softmax_xent(logits, 1).loss; };
    const auto num = oracle::numeric_gradient(f, {&logits[0], &logits[1]});
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(num[i] - r.grad_logits[i]) < 1e-8);
  }

  TEST_CASE("softmax is a probability vector even for large logits") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> logits(1 + rng.below(6));
      for (auto& v : logits) v = rng.uniform(-800, 800);
      const auto p = softmax(logits);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_SUITE("gradient checker") {
  TEST_CASE("square function") {
    std::vector<double> x{3.0};
    const std::vector<double> g{6.0};
    const auto r = grad_check([&] { return x[0] * x[0]; }, x, g);
    CHECK(r.max_rel_error < 1e-9);
  }

  TEST_CASE("detects a planted factor-of-two fault") {
    std::vector<double> x{3.0, -1.5};
    const std::vector<double> g{12.0, -3.0};  // first coordinate doubled
    const auto r = grad_check([&] { return x[0] * x[0] + x[1] * x[1]; }, x, g);
    CHECK(r.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.worst_index == 0);
  }

  TEST_CASE("non-finite loss names the coordinate") {
    std::vector<double> x{1.0, 0.0};
    const std::vector<double> g{0.0, 0.0};
    CHECK_THROWS_AS(grad_check([&] { return std::log(x[1]); }, x, g), NumericError);
  }
}
