#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "gatt/errors.hpp"
#include "gatt/rng.hpp"
#include "gatt/sparse.hpp"

using namespace gatt;

namespace {

// dense mirror for oracle products
std::vector<std::vector<double>> to_dense(const SparseMatrix& m) {
  std::vector<std::vector<double>> d(
      static_cast<std::size_t>(m.size()),
      std::vector<double>(static_cast<std::size_t>(m.size()), 0.0));
  for (int r = 0; r < m.size(); ++r) {
    for (const auto& e : m.row(r)) {
      d[static_cast<std::size_t>(e.row)][static_cast<std::size_t>(e.col)] = e.value;
    }
  }
  return d;
}

SparseMatrix random_matrix(Rng& rng, int n, double density) {
  SparseMatrix m(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (rng.next_double() < density) m.set(r, c, rng.next_double(-2.0, 2.0));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("set/at/contains round-trip") {
  SparseMatrix m(4);
  m.set(1, 2, 0.5);
  m.set(1, 3, -1.0);
  m.set(3, 0, 2.0);
  CHECK(m.contains(1, 2));
  CHECK(m.at(1, 2) == 0.5);
  CHECK(m.at(1, 3) == -1.0);
  CHECK(m.at(3, 0) == 2.0);
  CHECK_FALSE(m.contains(0, 0));
  CHECK(m.at(0, 0) == 0.0);
}

TEST_CASE("row view and row_sum") {
  SparseMatrix m(3);
  m.set(0, 0, 0.25);
  m.set(0, 2, 0.75);
  m.set(2, 1, 1.0);
  CHECK(m.row(0).size() == 2);
  CHECK(m.row(1).empty());
  CHECK(m.row_sum(0) == doctest::Approx(1.0));
  CHECK(m.row_sum(1) == 0.0);
  CHECK(m.row_sum(2) == 1.0);
}

TEST_CASE("identity multiplies as neutral element") {
  Rng rng(11);
  const SparseMatrix m = random_matrix(rng, 8, 0.4);
  const SparseMatrix i = SparseMatrix::identity(8);
  CHECK(i.multiply(m) == m);
  CHECK(m.multiply(i) == m);
}

TEST_CASE("multiply matches dense oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_index(10));
    const SparseMatrix a = random_matrix(rng, n, 0.35);
    const SparseMatrix b = random_matrix(rng, n, 0.35);
    const SparseMatrix c = a.multiply(b);
    const auto da = to_dense(a), db = to_dense(b);
    for (int r = 0; r < n; ++r) {
      for (int col = 0; col < n; ++col) {
        double want = 0.0;
        for (int k = 0; k < n; ++k) {
          want += da[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] *
                  db[static_cast<std::size_t>(k)][static_cast<std::size_t>(col)];
        }
        CHECK(c.at(r, col) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("product of row-stochastic matrices stays row-stochastic") {
  Rng rng(17);
  const int n = 9;
  auto stochastic = [&] {
    SparseMatrix m(n);
    for (int r = 0; r < n; ++r) {
      std::vector<double> w;
      double total = 0.0;
      for (int c = 0; c < n; ++c) {
        w.push_back(rng.next_double());
        total += w.back();
      }
      for (int c = 0; c < n; ++c) m.set(r, c, w[static_cast<std::size_t>(c)] / total);
    }
    return m;
  };
  SparseMatrix p = stochastic().multiply(stochastic()).multiply(stochastic());
  for (int r = 0; r < n; ++r) CHECK(p.row_sum(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("size mismatch rejected") {
  SparseMatrix a(3), b(4);
  CHECK_THROWS_AS(a.multiply(b), ValidationError);
}
