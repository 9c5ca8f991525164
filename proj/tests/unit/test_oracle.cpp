#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace carleson;
using carleson::testing::Cd;

namespace {

double eigen_op_norm_sq(const EmbeddingMatrix<double>& e) {
  Eigen::SelfAdjointEigenSolver<EmbeddingMatrix<double>> solver(e.adjoint() * e);
  return solver.eigenvalues().maxCoeff();
}

Measure<double> random_atoms(std::mt19937_64& rng, int count, double max_log2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MeasureComponent<double>> atoms;
  for (int j = 0; j < count; ++j) {
    const double r = std::exp2(max_log2 * u(rng)) + 0.3;
    atoms.emplace_back(Atom<double>{std::polar(r, 6.283185307179586 * u(rng)), 0.1 + u(rng)});
  }
  return Measure<double>(std::move(atoms));
}

}  // namespace

TEST_CASE("embedding matrix entries") {
  auto space = testing::s1_space(6);
  Measure<double> mu({Atom<double>{Cd(0.0, 3.0), 4.0}, Atom<double>{Cd(-1.0, 0.0), 0.25}});
  const auto e = build_embedding(space, mu);
  REQUIRE(e.rows() == 2);
  REQUIRE(e.cols() == 6);
  CHECK(std::abs(e(0, 1) - 2.0 / (Cd(0.0, 3.0) - 4.0)) < 1e-15);
  CHECK(std::abs(e(1, 0) - 0.5 / (Cd(-1.0, 0.0) - 2.0)) < 1e-15);
  CHECK_THROWS_AS(build_embedding(space, Measure<double>({CircleUniform<double>{3.0, 1.0}})), InvalidInstance);
  CHECK_THROWS_AS(build_embedding(space, Measure<double>({Atom<double>{Cd(8.0, 0.0), 1.0}})), PointOnGamma);
}

TEST_CASE("single atom: operator norm is w times the kernel norm") {
  auto space = testing::s1_space(30);
  for (Cd z : {Cd(0.0, 3.0), Cd(5.0, 5.0), Cd(-1000.0, 1.0)}) {
    Measure<double> mu({Atom<double>{z, 1.7}});
    const auto est = operator_norm_sq(build_embedding(space, mu));
    CHECK(est.converged);
    CHECK(testing::rel_diff(est.value, 1.7 * kernel_norm_sq(space, z)) <= 1e-13);
  }
}

TEST_CASE("two atoms: 2x2 Gram matrix in closed form") {
  // G = [[a, b], [conj b, a]] with a = k_z(z) for z = +-3i, b = k_{-3i}(3i);
  // the top eigenvalue is a + |b|.
  auto space = testing::s1_space(20);
  const Cd z1(0.0, 3.0), z2(0.0, -3.0);
  Measure<double> mu({Atom<double>{z1, 1.0}, Atom<double>{z2, 1.0}});
  const double a = kernel_norm_sq(space, z1);
  CHECK(testing::rel_diff(a, kernel_norm_sq(space, z2)) <= 1e-15);
  const Cd b = kernel_eval(space, z2, z1);
  const auto est = operator_norm_sq(build_embedding(space, mu));
  CHECK(est.converged);
  CHECK(testing::rel_diff(est.value, a + std::abs(b)) <= 1e-10);

  const auto summary = spectral_summary(build_embedding(space, mu), 2, {});
  REQUIRE(summary.top_singular_values.size() == 2);
  CHECK(testing::rel_diff(summary.top_singular_values[1] * summary.top_singular_values[1], a - std::abs(b)) <= 1e-8);
  CHECK(testing::rel_diff(summary.frobenius_sq, 2.0 * a) <= 1e-14);
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
  std::mt19937_64 rng(2024);
  auto space = testing::geometric_space(2.5, 24, [](Index n) { return std::pow(1.3, static_cast<double>(n)); });
  for (int trial = 0; trial < 25; ++trial) {
    const auto mu = random_atoms(rng, 5 + trial * 3, 30.0);
    const auto e = build_embedding(space, mu);
    const auto est = operator_norm_sq(e);
    CHECK(est.converged);
    CHECK(testing::rel_diff(est.value, eigen_op_norm_sq(e)) <= 1e-8);

    const auto summary = spectral_summary(e, 3, {});
    Eigen::SelfAdjointEigenSolver<EmbeddingMatrix<double>> solver(e.adjoint() * e);
    const auto ev = solver.eigenvalues();
    for (std::size_t i = 0; i < summary.top_singular_values.size(); ++i) {
      const double expected = std::sqrt(std::max(0.0, ev[ev.size() - 1 - static_cast<Index>(i)]));
      CHECK(std::abs(summary.top_singular_values[i] - expected) <= 1e-6 * summary.op_norm);
    }
  }
}

TEST_CASE("operator norm invariants") {
  std::mt19937_64 rng(99);
  auto space = testing::s1_space(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = random_atoms(rng, 40, 31.0);
    const double base = operator_norm_sq(build_embedding(space, mu)).value;

    auto atoms = mu.atoms();
    std::shuffle(atoms.begin(), atoms.end(), rng);
    std::vector<MeasureComponent<double>> permuted(atoms.begin(), atoms.end());
    CHECK(testing::rel_diff(operator_norm_sq(build_embedding(space, Measure<double>(permuted))).value, base) <= 1e-9);

    const double t = 0.01 + 10.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(testing::rel_diff(operator_norm_sq(build_embedding(space, mu.scaled(t))).value, t * base) <= 1e-9);

    permuted.pop_back();
    CHECK(operator_norm_sq(build_embedding(space, Measure<double>(permuted))).value <= base * (1.0 + 1e-9));

    const auto e = build_embedding(space, mu);
    CHECK(testing::rel_diff(frobenius_sq(e), hs_check(space, mu).hs_exact) <= 1e-10);
    for (TestFunction kind : {TestFunction::q, TestFunction::g, TestFunction::h})
      for (Index n = 1; n + 1 < space.size(); ++n)
        CHECK((e * normalized_coefficients(space, test_function(space, kind, n))).squaredNorm() <= base * (1.0 + 1e-9));
  }
}

TEST_CASE("empty measure has zero operator") {
  auto space = testing::s1_space(10);
  const auto summary = spectral_summary(build_embedding(space, Measure<double>()), 3, {0, 5});
  CHECK(summary.op_norm == 0.0);
  CHECK(summary.frobenius_sq == 0.0);
  for (const auto& [cut, norm] : summary.tail_norms) CHECK(norm == 0.0);
}

TEST_CASE("tail norms") {
  auto space = testing::s1_space(20);
  std::vector<Index> grid;
  for (Index n = 0; n < 20; ++n) grid.push_back(n);

  SUBCASE("non-compact fixture stays flat") {
    const auto mu = testing::shifted_atoms(2, 20, testing::unit_weight);
    const auto s = spectral_summary(build_embedding(space, mu), 1, grid);
    for (const auto& [cut, norm] : s.tail_norms) CHECK(norm >= 0.9);
  }
  SUBCASE("compact fixture decays under the column Frobenius bound") {
    const auto mu = testing::shifted_atoms(2, 20, testing::quarter_power);
    const auto e = build_embedding(space, mu);
    const auto s = spectral_summary(e, 1, grid);
    for (std::size_t i = 1; i < s.tail_norms.size(); ++i) CHECK(s.tail_norms[i].second <= s.tail_norms[i - 1].second);
    for (const auto& [cut, norm] : s.tail_norms) {
      double bound = 0.0;
      for (Index n = cut; n < 20; ++n) bound += e.col(n).squaredNorm();
      CHECK(norm * norm <= bound * (1.0 + 1e-12));
    }
    // |2^j + 1 - 2^n| >= 2^{max(j,n)-2} bounds the cross terms: each column n
    // carries at most 4^{-n} (1 + 16/12) + (16/15) 16^{-n} <= 2.4 * 4^{-n}, and
    // summing n = 16..20 gives at most 3.2 * 4^{-16}.
    const double at15 = s.tail_norms[15].second;
    CHECK(at15 * at15 <= 3.2 * std::ldexp(1.0, -32));
    CHECK(at15 * at15 >= std::ldexp(1.0, -32));
  }
}

TEST_CASE("validate: consistency records on the fixtures") {
  auto space = testing::s1_space(20);
  SUBCASE("compact") {
    const auto mu = testing::shifted_atoms(2, 20, testing::quarter_power);
    const auto q = quantity_sequences(space, mu);
    const auto c = carleson_check(space, mu, q);
    const auto k = compactness_check(space, mu, q, c);
    const auto r = validate(space, mu, c, k);
    CHECK(r.record.consistent());
    CHECK(r.record.tail_trend == "decaying");
    CHECK(r.record.ratio > 0.0);
  }
  SUBCASE("non-compact") {
    const auto mu = testing::shifted_atoms(2, 20, testing::unit_weight);
    const auto q = quantity_sequences(space, mu);
    const auto c = carleson_check(space, mu, q);
    const auto k = compactness_check(space, mu, q, c);
    REQUIRE(k.verdict == Verdict::fails);
    const auto r = validate(space, mu, c, k);
    CHECK(r.record.consistent());
    CHECK(r.record.tail_trend == "flat");
  }
  SUBCASE("continuous components are discretized") {
    Measure<double> mu({CircleUniform<double>{3.0, 1.0}, RadialPower<double>{20.0, 30.0, 0.5, 1.0}});
    const auto q = quantity_sequences(space, mu);
    const auto c = carleson_check(space, mu, q);
    const auto k = compactness_check(space, mu, q, c);
    ValidationOptions opts;
    opts.resolution = 32;
    const auto r = validate(space, mu, c, k, opts);
    CHECK(r.record.discretized_atoms == 32 + 32 * 32);
    CHECK(r.record.consistent());
    CHECK(r.record.tail_trend == "finite_rank");
  }
}
