#include "doctest.h"

#include <cmath>
#include <limits>

#include "fixtures.hpp"

using namespace carleson;
using carleson::testing::Cd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double geometric_tail(int first, int last) {
  // sum_{m=first}^{last} 4^{-m}, summed from the small end.
  double s = 0.0;
  for (int m = last; m >= first; --m) s += std::ldexp(1.0, -2 * m);
  return s;
}

}  // namespace

TEST_CASE("quantity sequences: single atom at 3i over S1") {
  auto space = testing::s1_space(40);
  Measure<double> mu({Atom<double>{Cd(0.0, 3.0), 1.0}});
  const auto q = quantity_sequences(space, mu);
  for (Index n = 0; n < 40; ++n) CHECK(q.A[n] == (n == 1 ? doctest::Approx(1.0 / 25.0).epsilon(1e-15) : doctest::Approx(0.0)));
  CHECK(q.D[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  // D_2 = P_2 * mu(Omega_1 u Omega_2) = sum_{m>=3} 4^{-m} = 1/48 in the limit.
  CHECK(q.D[1] == doctest::Approx(geometric_tail(3, 40)).epsilon(1e-14));
  CHECK(q.P[1] <= 1.0 / 48.0);
  CHECK(q.P_upper[1] >= 1.0 / 48.0 * (1.0 - 1e-15));
  CHECK(q.P_upper[1] - q.P[1] < 1e-24);
  for (Index n = 0; n < 40; ++n) CHECK(q.Vhat[n] == static_cast<double>(n + 1));
}

TEST_CASE("empty measure") {
  auto space = testing::s1_space(40);
  Measure<double> empty;
  const auto q = quantity_sequences(space, empty);
  CHECK(q.A.isZero(0.0));
  CHECK(q.D.isZero(0.0));
  CHECK(q.mass.isZero(0.0));
  const auto cert = carleson_check(space, empty, q);
  CHECK(cert.verdict == Verdict::holds);
  CHECK(cert.c_star == 0.0);
  CHECK(compactness_check(space, empty).verdict == Verdict::holds);
  const auto hs = hs_check(space, empty);
  CHECK(hs.hs_exact == 0.0);
  CHECK(hs.hs_finite);
}

TEST_CASE("non-compact fixture: unit atoms next to every node") {
  auto space = testing::s1_space(40);
  const auto mu = testing::shifted_atoms(2, 40, testing::unit_weight);
  const auto q = quantity_sequences(space, mu);
  for (Index n = 1; n < 40; ++n) CHECK(std::abs(q.A[n] - 1.0) <= 1e-12);
  CHECK(q.A[0] == 0.0);
  const auto carleson = carleson_check(space, mu, q);
  CHECK(carleson.verdict == Verdict::holds);
  CHECK(carleson.tail == TailMode::stabilized);
  CHECK(std::isfinite(carleson.sup_D));
  CHECK(carleson.c_star >= 1.0);
  const auto compact = compactness_check(space, mu, q, carleson);
  CHECK(compact.verdict == Verdict::fails);
  CHECK(compact.window_min_A == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("with room beyond the support the measure is finite rank") {
    auto wide = testing::s1_space(64);
    CHECK(compactness_check(wide, mu).verdict == Verdict::holds);
    CHECK(compactness_check(wide, mu).tail == TailMode::exhausted);
  }
}

TEST_CASE("compact fixture: weights 4^-n") {
  auto space = testing::s1_space(40);
  const auto mu = testing::shifted_atoms(2, 40, testing::quarter_power);
  const auto q = quantity_sequences(space, mu);
  for (Index n = 1; n < 40; ++n) CHECK(q.A[n] == doctest::Approx(std::ldexp(1.0, -2 * static_cast<int>(n + 1))).epsilon(1e-14));
  const auto carleson = carleson_check(space, mu, q);
  CHECK(carleson.verdict == Verdict::holds);
  const auto compact = compactness_check(space, mu, q, carleson);
  CHECK(compact.verdict == Verdict::holds);
  CHECK(compact.tail == TailMode::stabilized);
  CHECK(compact.decay_ratio_A == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(compact.decay_ratio_D < 1.0 - 1e-3);

  const auto hs = hs_check(space, mu, q);
  CHECK(hs.hs_finite);
  CHECK(hs.condition_finite);
  CHECK(hs.local_sum > 0.0);
  CHECK(hs.global_sum > 0.0);
}

TEST_CASE("singular circle through a node") {
  auto space = testing::s1_space(40);
  Measure<double> mu({CircleUniform<double>{4.0, 1.0}});
  const auto q = quantity_sequences(space, mu);
  CHECK(q.A[1] == kInf);
  const auto carleson = carleson_check(space, mu, q);
  CHECK(carleson.verdict == Verdict::fails);
  CHECK(compactness_check(space, mu, q, carleson).verdict == Verdict::fails);
  const auto hs = hs_check(space, mu, q);
  CHECK(hs.hs_exact == kInf);
  CHECK_FALSE(hs.hs_finite);
  CHECK_FALSE(hs.condition_finite);
}

TEST_CASE("window rules") {
  auto space = testing::s1_space(40);
  SUBCASE("geometric growth fails boundedness") {
    const auto mu = testing::shifted_atoms(2, 40, [](long n) { return std::ldexp(1.0, static_cast<int>(n)); });
    CHECK(carleson_check(space, mu).verdict == Verdict::fails);
  }
  SUBCASE("oscillation is inconclusive for boundedness, fails compactness") {
    const auto mu = testing::shifted_atoms(2, 40, [](long n) { return n % 2 == 0 ? 1.0 : 2.0; });
    const auto q = quantity_sequences(space, mu);
    const auto c = carleson_check(space, mu, q);
    CHECK(c.verdict == Verdict::inconclusive);
    CHECK(compactness_check(space, mu, q, c).verdict == Verdict::fails);
    CriteriaOptions declared;
    declared.tail_monotone = true;
    const auto d = carleson_check(space, mu, q, declared);
    CHECK(d.verdict == Verdict::holds);
    CHECK(d.tail == TailMode::declared_monotone);
  }
  SUBCASE("slow decay below the floor is inconclusive") {
    // A_n ~ 1e-12 (1 - 1e-4 n): tiny, decaying, but by less than the margin.
    const auto mu = testing::shifted_atoms(2, 40, [](long n) { return 1e-12 * (1.0 - 1e-4 * static_cast<double>(n)); });
    CHECK(compactness_check(space, mu).verdict == Verdict::inconclusive);
  }
}

TEST_CASE("finite atomic measures inside the window are compact") {
  auto space = testing::s1_space(40);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MeasureComponent<double>> atoms;
    for (int j = 0; j < 30; ++j) {
      const double r = std::ldexp(1.0, 1 + static_cast<int>(30 * u(rng))) * (0.8 + 0.6 * u(rng));
      atoms.emplace_back(Atom<double>{std::polar(r, 6.28 * u(rng)), u(rng)});
    }
    Measure<double> mu(std::move(atoms));
    CHECK(compactness_check(space, mu).verdict == Verdict::holds);
  }
}

TEST_CASE("hs_exact of a single atom is w times the kernel norm") {
  auto space = testing::geometric_space(2.3, 30, [](Index n) { return std::pow(1.5, static_cast<double>(n)); });
  for (Cd z : {Cd(0.0, 3.0), Cd(-7.0, 2.0), Cd(100.0, -1.0)}) {
    Measure<double> mu({Atom<double>{z, 2.5}});
    const auto hs = hs_check(space, mu);
    CHECK(testing::rel_diff(hs.hs_exact, 2.5 * kernel_norm_sq(space, z)) <= 1e-13);
  }
}

TEST_CASE("scaling and monotonicity of the certificate quantities") {
  auto space = testing::s1_space(40);
  const auto mu = testing::shifted_atoms(2, 40, testing::quarter_power)
                      .with_component(CircleUniform<double>{5.0, 0.5})
                      .with_component(RadialPower<double>{20.0, 30.0, 1.0, 0.1});
  const auto base_q = quantity_sequences(space, mu);
  const auto base_c = carleson_check(space, mu, base_q);
  const auto base_k = compactness_check(space, mu, base_q, base_c);
  const auto base_h = hs_check(space, mu, base_q);
  for (double t : {0.25, 3.7, 1e3}) {
    const auto scaled = mu.scaled(t);
    const auto q = quantity_sequences(space, scaled);
    for (Index n = 0; n < 40; ++n) {
      CHECK(testing::rel_diff(q.A[n], t * base_q.A[n]) <= 1e-12);
      CHECK(testing::rel_diff(q.tau_sq[n], t * base_q.tau_sq[n]) <= 1e-12);
      CHECK(testing::rel_diff(q.mass[n], t * base_q.mass[n]) <= 1e-12);
      CHECK(testing::rel_diff(q.D[n], t * base_q.D[n]) <= 1e-12);
    }
    CHECK(testing::rel_diff(hs_check(space, scaled, q).hs_exact, t * base_h.hs_exact) <= 1e-12);
    const auto c = carleson_check(space, scaled, q);
    CHECK(c.verdict == base_c.verdict);
    CHECK(compactness_check(space, scaled, q, c).verdict == base_k.verdict);
  }
  const auto bigger = mu.with_component(Atom<double>{Cd(0.0, 50.0), 0.3});
  const auto q = quantity_sequences(space, bigger);
  for (Index n = 0; n < 40; ++n) {
    CHECK(q.A[n] >= base_q.A[n]);
    CHECK(q.D[n] >= base_q.D[n]);
  }
  CHECK(hs_check(space, bigger, q).hs_exact >= base_h.hs_exact);
}

TEST_CASE("q_n energies dominate the local quantities") {
  auto space = testing::s1_space(40);
  const auto mu = testing::shifted_atoms(2, 40, testing::unit_weight).with_component(CircleUniform<double>{100.0, 3.0});
  const auto q = quantity_sequences(space, mu);
  const auto energy = q_energy(space, mu);
  for (Index n = 0; n < 40; ++n) CHECK(energy[n] >= q.A[n]);
}

TEST_CASE("corollary regimes") {
  auto exp_space = testing::geometric_space(4.0, 30, [](Index n) { return std::ldexp(1.0, static_cast<int>(n)); });
  auto r = corollary_regime(exp_space);
  CHECK(r.cor_exp_weights);
  CHECK_FALSE(r.cor_summable);
  CHECK(r.min_weight_ratio == 2.0);
  CHECK(r.max_decay_ratio == doctest::Approx(0.125).epsilon(1e-15));

  auto summable = testing::geometric_space(2.0, 30, [](Index n) { return std::ldexp(1.0, -static_cast<int>(n)); });
  CHECK(corollary_regime(summable).cor_summable);

  r = corollary_regime(testing::s1_space(30));
  CHECK_FALSE(r.cor_exp_weights);
  CHECK_FALSE(r.cor_summable);
}
