#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lzs/kinetics.hpp"
#include "random_models.hpp"

namespace {

// mpmath: findroot(diff(besselj(8, x)), 9.6)
constexpr double kJ8FirstMax = 9.647421651997216832943254625022148593555;

lzs::KineticParams fig2_kinetics() {
  lzs::KineticParams kp;
  kp.model = lzs::ModelKind::FourLevel;
  kp.gamma_intrawell = 2.0;
  kp.gamma_relax = 2.0;
  kp.gamma01 = 1e-7;
  kp.thermal = lzs::ThermalParams{6e-7, 0.0};
  kp.escape = lzs::EscapeParams{5e-9, 1.4, 100.0};
  kp.photon_m = 8;
  return kp;
}

lzs::LZRateParams fig2_lz() { return lzs::LZRateParams{0.007, 2.0, std::nullopt}; }

lzs::LevelDiagram fig3_diagram() {
  lzs::LevelDiagram d;
  d.epsilon10_slope = 0.002;
  d.crossings = {
      {"delta1", 0.007, {{3, 136}, {12, 153}, {23, 170}, {37, 187}}, 1.0},
      {"delta2", 0.013, {{-2, 153}, {10, 170}, {22, 187}, {38, 204}}, 0.81},
  };
  return d;
}

template <std::size_t N>
void expect_columns_balanced(const lzs::RateMatrix<N>& m) {
  const double scale = m.max_abs();
  for (std::size_t j = 0; j < N; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += m(i, j);
    EXPECT_LE(std::fabs(s), 1e-12 * scale) << "column " << j;
  }
}

TEST(Generator4, ZeroDriveReducesToTwoStateExchange) {
  auto kp = fig2_kinetics();
  kp.escape.prefactor_a = 0.0;
  const auto m = lzs::build_generator_4(kp, {17.0, 0.0}, fig2_lz());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const bool exchange = (i == 0 && j == 1) || (i == 1 && j == 0);
      const bool relax = (j == 2 && i == 1) || (j == 3 && i < 2);
      if (!exchange && !relax) {
        EXPECT_EQ(m(i, j), 0.0) << i << "," << j;
      }
    }
  EXPECT_EQ(m.rate(0, 1), 1e-7);
  EXPECT_EQ(m.rate(1, 0), 6e-7);
}

TEST(Generator4, EncodesRateEquationsExactly) {
  const auto kp = fig2_kinetics();
  const double a = 17.0 * kJ8FirstMax;
  const auto m = lzs::build_generator_4(kp, {17.0, a}, fig2_lz());
  const double w = lzs::lz_rate_resonant(fig2_lz(), 8, kJ8FirstMax);
  const double g = lzs::escape_rate(kp.escape, a);
  EXPECT_EQ(m(2, 0), w);
  EXPECT_EQ(m(0, 2), w);
  // Rows of dp/dt = M p.
  EXPECT_DOUBLE_EQ(m(0, 0), -(w + g + 1e-7));
  EXPECT_EQ(m(0, 1), 6e-7);
  EXPECT_EQ(m(0, 3), 2.0);
  EXPECT_EQ(m(1, 0), 1e-7);
  EXPECT_DOUBLE_EQ(m(1, 1), -(g + 6e-7));
  EXPECT_EQ(m(1, 2), 2.0);
  EXPECT_EQ(m(1, 3), 2.0);
  EXPECT_EQ(m(2, 1), 0.0);
  EXPECT_DOUBLE_EQ(m(2, 2), -(w + 2.0));
  EXPECT_EQ(m(3, 0), g);
  EXPECT_EQ(m(3, 1), g);
  EXPECT_EQ(m(3, 2), 0.0);
  EXPECT_DOUBLE_EQ(m(3, 3), -4.0);
}

TEST(Generator4, ColumnsSumToZeroForRandomDraws) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const auto m = testgen::random_model_4(rng);
    expect_columns_balanced(m);
    EXPECT_NO_THROW(m.validate());
  }
}

TEST(Generator6, ZeroDriveHasNoSidebandRates) {
  lzs::KineticParams kp;
  kp.model = lzs::ModelKind::SixLevel;
  kp.gamma01 = 1e-7;
  const auto m = lzs::build_generator_6(kp, {17.0, 0.0}, fig3_diagram(), 12.0);
  // x = 0 leaves only the m = 0 sideband, far off resonance at eps ~ 150 GHz.
  EXPECT_LT(m(3, 0), 1e-8);
  EXPECT_EQ(m.rate(2, 0), 2.0);
  EXPECT_EQ(m.rate(4, 0), 2.0);
  EXPECT_EQ(m.rate(3, 1), 2.0);
  EXPECT_EQ(m.rate(5, 1), 2.0);
  EXPECT_EQ(m.rate(0, 1), 1e-7);
}

TEST(Generator6, EncodesRateEquationsExactly) {
  lzs::KineticParams kp;
  kp.model = lzs::ModelKind::SixLevel;
  kp.gamma_relax = 2.0;
  kp.dephasing = 2.0;
  kp.thermal = lzs::ThermalParams{5e-7, lzs::beta_from_temperature(0.02)};
  const auto d = fig3_diagram();
  const double flux = 12.0, a = 150.0;
  const auto m = lzs::build_generator_6(kp, {17.0, a}, d, flux);

  const lzs::LZRateParams lz1{0.007, 2.0, std::nullopt};
  const lzs::LZRateParams lz2{0.013, 2.0, std::nullopt};
  const double w1 = lzs::lz_rate(lz1, 17.0, 153.0, a / 17.0);
  const double eps2 = lzs::detuning_at(d.crossings[1], flux);
  const double w2 = lzs::lz_rate(lz2, 17.0, eps2, 0.81 * a / 17.0);
  const double g10 = 5e-7 * std::exp(kp.thermal.beta * 0.024);
  const double g01 = g10 * std::exp(-kp.thermal.beta * 0.024);

  EXPECT_EQ(m(3, 0), w1);
  EXPECT_EQ(m(0, 3), w1);
  EXPECT_EQ(m(2, 1), w1);
  EXPECT_EQ(m(1, 2), w1);
  EXPECT_EQ(m(5, 0), w2);
  EXPECT_EQ(m(0, 5), w2);
  EXPECT_EQ(m(4, 1), w2);
  EXPECT_EQ(m(1, 4), w2);
  EXPECT_NEAR(m(0, 1), g10, 1e-15 * g10);
  EXPECT_NEAR(m(1, 0), g01, 1e-15 * g01);
  // dp5/dt = W05 p0 - (W50 + Gamma) p5
  EXPECT_DOUBLE_EQ(m(5, 5), -(w2 + 2.0));
  EXPECT_DOUBLE_EQ(m(0, 0), -(w1 + w2 + g01));
  expect_columns_balanced(m);
}

TEST(Generator6, FluxOutsideDiagramIsAnError) {
  lzs::KineticParams kp;
  kp.model = lzs::ModelKind::SixLevel;
  EXPECT_THROW(lzs::build_generator_6(kp, {17.0, 10.0}, fig3_diagram(), 60.0),
               lzs::DomainError);
}

TEST(Generator6, LeftRightPermutationAtMirroredFlux) {
  // With beta = 0 the thermal rates do not depend on flux, and the
  // L <-> R relabelling 0<->1, 2<->3, 4<->5 maps M(f) onto M(-f) once the
  // inter-well pair is swapped as well.
  lzs::KineticParams kp;
  kp.model = lzs::ModelKind::SixLevel;
  kp.thermal = lzs::ThermalParams{5e-7, 0.0};
  const auto d = fig3_diagram();
  const std::size_t perm[6] = {1, 0, 3, 2, 5, 4};
  for (double f : {3.0, 10.0, 22.5, 37.0}) {
    const auto mp = lzs::build_generator_6(kp, {17.0, 120.0}, d, f);
    const auto mn = lzs::build_generator_6(kp, {17.0, 120.0}, d, -f);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        EXPECT_EQ(mp(perm[i], perm[j]), mn(i, j)) << "f=" << f << " " << i << j;
  }
}

TEST(SteadyState, TwoStateDetailedBalance) {
  auto kp = fig2_kinetics();
  kp.escape.prefactor_a = 0.0;
  const auto p = lzs::steady_state(lzs::build_generator_4(kp, {17.0, 0.0}, fig2_lz()));
  EXPECT_NEAR(p[1] / p[0], 1e-7 / 6e-7, 1e-12);
  EXPECT_NEAR(p[1], 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(lzs::left_population(p), 1.0 / 7.0, 1e-12);
}

TEST(SteadyState, UniformGeneratorGivesUniformVector) {
  lzs::RateMatrix<6> m;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i != j) m.add_transition(i, j, 0.3);
  const auto p = lzs::steady_state(m);
  for (double x : p.p) EXPECT_NEAR(x, 1.0 / 6.0, 1e-15);
}

TEST(SteadyState, ResidualAndSimplex) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto m = i % 2 ? testgen::random_dense<6>(rng) : testgen::random_model_6(rng);
    const auto p = lzs::steady_state(m);
    EXPECT_NEAR(p.sum(), 1.0, 1e-10);
    for (double x : p.p) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    EXPECT_LE(lzs::norm_inf(lzs::multiply(m.entries(), p.p)),
              1e-12 * lzs::norm_inf(m.entries()));
  }
}

TEST(SteadyState, DegenerateChainIsReported) {
  // Two disconnected pairs: two recurrent classes.
  lzs::RateMatrix<4> m;
  m.add_transition(0, 1, 1.0);
  m.add_transition(1, 0, 1.0);
  m.add_transition(2, 3, 1.0);
  m.add_transition(3, 2, 1.0);
  EXPECT_THROW(lzs::steady_state(m), lzs::DegenerateChain);
  EXPECT_THROW(lzs::steady_state(lzs::RateMatrix<4>{}), lzs::DegenerateChain);
}

TEST(SteadyState, InvalidGeneratorRejected) {
  lzs::Mat<4> a{};
  a[0][1] = 1.0;  // column 1 no longer sums to zero
  EXPECT_THROW(lzs::steady_state(lzs::RateMatrix<4>(a)), lzs::DomainError);
}

TEST(SteadyState, ZeroDriveLimitClosedForm) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto kp = fig2_kinetics();
    kp.escape.prefactor_a = 0.0;
    kp.gamma01 = testgen::log_uniform(rng, 1e-9, 1e-4);
    kp.thermal.base_rate = testgen::log_uniform(rng, 1e-9, 1e-4);
    const auto p = lzs::steady_state(lzs::build_generator_4(kp, {17.0, 0.0}, fig2_lz()));
    const double expected = *kp.gamma01 / (*kp.gamma01 + kp.thermal.base_rate);
    EXPECT_NEAR(lzs::left_population(p), expected, 1e-12);
  }
}

TEST(SteadyState, HighDriveLimitIsHalf) {
  const auto kp = fig2_kinetics();
  for (double a = 17.0; a <= 1700.0; a += 17.0) {
    const auto m = lzs::build_generator_4(kp, {17.0, a}, fig2_lz());
    const double w = m.rate(0, 2);
    const double g = m.rate(0, 3);
    if (g > 100.0 * std::max({w, 6e-7, 1e-7})) {
      EXPECT_NEAR(lzs::left_population(lzs::steady_state(m)), 0.5, 0.02) << "A=" << a;
    }
  }
}

TEST(LeftPopulation, Basis) {
  EXPECT_EQ(lzs::left_population(lzs::Occupation<4>::basis(0)), 0.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<4>::basis(1)), 1.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<4>::basis(2)), 1.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<4>::basis(3)), 0.5);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(0)), 0.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(1)), 1.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(2)), 0.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(3)), 1.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(4)), 0.0);
  EXPECT_EQ(lzs::left_population(lzs::Occupation<6>::basis(5)), 1.0);
}

TEST(Labels, LevelNames) {
  EXPECT_EQ(lzs::level_labels<4>()[3], "|N>");
  EXPECT_EQ(lzs::level_labels<6>()[4], "|(n+1)R>");
}

}  // namespace
