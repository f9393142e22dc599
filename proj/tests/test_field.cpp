#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "freechan/checkpoint.hpp"
#include "freechan/field.hpp"
#include "test_util.hpp"

using namespace freechan;
using testutil::gaussian;
using testutil::random_state;

TEST(Grid, SpacingAndFrequencyRange) {
  const Grid g = make_grid(1, 256, 100.0);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.78125);
  EXPECT_DOUBLE_EQ(g.spacing(0) * 256, 200.0);
  EXPECT_NEAR(g.max_frequency(0), std::numbers::pi * 256 / 200, 1e-14);
  EXPECT_DOUBLE_EQ(g.frequency(0, 128), -g.max_frequency(0));
}

TEST(Grid, TwoDimensional) {
  const Grid g = make_grid(2, 64, 20.0);
  EXPECT_EQ(g.size(), 4096u);
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.625);
}

TEST(Grid, BudgetAndPowerOfTwo) {
  EXPECT_THROW(make_grid(1, std::size_t{1} << 25, 1.0), ConfigError);
  try {
    make_grid(2, 1000, 1.0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1024"), std::string::npos);
  }
  try {
    const std::array<std::size_t, 3> n{64, 1 << 12, 1 << 12};
    const std::array<double, 3> l{1, 1, 1};
    make_grid(3, n, l);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("axis 2"), std::string::npos);
  }
  EXPECT_THROW(make_grid(4, 16, 1.0), ConfigError);
  EXPECT_THROW(make_grid(1, 8, 1.0), ConfigError);
  EXPECT_THROW(make_grid(1, 16, -1.0), ConfigError);
}

TEST(SpectralTransform, RoundTrip) {
  for (int dims = 1; dims <= 3; ++dims) {
    const Grid g = make_grid(dims, dims == 3 ? 16 : 64, 7.0);
    const WaveFunction w = random_state(g, 5 + dims);
    const WaveFunction back = spectral_transform(spectral_transform(w, Direction::to_frequency), Direction::to_position);
    EXPECT_LE(distance(back, w) / norm(w), 1e-12);
  }
}

TEST(SpectralTransform, RepresentationMismatch) {
  const Grid g = make_grid(1, 64, 7.0);
  const WaveFunction w = random_state(g, 1);
  EXPECT_THROW(spectral_transform(w, Direction::to_position), UsageError);
  const auto f = spectral_transform(w, Direction::to_frequency);
  EXPECT_THROW(spectral_transform(f, Direction::to_frequency), UsageError);
}

TEST(SpectralTransform, GaussianPair) {
  // (2 pi)^{-1/2} int e^{-ikx} e^{-x^2/(2 s^2)} dx = s e^{-s^2 k^2 / 2}
  const double s = 1.7;
  const Grid g = make_grid(1, 512, 30.0);
  const auto f = spectral_transform(gaussian(g, s), Direction::to_frequency);
  double err = 0;
  for_each_frequency(g, [&](std::size_t i, const Point& k) {
    err = std::max(err, std::abs(f.values[i] - cplx(s * std::exp(-s * s * k[0] * k[0] / 2), 0)));
  });
  EXPECT_LE(err, 1e-12);
}

TEST(SpectralTransform, GaussianPair2D) {
  const double s = 1.3;
  const Grid g = make_grid(2, 128, 12.0);
  const auto f = spectral_transform(gaussian(g, s), Direction::to_frequency);
  double err = 0;
  for_each_frequency(g, [&](std::size_t i, const Point& k) {
    const double k2 = k[0] * k[0] + k[1] * k[1];
    err = std::max(err, std::abs(f.values[i] - cplx(s * s * std::exp(-s * s * k2 / 2), 0)));
  });
  EXPECT_LE(err, 1e-12);
}

TEST(SpectralTransform, PlaneWaveSingleBin) {
  const Grid g = make_grid(1, 128, 10.0);
  const std::size_t m0 = 5;
  const double k0 = g.frequency(0, m0);
  auto w = WaveFunction::zeros(g);
  for_each_position(g, [&](std::size_t i, const Point& x) { w.values[i] = std::polar(1.0, k0 * x[0]); });
  const auto f = spectral_transform(w, Direction::to_frequency);
  for (std::size_t m = 0; m < g.size(); ++m) {
    if (m == m0) EXPECT_GT(std::abs(f.values[m]), 1.0);
    else EXPECT_LE(std::abs(f.values[m]), 1e-12);
  }
}

TEST(Norm, Parseval) {
  for (int dims = 1; dims <= 3; ++dims) {
    const Grid g = make_grid(dims, dims == 3 ? 32 : 128, 5.0);
    const WaveFunction w = random_state(g, 17);
    const auto f = spectral_transform(w, Direction::to_frequency);
    const double a = norm(w), b = norm(f);
    EXPECT_LE(std::abs(a * a - b * b), 1e-10 * a * a);
  }
}

TEST(Norm, NormalizedGaussian) {
  const double s = 2.0;
  const Grid g = make_grid(1, 1024, 40.0);
  auto w = gaussian(g, s);
  const double c = std::pow(std::numbers::pi * s * s, -0.25);
  for (auto& v : w.values) v *= c;
  EXPECT_NEAR(norm(w), 1.0, 1e-10);
}

TEST(Norm, SobolevPlaneWave) {
  const Grid g = make_grid(1, 128, 10.0);
  const double k0 = g.frequency(0, 7);
  auto w = WaveFunction::zeros(g);
  for_each_position(g, [&](std::size_t i, const Point& x) { w.values[i] = std::polar(1.0, k0 * x[0]); });
  EXPECT_NEAR(norm(w, NormSpec::Ha(1.0)), std::sqrt(1 + k0 * k0) * norm(w), 1e-10);
}

TEST(Norm, GaussianL6) {
  // (int e^{-6 x^2 / (2 s^2)})^{1/6} = (s sqrt(pi/3))^{1/6}
  const double s = 1.5;
  const Grid g = make_grid(1, 1024, 30.0);
  const auto w = gaussian(g, s);
  EXPECT_NEAR(norm(w, NormSpec::Lp(6)), std::pow(s * std::sqrt(std::numbers::pi / 3), 1.0 / 6), 1e-12);
  EXPECT_NEAR(norm(w, NormSpec::Linf()), 1.0, 1e-12);
  EXPECT_THROW(norm(w, NormSpec::Lp(0.5)), DomainError);
}

TEST(Norm, WeightedL2) {
  // int (1 + x^2) e^{-x^2/s^2} = s sqrt(pi) (1 + s^2/2)
  const double s = 1.2;
  const Grid g = make_grid(1, 1024, 30.0);
  const auto w = gaussian(g, s);
  EXPECT_NEAR(norm(w, NormSpec::WeightedL2(1.0)), std::sqrt(s * std::sqrt(std::numbers::pi) * (1 + s * s / 2)), 1e-10);
}

TEST(Multiplier, IdentityAndContraction) {
  const Grid g = make_grid(2, 32, 4.0);
  const WaveFunction w = random_state(g, 3);
  const RealField one(g.size(), 1.0);
  EXPECT_LE(distance(apply_multiplier(w, one, Space::position), w), 1e-14);
  EXPECT_LE(distance(apply_multiplier(w, one, Space::frequency), w) / norm(w), 1e-13);
  RealField half(g.size(), 0.0);
  for (std::size_t i = 0; i < half.size() / 2; ++i) half[i] = 1.0;
  EXPECT_LE(norm(apply_multiplier(w, half, Space::position)), norm(w));
  EXPECT_LE(norm(apply_multiplier(w, half, Space::frequency)), norm(w) * (1 + 1e-14));
  EXPECT_THROW(apply_multiplier(w, RealField(3, 1.0), Space::position), UsageError);
}

TEST(Multiplier, Composition) {
  const Grid g = make_grid(1, 256, 10.0);
  const WaveFunction w = random_state(g, 9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Space sp : {Space::position, Space::frequency}) {
    RealField a(g.size()), b(g.size()), ab(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      ab[i] = a[i] * b[i];
    }
    const auto lhs = apply_multiplier(apply_multiplier(w, b, sp), a, sp);
    const auto rhs = apply_multiplier(w, ab, sp);
    EXPECT_LE(distance(lhs, rhs) / norm(w), 1e-12);
  }
}

TEST(Multiplier, KeepsRepresentation) {
  const Grid g = make_grid(1, 64, 10.0);
  const auto f = spectral_transform(random_state(g, 4), Direction::to_frequency);
  const RealField one(g.size(), 1.0);
  const auto r = apply_multiplier(f, one, Space::position);
  EXPECT_EQ(r.representation, Representation::frequency);
  EXPECT_LE(distance(r, f) / norm(f), 1e-13);
}

TEST(Multiplier, FreeGaussianClosedForm) {
  const double s = 1.0, t = 3.0;
  const Grid g = make_grid(1, 2048, 80.0);
  const RealField k2 = sample_frequency(g, [](const Point& k) { return k[0] * k[0]; });
  ComplexField phase(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phase[i] = std::polar(1.0, -t * k2[i]);
  const auto out = apply_multiplier(gaussian(g, s), std::span<const cplx>(phase), Space::frequency);
  double err = 0;
  for_each_position(g, [&](std::size_t i, const Point& x) {
    err = std::max(err, std::abs(out.values[i] - testutil::free_gaussian_1d(x[0], t, s)));
  });
  EXPECT_LE(err, 1e-12);
}

TEST(InnerProduct, Properties) {
  const Grid g = make_grid(2, 32, 6.0);
  const WaveFunction a = random_state(g, 1), b = random_state(g, 2);
  EXPECT_NEAR(inner_product(a, a).real(), norm(a) * norm(a), 1e-10 * norm(a) * norm(a));
  const cplx c{0.3, -1.1};
  EXPECT_LE(std::abs(inner_product(c * a, b) - std::conj(c) * inner_product(a, b)), 1e-10);
  const cplx pos = inner_product(a, b);
  const cplx fr = inner_product(spectral_transform(a, Direction::to_frequency), spectral_transform(b, Direction::to_frequency));
  EXPECT_LE(std::abs(pos - fr), 1e-10 * norm(a) * norm(b));
  EXPECT_THROW(inner_product(a, spectral_transform(b, Direction::to_frequency)), UsageError);
  EXPECT_THROW(inner_product(a, random_state(make_grid(2, 16, 6.0), 3)), UsageError);
}

TEST(InnerProduct, OrthogonalPlaneWaves) {
  const Grid g = make_grid(1, 128, 10.0);
  auto pw = [&](std::size_t m) {
    auto w = WaveFunction::zeros(g);
    for_each_position(g, [&](std::size_t i, const Point& x) { w.values[i] = std::polar(1.0, g.frequency(0, m) * x[0]); });
    return w;
  };
  EXPECT_LE(std::abs(inner_product(pw(3), pw(8))), 1e-12);
}

TEST(XMoment, GaussianFirstAbsoluteMoment) {
  // |psi|^2 of the normalized exp(-x^2/(2 s^2)) is N(0, s^2/2); E|x| = s / sqrt(pi).
  const double s = 2.0;
  const Grid g = make_grid(1, 2048, 40.0);
  auto w = gaussian(g, s);
  const double n = norm(w);
  for (auto& v : w.values) v /= n;
  // lattice sum of |x| rho has the kink error -(dx^2 / 6) rho(0), rho(0) = 1 / (s sqrt(pi))
  const double dx = g.spacing(0);
  const double rho0 = 1.0 / (s * std::sqrt(std::numbers::pi));
  EXPECT_NEAR(x_moment(w), s / std::sqrt(std::numbers::pi) - dx * dx / 6 * rho0, 1e-8);
  // <x> weight: int sqrt(1 + x^2) dN, checked against direct quadrature of the density.
  double ref = 0;
  const double var = s * s / 2;
  for (int i = -400000; i <= 400000; ++i) {
    const double x = i * 1e-4;
    ref += std::sqrt(1 + x * x) * std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var) * 1e-4;
  }
  EXPECT_NEAR(x_moment(w, MomentWeight::Bracket()), ref, 1e-8);
}

TEST(XMoment, TranslationCovariance) {
  const Grid g = make_grid(2, 64, 16.0);
  const double d = 8 * g.spacing(0);
  const auto a = gaussian(g, 1.5);
  const auto b = gaussian(g, 1.5, {d, -d, 0});
  EXPECT_NEAR(x_moment(a), x_moment(b, MomentWeight::Abs({d, -d, 0})), 1e-10);
  EXPECT_EQ(x_moment(WaveFunction::zeros(g)), 0.0);
  EXPECT_THROW(x_moment(spectral_transform(a, Direction::to_frequency)), UsageError);
}

TEST(BoundaryMass, Shell) {
  const Grid g = make_grid(1, 256, 10.0);
  EXPECT_LE(boundary_mass_fraction(gaussian(g, 1.0)), 1e-20);
  auto w = WaveFunction::zeros(g);
  for (auto& v : w.values) v = 1.0;
  EXPECT_NEAR(boundary_mass_fraction(w), 0.1, 2.0 / 256);
}

TEST(Checkpoint, RoundTripBitIdentical) {
  const Grid g = make_grid(2, 32, 3.5);
  WaveFunction w = random_state(g, 12);
  w.time = 12.5;
  const auto path = std::filesystem::temp_directory_path() / "freechan_test.wfn";
  write_checkpoint(w, path);
  const WaveFunction r = read_checkpoint(path);
  EXPECT_TRUE(r.grid == g);
  EXPECT_EQ(r.time, 12.5);
  EXPECT_EQ(r.representation, Representation::position);
  EXPECT_EQ(std::memcmp(r.values.data(), w.values.data(), w.values.size() * sizeof(cplx)), 0);
  EXPECT_EQ(std::filesystem::file_size(path), 4 + 4 + 2 * 16 + 8 + 1 + g.size() * 16);
  std::filesystem::remove(path);
  EXPECT_THROW(read_checkpoint(path), IoError);
}
