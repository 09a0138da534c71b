#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pulseprop/pulses.hpp"
#include "pulseprop/spectral.hpp"

using namespace pulseprop::spectral;
using doctest::Approx;
using cplx = std::complex<double>;

namespace {

const double kLength = 30.0 * std::numbers::pi;

Field random_field(GridPtr grid, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Field f(std::move(grid), Space::Physical);
  for (auto& z : f.values()) z = {gauss(rng), gauss(rng)};
  return f;
}

}  // namespace

TEST_CASE("grid construction and wavenumbers") {
  PeriodicGrid grid(kLength, 8);
  CHECK(grid.dx() == Approx(kLength / 8));
  CHECK(grid.node(3) == Approx(3.0 * kLength / 8));
  const double dxi = 2.0 * std::numbers::pi / kLength;
  CHECK(grid.wavenumber(0) == 0.0);
  CHECK(grid.wavenumber(1) == Approx(dxi));
  CHECK(grid.wavenumber(7) == Approx(-dxi));
  CHECK(grid.wavenumber(4) == Approx(-4.0 * dxi));  // single Nyquist bin
  CHECK(grid.max_wavenumber() == Approx(4.0 * dxi));

  CHECK_THROWS_AS(PeriodicGrid(kLength, 1000), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid(-1.0, 8), std::invalid_argument);

  CHECK(*make_grid(kLength, 64) == *make_grid(kLength, 64));
}

TEST_CASE("transform of elementary fields") {
  auto grid = make_grid(kLength, 64);

  Field ones(grid, Space::Physical);
  for (auto& z : ones.values()) z = 1.0;
  const auto spec = forward(ones);
  CHECK(std::abs(spec[0] - 1.0) < 1e-14);
  for (std::size_t m = 1; m < spec.size(); ++m) CHECK(std::abs(spec[m]) < 1e-14);

  Field mode(grid, Space::Physical);
  for (std::size_t i = 0; i < mode.size(); ++i)
    mode[i] = std::polar(1.0, grid->wavenumber(1) * grid->node(i));
  const auto spec1 = forward(mode);
  CHECK(std::abs(spec1[1] - 1.0) < 1e-13);
  CHECK(std::abs(spec1[0]) < 1e-13);
}

TEST_CASE("round trip is the identity") {
  auto grid = make_grid(kLength, 256);
  const auto f = random_field(grid, 1);
  const auto back = inverse(forward(f));
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    worst = std::max(worst, std::abs(back[i] - f[i]));
    scale = std::max(scale, std::abs(f[i]));
  }
  CHECK(worst / scale < 1e-12);
}

TEST_CASE("multipliers") {
  auto grid = make_grid(kLength, 128);

  SUBCASE("constant symbol is the identity") {
    const auto f = random_field(grid, 2);
    std::vector<double> one(grid->size(), 1.0);
    const auto g = apply_multiplier(f, std::span<const double>(one));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(g[i] - f[i]) < 1e-13);
  }

  SUBCASE("derivative differentiates a sine") {
    Field f(grid, Space::Physical);
    const double k1 = 2.0 * std::numbers::pi / kLength;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(k1 * grid->node(i));
    const auto df = derivative(f);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(df[i].real() == Approx(k1 * std::cos(k1 * grid->node(i))).epsilon(1e-12));
  }

  SUBCASE("derivative zeroes the Nyquist bin") {
    Field f(grid, Space::Spectral);
    f[grid->size() / 2] = 1.0;
    const auto df = to_space(derivative(inverse(f)), Space::Spectral);
    for (const auto& c : df.values()) CHECK(std::abs(c) < 1e-14);
  }

  SUBCASE("unit-modulus symbols preserve the L2 norm") {
    const auto f = random_field(grid, 3);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::vector<cplx> symbol(grid->size());
    for (auto& s : symbol) s = std::polar(1.0, u(rng));
    const auto g = apply_multiplier(f, std::span<const cplx>(symbol));
    CHECK(norms(g).l2 == Approx(norms(f).l2).epsilon(1e-12));
  }

  SUBCASE("errors") {
    const auto f = random_field(grid, 5);
    std::vector<double> bad(grid->size(), 1.0);
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(apply_multiplier(f, std::span<const double>(bad)),
                    std::invalid_argument);
    std::vector<double> short_symbol(grid->size() - 1, 1.0);
    CHECK_THROWS_AS(apply_multiplier(f, std::span<const double>(short_symbol)),
                    std::invalid_argument);
  }
}

TEST_CASE("norms") {
  auto grid = make_grid(kLength, 128);

  Field wave(grid, Space::Physical);
  for (std::size_t i = 0; i < wave.size(); ++i)
    wave[i] = std::polar(1.0, grid->wavenumber(3) * grid->node(i));
  CHECK(norms(wave).linf == Approx(1.0).epsilon(1e-14));
  CHECK(norms(wave).l2 == Approx(std::sqrt(kLength)).epsilon(1e-13));

  const auto f = random_field(grid, 6);
  const auto spec = forward(f);
  double sum = 0.0;
  for (const auto& c : spec.values()) sum += std::norm(c);
  const double l2 = norms(f).l2;
  CHECK(l2 * l2 == Approx(kLength * sum).epsilon(1e-12));

  Field zero(grid, Space::Physical);
  CHECK(norms(zero).l2 == 0.0);
  CHECK(norms(zero).linf == 0.0);
  CHECK(wiener_norm(zero) == 0.0);
}

TEST_CASE("wiener norm") {
  auto grid = make_grid(kLength, 256);

  Field mode(grid, Space::Spectral);
  mode[5] = 1.0;
  CHECK(wiener_norm(mode) == Approx(1.0).epsilon(1e-14));

  Field two(grid, Space::Spectral);
  two[5] = 0.7;
  two[200] = cplx(0.0, 0.3);
  CHECK(wiener_norm(two) == Approx(1.0).epsilon(1e-14));

  SUBCASE("dilation invariance for resolved profiles") {
    auto fine = make_grid(kLength, 16384);
    for (double beta : {0.05, 0.1, 0.5, 1.0}) {
      pulseprop::pulses::PulseSpec spec;
      spec.beta = beta;
      const auto env = pulseprop::pulses::build_short(spec, fine);
      CHECK(wiener_norm(env) == Approx(1.0).epsilon(1e-3));
    }
  }

  SUBCASE("algebra property on band-limited fields") {
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
      Field a(grid, Space::Spectral), b(grid, Space::Spectral);
      for (std::size_t m = 0; m < grid->size(); ++m) {
        if (std::abs(grid->wavenumber(m)) < 0.25 * grid->max_wavenumber()) {
          a[m] = {gauss(rng), gauss(rng)};
          b[m] = {gauss(rng), gauss(rng)};
        }
      }
      const auto pa = inverse(a), pb = inverse(b);
      Field prod(grid, Space::Physical);
      for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = pa[i] * pb[i];
      CHECK(wiener_norm(prod) <= wiener_norm(pa) * wiener_norm(pb) + 1e-10);
    }
  }
}

TEST_CASE("upsample is trigonometric interpolation") {
  auto grid = make_grid(kLength, 64);
  Field f(grid, Space::Spectral);
  std::mt19937 rng(8);
  std::normal_distribution<double> gauss;
  for (std::size_t m = 0; m < grid->size(); ++m)
    if (std::abs(grid->wavenumber(m)) < 0.4 * grid->max_wavenumber())
      f[m] = {gauss(rng), gauss(rng)};
  const auto phys = inverse(f);
  const auto up = upsample(phys, 256);
  CHECK(up.grid().size() == 256);
  for (std::size_t i = 0; i < phys.size(); ++i)
    CHECK(std::abs(up[4 * i] - phys[i]) < 1e-12);

  CHECK_THROWS_AS(upsample(phys, 32), std::invalid_argument);
}

TEST_CASE("snapshot serialization") {
  namespace fs = std::filesystem;
  auto grid = make_grid(kLength, 32);
  const auto f = random_field(grid, 9);
  const fs::path dir = fs::temp_directory_path() / "pulseprop_spectral_test";
  fs::create_directories(dir);

  write_raw(dir / "f.bin", f);
  const auto back = read_raw(dir / "f.bin", grid);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);

  write_csv(dir / "f.csv", f);
  std::ifstream is(dir / "f.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,re,im");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == f.size());
  fs::remove_all(dir);
}
