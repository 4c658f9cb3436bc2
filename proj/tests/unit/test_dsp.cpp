#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "epicast/error.hpp"
#include "epicast/filter.hpp"
#include "epicast/smoothing.hpp"
#include "epicast/spectrum.hpp"

using namespace epicast;
using namespace epicast::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

/// Periodogram straight from the definition with an O(n^2) DFT.
std::vector<double> naive_periodogram(std::vector<double> x, std::size_t bins) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (auto& v : x) v -= mean;
  const auto X = naive_dft(x);
  std::vector<double> p(bins, 0.0);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double power = std::norm(X[k]) / (static_cast<double>(n) * static_cast<double>(n));
    const bool self_conjugate = k == 0 || 2 * k == n;
    if (!self_conjugate) power *= 2.0;
    const double f = static_cast<double>(k) / static_cast<double>(n);
    const auto bin = std::min<std::size_t>(static_cast<std::size_t>(std::floor(f / (0.5 / bins) + 1e-9)), bins - 1);
    p[bin] += power;
  }
  return p;
}

double variance(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

/// Mirror-extend, scale each DFT bin by the real gain, invert, keep the first half.
std::vector<double> naive_zero_phase(const std::vector<double>& x, double cutoff) {
  const std::size_t n = x.size(), m = 2 * n;
  std::vector<double> ext(x);
  ext.insert(ext.end(), x.rbegin(), x.rend());
  auto X = naive_dft(ext);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t folded = std::min(k, m - k);
    const double f = static_cast<double>(folded) / static_cast<double>(m);
    X[k] *= 1.0 / std::sqrt(1.0 + (f / cutoff) * (f / cutoff));
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double ang = 2.0 * kPi * static_cast<double>(k * t % m) / static_cast<double>(m);
      acc += X[k] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[t] = acc.real() / static_cast<double>(m);
  }
  return out;
}

std::vector<double> naive_autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    for (std::size_t t = 0; t + lag < x.size(); ++t) r[lag] += (x[t] - mean) * (x[t + lag] - mean);
  }
  const double r0 = r[0];
  for (auto& v : r) v /= r0;
  return r;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("periodogram matches a direct DFT and sums to the variance") {
  for (std::size_t n : {2u, 7u, 64u, 255u, 256u, 365u}) {
    for (std::size_t bins : {1u, 16u, 128u}) {
      auto x = white_noise(n, n * 31 + bins);
      for (std::size_t t = 0; t < n; ++t) x[t] += 3.0 + std::sin(0.3 * static_cast<double>(t));
      const auto p = periodogram(x, bins);
      const auto expected = naive_periodogram(x, bins);
      REQUIRE(p.size() == bins);
      for (std::size_t j = 0; j < bins; ++j) CHECK(p.power[j] == doctest::Approx(expected[j]).epsilon(1e-9).scale(1e-12));
      CHECK(p.total() == doctest::Approx(variance(x)).epsilon(1e-6));
      for (std::size_t j = 1; j < bins; ++j) CHECK(p.frequencies[j] > p.frequencies[j - 1]);
      CHECK(p.frequencies.front() >= 0.0);
      CHECK(p.frequencies.back() <= 0.5);
    }
  }
}

TEST_CASE("periodogram examples") {
  const auto flat = periodogram(std::vector<double>(50, 4.2), 16);
  for (double v : flat.power) CHECK(v == doctest::Approx(0.0).scale(1e-20));

  std::vector<double> tone(256);
  for (std::size_t t = 0; t < tone.size(); ++t) tone[t] = std::sin(2 * kPi * 20 * static_cast<double>(t) / 256.0);
  const auto p = periodogram(tone, 128);
  const auto peak = std::max_element(p.power.begin(), p.power.end());
  CHECK(*peak >= 0.99 * p.total());
  CHECK(std::abs(p.frequencies[static_cast<std::size_t>(peak - p.power.begin())] - 20.0 / 256.0) <= 0.5 / 128);

  const auto noise = periodogram(white_noise(4096, 5), 128);
  const double mean_bin = noise.total() / 128.0;
  for (double v : noise.power) CHECK(v <= 10.0 * mean_bin);

  CHECK_THROWS_AS(periodogram(std::vector<double>{1.0}, 4), ValidationError);
}

TEST_CASE("autocorrelation matches brute-force lag sums") {
  for (std::size_t n : {5u, 64u, 200u}) {
    const auto x = white_noise(n, n);
    const std::size_t max_lag = n - 1;
    const auto r = autocorrelation(x, max_lag);
    const auto expected = naive_autocorrelation(x, max_lag);
    REQUIRE(r.size() == max_lag + 1);
    CHECK(r[0] == 1.0);
    for (std::size_t k = 0; k <= max_lag; ++k) CHECK(r[k] == doctest::Approx(expected[k]).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("autocorrelation examples") {
  std::vector<double> impulses(140, 0.0);
  for (std::size_t t = 0; t < impulses.size(); t += 7) impulses[t] = 1.0;
  const auto r = autocorrelation(impulses, 20);
  for (std::size_t lag : {7u, 14u}) {
    CHECK(r[lag] > r[lag - 1]);
    CHECK(r[lag] > r[lag + 1]);
  }
  const auto noise = autocorrelation(white_noise(4096, 9), 30);
  for (std::size_t lag = 1; lag <= 30; ++lag) CHECK(std::abs(noise[lag]) < 0.1);
  CHECK_THROWS_AS(autocorrelation(std::vector<double>(10, 2.0), 3), ValidationError);
  CHECK_THROWS_AS(autocorrelation(white_noise(10, 1), 10), ValidationError);
}

TEST_CASE("butterworth gain") {
  const FilterSpec spec{0.1};
  CHECK(butterworth_gain(spec, 0.0) == 1.0);
  CHECK(butterworth_gain(spec, 0.1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(butterworth_gain(spec, 0.3) == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-15));
  double prev = 2.0;
  for (int i = 0; i <= 1000; ++i) {
    const double g = butterworth_gain(spec, 0.5 * i / 1000.0);
    CHECK(g <= prev);
    prev = g;
  }
  CHECK_THROWS_AS(FilterSpec{0.0}.validate(), ValidationError);
  CHECK_THROWS_AS(FilterSpec{0.51}.validate(), ValidationError);
  CHECK_NOTHROW(FilterSpec{0.5}.validate());
}

TEST_CASE("zero-phase filter matches the direct mirrored-DFT construction") {
  for (std::size_t n : {4u, 9u, 60u, 128u}) {
    auto x = white_noise(n, 100 + n);
    for (double cutoff : {0.01, 0.07, 0.25, 0.5}) {
      const auto y = zero_phase_filter(x, FilterSpec{cutoff}, Clamp::none);
      const auto expected = naive_zero_phase(x, cutoff);
      for (std::size_t t = 0; t < n; ++t) CHECK(y[t] == doctest::Approx(expected[t]).epsilon(1e-9).scale(1e-9));
      const auto clamped = zero_phase_filter(x, FilterSpec{cutoff});
      for (std::size_t t = 0; t < n; ++t) CHECK(clamped[t] == std::max(y[t], 0.0));
    }
  }
  CHECK_THROWS_AS(zero_phase_filter(std::vector<double>{1, 2, 3}, FilterSpec{0.1}), ValidationError);
}

TEST_CASE("zero-phase filter examples") {
  const auto flat = zero_phase_filter(std::vector<double>(40, 3.5), FilterSpec{0.05});
  for (double v : flat) CHECK(v == doctest::Approx(3.5).epsilon(1e-9));

  // Sinusoid at the cutoff: attenuated by 1/sqrt(2) without moving its peaks.
  std::vector<double> tone(512);
  for (std::size_t t = 0; t < tone.size(); ++t) tone[t] = std::cos(2 * kPi * 0.25 * static_cast<double>(t));
  const auto y = zero_phase_filter(tone, FilterSpec{0.25}, Clamp::none);
  for (std::size_t t = 128; t < 384; t += 4) {
    CHECK(y[t] / tone[t] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
  }

  std::vector<double> smooth(365);
  for (std::size_t t = 0; t < smooth.size(); ++t) smooth[t] = 5 + std::sin(2 * kPi * 0.01 * static_cast<double>(t));
  CHECK(pearson(smooth, zero_phase_filter(smooth, FilterSpec{0.5})) >= 0.99);
}

TEST_CASE("zero-phase filter is linear without the clamp") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = white_noise(50 + trial, 200 + trial);
    const auto y = white_noise(50 + trial, 300 + trial);
    const double a = u(rng), b = u(rng);
    std::vector<double> mix(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) mix[t] = a * x[t] + b * y[t];
    const FilterSpec spec{0.02 + 0.01 * trial};
    const auto fx = zero_phase_filter(x, spec, Clamp::none);
    const auto fy = zero_phase_filter(y, spec, Clamp::none);
    const auto fm = zero_phase_filter(mix, spec, Clamp::none);
    for (std::size_t t = 0; t < x.size(); ++t) CHECK(std::abs(fm[t] - (a * fx[t] + b * fy[t])) <= 1e-9);
  }
}

TEST_CASE("n-day average") {
  const auto x = white_noise(30, 4);
  CHECK(n_day_average(x, 1) == x);
  std::vector<double> step(30, 0.0);
  for (std::size_t t = 10; t < step.size(); ++t) step[t] = 1.0;
  const auto y = n_day_average(step, 7);
  for (std::size_t t = 0; t < 16; ++t) CHECK(y[t] < 1.0);
  CHECK(y[16] == doctest::Approx(1.0));
  for (double v : n_day_average(std::vector<double>(12, 2.5), 5)) CHECK(v == doctest::Approx(2.5));
  CHECK_THROWS_AS(n_day_average(x, 0), ValidationError);
}

TEST_CASE("correlation fitness") {
  const auto x = white_noise(100, 8);
  CHECK(correlation_fitness(x, x) == doctest::Approx(1.0));
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  CHECK(correlation_fitness(x, neg) == doctest::Approx(-1.0));
  CHECK(correlation_fitness(x, std::vector<double>(x.size(), 3.0)) == 0.0);
  CHECK_THROWS_AS(correlation_fitness(std::vector<double>(10, 1.0), x), ValidationError);
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = white_noise(100, 50 + trial);
    CHECK(std::abs(correlation_fitness(x, y)) <= 1.0);
  }
}

TEST_CASE("spectral fitness") {
  const auto x = white_noise(256, 12);
  const auto p = periodogram(x, 64);
  CHECK(spectral_fitness(p, p) == 0.0);
  auto zero = p;
  std::fill(zero.power.begin(), zero.power.end(), 0.0);
  CHECK(spectral_fitness(p, zero) == 1.0);
  CHECK_THROWS_AS(spectral_fitness(p, periodogram(x, 32)), ValidationError);

  // Lowering the cutoff never lowers the score.
  const SmoothingObjective obj(x, ObjectiveParams{});
  const auto grid = cutoff_grid(x.size(), 50);
  double prev = 2.0;
  for (double c : grid) {
    const double s = obj.evaluate(c).spectral;
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
}

TEST_CASE("objective terms combine linearly") {
  auto x = white_noise(200, 21);
  for (auto& v : x) v += 10.0;
  const ObjectiveParams params{1.2, 1.0};
  for (double c : {0.01, 0.1, 0.4}) {
    const auto v = objective(x, c, params);
    CHECK(v.total == doctest::Approx(1.2 * v.correlation + 1.0 * v.spectral).epsilon(1e-14));
    const auto y = zero_phase_filter(x, FilterSpec{c}, Clamp::none);
    CHECK(v.correlation == doctest::Approx(correlation_fitness(x, y)).epsilon(1e-12));
  }
  std::vector<double> smooth(365);
  for (std::size_t t = 0; t < smooth.size(); ++t) smooth[t] = 5 + std::sin(2 * kPi * 0.01 * static_cast<double>(t));
  const auto at_nyquist = objective(smooth, 0.5, params);
  CHECK(at_nyquist.correlation >= 0.99);
  CHECK(at_nyquist.spectral < 0.05);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(ObjectiveParams{}.validate());
  CHECK_NOTHROW((ObjectiveParams{1.5, 1.0}.validate()));
  CHECK_NOTHROW((ObjectiveParams{1.0, 1.0}.validate()));
  CHECK_THROWS_AS((ObjectiveParams{1.6, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((ObjectiveParams{0.9, 1.0}.validate()), ValidationError);
  CHECK_NOTHROW((ObjectiveParams{1.0, 0.0}.validate_structure()));
  CHECK_THROWS_AS((ObjectiveParams{0.0, 0.0}.validate_structure()), ValidationError);
  CHECK_THROWS_AS((ObjectiveParams{1.0, 1.0, 1}.validate_structure()), ValidationError);
}

TEST_CASE("cutoff grid is log-spaced between 1/L and Nyquist") {
  const auto g = cutoff_grid(365, 200);
  REQUIRE(g.size() == 200);
  CHECK(g.front() == 1.0 / 365.0);
  CHECK(g.back() == 0.5);
  for (std::size_t i = 2; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-9));
  }
}

TEST_CASE("objective extremes select the grid ends") {
  auto x = white_noise(365, 33);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 10 + 5 * std::sin(2 * kPi * 0.02 * static_cast<double>(t));
  const auto grid = cutoff_grid(x.size(), 200);
  CHECK(optimize_cutoff(x, ObjectiveParams{1.0, 0.0}).cutoff == grid.back());
  CHECK(optimize_cutoff(x, ObjectiveParams{0.0, 1.0}).cutoff == grid.front());
}

TEST_CASE("optimizer agrees with an exhaustive grid evaluation") {
  auto x = white_noise(180, 44);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 4 + 3 * std::sin(2 * kPi * 0.03 * static_cast<double>(t));
  const ObjectiveParams params{};
  const auto grid = cutoff_grid(x.size(), params.grid_size);
  double best = -1e300, best_c = 0.0;
  for (double c : grid) {
    const double v = objective(x, c, params).total;
    if (v > best) best = v, best_c = c;
  }
  const auto r = optimize_cutoff(x, params);
  CHECK(r.cutoff == best_c);
  CHECK(r.objective.total == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.objective.total == doctest::Approx(params.a * r.objective.correlation + params.b * r.objective.spectral));
  for (double v : r.smoothed) CHECK(v >= 0.0);
  const auto again = optimize_cutoff(x, params);
  CHECK(again.smoothed == r.smoothed);
  CHECK(again.cutoff == r.cutoff);
}

TEST_CASE("optimized smoothing of a noisy sinusoid") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<double> clean(365), noisy(365);
    const auto noise = white_noise(365, seed, std::sqrt(0.5) * 4.0);  // SNR 1 for amplitude 4
    for (std::size_t t = 0; t < 365; ++t) {
      clean[t] = 10 + 4 * std::sin(2 * kPi * 0.02 * static_cast<double>(t));
      noisy[t] = clean[t] + noise[t];
    }
    const auto r = optimize_cutoff(noisy);
    CHECK(r.cutoff >= 0.02);
    CHECK(r.cutoff <= 0.25);
    double raw = 0, smoothed = 0;
    for (std::size_t t = 0; t < 365; ++t) {
      raw += (noisy[t] - clean[t]) * (noisy[t] - clean[t]);
      smoothed += (r.smoothed[t] - clean[t]) * (r.smoothed[t] - clean[t]);
    }
    CHECK(smoothed <= 0.5 * raw);
  }
}

TEST_CASE("an already smooth signal is barely filtered") {
  std::vector<double> x(365);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = static_cast<double>(t);
    x[t] = 20 + 6 * std::sin(2 * kPi * 0.01 * d) + 3 * std::sin(2 * kPi * 0.03 * d + 1.0);
  }
  const auto r = optimize_cutoff(x);
  CHECK(r.cutoff >= 0.06);
  CHECK(pearson(x, r.smoothed) >= 0.99);
}

TEST_CASE("constant input bypasses the search") {
  const std::vector<double> x(30, 6.0);
  const auto r = optimize_cutoff(x);
  CHECK(r.smoothed == x);
  CHECK(r.cutoff == 0.5);
  CHECK_THROWS_AS(optimize_cutoff(std::vector<double>(7, 1.0)), ValidationError);
}
