#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "loadcoupling/mappings.hpp"
#include "loadcoupling/scenario_io.hpp"
#include "support/instances.hpp"

using namespace loadcoupling;
using testing::random_vector;
using testing::uniform;

// Expected values below were computed independently with 40-digit mpmath.
namespace {
constexpr double kLog2OneAndHalf = 0.5849625007211561814537389439478165;   // log2(3/2)
constexpr double kSymmetricLoadMap = 1.356915448856724083504623297566367;  // 1 / log2(5/3)
} // namespace

TEST_CASE("rate_per_rb examples") {
  CHECK(rate_per_rb(testing::single_cell(), LoadVector{1.0}, PowerVector{1.0}, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  NetworkData d = testing::symmetric_two_cell(1.0, 0.5).data();
  const NetworkModel model(d);
  // Idle neighbour: no interference whatever its power.
  CHECK(rate_per_rb(model, LoadVector{0.3, 0.0}, PowerVector{1.0, 7.0}, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const NetworkModel equal = testing::symmetric_two_cell(1.0, 1.0);
  CHECK(rate_per_rb(equal, LoadVector{0.3, 1.0}, PowerVector{1.0, 1.0}, 0, 0) ==
        doctest::Approx(kLog2OneAndHalf).epsilon(1e-15));
}

TEST_CASE("rate_per_rb rejects zero serving power and computes cross rates") {
  const NetworkModel model = testing::symmetric_two_cell();
  CHECK_THROWS_AS(rate_per_rb(model, LoadVector{1.0, 1.0}, PowerVector{0.0, 1.0}, 0, 0), DomainError);
  // Station 2 towards user 1 (not its own): gain 0.5, interferer station 1 with nu*p*g = 1.
  CHECK(rate_per_rb(model, LoadVector{1.0, 1.0}, PowerVector{1.0, 1.0}, 1, 0) ==
        doctest::Approx(std::log2(1.25)).epsilon(1e-15));
}

TEST_CASE("load_map examples") {
  CHECK(load_map(testing::single_cell(), PowerVector{1.0}, LoadVector{0.0}).output[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(load_map(testing::single_cell(), PowerVector{1.0}, LoadVector{7.0}).output[0] == doctest::Approx(1.0).epsilon(1e-15));

  const NetworkModel model = testing::symmetric_two_cell();
  const auto idle = load_map(model, PowerVector{1.0, 1.0}, LoadVector{0.0, 0.0}).output;
  CHECK(idle[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(idle[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto busy = load_map(model, PowerVector{1.0, 1.0}, LoadVector{1.0, 1.0}).output;
  CHECK(busy[0] == doctest::Approx(kSymmetricLoadMap).epsilon(1e-15));
  CHECK(busy[1] == doctest::Approx(kSymmetricLoadMap).epsilon(1e-15));

  CHECK_THROWS_AS(load_map(model, PowerVector{1.0, 0.0}, LoadVector{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(load_map(model, PowerVector{1.0}, LoadVector{1.0, 1.0}), ModelError);
}

TEST_CASE("power_map examples") {
  const NetworkModel cell = testing::single_cell();
  CHECK(power_map(cell, LoadVector{1.0}, PowerVector{0.0}).output[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(power_map(cell, LoadVector{1.0}, PowerVector{1.0}).output[0] == doctest::Approx(1.0).epsilon(1e-15));

  const NetworkModel model = testing::symmetric_two_cell();
  const auto out = power_map(model, LoadVector{1.0, 1.0}, PowerVector{1.0, 1.0}).output;
  const auto cross = load_map(model, PowerVector{1.0, 1.0}, LoadVector{1.0, 1.0}).output;
  CHECK(out[0] == doctest::Approx(kSymmetricLoadMap).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(cross[1]).epsilon(1e-15));

  CHECK_THROWS_AS(power_map(model, LoadVector{1.0, 0.0}, PowerVector{1.0, 1.0}), DomainError);
}

TEST_CASE("per-user terms sum to the output") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const LoadVector nu(random_vector(rng, M, 0.1, 2.0));
    const PowerVector p(random_vector(rng, M, 0.1, 5.0));
    const auto eval = power_map(model, nu, p, Diagnostics::PerUserTerms);
    REQUIRE(eval.terms.size() == M);
    for (std::size_t i = 0; i < M; ++i) {
      REQUIRE(eval.terms[i].size() == model.users_of(i).size());
      double sum = 0.0;
      for (double t : eval.terms[i]) {
        CHECK(t > 0.0);
        sum += t;
      }
      CHECK(sum == doctest::Approx(eval.output[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("outputs are strictly positive, also at the zero vector") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const LoadVector nu(random_vector(rng, M, 0.01, 3.0));
    for (double v : power_map(model, nu, PowerVector::zeros(M)).output)
      CHECK(v > 0.0);
    for (double v : load_map(model, PowerVector(random_vector(rng, M, 1e-3, 10.0)), LoadVector::zeros(M)).output)
      CHECK(v > 0.0);
  }
}

TEST_CASE("scalability and monotonicity of both mappings") {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const double alpha = uniform(rng, 1.0 + 1e-6, 10.0);
    const LoadVector nu(random_vector(rng, M, 0.05, 3.0));
    const PowerVector p(random_vector(rng, M, 0.05, 5.0));

    // Power map at x = p, with some components on the boundary.
    std::vector<double> x = random_vector(rng, M, 0.0, 5.0);
    if (trial % 3 == 0)
      x[trial % M] = 0.0;
    std::vector<double> ax(M), bigger(M);
    for (std::size_t i = 0; i < M; ++i) {
      ax[i] = alpha * x[i];
      bigger[i] = x[i] + uniform(rng, 0.0, 1.0);
    }
    const auto px = power_map(model, nu, PowerVector(x)).output;
    const auto pax = power_map(model, nu, PowerVector(ax)).output;
    const auto pbig = power_map(model, nu, PowerVector(bigger)).output;
    const auto lx = load_map(model, p, LoadVector(x)).output;
    const auto lax = load_map(model, p, LoadVector(ax)).output;
    const auto lbig = load_map(model, p, LoadVector(bigger)).output;
    for (std::size_t i = 0; i < M; ++i) {
      violations += !(alpha * px[i] > pax[i] - 1e-12);
      violations += !(alpha * lx[i] > lax[i] - 1e-12);
      violations += !(pbig[i] >= px[i] - 1e-12);
      violations += !(lbig[i] >= lx[i] - 1e-12);
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("power map is midpoint concave") {
  std::mt19937_64 rng(8);
  int violations = 0;
  for (int instance = 0; instance < 5; ++instance) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const LoadVector nu(random_vector(rng, M, 0.05, 3.0));
    for (int trial = 0; trial < 1000; ++trial) {
      const auto a = random_vector(rng, M, 1e-3, 10.0);
      const auto b = random_vector(rng, M, 1e-3, 10.0);
      std::vector<double> mid(M);
      for (std::size_t i = 0; i < M; ++i)
        mid[i] = 0.5 * (a[i] + b[i]);
      const auto fa = power_map(model, nu, PowerVector(a)).output;
      const auto fb = power_map(model, nu, PowerVector(b)).output;
      const auto fm = power_map(model, nu, PowerVector(mid)).output;
      for (std::size_t i = 0; i < M; ++i) {
        const double chord = 0.5 * (fa[i] + fb[i]);
        violations += !(fm[i] >= chord - 1e-9 * chord);
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("upper branch converges to the zero-power branch") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const LoadVector nu(random_vector(rng, M, 0.05, 3.0));
    std::vector<double> p = random_vector(rng, M, 0.1, 5.0);
    const std::size_t i = trial % M;
    p[i] = 0.0;
    const double lower = power_map(model, nu, PowerVector(p)).output[i];
    // t / log1p(t g / I) = (I / g) (1 + t g / (2 I) - ...), so the gap grows
    // at most like slope * t.
    double slope = 0.0;
    for (std::size_t j : model.users_of(i))
      slope += model.demand(j) * std::log(2.0) / (2.0 * nu[i] * model.num_rb() * model.rb_bandwidth());
    double previous = INFINITY;
    for (double t = 1e-2; t >= 1e-10; t *= 1e-2) {
      p[i] = t;
      const double gap = std::fabs(power_map(model, nu, PowerVector(p)).output[i] - lower);
      CHECK(gap < previous);
      CHECK(gap <= slope * t * (1.0 + 1e-6) + 1e-15 * lower);
      previous = gap;
    }
    CHECK(previous <= 1e-8 * lower);
  }
}

TEST_CASE("load and power maps agree at consistent points") {
  // For positive p and nu, J_p(nu) = nu iff P_nu(p) = p, and in general
  // P_nu(p)_i = p_i / nu_i * J_p(nu)_i.
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto model = testing::random_network(rng);
    const std::size_t M = model.num_stations();
    const LoadVector nu(random_vector(rng, M, 0.05, 3.0));
    const PowerVector p(random_vector(rng, M, 0.05, 5.0));
    const auto j = load_map(model, p, nu).output;
    const auto pm = power_map(model, nu, p).output;
    for (std::size_t i = 0; i < M; ++i)
      CHECK(pm[i] == doctest::Approx(p[i] / nu[i] * j[i]).epsilon(1e-14));
  }
}

TEST_CASE("x ln(1 + 1/x) is strictly increasing") {
  std::mt19937_64 rng(12);
  std::vector<double> xs;
  for (int k = 0; k < 5000; ++k)
    xs.push_back(testing::log_uniform(rng, 1e-6, 1e6));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  int violations = 0;
  for (std::size_t k = 1; k < xs.size(); ++k)
    // Near the limit value 1 consecutive samples can round to the same double.
    violations += !(rate_growth(xs[k]) >= rate_growth(xs[k - 1]));
  CHECK(violations == 0);
  CHECK(rate_growth(1e6) < 1.0);
  CHECK(rate_growth(0.5) == doctest::Approx(0.5 * std::log(3.0)));
  CHECK(rate_growth(2.0) > rate_growth(1.0));
}

TEST_CASE("thread count does not change results") {
  std::mt19937_64 rng(13);
  loadcoupling::GeneratorSpec spec;
  spec.num_stations = 60;
  spec.num_users = 400;
  spec.rng_seed = 99;
  const auto model = generate(spec);
  const std::size_t M = model.num_stations();
  const LoadVector nu(random_vector(rng, M, 0.1, 1.0));
  const PowerVector p(random_vector(rng, M, 0.1, 1.0));
  const auto serial = power_map(model, nu, p, Diagnostics::None, {1}).output;
  for (unsigned threads : {2u, 3u, 8u}) {
    CHECK(power_map(model, nu, p, Diagnostics::None, {threads}).output == serial);
    CHECK(load_map(model, p, nu, Diagnostics::None, {threads}).output ==
          load_map(model, p, nu, Diagnostics::None, {1}).output);
  }
}
