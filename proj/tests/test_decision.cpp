#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "rdu/decision.hpp"
#include "rdu/error.hpp"

using namespace rdu;

TEST_CASE("make_lottery sorts, merges and drops zeros") {
  CHECK(make_lottery({{5, 0.5}, {1, 0.5}}).outcomes()[0] == Outcome{1, 0.5});
  const Lottery merged = make_lottery({{3, 0.4}, {3, 0.6}});
  REQUIRE(merged.size() == 1);
  CHECK(merged.outcomes()[0].consequence == 3);
  CHECK(merged.outcomes()[0].probability == doctest::Approx(1.0).epsilon(1e-15));

  const Lottery three = make_lottery({{2, 0.5}, {7, 0.3}, {0, 0.2}});
  REQUIRE(three.size() == 3);
  CHECK(three.outcomes()[0].consequence == 0);
  CHECK(three.outcomes()[1].consequence == 2);
  CHECK(three.outcomes()[2].consequence == 7);
  CHECK(three.outcomes()[2].probability == doctest::Approx(0.3));

  CHECK(make_lottery({{1, 0.0}, {2, 1.0}}).size() == 1);
}

TEST_CASE("make_lottery rejects bad mass") {
  const auto kind_of = [](std::initializer_list<Outcome> raw) {
    try {
      make_lottery(raw);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ParseError;
  };
  CHECK(kind_of({{1, -0.1}, {2, 1.1}}) == ErrorKind::NegativeProbability);
  CHECK(kind_of({{1, 0.5}, {2, 0.4}}) == ErrorKind::ProbabilityMassInvalid);
  CHECK(kind_of({}) == ErrorKind::ProbabilityMassInvalid);
  CHECK_NOTHROW(make_lottery({{1, 0.5}, {2, 0.5000005}}));
}

TEST_CASE("canonical form is permutation invariant") {
  gen::Engine e(11);
  for (int trial = 0; trial < 500; ++trial) {
    auto raw = gen::raw_outcomes(e);
    const Lottery a = make_lottery(raw);
    std::shuffle(raw.begin(), raw.end(), e);
    const Lottery b = make_lottery(raw);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.outcomes()[i].consequence == b.outcomes()[i].consequence);
      CHECK(a.outcomes()[i].probability == doctest::Approx(b.outcomes()[i].probability).epsilon(1e-14));
    }
    CHECK(rdu::rdu(a, {}, Deformation::logistic()) ==
          doctest::Approx(rdu::rdu(b, {}, Deformation::logistic())).epsilon(1e-12));
  }
}

TEST_CASE("deformation closed forms") {
  CHECK(Deformation::identity()(0.37) == 0.37);
  CHECK(Deformation::logistic(10, 1.3)(0.5) == doctest::Approx(1.0 / (1.0 + std::exp(3.0))).epsilon(1e-14));
  CHECK(Deformation::logistic()(0.5) == doctest::Approx(0.0474258731775668).epsilon(1e-12));
  CHECK(Deformation::logit(10)(0.5) == doctest::Approx(0.890138771133189).epsilon(1e-12));
  CHECK(Deformation::logit()(0.0) == 0.0);
  // Endpoints are clamped, not renormalized.
  CHECK(Deformation::logistic()(0.0) == doctest::Approx(2.2603e-6).epsilon(1e-3));
  CHECK(Deformation::logistic()(1.0) == doctest::Approx(0.99908895).epsilon(1e-6));
  CHECK(Deformation::logit()(1e-6) == 0.0);
  CHECK(Deformation::logit()(1.0) == 1.0);
}

TEST_CASE("deform rejects p outside [0,1]") {
  for (const Deformation& phi : {Deformation::identity(), Deformation::logistic(), Deformation::logit()}) {
    CHECK_THROWS_AS(phi(-0.01), Error);
    CHECK_THROWS_AS(phi(1.01), Error);
    CHECK_THROWS_AS(phi(std::nan("")), Error);
    try {
      phi(2.0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DomainError);
    }
  }
}

TEST_CASE("deformations are monotone and bounded on a fine grid") {
  gen::Engine e(3);
  std::vector<Deformation> kinds = {Deformation::identity(), Deformation::logistic(), Deformation::logit(),
                                    Deformation::logistic(3, 0.7), Deformation::logit(2)};
  for (int i = 0; i < 20; ++i) kinds.push_back(gen::custom_phi(e));
  for (const Deformation& phi : kinds) {
    double prev = phi(0.0);
    for (int i = 0; i <= 10000; ++i) {
      const double v = phi(i / 10000.0);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("custom deformation interpolates and validates knots") {
  const Deformation phi = Deformation::custom({{0, 0}, {0.5, 0.2}, {1, 1}});
  CHECK(phi(0.25) == doctest::Approx(0.1));
  CHECK(phi(0.75) == doctest::Approx(0.6));
  CHECK(phi(1.0) == 1.0);
  CHECK_THROWS_AS(Deformation::custom({{0, 0}, {0.5, 0.6}, {0.5, 0.7}, {1, 1}}), Error);
  CHECK_THROWS_AS(Deformation::custom({{0, 0.5}, {1, 0.4}}), Error);
  CHECK_THROWS_AS(Deformation::custom({{0.1, 0}, {1, 1}}), Error);
}

TEST_CASE("parse and describe round trip") {
  for (const char* spec : {"identity", "logistic:10:1.3", "logit:10", "logistic:4:0.9", "custom:0=0;0.5=0.2;1=1"}) {
    const Deformation phi = Deformation::parse(spec);
    CHECK(Deformation::parse(phi.describe()) == phi);
  }
  CHECK(Deformation::parse("logistic") == Deformation::logistic());
  CHECK(Deformation::parse("logit") == Deformation::logit());
  CHECK_THROWS_AS(Deformation::parse("sigmoid"), Error);
  CHECK_THROWS_AS(Deformation::parse("logistic:abc"), Error);
  CHECK_THROWS_AS(Deformation::parse("custom:0=0;1"), Error);
}

TEST_CASE("rdu examples") {
  const UtilityFunction u;
  CHECK(rdu::rdu(make_lottery({{7, 1.0}}), u, Deformation::logistic()) == 7);
  const Lottery coin = make_lottery({{0, 0.5}, {10, 0.5}});
  CHECK(rdu::rdu(coin, u, Deformation::identity()) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(rdu::rdu(coin, u, Deformation::logistic(10, 1.3)) - 10.0 / (1.0 + std::exp(3.0))) < 1e-12);
  CHECK(rdu::rdu(coin, u, Deformation::logit()) == doctest::Approx(8.90138771133189).epsilon(1e-12));
}

TEST_CASE("expected utility examples") {
  const UtilityFunction u;
  CHECK(expected_utility(make_lottery({{0, 0.5}, {10, 0.5}}), u) == 5.0);
  CHECK(expected_utility(make_lottery({{3, 1.0}}), u) == 3.0);
  CHECK(expected_utility(make_lottery({{1, 0.2}, {2, 0.3}, {10, 0.5}}), u) == doctest::Approx(5.8).epsilon(1e-14));
}

TEST_CASE("rdu agrees with the rank-weight oracle") {
  gen::Engine e(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const Lottery l = gen::lottery(e);
    const Deformation phi = gen::any_phi(e);
    const double got = rdu::rdu(l, {}, phi);
    const auto out = l.outcomes();
    // Gap form by hand in long double.
    long double tail = 0.0L;
    std::vector<long double> tails(out.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      tail += out[i].probability;
      tails[i] = tail;
    }
    long double want = out[0].consequence;
    for (std::size_t i = 1; i < out.size(); ++i) {
      want += (out[i].consequence - out[i - 1].consequence) * phi(std::min(1.0L, tails[i]));
    }
    CHECK(std::abs(got - static_cast<double>(want)) < 1e-9);
    // Rank weights: x_1 gets 1 - phi(t_2), x_i gets phi(t_i) - phi(t_{i+1}).
    long double ranked = 0.0L;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const long double hi = i == 0 ? 1.0L : phi(std::min(1.0L, tails[i]));
      const long double lo = i + 1 < out.size() ? phi(std::min(1.0L, tails[i + 1])) : 0.0L;
      ranked += out[i].consequence * (hi - lo);
    }
    CHECK(std::abs(got - static_cast<double>(ranked)) < 1e-9);
  }
}

TEST_CASE("rdu properties on random lotteries") {
  gen::Engine e(17);
  const UtilityFunction u;
  for (int trial = 0; trial < 2000; ++trial) {
    const Lottery l = gen::lottery(e);
    const Deformation phi = gen::any_phi(e);
    const double v = rdu::rdu(l, u, phi);
    CHECK(v >= l.min_consequence() - 1e-12);
    CHECK(v <= l.max_consequence() + 1e-12);
    CHECK(std::abs(rdu::rdu(l, u, Deformation::identity()) - expected_utility(l, u)) < 1e-12);

    const double c = gen::real_in(e, -20, 20);
    const double a = gen::real_in(e, 0.1, 5);
    std::vector<Outcome> shifted;
    std::vector<Outcome> scaled;
    for (const Outcome& o : l.outcomes()) {
      shifted.push_back({o.consequence + c, o.probability});
      scaled.push_back({o.consequence * a, o.probability});
    }
    CHECK(rdu::rdu(make_lottery(shifted), u, phi) == doctest::Approx(v + c).epsilon(1e-9));
    CHECK(rdu::rdu(make_lottery(scaled), u, phi) == doctest::Approx(v * a).epsilon(1e-9));
  }
}

TEST_CASE("pointwise larger deformation never lowers rdu") {
  gen::Engine e(23);
  int dominated_pairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Deformation a = gen::any_phi(e);
    const Deformation b = gen::any_phi(e);
    bool a_below = true;
    for (int i = 0; i <= 10000 && a_below; ++i) a_below = a(i / 10000.0) <= b(i / 10000.0);
    if (!a_below) continue;
    ++dominated_pairs;
    for (int j = 0; j < 20; ++j) {
      const Lottery l = gen::lottery(e);
      CHECK(rdu::rdu(l, {}, a) <= rdu::rdu(l, {}, b) + 1e-12);
    }
  }
  CHECK(dominated_pairs > 50);

  // A lifted copy of a custom curve dominates it by construction.
  for (int trial = 0; trial < 500; ++trial) {
    const Deformation base = gen::custom_phi(e);
    auto knots = base.knots();
    for (auto& [p, v] : knots) v = std::min(1.0, v + gen::real_in(e, 0.0, 0.2) * (1.0 - v));
    for (std::size_t i = 1; i < knots.size(); ++i) knots[i].second = std::max(knots[i].second, knots[i - 1].second);
    const Deformation lifted = Deformation::custom(knots);
    const Lottery l = gen::lottery(e);
    CHECK(rdu::rdu(l, {}, base) <= rdu::rdu(l, {}, lifted) + 1e-12);
  }
}
