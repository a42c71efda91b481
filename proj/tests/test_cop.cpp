#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "rdu/cop.hpp"
#include "rdu/error.hpp"

using namespace rdu;

namespace {

// One decision variable x in [0, hi] and one stochastic column s; the
// objective is x * a + s.
CopInstance affine(int k, Deformation phi, int hi = 5, Sense sense = Sense::Maximize, double a = 0.0) {
  return CopInstance({{"x", 0, hi}}, {{"s", DiscreteDistribution::uniform(0, 10)}}, {},
                     {[a](std::span<const int> d, std::span<const int> s) { return a * d[0] + s[0]; }, sense},
                     std::move(phi), k);
}

SampleBatch column(std::vector<int> values) {
  const std::size_t n = values.size();
  return SampleBatch(n, 1, std::move(values));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("instance validation") {
  const StochasticObjective zero{[](auto, auto) { return 0.0; }, Sense::Maximize};
  CHECK(kind_of([&] {
          CopInstance({{"x", 0, 1}, {"x", 0, 2}}, {}, {}, zero);
        }) == ErrorKind::DuplicateName);
  CHECK(kind_of([&] {
          CopInstance({{"x", 0, 1}}, {{"x", DiscreteDistribution::point_mass(0)}}, {}, zero);
        }) == ErrorKind::DuplicateName);
  CHECK(kind_of([&] {
          CopInstance({{"x", 0, 1}}, {}, {{Constraint::Kind::LinearLe, {{1, "y"}}, 0}}, zero);
        }) == ErrorKind::UnknownVariable);
  CHECK(kind_of([&] { CopInstance({{"x", 2, 1}}, {}, {}, zero); }) == ErrorKind::InvalidInstance);
  CHECK(kind_of([&] { CopInstance({{"x", 0, 1}}, {}, {}, zero, Deformation::identity(), 0); }) ==
        ErrorKind::InvalidInstance);
}

TEST_CASE("is_feasible examples") {
  const StochasticObjective zero{[](auto, auto) { return 0.0; }, Sense::Maximize};
  const CopInstance free({{"x", 0, 5}, {"y", 0, 5}}, {}, {}, zero);
  CHECK(is_feasible(free, std::vector<int>{1, 3}).feasible);

  const CopInstance sum({{"x", 0, 5}, {"y", 0, 5}}, {}, {{Constraint::Kind::LinearEq, {{1, "x"}, {1, "y"}}, 4}},
                        zero);
  CHECK(sum.integral());
  CHECK(is_feasible(sum, std::vector<int>{1, 3}).feasible);
  CHECK_FALSE(is_feasible(sum, std::vector<int>{2, 3}).feasible);

  const CopInstance le({{"x", 0, 5}}, {}, {{Constraint::Kind::LinearLe, {{3, "x"}}, 5}}, zero);
  const FeasibilityReport r = is_feasible(le, std::vector<int>{2});
  CHECK_FALSE(r.feasible);
  REQUIRE(r.constraints.size() == 1);
  CHECK(r.constraints[0].signed_violation == 1.0);
  CHECK_FALSE(r.constraints[0].satisfied);
  const FeasibilityReport ok = is_feasible(le, std::vector<int>{1});
  CHECK(ok.feasible);
  CHECK(ok.constraints[0].signed_violation == -2.0);

  CHECK(kind_of([&] { is_feasible(le, std::vector<int>{1, 2}); }) == ErrorKind::InvalidInstance);
  CHECK(kind_of([&] { is_feasible(le, std::vector<int>{9}); }) == ErrorKind::InvalidInstance);
}

TEST_CASE("fractional constraints use a tolerance") {
  const StochasticObjective zero{[](auto, auto) { return 0.0; }, Sense::Maximize};
  const CopInstance inst({{"x", 0, 10}, {"y", 0, 10}},
                         {}, {{Constraint::Kind::LinearEq, {{0.1, "x"}, {0.2, "y"}}, 0.3}}, zero);
  CHECK_FALSE(inst.integral());
  // 0.1 + 0.2 != 0.3 in binary floating point.
  CHECK(is_feasible(inst, std::vector<int>{1, 1}).feasible);
  CHECK_FALSE(is_feasible(inst, std::vector<int>{2, 1}).feasible);
}

TEST_CASE("estimate_preference examples") {
  const std::vector<int> d = {0};
  CHECK(estimate_preference(affine(3, Deformation::logistic()), d, column({7, 7, 7})).rdu_value == 7.0);
  const PreferenceEstimate mean = estimate_preference(affine(3, Deformation::identity()), d, column({5, 1, 3}));
  CHECK(mean.rdu_value == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(mean.sample_objectives == std::vector<double>{1, 3, 5});
  const double pess = estimate_preference(affine(2, Deformation::logistic(10, 1.3)), d, column({10, 0})).rdu_value;
  CHECK(std::abs(pess - 10.0 / (1.0 + std::exp(3.0))) < 1e-12);
}

TEST_CASE("estimate_preference contract errors") {
  const StochasticObjective f{[](auto d, auto) { return static_cast<double>(d[0]); }, Sense::Maximize};
  const CopInstance inst({{"x", 0, 5}}, {{"s", DiscreteDistribution::point_mass(0)}},
                         {{Constraint::Kind::LinearLe, {{1, "x"}}, 2}}, f, Deformation::identity(), 2);
  CHECK(kind_of([&] { estimate_preference(inst, std::vector<int>{3}, column({0, 0})); }) ==
        ErrorKind::InfeasibleDecision);
  CHECK(kind_of([&] { estimate_preference(inst, std::vector<int>{1}, column({0, 0, 0})); }) ==
        ErrorKind::InvalidInstance);
}

TEST_CASE("compare examples") {
  const CopInstance inst = affine(2, Deformation::logistic(), 5, Sense::Maximize, 5.0);
  const CopInstance sure({{"x", 0, 1}}, {{"s", DiscreteDistribution::uniform(0, 10)}}, {},
                         {[](std::span<const int> d, std::span<const int> s) {
                            return d[0] == 1 ? 5.0 : static_cast<double>(s[0]);
                          },
                          Sense::Maximize},
                         Deformation::logistic(), 2);
  const SampleBatch b = column({0, 10});
  CHECK(compare(sure, std::vector<int>{1}, std::vector<int>{0}, b) > 0);
  CHECK(compare(sure, std::vector<int>{0}, std::vector<int>{1}, b) < 0);
  CHECK(compare(sure, std::vector<int>{0}, std::vector<int>{0}, b) == 0);
  CHECK(compare(inst, std::vector<int>{2}, std::vector<int>{2}, b) == 0);
}

TEST_CASE("ties fall back to the sorted samples") {
  // Identity phi: {0, 4} and {2, 2} both have mean 2; the safer one wins.
  const PreferenceEstimate risky{2.0, {0.0, 4.0}};
  const PreferenceEstimate safe{2.0, {2.0, 2.0}};
  CHECK(compare_estimates(safe, risky, Sense::Maximize) > 0);
  // Under Minimize the utilities are -f, so {2, 2} is again the safer choice.
  const PreferenceEstimate risky_cost{2.0, {0.0, 4.0}};
  const PreferenceEstimate safe_cost{2.0, {2.0, 2.0}};
  CHECK(compare_estimates(safe_cost, risky_cost, Sense::Minimize) > 0);
  CHECK(compare_estimates(safe, safe, Sense::Maximize) == 0);
}

TEST_CASE("minimize flips the sign") {
  const CopInstance inst = affine(3, Deformation::logistic(), 5, Sense::Minimize);
  const PreferenceEstimate e = estimate_preference(inst, std::vector<int>{0}, column({1, 3, 5}));
  const CopInstance as_max = affine(3, Deformation::logistic(), 5, Sense::Maximize);
  const PreferenceEstimate neg = estimate_preference(as_max, std::vector<int>{0}, column({-1, -3, -5}));
  CHECK(e.rdu_value == doctest::Approx(-neg.rdu_value).epsilon(1e-15));
  CHECK(e.sample_objectives == std::vector<double>{1, 3, 5});
}

TEST_CASE("estimator properties on random batches") {
  gen::Engine e(41);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = gen::int_in(e, 1, 60);
    const Deformation phi = gen::any_phi(e);
    std::vector<int> values(static_cast<std::size_t>(k));
    for (int& v : values) v = gen::int_in(e, -20, 20);
    const SampleBatch batch = column(values);
    const CopInstance inst = affine(k, phi);
    const PreferenceEstimate est = estimate_preference(inst, std::vector<int>{0}, batch);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    CHECK(est.rdu_value >= *lo - 1e-12);
    CHECK(est.rdu_value <= *hi + 1e-12);
    CHECK(std::is_sorted(est.sample_objectives.begin(), est.sample_objectives.end()));

    const CopInstance eu = affine(k, Deformation::identity());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
    CHECK(std::abs(estimate_preference(eu, std::vector<int>{0}, batch).rdu_value - mean) < 1e-9);

    std::vector<Outcome> raw;
    for (int v : values) raw.push_back({static_cast<double>(v), 1.0 / k});
    CHECK(std::abs(est.rdu_value - rdu::rdu(make_lottery(raw), {}, phi)) < 1e-9);

    // Samplewise dominance: raising every sample never lowers the estimate.
    std::vector<int> raised = values;
    for (int& v : raised) v += gen::int_in(e, 0, 3);
    CHECK(estimate_preference(inst, std::vector<int>{0}, column(raised)).rdu_value >= est.rdu_value - 1e-12);
  }
}

TEST_CASE("compare is a total preorder on a shared batch") {
  gen::Engine e(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = gen::int_in(e, 2, 20);
    std::vector<double> weights(4);
    for (double& w : weights) w = gen::real_in(e, -2, 2);
    const CopInstance inst({{"x", 0, 3}, {"y", 0, 3}},
                           {{"s", DiscreteDistribution::uniform(-3, 3)}, {"t", DiscreteDistribution::uniform(0, 4)}},
                           {},
                           {[weights](std::span<const int> d, std::span<const int> s) {
                              return weights[0] * d[0] * s[0] + weights[1] * d[1] * s[1] + weights[2] * d[0] -
                                     weights[3] * std::abs(d[0] - d[1]) * s[1];
                            },
                            gen::int_in(e, 0, 1) ? Sense::Maximize : Sense::Minimize},
                           gen::any_phi(e), k);
    RngStream rng(static_cast<std::uint64_t>(trial));
    const SampleBatch batch = draw_batch(inst, rng);
    std::vector<std::vector<int>> all;
    for (int x = 0; x <= 3; ++x) {
      for (int y = 0; y <= 3; ++y) all.push_back({x, y});
    }
    for (const auto& a : all) {
      for (const auto& b : all) {
        const auto ab = compare(inst, a, b, batch);
        CHECK((ab > 0) == (compare(inst, b, a, batch) < 0));
        for (const auto& c : all) {
          if (ab >= 0 && compare(inst, b, c, batch) >= 0) CHECK(compare(inst, a, c, batch) >= 0);
        }
      }
    }
  }
}

TEST_CASE("draw_batch is reproducible and shaped by the instance") {
  const CopInstance inst = affine(50, Deformation::identity());
  RngStream r1(8);
  RngStream r2(8);
  const SampleBatch a = draw_batch(inst, r1);
  CHECK(a.rows() == 50);
  CHECK(a.cols() == 1);
  CHECK(a == draw_batch(inst, r2));
}
