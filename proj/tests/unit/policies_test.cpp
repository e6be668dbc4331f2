#include <gtest/gtest.h>

#include <set>

#include "fara/policies.hpp"

using namespace fara;

namespace {

PolicyConfig config_for(PolicyKind kind, double alpha, Setting setting = Setting::post_processing,
                        std::size_t delta_t = 50) {
  PolicyConfig c;
  c.kind = kind;
  c.alpha = alpha;
  c.setting = setting;
  c.planner.delta_t = delta_t;
  return c.normalized();
}

void serve(QueryState& state, const Ranklist& list, const ExaminationCurve& curve, RandomStream& rng) {
  const auto clicks = simulate_clicks(list, state.true_relevance, curve, rng);
  observe_session(state, list, clicks, curve);
}

}  // namespace

TEST(Estimator, RatioWithColdStartZero) {
  const ExaminationCurve curve(5);
  ExposureLedger ledger(3, 5);
  EXPECT_EQ(estimate_relevance(ledger, 0), 0.0);
  const std::vector<std::uint8_t> click{1}, none{0};
  for (int i = 0; i < 3; ++i) ledger.record_session(Ranklist{1}, click, curve);
  for (int i = 0; i < 3; ++i) ledger.record_session(Ranklist{1}, none, curve);
  EXPECT_DOUBLE_EQ(estimate_relevance(ledger, 1), 0.5);
}

TEST(Estimator, ConvergesUnderRandomExposure) {
  const ExaminationCurve curve(5);
  QueryState state({0.1, 0.4, 1.0, 0.7, 0.25, 0.55}, 5);
  RandomStream rng(3);
  while (state.ledger.exposure(0) < 1e4) serve(state, randomk_next(state, curve, rng), curve, rng);
  for (std::size_t d = 0; d < state.n_items(); ++d) EXPECT_NEAR(state.relevance_est[d], state.true_relevance[d], 0.05);
}

TEST(Fara, BufferBookkeeping) {
  const ExaminationCurve curve(3);
  QueryState state({0.9, 0.5, 0.1, 0.3}, 3);
  const auto config = config_for(PolicyKind::fara, 1.0, Setting::post_processing, 4);
  RandomStream rng(1);
  const auto first = fara_next(state, config, curve, rng);
  EXPECT_EQ(first.size(), 3u);
  EXPECT_EQ(state.buffer.size(), 3u);
  EXPECT_EQ(state.plans_built, 1u);
  for (int i = 0; i < 3; ++i) fara_next(state, config, curve, rng);
  EXPECT_TRUE(state.buffer.empty());
  EXPECT_EQ(state.plans_built, 1u);
  fara_next(state, config, curve, rng);
  EXPECT_EQ(state.plans_built, 2u);
}

TEST(Fara, UnitHorizonReplansEveryCall) {
  const ExaminationCurve curve(3);
  QueryState state({0.9, 0.5, 0.1, 0.3}, 3);
  const auto config = config_for(PolicyKind::fara, 0.5, Setting::post_processing, 1);
  RandomStream rng(1);
  for (int i = 0; i < 5; ++i) {
    serve(state, fara_next(state, config, curve, rng), curve, rng);
    EXPECT_TRUE(state.buffer.empty());
  }
  EXPECT_EQ(state.plans_built, 5u);
}

TEST(Fara, DeliveredExposureReconcilesWithBuffer) {
  const ExaminationCurve curve(5);
  QueryState state({0.9, 0.5, 0.1, 0.3, 0.8, 0.6, 0.2, 0.4}, 5);
  for (auto kind : {PolicyKind::fara, PolicyKind::fara_horiz}) {
    const auto config = config_for(kind, 0.7, Setting::post_processing, 12);
    RandomStream rng(2);
    for (int cycle = 0; cycle < 5; ++cycle) {
      const auto before = state.ledger.exposures();
      serve(state, fara_next(state, config, curve, rng), curve, rng);
      const auto planned = state.last_buffer_exposure;
      for (int s = 1; s < 12; ++s) serve(state, fara_next(state, config, curve, rng), curve, rng);
      const auto after = state.ledger.exposures();
      for (std::size_t d = 0; d < state.n_items(); ++d) EXPECT_NEAR(after[d] - before[d], planned[d], 1e-9);
    }
  }
}

TEST(TopK, SortsAndBreaksTiesCanonically) {
  const ExaminationCurve curve(2);
  const auto config = config_for(PolicyKind::topk, 0.0);
  EXPECT_EQ(topk_next(QueryState({0.1, 0.9, 0.5}, 2), config, curve), (Ranklist{1, 2}));
  EXPECT_EQ(topk_next(QueryState({0.3, 0.3, 0.3}, 2), config, curve), (Ranklist{0, 1}));
}

TEST(TopK, OnlineReadsOnlyTheEstimate) {
  const ExaminationCurve curve(2);
  QueryState state({0.1, 0.9, 0.5}, 2);
  state.relevance_est = {0.8, 0.0, 0.3};
  EXPECT_EQ(topk_next(state, config_for(PolicyKind::topk, 0.0, Setting::online), curve), (Ranklist{0, 2}));
}

TEST(RandomK, SingleItemAndDeterminism) {
  const ExaminationCurve curve(5);
  RandomStream rng(0);
  EXPECT_EQ(randomk_next(QueryState({0.4}, 5), curve, rng), Ranklist{0});
  QueryState state({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, 5);
  RandomStream a(9), b(9);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(randomk_next(state, curve, a), randomk_next(state, curve, b));
}

TEST(RandomK, LongRunExposureIsUniform) {
  const ExaminationCurve curve(5);
  QueryState state(std::vector<double>(10, 0.5), 5);
  RandomStream rng(6);
  const std::vector<std::uint8_t> clicks(5, 0);
  for (int i = 0; i < 100000; ++i) state.ledger.record_session(randomk_next(state, curve, rng), clicks, curve);
  const double expected = 100000 * curve.prefix_mass(5) / 10;
  for (std::size_t d = 0; d < 10; ++d) EXPECT_NEAR(state.ledger.exposure(d), expected, 0.02 * expected);
}

TEST(FairCo, ZeroGainIsTopK) {
  const ExaminationCurve curve(3);
  QueryState state({0.2, 0.9, 0.5, 0.7}, 3);
  const std::vector<std::uint8_t> clicks(3, 0);
  state.ledger.record_session(Ranklist{0, 3, 2}, clicks, curve);
  EXPECT_EQ(fairco_next(state, config_for(PolicyKind::fairco, 0.0), curve),
            topk_next(state, config_for(PolicyKind::topk, 0.0), curve));
}

TEST(FairCo, DisparityPromotesUnderExposedItem) {
  const ExaminationCurve curve(2);
  QueryState state({0.5, 0.5}, 2);
  const std::vector<std::uint8_t> clicks(1, 0);
  for (int i = 0; i < 10; ++i) state.ledger.record_session(Ranklist{0}, clicks, curve);
  EXPECT_EQ(fairco_next(state, config_for(PolicyKind::fairco, 1.0), curve), (Ranklist{1, 0}));
}

TEST(FairCo, LargeGainBeatsTopKFairnessOnSmallQuery) {
  const ExaminationCurve curve(2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    QueryState fair({0.9, 0.6, 0.3}, 2), greedy({0.9, 0.6, 0.3}, 2);
    RandomStream rng(seed);
    const auto fc = config_for(PolicyKind::fairco, 100.0), tk = config_for(PolicyKind::topk, 0.0);
    for (int t = 0; t < 3000; ++t) {
      serve(fair, fairco_next(fair, fc, curve), curve, rng);
      serve(greedy, topk_next(greedy, tk, curve), curve, rng);
    }
    EXPECT_LT(unfairness(fair.ledger.exposures(), fair.true_relevance),
              unfairness(greedy.ledger.exposures(), greedy.true_relevance));
  }
}

TEST(McFair, GradientScores) {
  const ExaminationCurve curve(2);
  QueryState state({1.0, 1.0}, 2);
  const std::vector<std::uint8_t> clicks(1, 0);
  state.ledger.record_session(Ranklist{0}, clicks, curve);
  EXPECT_EQ(mcfair_next(state, config_for(PolicyKind::mcfair, 1.0), curve), (Ranklist{1, 0}));
  EXPECT_EQ(mcfair_next(state, config_for(PolicyKind::mcfair, 0.0), curve), (Ranklist{0, 1}));
}

TEST(McFair, ProportionalExposureKeepsTopKOrder) {
  const ExaminationCurve curve(1);
  QueryState state({0.6, 0.2, 0.4}, 1);
  const std::vector<std::uint8_t> clicks(1, 0);
  for (int i = 0; i < 3; ++i) state.ledger.record_session(Ranklist{0}, clicks, curve);
  state.ledger.record_session(Ranklist{1}, clicks, curve);
  for (int i = 0; i < 2; ++i) state.ledger.record_session(Ranklist{2}, clicks, curve);
  EXPECT_EQ(mcfair_next(state, config_for(PolicyKind::mcfair, 50.0), curve), (Ranklist{0}));
}

TEST(Policies, EveryPolicyReturnsDistinctItemsOfFullLength) {
  const ExaminationCurve curve(5);
  for (auto kind : {PolicyKind::fara, PolicyKind::fara_horiz, PolicyKind::topk, PolicyKind::randomk,
                    PolicyKind::fairco, PolicyKind::mcfair}) {
    for (auto setting : {Setting::post_processing, Setting::online}) {
      for (std::size_t n : {1u, 3u, 9u}) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = 0.1 + 0.1 * static_cast<double>(i);
        QueryState state(r, 5);
        const auto config = config_for(kind, kind == PolicyKind::fara || kind == PolicyKind::fara_horiz ? 0.5 : 2.0,
                                       setting, 7);
        RandomStream rng(n);
        for (int t = 0; t < 30; ++t) {
          const auto list = next_ranklist(state, config, curve, rng);
          ASSERT_EQ(list.size(), std::min<std::size_t>(5, n));
          EXPECT_EQ(std::set<ItemIndex>(list.begin(), list.end()).size(), list.size());
          serve(state, list, curve, rng);
        }
      }
    }
  }
}

TEST(PolicyConfig, ValidatesAlphaRangePerKind) {
  PolicyConfig c;
  c.kind = PolicyKind::fara;
  c.alpha = 1.5;
  EXPECT_THROW(c.normalized(), ValidationError);
  c.kind = PolicyKind::fairco;
  EXPECT_NO_THROW(c.normalized());
  c.alpha = -1;
  EXPECT_THROW(c.normalized(), ValidationError);
  EXPECT_EQ(policy_from_string("fara-horiz"), PolicyKind::fara_horiz);
  EXPECT_THROW(policy_from_string("ilp"), ValidationError);
  EXPECT_EQ(setting_from_string("post"), Setting::post_processing);
}
