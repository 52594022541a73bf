#include <sstream>

#include <gtest/gtest.h>

#include "anytime/errors.hpp"
#include "anytime/harness.hpp"

using namespace anytime;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig short_config(double length) {
  ExperimentConfig c = default_config();
  c.length = length;
  return c;
}

}  // namespace

TEST(Ise, ZeroErrorStaysZero) {
  IseSeries s;
  ise_accumulate(s, 0.0, 0.5, 0.0, 0.0);
  ise_accumulate(s, 0.5, 1.0, 0.0, 0.0);
  EXPECT_EQ(s.final_value(), 0.0);
  EXPECT_EQ(s.time, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Ise, ConstantUnitError) {
  IseSeries s;
  ise_accumulate(s, 0.0, 1.0, 1.0, 1.0);
  ise_accumulate(s, 1.0, 2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(s.final_value(), 2.0);
}

TEST(Ise, TrapezoidOfLinearError) {
  IseSeries s;
  ise_accumulate(s, 0.0, 0.5, 0.0, 0.5);
  ise_accumulate(s, 0.5, 1.0, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(s.final_value(), 0.375);
}

TEST(Ise, NonIncreasingTimeThrows) {
  IseSeries s;
  EXPECT_THROW(ise_accumulate(s, 1.0, 1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(ise_accumulate(s, 1.0, 0.5, 0.0, 0.0), DomainError);
}

TEST(Degradation, Percentages) {
  EXPECT_DOUBLE_EQ(degradation_pct(1.5, 1.0), 50.0);
  EXPECT_DOUBLE_EQ(degradation_pct(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(degradation_pct(0.9, 1.0), -10.0);
}

TEST(CaseNames, RoundTrip) {
  for (CaseKind kind : kAllCases) EXPECT_EQ(parse_case(case_name(kind)), kind);
  EXPECT_FALSE(parse_case("fast").has_value());
}

TEST(Config, DefaultsDescribeTwoMotors) {
  const ExperimentConfig c = default_config();
  ASSERT_EQ(c.tasks.size(), 2u);
  EXPECT_EQ(c.tasks[1].motor.resistance, 2.0);
  EXPECT_EQ(c.tasks[1].motor.inductance, 0.8);
  EXPECT_EQ(c.sigma, 10.0);
  EXPECT_EQ(c.beta, 1e5);
  EXPECT_EQ(c.cases.size(), 3u);
}

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  const ExperimentConfig c = parse(
      "# experiment\n"
      "tasks = 3\n"
      "\n"
      "case = slow-300ms, anytime-20ms\n"
      "solver.sigma = 5   # gain\n"
      "sim.length_s = 2\n"
      "jitter.seed = 77\n"
      "task3.motor.R = 4\n"
      "task1.mpc.horizon_steps = 7\n"
      "output.dir = out/x\n");
  EXPECT_EQ(c.tasks.size(), 3u);
  EXPECT_EQ(c.cases, (std::vector<CaseKind>{CaseKind::kSlow300ms, CaseKind::kAnytime20ms}));
  EXPECT_EQ(c.sigma, 5.0);
  EXPECT_EQ(c.length, 2.0);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.tasks[2].motor.resistance, 4.0);
  EXPECT_EQ(c.tasks[0].horizon_steps, 7);
  EXPECT_EQ(c.output_dir, "out/x");
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse("solver.sigma = 1\nsolver.gamma = 2\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.key(), "solver.gamma");
  }
}

TEST(Config, DuplicateKeyIsError) {
  try {
    parse("sim.length_s = 1\n\nsim.length_s = 2\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Config, MalformedEntries) {
  EXPECT_THROW(parse("solver.sigma\n"), ConfigError);
  EXPECT_THROW(parse("solver.sigma = ten\n"), ConfigError);
  EXPECT_THROW(parse("solver.sigma =\n"), ConfigError);
  EXPECT_THROW(parse("case = fastest\n"), ConfigError);
  EXPECT_THROW(parse("task3.wcet_s = 1\n"), ConfigError);
  EXPECT_THROW(parse("task1.motor.X = 1\n"), ConfigError);
  EXPECT_THROW(parse("jitter.seed = -4\n"), ConfigError);
}

TEST(Config, SemanticValidation) {
  EXPECT_THROW(parse("solver.sigma = 0\n"), ConfigError);
  EXPECT_THROW(parse("sim.fast_period_s = 0.0205\n"), ConfigError);
  EXPECT_THROW(parse("task1.mpc.u_min = 20\n"), ConfigError);
  EXPECT_THROW(parse("task2.mpc.r_weight = 0\n"), ConfigError);
}

TEST(Experiment, ZeroReferenceGivesZeroIse) {
  ExperimentConfig c = short_config(0.5);
  for (TaskConfig& t : c.tasks) t.reference_amplitude = 0.0;
  const ExperimentResult r = run_experiment(c);
  for (const SummaryRow& row : r.summary) {
    EXPECT_EQ(row.final_ise, 0.0) << case_name(row.kind);
    EXPECT_EQ(row.degradation_pct, 0.0);
  }
}

TEST(Experiment, SamplesCoverTheRunAtPlantRate) {
  const ExperimentConfig c = short_config(0.3);
  const CaseResult r = run_case(c, CaseKind::kAnytime20ms);
  ASSERT_EQ(r.tasks.size(), 2u);
  EXPECT_EQ(r.tasks[0].samples.size(), 301u);
  EXPECT_DOUBLE_EQ(r.tasks[0].samples.back().t, 0.3);
  EXPECT_EQ(r.timeline.size(), 30u);
  EXPECT_EQ(r.iterations_used.size(), r.timeline.size());
  for (std::size_t i = 0; i < r.timeline.size(); ++i) {
    EXPECT_LE(r.iterations_used[i], r.timeline[i].iterations);
  }
}

TEST(Experiment, SummaryAddsIdealBaseline) {
  ExperimentConfig c = short_config(0.6);
  c.cases = {CaseKind::kSlow300ms};
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.cases.size(), 1u);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_GT(r.summary[0].degradation_pct, 0.0);
}

TEST(Experiment, InvariantsHoldOnShortRun) {
  const ExperimentConfig c = short_config(1.0);
  const ExperimentResult r = run_experiment(c);
  const auto violations = check_invariants(c, r);
  EXPECT_TRUE(violations.empty()) << violations.front();
}

TEST(Experiment, CsvIsBitIdenticalAcrossRuns) {
  ExperimentConfig c = short_config(0.5);
  c.cases = {CaseKind::kAnytime20ms};
  std::ostringstream a;
  std::ostringstream b;
  write_samples_csv(a, {run_case(c, CaseKind::kAnytime20ms)});
  write_samples_csv(b, {run_case(c, CaseKind::kAnytime20ms)});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "t,task_id,case,u,y,ref,e,ise");
}

TEST(Experiment, SummaryCsvHeader) {
  std::ostringstream out;
  write_summary_csv(out, {{CaseKind::kSlow300ms, 1, 2.5, 12.5}});
  EXPECT_EQ(out.str(), "case,task_id,final_ise,degradation_pct\nslow-300ms,1,2.5,12.5\n");
}

// Property: more compute never hurts the closed loop on most seeds.
TEST(ExperimentProperty, LargerBudgetImprovesIse) {
  int improved = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig c = short_config(1.0);
    c.seed = seed;
    c.budget_scale = 0.05;
    const CaseResult small = run_case(c, CaseKind::kAnytime20ms);
    c.budget_scale = 0.5;
    const CaseResult large = run_case(c, CaseKind::kAnytime20ms);
    for (std::size_t k = 0; k < small.tasks.size(); ++k) {
      ++total;
      if (large.tasks[k].ise.final_value() <= small.tasks[k].ise.final_value()) ++improved;
    }
  }
  EXPECT_GE(improved, (8 * total + 9) / 10);
}
