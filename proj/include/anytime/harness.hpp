#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anytime/mpc.hpp"
#include "anytime/plant.hpp"
#include "anytime/sched.hpp"

namespace anytime {

enum class CaseKind {
  kIdeal20ms,    // reference solver every fast period, zero latency (unimplementable baseline)
  kSlow300ms,    // reference solver every slow period, schedulable
  kAnytime20ms,  // anytime flow every fast period with EDF-granted budgets
};

std::string_view case_name(CaseKind kind);
std::optional<CaseKind> parse_case(std::string_view name);
inline constexpr CaseKind kAllCases[] = {CaseKind::kIdeal20ms, CaseKind::kSlow300ms,
                                         CaseKind::kAnytime20ms};

struct TaskConfig {
  DcMotorParams motor;
  double horizon_seconds = 0.6;
  int horizon_steps = 0;  // > 0 overrides horizon_seconds for every case
  double output_weight = 1.0;
  double input_weight = 1e-4;
  double u_min = -10.0;
  double u_max = 10.0;
  double reference_amplitude = 1.0;
  double reference_step_time = 0.0;
  double wcet = 0.15;             // ℓ_k of a full reference solve [s]
  double iteration_cost = 5e-5;   // c_k of one flow iteration [s]
};

struct ExperimentConfig {
  std::vector<TaskConfig> tasks;
  std::vector<CaseKind> cases;
  double sigma = 10.0;
  double beta = 1e5;
  double step_size = 1.0;
  double fast_period = 0.02;
  double slow_period = 0.3;
  double length = 5.0;
  double plant_step = 1e-3;
  double jitter_amplitude = 0.2;
  std::uint64_t seed = 1;
  double budget_scale = 1.0;
  std::string output_dir = "results";
};

// Two DC motors, every case, σ = 10, β = 1e5.
ExperimentConfig default_config();

// Flat `key = value` text; `#` starts a comment. Unknown, duplicate, or malformed entries throw
// ConfigError carrying the line number and key.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

// Cumulative ∫ e(t)² dt sampled at `time`.
struct IseSeries {
  std::vector<double> time;
  std::vector<double> ise;

  double final_value() const { return ise.empty() ? 0.0 : ise.back(); }
};

// Trapezoidal update over [t_prev, t_now]; appends (t_now, ISE). Starts the series at
// (t_prev, 0) when empty. Throws DomainError unless t_now > t_prev.
void ise_accumulate(IseSeries& series, double t_prev, double t_now, double e_prev, double e_now);

struct SampleRow {
  double t;
  double u;
  double y;
  double ref;
  double e;
  double ise;
};

struct TaskTrace {
  int task_id = 0;
  std::vector<SampleRow> samples;
  IseSeries ise;
};

struct CaseResult {
  CaseKind kind = CaseKind::kAnytime20ms;
  std::vector<TaskTrace> tasks;
  std::vector<JobBudget> timeline;
  // Solver iterations actually spent per job (anytime case), parallel to `timeline`.
  std::vector<std::size_t> iterations_used;
};

struct SummaryRow {
  CaseKind kind;
  int task_id;
  double final_ise;
  double degradation_pct;
};

struct ExperimentResult {
  std::vector<CaseResult> cases;
  std::vector<SummaryRow> summary;
};

CaseResult run_case(const ExperimentConfig& config, CaseKind kind);

// Runs every case in config.cases (plus the ideal baseline for the summary when it is absent).
ExperimentResult run_experiment(const ExperimentConfig& config);

// 100·(ISE_case − ISE_ideal)/ISE_ideal; 0 when both are zero.
double degradation_pct(double ise_case, double ise_ideal);

// Header: t,task_id,case,u,y,ref,e,ise
void write_samples_csv(std::ostream& out, const std::vector<CaseResult>& cases);
// Header: case,task_id,final_ise,degradation_pct
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
// Writes samples.csv, summary.csv and timeline_<case>.csv under config.output_dir.
void write_results(const ExperimentConfig& config, const ExperimentResult& result);

// Closed-loop invariants: monotone ISE, anytime inputs strictly inside the box, reference-solver
// inputs inside the box up to tolerance, no deadline misses in the slow timeline. Returns one
// message per violation.
std::vector<std::string> check_invariants(const ExperimentConfig& config,
                                          const ExperimentResult& result);

}  // namespace anytime
