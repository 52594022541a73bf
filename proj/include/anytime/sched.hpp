#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace anytime {

enum class TaskKind {
  // Each job needs exactly `wcet` seconds of processor time.
  kFixedDemand,
  // Each job runs until its deadline, consuming whatever time EDF grants it.
  kAnytime,
};

// Periodic task with implicit deadline (relative deadline = period).
struct TaskSpec {
  int id = 0;
  double period = 0.0;          // ΔT_k [s]
  double wcet = 0.0;            // ℓ_k [s]
  double iteration_cost = 1e-5; // c_k [s per solver iteration]
  TaskKind kind = TaskKind::kFixedDemand;
};

struct JitterModel {
  // Per-iteration cost is c_k·(1 + u), u ~ U[0, amplitude].
  double amplitude = 0.2;
};

struct JobBudget {
  int task_id = 0;
  std::size_t job_index = 0;
  double release = 0.0;
  double deadline = 0.0;
  double allotted = 0.0;  // processor time received before the deadline [s]
  double finish = 0.0;    // completion time, or the deadline for anytime / missed jobs
  std::size_t iterations = 0;
  bool missed = false;
};

void validate_task(const TaskSpec& task);

// Σ ℓ_k / ΔT_k
double utilization(const std::vector<TaskSpec>& tasks);
bool is_schedulable(const std::vector<TaskSpec>& tasks);

// Preemptive EDF on one processor over jobs released in [0, horizon). Ready jobs run in order of
// (absolute deadline, task id); anytime jobs that share the earliest deadline split the processor
// equally. A fixed-demand job still unfinished at its deadline is aborted and flagged as missed.
// Times are simulated on an integer nanosecond grid, so results are bit-reproducible.
// The result is ordered by (release, task id).
std::vector<JobBudget> simulate_edf(const std::vector<TaskSpec>& tasks, double horizon,
                                    const JitterModel& jitter, std::uint64_t seed);

// floor(allotted / c) with c = c_k·(1 + u); u drawn from a generator seeded by (seed, task, job).
std::size_t iteration_budget(const JobBudget& job, const TaskSpec& task, const JitterModel& jitter,
                             std::uint64_t seed);

// Header: task_id,release,deadline,allotted_s,iterations,missed
void write_timeline_csv(std::ostream& out, const std::vector<JobBudget>& jobs);

}  // namespace anytime
