#include "anytime/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

using Ticks = std::int64_t;
constexpr double kTicksPerSecond = 1e9;

Ticks to_ticks(double seconds) { return static_cast<Ticks>(std::llround(seconds * kTicksPerSecond)); }
double to_seconds(double ticks) { return ticks / kTicksPerSecond; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ActiveJob {
  std::size_t task_pos;
  JobBudget record;
  Ticks release;
  Ticks deadline;
  Ticks remaining;  // fixed-demand jobs only
  double allotted_ticks = 0.0;
};

}  // namespace

void validate_task(const TaskSpec& task) {
  if (!(task.period > 0.0)) {
    throw DomainError(fmt::format("task {}: period must be > 0, got {}", task.id, task.period));
  }
  if (!(task.wcet >= 0.0)) {
    throw DomainError(fmt::format("task {}: wcet must be >= 0, got {}", task.id, task.wcet));
  }
  if (!(task.iteration_cost > 0.0)) {
    throw DomainError(fmt::format("task {}: per-iteration cost must be > 0, got {}", task.id,
                                  task.iteration_cost));
  }
}

double utilization(const std::vector<TaskSpec>& tasks) {
  double total = 0.0;
  for (const TaskSpec& task : tasks) {
    validate_task(task);
    total += task.wcet / task.period;
  }
  return total;
}

bool is_schedulable(const std::vector<TaskSpec>& tasks) { return utilization(tasks) <= 1.0; }

std::size_t iteration_budget(const JobBudget& job, const TaskSpec& task, const JitterModel& jitter,
                             std::uint64_t seed) {
  validate_task(task);
  if (!(job.allotted >= 0.0)) throw DomainError("allotted time must be >= 0");
  if (!(jitter.amplitude >= 0.0)) throw DomainError("jitter amplitude must be >= 0");
  if (job.allotted == 0.0) return 0;

  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(task.id)));
  key = splitmix64(key ^ static_cast<std::uint64_t>(job.job_index));
  std::mt19937_64 gen(key);
  // 53 random bits mapped to [0, 1); avoids the implementation-defined distributions.
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  const double cost = task.iteration_cost * (1.0 + jitter.amplitude * unit);

  // The relative nudge absorbs round-off in quotients that are integral in exact arithmetic.
  const double ratio = job.allotted / cost * (1.0 + 1e-12);
  if (ratio >= static_cast<double>(std::numeric_limits<std::size_t>::max())) {
    throw DomainError("iteration budget overflows");
  }
  return static_cast<std::size_t>(std::floor(ratio));
}

std::vector<JobBudget> simulate_edf(const std::vector<TaskSpec>& tasks, double horizon,
                                    const JitterModel& jitter, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw DomainError("simulation horizon must be > 0");
  std::set<int> ids;
  for (const TaskSpec& task : tasks) {
    validate_task(task);
    if (!ids.insert(task.id).second) {
      throw DomainError(fmt::format("duplicate task id {}", task.id));
    }
  }

  const Ticks end = to_ticks(horizon);
  const std::size_t n = tasks.size();
  std::vector<Ticks> period(n);
  std::vector<Ticks> demand(n);
  std::vector<Ticks> next_release(n, 0);
  std::vector<std::size_t> released(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    period[k] = to_ticks(tasks[k].period);
    demand[k] = to_ticks(tasks[k].wcet);
    if (period[k] <= 0) throw DomainError("task period is below the 1 ns simulation grid");
  }

  std::vector<ActiveJob> ready;
  std::vector<JobBudget> finished;

  auto finalize = [&](ActiveJob& job, Ticks finish, bool missed) {
    job.record.allotted = to_seconds(job.allotted_ticks);
    job.record.finish = to_seconds(static_cast<double>(finish));
    job.record.missed = missed;
    job.record.iterations =
        iteration_budget(job.record, tasks[job.task_pos], jitter, seed);
    finished.push_back(job.record);
  };

  Ticks now = 0;
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) {
      if (next_release[k] == now && now < end) {
        ActiveJob job;
        job.task_pos = k;
        job.release = now;
        job.deadline = now + period[k];
        job.remaining = demand[k];
        job.record.task_id = tasks[k].id;
        job.record.job_index = released[k]++;
        job.record.release = to_seconds(static_cast<double>(job.release));
        job.record.deadline = to_seconds(static_cast<double>(job.deadline));
        next_release[k] += period[k];
        if (tasks[k].kind == TaskKind::kFixedDemand && job.remaining == 0) {
          finalize(job, now, false);
        } else {
          ready.push_back(job);
        }
      }
    }

    // Retire jobs whose deadline has arrived.
    for (auto it = ready.begin(); it != ready.end();) {
      if (it->deadline <= now) {
        const bool fixed = tasks[it->task_pos].kind == TaskKind::kFixedDemand;
        finalize(*it, it->deadline, fixed);
        it = ready.erase(it);
      } else {
        ++it;
      }
    }

    Ticks next_event = std::numeric_limits<Ticks>::max();
    for (std::size_t k = 0; k < n; ++k) {
      if (next_release[k] < end) next_event = std::min(next_event, next_release[k]);
    }
    if (ready.empty()) {
      if (next_event == std::numeric_limits<Ticks>::max()) break;
      now = next_event;
      continue;
    }

    auto head = std::min_element(ready.begin(), ready.end(), [&](const ActiveJob& a,
                                                                 const ActiveJob& b) {
      return std::tie(a.deadline, a.record.task_id) < std::tie(b.deadline, b.record.task_id);
    });
    for (const ActiveJob& job : ready) next_event = std::min(next_event, job.deadline);

    if (tasks[head->task_pos].kind == TaskKind::kFixedDemand) {
      next_event = std::min(next_event, now + head->remaining);
      const Ticks dt = next_event - now;
      head->remaining -= dt;
      head->allotted_ticks += static_cast<double>(dt);
      if (head->remaining == 0) {
        finalize(*head, next_event, false);
        ready.erase(head);
      }
    } else {
      const Ticks dt = next_event - now;
      const Ticks shared_deadline = head->deadline;
      std::size_t sharers = 0;
      for (const ActiveJob& job : ready) {
        if (job.deadline == shared_deadline && tasks[job.task_pos].kind == TaskKind::kAnytime) {
          ++sharers;
        }
      }
      for (ActiveJob& job : ready) {
        if (job.deadline == shared_deadline && tasks[job.task_pos].kind == TaskKind::kAnytime) {
          job.allotted_ticks += static_cast<double>(dt) / static_cast<double>(sharers);
        }
      }
    }
    now = next_event;
  }

  std::sort(finished.begin(), finished.end(), [](const JobBudget& a, const JobBudget& b) {
    return std::tie(a.release, a.task_id) < std::tie(b.release, b.task_id);
  });
  return finished;
}

void write_timeline_csv(std::ostream& out, const std::vector<JobBudget>& jobs) {
  out << "task_id,release,deadline,allotted_s,iterations,missed\n";
  for (const JobBudget& job : jobs) {
    fmt::print(out, "{},{},{},{},{},{}\n", job.task_id, job.release, job.deadline, job.allotted,
               job.iterations, job.missed ? 1 : 0);
  }
}

}  // namespace anytime
