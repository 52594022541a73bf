#include "anytime/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

constexpr std::size_t kDefaultTaskCount = 2;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

double parse_double(const std::string& value, std::size_t line, const std::string& key) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double parsed = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(parsed)) {
    throw ConfigError(line, key, fmt::format("expected a finite number, got '{}'", value));
  }
  return parsed;
}

template <typename Int>
Int parse_integer(const std::string& value, std::size_t line, const std::string& key) {
  Int parsed{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(line, key, fmt::format("expected an integer, got '{}'", value));
  }
  return parsed;
}

std::vector<CaseKind> parse_case_list(const std::string& value, std::size_t line,
                                      const std::string& key) {
  if (value == "all") return {std::begin(kAllCases), std::end(kAllCases)};
  std::vector<CaseKind> cases;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto kind = parse_case(trim(item));
    if (!kind) throw ConfigError(line, key, fmt::format("unknown case '{}'", trim(item)));
    if (std::find(cases.begin(), cases.end(), *kind) == cases.end()) cases.push_back(*kind);
  }
  if (cases.empty()) throw ConfigError(line, key, "no case given");
  return cases;
}

using GlobalSetter = std::function<void(ExperimentConfig&, const std::string&, std::size_t,
                                        const std::string&)>;
using TaskSetter =
    std::function<void(TaskConfig&, const std::string&, std::size_t, const std::string&)>;

GlobalSetter set_double(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v, std::size_t line,
                 const std::string& key) { c.*field = parse_double(v, line, key); };
}

TaskSetter set_task_double(double TaskConfig::*field) {
  return [field](TaskConfig& t, const std::string& v, std::size_t line, const std::string& key) {
    t.*field = parse_double(v, line, key);
  };
}

TaskSetter set_motor_double(double DcMotorParams::*field) {
  return [field](TaskConfig& t, const std::string& v, std::size_t line, const std::string& key) {
    t.motor.*field = parse_double(v, line, key);
  };
}

const std::map<std::string, GlobalSetter>& global_keys() {
  static const std::map<std::string, GlobalSetter> keys = {
      {"case",
       [](ExperimentConfig& c, const std::string& v, std::size_t line, const std::string& key) {
         c.cases = parse_case_list(v, line, key);
       }},
      {"solver.sigma", set_double(&ExperimentConfig::sigma)},
      {"solver.beta", set_double(&ExperimentConfig::beta)},
      {"solver.h", set_double(&ExperimentConfig::step_size)},
      {"sim.fast_period_s", set_double(&ExperimentConfig::fast_period)},
      {"sim.slow_period_s", set_double(&ExperimentConfig::slow_period)},
      {"sim.length_s", set_double(&ExperimentConfig::length)},
      {"sim.plant_step_s", set_double(&ExperimentConfig::plant_step)},
      {"sim.budget_scale", set_double(&ExperimentConfig::budget_scale)},
      {"jitter.amplitude", set_double(&ExperimentConfig::jitter_amplitude)},
      {"jitter.seed",
       [](ExperimentConfig& c, const std::string& v, std::size_t line, const std::string& key) {
         c.seed = parse_integer<std::uint64_t>(v, line, key);
       }},
      {"output.dir",
       [](ExperimentConfig& c, const std::string& v, std::size_t, const std::string&) {
         c.output_dir = v;
       }},
  };
  return keys;
}

const std::map<std::string, TaskSetter>& task_keys() {
  static const std::map<std::string, TaskSetter> keys = {
      {"motor.J", set_motor_double(&DcMotorParams::inertia)},
      {"motor.b", set_motor_double(&DcMotorParams::damping)},
      {"motor.K", set_motor_double(&DcMotorParams::motor_constant)},
      {"motor.R", set_motor_double(&DcMotorParams::resistance)},
      {"motor.L", set_motor_double(&DcMotorParams::inductance)},
      {"mpc.horizon_s", set_task_double(&TaskConfig::horizon_seconds)},
      {"mpc.horizon_steps",
       [](TaskConfig& t, const std::string& v, std::size_t line, const std::string& key) {
         t.horizon_steps = parse_integer<int>(v, line, key);
       }},
      {"mpc.q_weight", set_task_double(&TaskConfig::output_weight)},
      {"mpc.r_weight", set_task_double(&TaskConfig::input_weight)},
      {"mpc.u_min", set_task_double(&TaskConfig::u_min)},
      {"mpc.u_max", set_task_double(&TaskConfig::u_max)},
      {"reference.amplitude", set_task_double(&TaskConfig::reference_amplitude)},
      {"reference.step_time_s", set_task_double(&TaskConfig::reference_step_time)},
      {"wcet_s", set_task_double(&TaskConfig::wcet)},
      {"iteration_cost_s", set_task_double(&TaskConfig::iteration_cost)},
  };
  return keys;
}

TaskConfig motor_task(double resistance, double inductance) {
  TaskConfig task;
  task.motor.resistance = resistance;
  task.motor.inductance = inductance;
  return task;
}

bool is_multiple(double value, double unit) {
  const double ratio = value / unit;
  return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio);
}

long steps_of(double value, double unit) { return std::lround(value / unit); }

double period_of(const ExperimentConfig& config, CaseKind kind) {
  return kind == CaseKind::kSlow300ms ? config.slow_period : config.fast_period;
}

MpcConfig mpc_config_for(const TaskConfig& task, double period) {
  MpcConfig cfg;
  cfg.horizon = task.horizon_steps > 0
                    ? task.horizon_steps
                    : std::max(1, static_cast<int>(std::lround(task.horizon_seconds / period)));
  cfg.output_weight = Matrix::Constant(1, 1, task.output_weight);
  cfg.input_weight = Matrix::Constant(1, 1, task.input_weight);
  cfg.u_min = Vector::Constant(1, task.u_min);
  cfg.u_max = Vector::Constant(1, task.u_max);
  const double amplitude = task.reference_amplitude;
  const double step_time = task.reference_step_time;
  cfg.reference = [amplitude, step_time](double t) {
    return Vector::Constant(1, t >= step_time ? amplitude : 0.0);
  };
  return cfg;
}

double reference_at(const TaskConfig& task, double t) {
  return t >= task.reference_step_time ? task.reference_amplitude : 0.0;
}

}  // namespace

std::string_view case_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::kIdeal20ms:
      return "ideal-20ms";
    case CaseKind::kSlow300ms:
      return "slow-300ms";
    case CaseKind::kAnytime20ms:
      return "anytime-20ms";
  }
  return "unknown";
}

std::optional<CaseKind> parse_case(std::string_view name) {
  for (CaseKind kind : kAllCases) {
    if (case_name(kind) == name) return kind;
  }
  return std::nullopt;
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.tasks = {motor_task(1.0, 0.5), motor_task(2.0, 0.8)};
  config.cases = {std::begin(kAllCases), std::end(kAllCases)};
  return config;
}

ExperimentConfig parse_config(std::istream& in) {
  struct Entry {
    std::size_t line;
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line_no, line, "expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, key, "empty key");
    if (value.empty()) throw ConfigError(line_no, key, "missing value");
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      throw ConfigError(line_no, key, fmt::format("duplicate key (first set on line {})",
                                                  it->second));
    }
    entries.push_back({line_no, std::move(key), std::move(value)});
  }

  ExperimentConfig config = default_config();
  std::size_t task_count = kDefaultTaskCount;
  for (const Entry& e : entries) {
    if (e.key == "tasks") {
      const auto n = parse_integer<std::size_t>(e.value, e.line, e.key);
      if (n < 1) throw ConfigError(e.line, e.key, "need at least one task");
      task_count = n;
    }
  }
  config.tasks.resize(task_count, config.tasks.back());

  for (const Entry& e : entries) {
    if (e.key == "tasks") continue;
    if (auto it = global_keys().find(e.key); it != global_keys().end()) {
      it->second(config, e.value, e.line, e.key);
      continue;
    }
    // task<k>.<field>
    if (e.key.rfind("task", 0) == 0) {
      const auto dot = e.key.find('.');
      if (dot != std::string::npos && dot > 4) {
        std::size_t index = 0;
        const std::string digits = e.key.substr(4, dot - 4);
        const auto [ptr, ec] =
            std::from_chars(digits.data(), digits.data() + digits.size(), index);
        const auto field = task_keys().find(e.key.substr(dot + 1));
        if (ec == std::errc() && ptr == digits.data() + digits.size() &&
            field != task_keys().end()) {
          if (index < 1 || index > task_count) {
            throw ConfigError(e.line, e.key,
                              fmt::format("task index out of range 1..{}", task_count));
          }
          field->second(config.tasks[index - 1], e.value, e.line, e.key);
          continue;
        }
      }
    }
    throw ConfigError(e.line, e.key, "unknown key");
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "--config", fmt::format("cannot open '{}'", path));
  return parse_config(in);
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* key, const std::string& message) {
    if (!ok) throw ConfigError(0, key, message);
  };
  require(!c.tasks.empty(), "tasks", "need at least one task");
  require(!c.cases.empty(), "case", "no case selected");
  require(c.sigma > 0.0, "solver.sigma", "must be > 0");
  require(c.beta > 0.0, "solver.beta", "must be > 0");
  require(c.step_size > 0.0, "solver.h", "must be > 0");
  require(c.plant_step > 0.0, "sim.plant_step_s", "must be > 0");
  require(c.length > 0.0, "sim.length_s", "must be > 0");
  require(c.fast_period > 0.0 && is_multiple(c.fast_period, c.plant_step), "sim.fast_period_s",
          "must be a positive multiple of sim.plant_step_s");
  require(c.slow_period > 0.0 && is_multiple(c.slow_period, c.plant_step), "sim.slow_period_s",
          "must be a positive multiple of sim.plant_step_s");
  require(is_multiple(c.length, c.plant_step), "sim.length_s",
          "must be a multiple of sim.plant_step_s");
  require(c.jitter_amplitude >= 0.0, "jitter.amplitude", "must be >= 0");
  require(c.budget_scale >= 0.0, "sim.budget_scale", "must be >= 0");
  for (const TaskConfig& t : c.tasks) {
    require(t.motor.inertia > 0.0 && t.motor.inductance > 0.0, "motor",
            "J and L must be > 0");
    require(t.motor.damping >= 0.0 && t.motor.resistance >= 0.0, "motor", "b and R must be >= 0");
    require(t.horizon_seconds > 0.0 || t.horizon_steps > 0, "mpc.horizon_s", "must be > 0");
    require(t.horizon_steps >= 0, "mpc.horizon_steps", "must be >= 0");
    require(t.output_weight >= 0.0, "mpc.q_weight", "must be >= 0");
    require(t.input_weight > 0.0, "mpc.r_weight", "must be > 0");
    require(t.u_min < t.u_max, "mpc.u_min", "must be < mpc.u_max");
    require(t.wcet >= 0.0, "wcet_s", "must be >= 0");
    require(t.iteration_cost > 0.0, "iteration_cost_s", "must be > 0");
  }
}

void ise_accumulate(IseSeries& series, double t_prev, double t_now, double e_prev, double e_now) {
  if (!(t_now > t_prev)) {
    throw DomainError(fmt::format("ISE time must increase: t_prev = {}, t_now = {}", t_prev, t_now));
  }
  if (series.time.empty()) {
    series.time.push_back(t_prev);
    series.ise.push_back(0.0);
  }
  const double increment = (t_now - t_prev) * (e_prev * e_prev + e_now * e_now) / 2.0;
  series.time.push_back(t_now);
  series.ise.push_back(series.ise.back() + increment);
}

CaseResult run_case(const ExperimentConfig& config, CaseKind kind) {
  validate_config(config);
  const double period = period_of(config, kind);
  const long ticks_per_period = steps_of(period, config.plant_step);
  const long total_steps = steps_of(config.length, config.plant_step);
  const std::size_t n_tasks = config.tasks.size();

  AnytimeSolverSettings settings;
  settings.barrier.beta = config.beta;
  settings.flow.sigma = config.sigma;
  settings.flow.step_size = config.step_size;

  std::vector<TaskSpec> specs;
  for (std::size_t k = 0; k < n_tasks; ++k) {
    TaskSpec spec;
    spec.id = static_cast<int>(k + 1);
    spec.period = period;
    spec.wcet = config.tasks[k].wcet;
    spec.iteration_cost = config.tasks[k].iteration_cost;
    spec.kind = kind == CaseKind::kAnytime20ms ? TaskKind::kAnytime : TaskKind::kFixedDemand;
    specs.push_back(spec);
  }

  CaseResult result;
  result.kind = kind;
  result.timeline =
      simulate_edf(specs, config.length, JitterModel{config.jitter_amplitude}, config.seed);
  result.iterations_used.assign(result.timeline.size(), 0);
  std::map<std::pair<int, std::size_t>, std::size_t> job_slot;
  for (std::size_t i = 0; i < result.timeline.size(); ++i) {
    job_slot[{result.timeline[i].task_id, result.timeline[i].job_index}] = i;
  }

  struct Loop {
    DiscretePlant micro;
    DiscretePlant control;
    MpcConfig mpc;
    MpcTaskState state;
    Vector x;
    Vector u;
    std::optional<Vector> pending;
  };
  std::vector<Loop> loops;
  for (std::size_t k = 0; k < n_tasks; ++k) {
    const LinearPlant plant = dc_motor(config.tasks[k].motor);
    Loop loop;
    loop.micro = discretize(plant, config.plant_step);
    loop.control = discretize(plant, period);
    loop.mpc = mpc_config_for(config.tasks[k], period);
    loop.x = Vector::Zero(plant.state_dim());
    loop.u = Vector::Zero(plant.input_dim());
    loops.push_back(std::move(loop));

    TaskTrace trace;
    trace.task_id = static_cast<int>(k + 1);
    trace.samples.reserve(static_cast<std::size_t>(total_steps) + 1);
    result.tasks.push_back(std::move(trace));
  }

  for (long step_index = 0; step_index <= total_steps; ++step_index) {
    const double t = static_cast<double>(step_index) * config.plant_step;
    for (std::size_t k = 0; k < n_tasks; ++k) {
      Loop& loop = loops[k];
      TaskTrace& trace = result.tasks[k];

      if (step_index < total_steps && step_index % ticks_per_period == 0) {
        const auto job_index = static_cast<std::size_t>(step_index / ticks_per_period);
        if (kind == CaseKind::kIdeal20ms) {
          loop.u = mpc_invoke_reference(loop.state, loop.control, loop.mpc, loop.x, t);
        } else {
          // Inputs computed during the previous period are committed at its deadline; the new
          // job plans from the state predicted at its own deadline.
          if (loop.pending) loop.u = *loop.pending;
          const Vector predicted = simulate_step(loop.control, loop.x, loop.u);
          if (kind == CaseKind::kSlow300ms) {
            loop.pending =
                mpc_invoke_reference(loop.state, loop.control, loop.mpc, predicted, t + period);
          } else {
            const std::size_t slot = job_slot.at({trace.task_id, job_index});
            const auto budget = static_cast<std::size_t>(std::floor(
                static_cast<double>(result.timeline[slot].iterations) * config.budget_scale));
            loop.pending = mpc_invoke(loop.state, loop.control, loop.mpc, predicted, t + period,
                                      budget, settings);
            result.iterations_used[slot] = loop.state.last_iterations;
          }
        }
      }

      const double y = (loop.micro.C * loop.x)[0];
      const double ref = reference_at(config.tasks[k], t);
      const double e = ref - y;
      if (step_index == 0) {
        trace.ise.time.push_back(t);
        trace.ise.ise.push_back(0.0);
      } else {
        ise_accumulate(trace.ise, trace.samples.back().t, t, trace.samples.back().e, e);
      }
      trace.samples.push_back({t, loop.u[0], y, ref, e, trace.ise.final_value()});

      if (step_index < total_steps) loop.x = simulate_step(loop.micro, loop.x, loop.u);
    }
  }
  return result;
}

double degradation_pct(double ise_case, double ise_ideal) {
  if (ise_ideal == 0.0) {
    return ise_case == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 100.0 * (ise_case - ise_ideal) / ise_ideal;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentResult out;
  const bool has_ideal = std::find(config.cases.begin(), config.cases.end(),
                                   CaseKind::kIdeal20ms) != config.cases.end();
  std::optional<CaseResult> baseline;
  if (!has_ideal) baseline = run_case(config, CaseKind::kIdeal20ms);
  for (CaseKind kind : config.cases) out.cases.push_back(run_case(config, kind));

  const CaseResult* ideal = baseline ? &*baseline : nullptr;
  for (const CaseResult& c : out.cases) {
    if (c.kind == CaseKind::kIdeal20ms) ideal = &c;
  }
  for (const CaseResult& c : out.cases) {
    for (std::size_t k = 0; k < c.tasks.size(); ++k) {
      const double final_ise = c.tasks[k].ise.final_value();
      out.summary.push_back({c.kind, c.tasks[k].task_id, final_ise,
                             degradation_pct(final_ise, ideal->tasks[k].ise.final_value())});
    }
  }
  return out;
}

void write_samples_csv(std::ostream& out, const std::vector<CaseResult>& cases) {
  out << "t,task_id,case,u,y,ref,e,ise\n";
  for (const CaseResult& c : cases) {
    for (const TaskTrace& trace : c.tasks) {
      for (const SampleRow& row : trace.samples) {
        fmt::print(out, "{},{},{},{},{},{},{},{}\n", row.t, trace.task_id, case_name(c.kind),
                   row.u, row.y, row.ref, row.e, row.ise);
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "case,task_id,final_ise,degradation_pct\n";
  for (const SummaryRow& row : rows) {
    fmt::print(out, "{},{},{},{}\n", case_name(row.kind), row.task_id, row.final_ise,
               row.degradation_pct);
  }
}

void write_results(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "samples.csv");
    write_samples_csv(out, result.cases);
  }
  {
    std::ofstream out(dir / "summary.csv");
    write_summary_csv(out, result.summary);
  }
  for (const CaseResult& c : result.cases) {
    std::ofstream out(dir / fmt::format("timeline_{}.csv", case_name(c.kind)));
    write_timeline_csv(out, c.timeline);
  }
}

std::vector<std::string> check_invariants(const ExperimentConfig& config,
                                          const ExperimentResult& result) {
  constexpr double kReferenceTol = 1e-8;
  std::vector<std::string> violations;
  for (const CaseResult& c : result.cases) {
    for (std::size_t k = 0; k < c.tasks.size(); ++k) {
      const TaskTrace& trace = c.tasks[k];
      const TaskConfig& task = config.tasks[k];
      for (std::size_t i = 1; i < trace.ise.ise.size(); ++i) {
        if (trace.ise.ise[i] < trace.ise.ise[i - 1]) {
          violations.push_back(fmt::format("{} task {}: ISE decreases at t = {}",
                                           case_name(c.kind), trace.task_id, trace.ise.time[i]));
          break;
        }
      }
      for (const SampleRow& row : trace.samples) {
        const bool ok = c.kind == CaseKind::kAnytime20ms
                            ? (row.u > task.u_min && row.u < task.u_max)
                            : (row.u >= task.u_min - kReferenceTol &&
                               row.u <= task.u_max + kReferenceTol);
        if (!ok) {
          violations.push_back(fmt::format("{} task {}: input {} outside [{}, {}] at t = {}",
                                           case_name(c.kind), trace.task_id, row.u, task.u_min,
                                           task.u_max, row.t));
          break;
        }
      }
    }
    // The slow case is the schedulable baseline: every job must finish by its deadline.
    if (c.kind == CaseKind::kSlow300ms) {
      std::vector<TaskSpec> specs;
      for (std::size_t k = 0; k < config.tasks.size(); ++k) {
        specs.push_back({static_cast<int>(k + 1), config.slow_period, config.tasks[k].wcet,
                         config.tasks[k].iteration_cost, TaskKind::kFixedDemand});
      }
      for (const JobBudget& job : c.timeline) {
        if (job.missed) {
          violations.push_back(
              fmt::format("slow-300ms: task {} missed the deadline at {} (utilization {})",
                          job.task_id, job.deadline, utilization(specs)));
          break;
        }
      }
    }
  }
  return violations;
}

}  // namespace anytime
