#include "routerlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace routerlab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read file: " + path);
  return in;
}

void expect_header(std::ifstream& in, const std::string& path,
                   const std::string& header) {
  std::string line;
  if (!std::getline(in, line))
    throw IoError(path + ": empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw IoError(path + ": unexpected header '" + line + "'");
}

std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                const std::string& header,
                                                char sep,
                                                std::size_t columns) {
  std::ifstream in = open_in(path);
  expect_header(in, path, header);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, sep);
    if (f.size() != columns)
      throw IoError(path + ": expected " + std::to_string(columns) +
                    " columns, got " + std::to_string(f.size()));
    rows.push_back(std::move(f));
  }
  return rows;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    double d = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw IoError(path + ": bad number '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    long n = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw IoError(path + ": bad integer '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    std::uint64_t n = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw IoError(path + ": bad unsigned integer '" + s + "'");
  }
}

Trajectory trajectory_from_fields(const std::string& path,
                                  std::uint64_t task_id,
                                  const std::string& seed,
                                  const std::string& actions,
                                  const std::string& costs,
                                  const std::string& success,
                                  const std::string& total_cost,
                                  const std::string& large_calls) {
  Trajectory t;
  t.task_id = task_id;
  t.seed = parse_u64(seed, path);
  std::vector<std::string> cs = split(costs, ',');
  if (actions.size() != cs.size())
    throw IoError(path + ": actions/costs length mismatch");
  int larges = 0;
  double cost_sum = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    StepRecord r;
    r.step_index = static_cast<int>(i);
    if (actions[i] == 'L') {
      r.action = RouterAction::LARGE;
      ++larges;
    } else if (actions[i] == 'S') {
      r.action = RouterAction::SMALL;
    } else {
      throw IoError(path + ": bad action char '" +
                    std::string(1, actions[i]) + "'");
    }
    r.cost = parse_double(cs[i], path);
    cost_sum += r.cost;
    t.records.push_back(r);
  }
  if (success == "1") t.success = true;
  else if (success != "0") throw IoError(path + ": bad success flag");
  t.total_cost = parse_double(total_cost, path);
  t.large_calls = static_cast<int>(parse_long(large_calls, path));
  if (t.large_calls != larges)
    throw IoError(path + ": large_calls column disagrees with actions");
  if (std::abs(t.total_cost - cost_sum) > 1e-6)
    throw IoError(path + ": total_cost column disagrees with costs");
  return t;
}

constexpr const char* kTrajectoryHeader =
    "task_id\tseed\tactions\tcosts\tsuccess\ttotal_cost\tlarge_calls";
constexpr const char* kTaxonomyHeader =
    "task_id\ttrials\tsmall_successes\tlarge_successes\tlabel";
constexpr const char* kBoundariesHeader =
    "task_id\tsmall_mean\tlarge_mean\tc_min\tc_max";
constexpr const char* kExpertsHeader =
    "task_id\tlabel\tsource\tseed\tactions\tcosts\tsuccess\ttotal_cost\t"
    "large_calls";
constexpr const char* kTrainingLogHeader =
    "iteration,mean_reward,success_rate,mean_cost,mean_kl,lambda";
constexpr const char* kFrontierHeader =
    "method,knob,seed_count,success_rate,success_stderr,avg_cost,"
    "cost_stderr,avg_large_calls";
constexpr const char* kHardBudgetHeader =
    "method,budget_k,success_rate,use_pct";
constexpr const char* kAllocationHeader = "label,count_share,cost_share";

void write_trajectory_fields(std::ofstream& out, const Trajectory& t) {
  out << t.task_id << '\t' << t.seed << '\t' << actions_string(t) << '\t'
      << costs_string(t) << '\t' << (t.success ? 1 : 0) << '\t'
      << format_g(t.total_cost) << '\t' << t.large_calls;
}

}  // namespace

std::string format_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string actions_string(const Trajectory& t) {
  std::string s;
  s.reserve(t.records.size());
  for (const auto& r : t.records)
    s.push_back(r.action == RouterAction::LARGE ? 'L' : 'S');
  return s;
}

std::string costs_string(const Trajectory& t) {
  std::string s;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    if (i) s.push_back(',');
    s += format_g(t.records[i].cost);
  }
  return s;
}

void write_trajectories_tsv(const std::string& path,
                            const std::vector<Trajectory>& ts) {
  std::ofstream out = open_out(path);
  out << kTrajectoryHeader << "\n";
  for (const auto& t : ts) {
    write_trajectory_fields(out, t);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Trajectory> read_trajectories_tsv(const std::string& path) {
  std::vector<Trajectory> out;
  for (const auto& f : read_rows(path, kTrajectoryHeader, '\t', 7))
    out.push_back(trajectory_from_fields(path, parse_u64(f[0], path), f[1],
                                         f[2], f[3], f[4], f[5], f[6]));
  return out;
}

void write_taxonomy_tsv(const std::string& path,
                        const std::vector<DifficultyProfile>& profiles) {
  std::ofstream out = open_out(path);
  out << kTaxonomyHeader << "\n";
  for (const auto& p : profiles)
    out << p.task_id << '\t' << p.trials << '\t' << p.small_successes << '\t'
        << p.large_successes << '\t' << label_name(classify(p)) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TaxonomyRow> read_taxonomy_tsv(const std::string& path) {
  std::vector<TaxonomyRow> out;
  for (const auto& f : read_rows(path, kTaxonomyHeader, '\t', 5)) {
    TaxonomyRow r;
    r.task_id = parse_u64(f[0], path);
    r.trials = static_cast<int>(parse_long(f[1], path));
    r.small_successes = static_cast<int>(parse_long(f[2], path));
    r.large_successes = static_cast<int>(parse_long(f[3], path));
    try {
      r.label = label_from_name(f[4]);
    } catch (const std::invalid_argument& e) {
      throw IoError(path + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

void write_boundaries_tsv(
    const std::string& path,
    const std::vector<std::pair<std::uint64_t, CostBoundaries>>& rows) {
  std::ofstream out = open_out(path);
  out << kBoundariesHeader << "\n";
  for (const auto& [id, b] : rows)
    out << id << '\t' << format_g(b.small_mean) << '\t'
        << format_g(b.large_mean) << '\t' << format_g(b.c_min) << '\t'
        << format_g(b.c_max) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::uint64_t, CostBoundaries>> read_boundaries_tsv(
    const std::string& path) {
  std::vector<std::pair<std::uint64_t, CostBoundaries>> out;
  for (const auto& f : read_rows(path, kBoundariesHeader, '\t', 5)) {
    CostBoundaries b;
    b.small_mean = parse_double(f[1], path);
    b.large_mean = parse_double(f[2], path);
    b.c_min = parse_double(f[3], path);
    b.c_max = parse_double(f[4], path);
    out.emplace_back(parse_u64(f[0], path), b);
  }
  return out;
}

void write_experts_tsv(const std::string& path,
                       const std::vector<ExpertRecord>& experts) {
  std::ofstream out = open_out(path);
  out << kExpertsHeader << "\n";
  for (const auto& e : experts) {
    out << e.task_id << '\t' << label_name(e.label) << '\t' << e.source
        << '\t' << e.traj.seed << '\t' << actions_string(e.traj) << '\t'
        << costs_string(e.traj) << '\t' << (e.traj.success ? 1 : 0) << '\t'
        << format_g(e.traj.total_cost) << '\t' << e.traj.large_calls << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ExpertRecord> read_experts_tsv(const std::string& path) {
  std::vector<ExpertRecord> out;
  for (const auto& f : read_rows(path, kExpertsHeader, '\t', 9)) {
    ExpertRecord e;
    e.task_id = parse_u64(f[0], path);
    try {
      e.label = label_from_name(f[1]);
    } catch (const std::invalid_argument& ex) {
      throw IoError(path + ": " + ex.what());
    }
    e.source = f[2];
    e.traj = trajectory_from_fields(path, e.task_id, f[3], f[4], f[5], f[6],
                                    f[7], f[8]);
    out.push_back(std::move(e));
  }
  return out;
}

void write_id_list_tsv(const std::string& path, const std::string& column,
                       const std::vector<std::uint64_t>& ids) {
  std::ofstream out = open_out(path);
  out << column << "\n";
  for (std::uint64_t id : ids) out << id << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::uint64_t> read_id_list_tsv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw IoError(path + ": empty file, expected header");
  std::vector<std::uint64_t> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_u64(line, path));
  }
  return out;
}

void write_training_log_csv(const std::string& path,
                            const std::vector<BopoIterationLog>& rows,
                            bool append) {
  bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out = open_out(path, !fresh);
  if (fresh) out << kTrainingLogHeader << "\n";
  for (const auto& r : rows)
    out << r.iteration << ',' << format_g(r.mean_reward) << ','
        << format_g(r.success_rate) << ',' << format_g(r.mean_cost) << ','
        << format_g(r.mean_kl) << ',' << format_g(r.lambda) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<BopoIterationLog> read_training_log_csv(const std::string& path) {
  std::vector<BopoIterationLog> out;
  for (const auto& f : read_rows(path, kTrainingLogHeader, ',', 6)) {
    BopoIterationLog r;
    r.iteration = parse_long(f[0], path);
    r.mean_reward = parse_double(f[1], path);
    r.success_rate = parse_double(f[2], path);
    r.mean_cost = parse_double(f[3], path);
    r.mean_kl = parse_double(f[4], path);
    r.lambda = parse_double(f[5], path);
    out.push_back(r);
  }
  return out;
}

void write_sft_loss_csv(const std::string& path,
                        const std::vector<double>& losses) {
  std::ofstream out = open_out(path);
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i)
    out << i << ',' << format_g(losses[i]) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_frontier_csv(const std::string& path,
                        const std::vector<FrontierPoint>& points) {
  std::ofstream out = open_out(path);
  out << kFrontierHeader << "\n";
  for (const auto& p : points)
    out << p.method << ',' << format_g(p.knob) << ',' << p.seed_count << ','
        << format_g(p.success_rate) << ',' << format_g(p.success_stderr)
        << ',' << format_g(p.avg_cost) << ',' << format_g(p.cost_stderr)
        << ',' << format_g(p.avg_large_calls) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<FrontierPoint> read_frontier_csv(const std::string& path) {
  std::vector<FrontierPoint> out;
  for (const auto& f : read_rows(path, kFrontierHeader, ',', 8)) {
    FrontierPoint p;
    p.method = f[0];
    p.knob = parse_double(f[1], path);
    p.seed_count = static_cast<int>(parse_long(f[2], path));
    p.success_rate = parse_double(f[3], path);
    p.success_stderr = parse_double(f[4], path);
    p.avg_cost = parse_double(f[5], path);
    p.cost_stderr = parse_double(f[6], path);
    p.avg_large_calls = parse_double(f[7], path);
    out.push_back(std::move(p));
  }
  return out;
}

void write_hard_budget_csv(const std::string& path,
                           const std::vector<HardBudgetRow>& rows) {
  std::ofstream out = open_out(path);
  out << kHardBudgetHeader << "\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.budget_k << ',' << format_g(r.success_rate)
        << ',' << format_g(r.use_pct) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<HardBudgetRow> read_hard_budget_csv(const std::string& path) {
  std::vector<HardBudgetRow> out;
  for (const auto& f : read_rows(path, kHardBudgetHeader, ',', 4)) {
    HardBudgetRow r;
    r.method = f[0];
    r.budget_k = static_cast<int>(parse_long(f[1], path));
    r.success_rate = parse_double(f[2], path);
    r.use_pct = parse_double(f[3], path);
    out.push_back(std::move(r));
  }
  return out;
}

void write_allocation_csv(const std::string& path,
                          const std::vector<AllocationRow>& rows) {
  std::ofstream out = open_out(path);
  out << kAllocationHeader << "\n";
  for (const auto& r : rows)
    out << r.label << ',' << format_g(r.count_share) << ','
        << format_g(r.cost_share) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<AllocationRow> read_allocation_csv(const std::string& path) {
  std::vector<AllocationRow> out;
  for (const auto& f : read_rows(path, kAllocationHeader, ',', 3)) {
    AllocationRow r;
    r.label = f[0];
    r.count_share = parse_double(f[1], path);
    r.cost_share = parse_double(f[2], path);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace routerlab
