#include "metaselect/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "metaselect/text.hpp"

namespace fs = std::filesystem;

namespace metaselect {

std::string_view to_string(ParseMode mode) {
  return mode == ParseMode::EventStream ? "event-stream" : "final-only";
}

ParseMode parse_parse_mode(std::string_view name) {
  if (name == "event-stream") return ParseMode::EventStream;
  if (name == "final-only") return ParseMode::FinalOnly;
  throw std::invalid_argument("unknown parse_mode: " + std::string(name));
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Timeout: return "timeout";
    case RunStatus::Crashed: return "crashed";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view name) {
  if (name == "ok") return RunStatus::Ok;
  if (name == "timeout") return RunStatus::Timeout;
  if (name == "crashed") return RunStatus::Crashed;
  if (name == "failed") return RunStatus::Failed;
  throw std::invalid_argument("unknown run status: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Portfolio config

const SolverAdapter* PortfolioConfig::find(std::string_view solver_id) const {
  for (const SolverAdapter& a : solvers)
    if (a.solver_id == solver_id) return &a;
  return nullptr;
}

std::vector<std::string> PortfolioConfig::solver_ids() const {
  std::vector<std::string> ids;
  for (const SolverAdapter& a : solvers) ids.push_back(a.solver_id);
  return ids;
}

PortfolioConfig parse_portfolio_config(std::string_view text) {
  PortfolioConfig cfg;
  SolverAdapter* current = nullptr;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw std::runtime_error("portfolio config line " + std::to_string(line_no) + ": " + msg);
  };
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      auto words = split_whitespace(line.substr(1, line.size() - 2));
      if (words.size() != 2 || words[0] != "solver") fail("expected [solver <id>]");
      if (cfg.find(words[1])) fail("duplicate solver id '" + std::string(words[1]) + "'");
      cfg.solvers.push_back(SolverAdapter{std::string(words[1]), {}, ParseMode::EventStream});
      current = &cfg.solvers.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    try {
      if (current) {
        if (key == "command") current->command = value;
        else if (key == "parse_mode") current->parse_mode = parse_parse_mode(value);
        else fail("unknown solver key '" + key + "'");
      } else if (key == "parallelism") {
        cfg.parallelism = static_cast<unsigned>(std::stoul(value));
      } else if (key == "grid_count") {
        cfg.grid_count = std::stoul(value);
      } else if (key == "horizon") {
        cfg.horizon = std::stod(value);
      } else if (key == "t_min") {
        cfg.t_min = std::stod(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail("bad value for '" + key + "': " + value);
    }
  }
  for (const SolverAdapter& a : cfg.solvers)
    if (trim(a.command).empty()) throw std::runtime_error("portfolio config: solver '" + a.solver_id + "' has no command");
  if (cfg.parallelism == 0) cfg.parallelism = 1;
  return cfg;
}

PortfolioConfig load_portfolio_config(const fs::path& path) {
  return parse_portfolio_config(read_file(path));
}

// ---------------------------------------------------------------------------
// Trajectories

double Trajectory::achieved_at(std::size_t j) const {
  const std::optional<BigInt>& v = sampled.at(j);
  if (!v) throw std::logic_error("achieved_at on undefined sample");
  for (const IncumbentEvent& e : events)
    if (e.objective == *v) return e.seconds;
  throw std::logic_error("sampled value without matching event");
}

std::vector<IncumbentEvent> strict_improvements(std::vector<IncumbentEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const IncumbentEvent& a, const IncumbentEvent& b) { return a.seconds < b.seconds; });
  std::vector<IncumbentEvent> kept;
  for (IncumbentEvent& e : events)
    if (kept.empty() || e.objective < kept.back().objective) kept.push_back(std::move(e));
  return kept;
}

std::vector<std::optional<BigInt>> sample_events(const std::vector<IncumbentEvent>& events,
                                                 const TimestepGrid& grid) {
  std::vector<std::optional<BigInt>> sampled(grid.size());
  std::size_t next = 0;
  std::optional<BigInt> best;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    while (next < events.size() && events[next].seconds <= grid[j]) {
      if (!best || events[next].objective < *best) best = events[next].objective;
      ++next;
    }
    sampled[j] = best;
  }
  return sampled;
}

Trajectory make_trajectory(std::string solver_id, std::string instance_id, std::vector<IncumbentEvent> events,
                           const TimestepGrid& grid, RunStatus status) {
  Trajectory t;
  t.solver_id = std::move(solver_id);
  t.instance_id = std::move(instance_id);
  t.events = strict_improvements(std::move(events));
  std::erase_if(t.events, [&](const IncumbentEvent& e) { return e.seconds > grid.horizon(); });
  t.sampled = sample_events(t.events, grid);
  t.status = status;
  return t;
}

std::vector<IncumbentEvent> parse_event_log(std::string_view raw_log, ParseMode mode,
                                            std::vector<std::string>* warnings) {
  std::vector<IncumbentEvent> events;
  double last_seconds = 0.0;
  for (std::string_view line : split_lines(raw_log)) {
    if (line.empty()) continue;
    auto space = line.find(' ');
    std::string_view stamp = line.substr(0, space);
    std::string_view payload = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
    double seconds = 0.0;
    auto [ptr, ec] = std::from_chars(stamp.data(), stamp.data() + stamp.size(), seconds);
    if (ec != std::errc() || ptr != stamp.data() + stamp.size()) {
      if (warnings) warnings->push_back("bad timestamp in raw log: " + std::string(line));
      continue;
    }
    last_seconds = std::max(last_seconds, seconds);
    auto words = split_whitespace(payload);
    if (words.empty() || words[0] != "o") continue;
    if (words.size() != 2 || !is_integer_token(words[1])) {
      if (warnings) warnings->push_back("unparseable incumbent line: " + std::string(payload));
      continue;
    }
    events.push_back({seconds, parse_bigint(words[1])});
  }
  if (mode == ParseMode::FinalOnly && !events.empty()) {
    IncumbentEvent last = events.back();
    for (const IncumbentEvent& e : events)
      if (e.objective < last.objective) last.objective = e.objective;
    last.seconds = last_seconds;
    events = {last};
  }
  return events;
}

// ---------------------------------------------------------------------------
// Child processes

namespace {

std::string substitute(std::string s, std::string_view key, const std::string& value) {
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
    s.replace(pos, key.size(), value);
  return s;
}

std::string resolve_executable(const std::string& name) {
  auto executable = [](const fs::path& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) {
    if (executable(name)) return name;
  } else if (const char* path = std::getenv("PATH")) {
    for (std::string_view dir : split(path, ':')) {
      fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / name;
      if (executable(candidate)) return candidate.string();
    }
  }
  throw std::runtime_error("solver executable not found: " + name);
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

}  // namespace

ProcessResult run_adapter(const SolverAdapter& adapter, const fs::path& instance, double budget_seconds,
                          const fs::path& log_path, const RunOptions& options) {
  std::string cmd = adapter.command;
  cmd = substitute(cmd, "{instance}", instance.string());
  cmd = substitute(cmd, "{budget}", format_seconds(budget_seconds));
  cmd = substitute(cmd, "{log}", log_path.string());
  std::vector<std::string> argv_store;
  for (std::string_view w : split_whitespace(cmd)) argv_store.emplace_back(w);
  if (argv_store.empty()) throw std::runtime_error("solver '" + adapter.solver_id + "' has an empty command");
  argv_store[0] = resolve_executable(argv_store[0]);
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  int fds[2];
  if (::pipe(fds) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDERR_FILENO);
    }
    ::close(fds[0]);
    ::close(fds[1]);
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);

  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  ProcessResult result;
  std::string pending;
  bool term_sent = false;
  bool kill_sent = false;
  char buf[4096];
  for (;;) {
    const double now = elapsed();
    if (!term_sent && now >= budget_seconds) {
      ::kill(-pid, SIGTERM);
      term_sent = true;
    }
    if (!kill_sent && now >= budget_seconds + options.kill_grace_seconds) {
      ::kill(-pid, SIGKILL);
      kill_sent = true;
    }
    const double until = term_sent ? budget_seconds + options.kill_grace_seconds : budget_seconds;
    int timeout_ms = kill_sent ? 100 : std::max(1, static_cast<int>((until - now) * 1000.0) + 1);
    pollfd pfd{fds[0], POLLIN, 0};
    int rc = ::poll(&pfd, 1, std::min(timeout_ms, 1000));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    const std::string stamp = format_seconds(elapsed());
    pending.append(buf, static_cast<std::size_t>(n));
    for (std::size_t nl; (nl = pending.find('\n')) != std::string::npos;) {
      result.raw_log += stamp + ' ' + pending.substr(0, nl) + '\n';
      pending.erase(0, nl + 1);
    }
  }
  if (!pending.empty()) result.raw_log += format_seconds(elapsed()) + ' ' + pending + '\n';
  ::close(fds[0]);

  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
  }
  if (!kill_sent) ::kill(-pid, SIGKILL);  // stray grandchildren
  result.wall_seconds = elapsed();
  if (term_sent) {
    result.status = RunStatus::Timeout;
  } else if (WIFEXITED(wstatus)) {
    result.exit_code = WEXITSTATUS(wstatus);
    // 10/20/30 are the SAT-competition exit conventions.
    const bool ok = result.exit_code == 0 || result.exit_code == 10 || result.exit_code == 20 || result.exit_code == 30;
    result.status = ok ? RunStatus::Ok : RunStatus::Crashed;
  } else {
    result.exit_code = WIFSIGNALED(wstatus) ? 128 + WTERMSIG(wstatus) : -1;
    result.status = RunStatus::Crashed;
  }
  return result;
}

Trajectory run_solver(const SolverAdapter& adapter, const fs::path& instance, const TimestepGrid& grid,
                      std::string* raw_log, const RunOptions& options) {
  const fs::path aux_log = fs::temp_directory_path() /
                           ("metaselect-" + std::to_string(::getpid()) + "-" + adapter.solver_id + "-" +
                            std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".log");
  ProcessResult proc = run_adapter(adapter, instance, grid.horizon(), aux_log, options);
  std::error_code ec;
  fs::remove(aux_log, ec);
  std::vector<std::string> warnings;
  auto events = parse_event_log(proc.raw_log, adapter.parse_mode, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << adapter.solver_id << ": " << w << '\n';
  if (raw_log) *raw_log = std::move(proc.raw_log);
  return make_trajectory(adapter.solver_id, instance_id_from_path(instance), std::move(events), grid, proc.status);
}

// ---------------------------------------------------------------------------
// Instances and archive

std::string instance_id_from_path(const fs::path& path) {
  std::string name = path.filename().string();
  for (std::string_view suffix : {".gz", ".bz2", ".xz", ".opb"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) name.resize(name.size() - suffix.size());
  }
  return name;
}

std::vector<InstanceRecord> parse_instance_list(std::string_view text, const fs::path& base_dir) {
  std::vector<InstanceRecord> out;
  for (std::string_view raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto words = split_whitespace(line);
    InstanceRecord rec;
    fs::path p = words.size() >= 2 ? fs::path(std::string(words[1])) : fs::path(std::string(words[0]));
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    rec.path = p;
    rec.instance_id = instance_id_from_path(p);
    rec.benchmark_id = words.size() >= 2 ? std::string(words[0]) : p.parent_path().filename().string();
    if (rec.benchmark_id.empty()) rec.benchmark_id = "default";
    out.push_back(std::move(rec));
  }
  return out;
}

RunArchive::RunArchive(TimestepGrid grid, std::vector<std::string> solver_ids, std::vector<InstanceRecord> instances)
    : grid_(std::move(grid)), solver_ids_(std::move(solver_ids)), instances_(std::move(instances)) {
  std::set<std::string> seen;
  for (const std::string& s : solver_ids_)
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate solver id: " + s);
  seen.clear();
  for (const InstanceRecord& r : instances_)
    if (!seen.insert(r.instance_id).second) throw std::invalid_argument("duplicate instance id: " + r.instance_id);
}

void RunArchive::put(Trajectory trajectory) {
  if (trajectory.sampled.size() != grid_.size())
    throw std::invalid_argument("trajectory sampled on a different grid");
  auto key = std::make_pair(trajectory.instance_id, trajectory.solver_id);
  trajectories_.insert_or_assign(std::move(key), std::move(trajectory));
}

const Trajectory* RunArchive::find(std::string_view instance_id, std::string_view solver_id) const {
  auto it = trajectories_.find(std::make_pair(std::string(instance_id), std::string(solver_id)));
  return it == trajectories_.end() ? nullptr : &it->second;
}

const Trajectory& RunArchive::at(std::string_view instance_id, std::string_view solver_id) const {
  if (const Trajectory* t = find(instance_id, solver_id)) return *t;
  throw std::out_of_range("archive has no trajectory for instance '" + std::string(instance_id) + "', solver '" +
                          std::string(solver_id) + "'");
}

std::string format_trajectory(const Trajectory& t, const TimestepGrid& grid) {
  std::ostringstream out;
  out << "# metaselect-trajectory v1 solver=" << t.solver_id << " instance=" << t.instance_id
      << " horizon=" << format_double(grid.horizon()) << " count=" << grid.size()
      << " t_min=" << format_double(grid.t_min()) << " status=" << to_string(t.status) << '\n';
  for (const IncumbentEvent& e : t.events) out << format_double(e.seconds) << ' ' << e.objective << '\n';
  out << "sampled";
  for (const auto& v : t.sampled) {
    out << ' ';
    if (v) out << *v;
    else out << "NA";
  }
  out << '\n';
  return out.str();
}

Trajectory parse_trajectory(std::string_view text, const TimestepGrid& grid) {
  auto lines = split_lines(text);
  if (lines.empty() || !lines[0].starts_with("# metaselect-trajectory v1"))
    throw std::runtime_error("not a trajectory file (bad header)");
  Trajectory t;
  for (std::string_view word : split_whitespace(lines[0])) {
    auto eq = word.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view key = word.substr(0, eq), value = word.substr(eq + 1);
    if (key == "solver") t.solver_id = value;
    else if (key == "instance") t.instance_id = value;
    else if (key == "status") t.status = parse_run_status(value);
    else if (key == "count" && std::stoul(std::string(value)) != grid.size())
      throw std::runtime_error("trajectory grid count does not match archive");
  }
  bool have_sampled = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto words = split_whitespace(lines[i]);
    if (words.empty()) continue;
    if (words[0] == "sampled") {
      if (words.size() != grid.size() + 1) throw std::runtime_error("sampled record has wrong length");
      for (std::size_t j = 1; j < words.size(); ++j)
        t.sampled.push_back(words[j] == "NA" ? std::nullopt : std::optional<BigInt>(parse_bigint(words[j])));
      have_sampled = true;
      continue;
    }
    if (words.size() != 2 || !is_integer_token(words[1]))
      throw std::runtime_error("bad event record: " + std::string(lines[i]));
    t.events.push_back({parse_double(words[0]), parse_bigint(words[1])});
  }
  if (!have_sampled) throw std::runtime_error("trajectory file lacks sampled record");
  return t;
}

namespace {

const char* kMetaFile = "archive.meta";
const char* kInstancesFile = "instances.tsv";

void write_atomically(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path trajectory_path(const fs::path& root, std::string_view instance_id, std::string_view solver_id) {
  return root / std::string(instance_id) / (std::string(solver_id) + ".traj");
}

}  // namespace

void write_archive_header(const fs::path& root, const RunArchive& archive) {
  fs::create_directories(root);
  std::ostringstream meta;
  meta << "format = metaselect-archive v1\n"
       << "grid_count = " << archive.grid().size() << '\n'
       << "horizon = " << format_double(archive.grid().horizon()) << '\n'
       << "t_min = " << format_double(archive.grid().t_min()) << '\n'
       << "solvers = " << join(archive.solver_ids(), ",") << '\n';
  write_atomically(root / kMetaFile, meta.str());
  std::ostringstream inst;
  for (const InstanceRecord& r : archive.instances())
    inst << r.instance_id << '\t' << r.benchmark_id << '\t' << r.path.string() << '\n';
  write_atomically(root / kInstancesFile, inst.str());
}

void write_trajectory_file(const fs::path& root, const Trajectory& t, const TimestepGrid& grid,
                           std::string_view raw_log) {
  fs::path path = trajectory_path(root, t.instance_id, t.solver_id);
  fs::create_directories(path.parent_path());
  fs::path log = path;
  log.replace_extension(".log");
  write_atomically(log, raw_log);
  write_atomically(path, format_trajectory(t, grid));
}

void write_archive(const fs::path& root, const RunArchive& archive) {
  write_archive_header(root, archive);
  for (const InstanceRecord& r : archive.instances())
    for (const std::string& s : archive.solver_ids())
      if (const Trajectory* t = archive.find(r.instance_id, s)) write_trajectory_file(root, *t, archive.grid());
}

RunArchive load_archive(const fs::path& root) {
  std::map<std::string, std::string, std::less<>> meta;
  const std::string meta_text = read_file(root / kMetaFile);
  for (std::string_view raw : split_lines(meta_text)) {
    std::string_view line = trim(raw);
    auto eq = line.find('=');
    if (line.empty() || eq == std::string_view::npos) continue;
    meta[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  if (meta["format"] != "metaselect-archive v1") throw std::runtime_error("unsupported archive format in " + root.string());
  TimestepGrid grid(std::stoul(meta["grid_count"]), parse_double(meta["horizon"]), parse_double(meta["t_min"]));
  std::vector<std::string> solvers;
  for (std::string_view s : split(meta["solvers"], ',')) solvers.emplace_back(s);

  std::vector<InstanceRecord> instances;
  const std::string instances_text = read_file(root / kInstancesFile);
  for (std::string_view line : split_lines(instances_text)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw std::runtime_error("bad instances.tsv line: " + std::string(line));
    instances.push_back({std::string(cols[0]), std::string(cols[1]), fs::path(std::string(cols[2]))});
  }
  RunArchive archive(grid, solvers, instances);
  for (const InstanceRecord& r : instances)
    for (const std::string& s : solvers) {
      fs::path p = trajectory_path(root, r.instance_id, s);
      if (fs::exists(p)) archive.put(parse_trajectory(read_file(p), grid));
    }
  return archive;
}

PortfolioRunSummary run_portfolio(const std::vector<SolverAdapter>& adapters,
                                  const std::vector<InstanceRecord>& instances, const TimestepGrid& grid,
                                  unsigned parallelism, const fs::path& root, const RunOptions& options) {
  std::vector<std::string> ids;
  for (const SolverAdapter& a : adapters) {
    std::vector<std::string> words;
    for (auto w : split_whitespace(a.command)) words.emplace_back(w);
    if (words.empty()) throw std::runtime_error("solver '" + a.solver_id + "' has an empty command");
    resolve_executable(words[0]);
    ids.push_back(a.solver_id);
  }
  RunArchive layout(grid, ids, instances);
  if (fs::exists(root / kMetaFile)) {
    RunArchive existing = load_archive(root);
    if (!(existing.grid() == grid) || existing.solver_ids() != ids)
      throw std::runtime_error("archive at " + root.string() + " was recorded with a different grid or portfolio");
  }
  write_archive_header(root, layout);

  std::vector<std::pair<const InstanceRecord*, const SolverAdapter*>> todo;
  PortfolioRunSummary summary;
  for (const InstanceRecord& r : instances)
    for (const SolverAdapter& a : adapters) {
      if (fs::exists(trajectory_path(root, r.instance_id, a.solver_id))) ++summary.skipped;
      else todo.emplace_back(&r, &a);
    }

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) {
      const auto [rec, adapter] = todo[i];
      std::string raw;
      Trajectory t;
      try {
        t = run_solver(*adapter, rec->path, grid, &raw, options);
        t.instance_id = rec->instance_id;
      } catch (const std::exception& e) {
        t = make_trajectory(adapter->solver_id, rec->instance_id, {}, grid, RunStatus::Failed);
        raw = std::string("0.000000 # runner error: ") + e.what() + '\n';
      }
      std::lock_guard lock(writer);
      write_trajectory_file(root, t, grid, raw);
      ++summary.executed;
      if (t.status == RunStatus::Failed || t.status == RunStatus::Crashed) ++summary.failed;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(todo.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  return summary;
}

}  // namespace metaselect
