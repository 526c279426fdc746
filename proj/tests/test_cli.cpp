#include <array>
#include <cstdio>
#include <cstdlib>

#include <sys/stat.h>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "metaselect/dataset.hpp"
#include "metaselect/text.hpp"
#include "support.hpp"

using namespace metaselect;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path g_dir;

Result run(const std::string& args, const std::string& env = {}) {
  const fs::path err_file = g_dir / "stderr.txt";
  const std::string cmd = env + " " + std::string(METASELECT_BIN) + " " + args + " 2>" + err_file.string();
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err_file);
  return r;
}

/// Every stderr line must be a JSON record.
std::vector<nlohmann::json> diagnostics(const Result& r) {
  std::vector<nlohmann::json> out;
  for (std::string_view line : split_lines(r.err))
    if (!line.empty() && line.front() == '{') out.push_back(nlohmann::json::parse(line));
  return out;
}

void script(const fs::path& p, const std::string& body) {
  write_file(p, "#!/bin/sh\n" + body);
  ::chmod(p.c_str(), 0755);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("command line pipeline") {
  g_dir = support::temp_dir("cli");
  const fs::path d = g_dir;
  // "fast" reaches 5 early; "slow" reaches 3 later, on the larger instances only.
  script(d / "fast.sh", "echo 'o 10'\necho 'o 5'\n");
  script(d / "slow.sh", "sleep 0.15\ncase \"$1\" in *big*) echo 'o 3';; *) echo 'o 7';; esac\necho 'v x1 x2'\n");
  write_file(d / "portfolio.ini",
             "parallelism = 1\n[solver fast]\ncommand = " + (d / "fast.sh").string() + " {instance}\n"
             "[solver slow]\ncommand = " + (d / "slow.sh").string() + " {instance}\n");
  write_file(d / "one.ini", "[solver fast]\ncommand = " + (d / "fast.sh").string() + " {instance}\n");
  std::string list;
  for (const char* bench : {"ba", "bb"}) {
    fs::create_directories(d / bench);
    for (int i = 0; i < 5; ++i) {
      const std::string name = std::string(i == 0 ? "small" : "big") + std::to_string(i) + bench + ".opb";
      std::string text = "* #variable= " + std::to_string(3 + 4 * i) + " #constraint= 1\nmin: +1 x1 -1 x2 ;\n+1 x1 +1 x3 >= 1 ;\n";
      write_file(d / bench / name, text);
      list += std::string(bench) + "/" + name + "\n";
    }
  }
  write_file(d / "noobj.opb", "* #variable= 1 #constraint= 1\n+1 x1 >= 1 ;\n");
  write_file(d / "instances.txt", list + "ba noobj.opb\n");
  const std::string grid = "--grid-count 6 --horizon 1 --t-min 0.01";

  SUBCASE("full run") {
    Result r = run(grid + " run-portfolio --config " + q(d / "portfolio.ini") + " --instances " + q(d / "instances.txt") +
                   " --archive " + q(d / "archive"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("executed = 22") != std::string::npos);

    r = run(grid + " run-portfolio --instances " + q(d / "instances.txt") + " --archive " + q(d / "archive"),
            "METASELECT_PORTFOLIO=" + q(d / "portfolio.ini"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("skipped = 22") != std::string::npos);

    r = run("build-dataset --archive " + q(d / "archive") + " -o " + q(d / "ds.csv"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("rows = 60") != std::string::npos);
    CHECK(read_file(d / "ds.csv.skipped").find("noobj") != std::string::npos);
    const auto warnings = diagnostics(r);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0]["kind"] == "skipped-instance");
    CHECK(warnings[0]["instance"] == "noobj");

    r = run("--seed 3 split --dataset " + q(d / "ds.csv"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out == "train_rows = 48\ntest_rows = 12\n");
    const LabeledDataset ds = load_dataset(d / "ds.csv");
    CHECK(ds.rows_in(Split::Test).size() == 12);

    r = run("--seed 1 train --family rf --schema nonlinear --dataset " + q(d / "ds.csv") + " -o " + q(d / "rf.model"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out == "variant = RF_nonlinear\n");
    run("--seed 1 train --family rf --schema nonlinear --dataset " + q(d / "ds.csv") + " -o " + q(d / "rf2.model"));
    CHECK(read_file(d / "rf.model") == read_file(d / "rf2.model"));

    r = run("train --family gb --schema linear --dataset " + q(d / "ds.csv") + " -o " + q(d / "gb.model"));
    CHECK(r.code == 1);
    CHECK(diagnostics(r).at(0)["kind"] == "schema-mismatch");

    r = run("describe --model " + q(d / "rf.model"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("n_estimators,100\n") != std::string::npos);
    CHECK(r.out.find("max_features,sqrt\n") != std::string::npos);
    CHECK(r.out.find("criterion,gini\n") != std::string::npos);

    r = run("importance --model " + q(d / "rf.model"));
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("feature,mdi\nn_constraints,", 0) == 0);

    r = run("evaluate --model " + q(d / "rf.model") + " --archive " + q(d / "archive") + " --dataset " + q(d / "ds.csv") +
            " --report-dir " + q(d / "report"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("m_hat_no_overhead = ") != std::string::npos);
    CHECK(fs::exists(d / "report" / "confusion.csv"));
    CHECK(fs::exists(d / "report" / "per_timestep.csv"));
    CHECK(fs::exists(d / "report" / "breakdown.csv"));

    r = run("summary --dataset " + q(d / "ds.csv"));
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("timestep,fast,slow,NO_SOLUTION\n", 0) == 0);
    r = run("summary --dataset " + q(d / "ds.csv") + " --output-dir " + q(d / "summary"));
    CHECK(fs::exists(d / "summary" / "best_solver.csv"));

    r = run("solve " + q(d / "ba" / "big1ba.opb") + " --budget 2 --model " + q(d / "rf.model") + " --config " +
            q(d / "portfolio.ini") + " --assignment " + q(d / "assign.txt"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("chosen_solver = ") != std::string::npos);
    CHECK(r.out.find("exit = completed") != std::string::npos);

    r = run("solve " + q(d / "ba" / "big1ba.opb") + " --budget 2 --model " + q(d / "rf.model") + " --config " +
            q(d / "one.ini"));
    CHECK(r.code == 1);
    CHECK(diagnostics(r).at(0)["kind"] == "unknown-solver");
  }

  SUBCASE("single-solver portfolio is degenerate for evaluation") {
    Result r = run(grid + " run-portfolio --config " + q(d / "one.ini") + " --instances " + q(d / "instances.txt") +
                   " --archive " + q(d / "one"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    run("build-dataset --archive " + q(d / "one") + " -o " + q(d / "one.csv"));
    run("split --dataset " + q(d / "one.csv"));
    r = run("train --family knn --dataset " + q(d / "one.csv") + " -o " + q(d / "one.model"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    r = run("--sbs auto evaluate --model " + q(d / "one.model") + " --archive " + q(d / "one") + " --dataset " +
            q(d / "one.csv"));
    CHECK(r.code == 1);
    CHECK(diagnostics(r).at(0)["kind"] == "degenerate-portfolio");
  }

  SUBCASE("parse and features") {
    Result r = run("parse " + q(d / "ba" / "big1ba.opb"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("min: +1 x1 -1 x2 ;") != std::string::npos);
    write_file(d / "bad.opb", "* #variable= 1 #constraint= 1\n+1 x2 >= 1 ;\n");
    r = run("parse " + q(d / "bad.opb"));
    CHECK(r.code == 1);
    const auto diag = diagnostics(r).at(0);
    CHECK(diag["kind"] == "opb-parse");
    CHECK(diag["line"] == 2);
    r = run("features --budget 3600 " + q(d / "ba" / "small0ba.opb"));
    REQUIRE(r.code == 0);
    CHECK(r.out == "instance,n_constraints,n_variables,nonlinear,c_terms_1,c_terms_2,c_terms_3,c_terms_4plus,degree_1,"
                   "degree_2,degree_3,degree_4plus,obj_size,pos_constr,pos_obj,timestep\n"
                   "small0ba,1,3,0,0,1,0,0,1,0,0,0,0.5,1,0.5,499\n");
    r = run("features --schema basic " + q(d / "noobj.opb"));
    CHECK(r.code == 0);
  }

  SUBCASE("usage errors") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("train --family svm --dataset x -o y").code == 2);
    CHECK(run("run-portfolio --instances " + q(d / "instances.txt") + " --archive " + q(d / "x"), "METASELECT_PORTFOLIO=").code == 2);
    const Result r = run("evaluate");
    CHECK(r.code == 2);
    CHECK(diagnostics(r).at(0)["kind"] == "usage");
    CHECK(run("--help").code == 0);
  }
  fs::remove_all(d);
}

TEST_CASE("NO_SOLUTION prediction exits with its own status") {
  g_dir = support::temp_dir("cli-none");
  const fs::path d = g_dir;
  const fs::path marker = d / "launched";
  script(d / "never.sh", "touch " + marker.string() + "\n");
  write_file(d / "p.ini", "[solver never]\ncommand = " + (d / "never.sh").string() + "\n[solver late]\ncommand = " +
                              (d / "never.sh").string() + "\n");
  write_file(d / "i.opb", "* #variable= 2 #constraint= 0\nmin: +1 x1 ;\n");
  write_file(d / "list.txt", "i.opb\n");
  const std::string grid = "--grid-count 4 --horizon 0.5 --t-min 0.01";
  REQUIRE(run(grid + " run-portfolio --config " + q(d / "p.ini") + " --instances " + q(d / "list.txt") + " --archive " +
              q(d / "a")).code == 0);
  fs::remove(marker);
  REQUIRE(run("build-dataset --archive " + q(d / "a") + " -o " + q(d / "ds.csv")).code == 0);
  REQUIRE(run("train --family rf --dataset " + q(d / "ds.csv") + " -o " + q(d / "m.model")).code == 0);
  Result r = run("solve " + q(d / "i.opb") + " --budget 1 --model " + q(d / "m.model") + " --config " + q(d / "p.ini"));
  CHECK(r.code == 3);
  CHECK(r.out.find("chosen_solver = none") != std::string::npos);
  CHECK_FALSE(fs::exists(marker));
  r = run("solve " + q(d / "i.opb") + " --budget 1 --on-no-solution fallback --fallback-solver late --model " +
          q(d / "m.model") + " --config " + q(d / "p.ini"));
  CHECK(r.code == 0);
  CHECK(r.out.find("chosen_solver = late") != std::string::npos);
  CHECK(fs::exists(marker));
  fs::remove_all(d);
}
