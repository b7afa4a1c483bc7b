#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "nfer/cli.hpp"
#include "proc.hpp"

namespace {

struct CliOut {
  int code = -1;
  std::string out;
  std::string err;
};

CliOut cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliOut result;
  result.code = nfer::run_cli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

}  // namespace

TEST_CASE("eval emits the canonical pool and a summary on stderr") {
  std::string dir = proc::scratch_dir("cli_eval");
  proc::write_file(dir + "/r.nfer", "A <- B before C\n");
  proc::write_file(dir + "/t.csv",
                   "name,time,data\n"
                   "B,1,\n"
                   "C,3,\n");
  CliOut r = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv"});
  CHECK(r.code == 0);
  CHECK(r.out ==
        R"({"name":"B","start":1,"end":1,"data":{}})"
        "\n"
        R"({"name":"A","start":1,"end":3,"data":{}})"
        "\n"
        R"({"name":"C","start":3,"end":3,"data":{}})"
        "\n");
  CHECK(r.err.find("intervals=3 iterations=1 saturated=true") != std::string::npos);

  CliOut csv = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                    "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out ==
        "name,start,end,data\n"
        "B,1,1,\n"
        "A,1,3,\n"
        "C,3,3,\n");

  // Byte-identical on a second run.
  CliOut again = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv"});
  CHECK(again.out == r.out);
  CHECK(again.err == r.err);
}

TEST_CASE("eval decides reachability of a target label") {
  std::string dir = proc::scratch_dir("cli_target");
  proc::write_file(dir + "/r.nfer", "A <- B before C\n");
  proc::write_file(dir + "/t.csv",
                   "name,time,data\n"
                   "B,1,\n"
                   "C,3,\n");
  CliOut hit = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                    "--target", "A"});
  CHECK(hit.code == 0);
  CHECK(hit.out == "found\n");

  CliOut miss = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                     "--target", "Z"});
  CHECK(miss.code == 1);
  CHECK(miss.out == "not-found\n");

  CliOut tree = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                     "--target", "A", "--witness"});
  CHECK(tree.code == 0);
  CHECK(tree.out.find("found\n") == 0);
  CHECK(tree.out.find("\"interval\"") != std::string::npos);
  CHECK(tree.out.find("\"rule\"") != std::string::npos);
  CHECK(tree.out.find("\"children\"") != std::string::npos);
}

TEST_CASE("eval reports unknown when fuel runs out") {
  std::string dir = proc::scratch_dir("cli_fuel");
  proc::write_file(dir + "/r.nfer",
                   "t <- u coincide u\n"
                   "u <- s coincide s\n"
                   "s <- s coincide s\n");
  proc::write_file(dir + "/t.csv", "name,time,data\ns,0,\n");
  CliOut unknown = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                        "--target", "t", "--fuel", "1"});
  CHECK(unknown.code == 3);
  CHECK(unknown.out == "unknown\n");

  CliOut found = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                      "--target", "t", "--fuel", "10"});
  CHECK(found.code == 0);

  // A cyclic rule set over infinite data cannot run without fuel.
  CliOut refused = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv"});
  CHECK(refused.code == 2);
  CHECK(refused.err.find("error:") != std::string::npos);
  CHECK(refused.err.find("fuel") != std::string::npos);
}

TEST_CASE("eval applies minimality and bound flags") {
  std::string dir = proc::scratch_dir("cli_flags");
  proc::write_file(dir + "/r.nfer", "A <- B before C\n");
  proc::write_file(dir + "/t.csv",
                   "name,time,data\n"
                   "B,0,\n"
                   "C,2,\n"
                   "C,5,\n");
  CliOut all = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv"});
  CHECK(all.out.find(R"("name":"A","start":0,"end":5)") != std::string::npos);
  CliOut minimal = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv",
                        "--minimal"});
  CHECK(minimal.out.find(R"("name":"A","start":0,"end":2)") != std::string::npos);
  CHECK(minimal.out.find(R"("name":"A","start":0,"end":5)") == std::string::npos);

  proc::write_file(dir + "/d.csv", "name,time,data\nB,0,v=9\n");
  proc::write_file(dir + "/id.nfer", "A <- B coincide B map { v := a.v }\n");
  CliOut reduced = cli({"eval", "--spec", dir + "/id.nfer", "--trace", dir + "/d.csv",
                        "--bound", "4"});
  CHECK(reduced.code == 0);
  CHECK(reduced.out.find(R"("name":"A","start":0,"end":0,"data":{"v":1})") != std::string::npos);
  CHECK(reduced.err.find("reduced 1 map value") != std::string::npos);

  CliOut bad_bound = cli({"eval", "--spec", dir + "/id.nfer", "--trace", dir + "/d.csv",
                          "--bound", "0"});
  CHECK(bad_bound.code == 2);
}

TEST_CASE("check classifies rule sets and rejects invalid ones") {
  std::string dir = proc::scratch_dir("cli_check");
  proc::write_file(dir + "/ok.nfer",
                   "A <- B before C\n"
                   "D <- A unless after E\n");
  CliOut ok = cli({"check", "--spec", dir + "/ok.nfer"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("rules: 2") != std::string::npos);
  CHECK(ok.out.find("exclusive: yes") != std::string::npos);
  CHECK(ok.out.find("cycle-free: yes") != std::string::npos);
  CHECK(ok.out.find("topological-order: 0 1") != std::string::npos);

  proc::write_file(dir + "/bad.nfer",
                   "A <- B coincide B\n"
                   "B <- A unless after C\n");
  CliOut bad = cli({"check", "--spec", dir + "/bad.nfer"});
  CHECK(bad.code == 2);
  CHECK(bad.out.find("invalid:") != std::string::npos);
  CHECK(bad.out.find("cycle: 0 -> 1 -> 0") != std::string::npos);

  proc::write_file(dir + "/loop.nfer", "A <- A meet A\n");
  CliOut loop = cli({"check", "--spec", dir + "/loop.nfer"});
  CHECK(loop.code == 0);
  CHECK(loop.out.find("cycle-free: no") != std::string::npos);
  CHECK(loop.out.find("cycle: 0 -> 0") != std::string::npos);
}

TEST_CASE("gen writes paired rule set and trace files") {
  std::string dir = proc::scratch_dir("cli_gen");
  CliOut r = cli({"gen", "squares", "--n", "3", "--out", dir + "/sq"});
  CHECK(r.code == 0);
  CHECK(r.out.find("spec=" + dir + "/sq.spec.nfer") != std::string::npos);
  CHECK(r.out.find("trace=" + dir + "/sq.trace.jsonl") != std::string::npos);
  CHECK(r.out.find("target=e3") != std::string::npos);
  std::string spec_text = proc::read_file_or_empty(dir + "/sq.spec.nfer");
  CHECK(spec_text.find("e3 <- e2 coincide e2") != std::string::npos);
  std::string trace_text = proc::read_file_or_empty(dir + "/sq.trace.jsonl");
  CHECK(trace_text == R"({"name":"e0","time":0,"data":{"d":2}})" "\n");

  proc::write_file(dir + "/m.cm", "inc 0\nstop\n");
  r = cli({"gen", "minsky", "--program", dir + "/m.cm", "--out", dir + "/m"});
  CHECK(r.code == 0);
  CHECK(r.out.find("target=l1") != std::string::npos);

  proc::write_file(dir + "/f.qbf", "E 2\n2 2 2\n");
  r = cli({"gen", "tqbf", "--formula", dir + "/f.qbf", "--out", dir + "/f"});
  CHECK(r.code == 0);
  CHECK(r.out.find("bound=3") != std::string::npos);
}

TEST_CASE("usage errors exit with code two") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"eval"}).code == 2);  // missing required options
  CHECK(cli({"eval", "--spec", "x", "--trace", "y", "--witness"}).code == 2);  // needs --target
  CHECK(cli({"eval", "--spec", "/nonexistent/r", "--trace", "/nonexistent/t"}).code == 2);
  CHECK(cli({"gen", "squares", "--n", "3"}).code == 2);  // missing --out
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"eval", "--help"}).code == 0);
}

TEST_CASE("parse failures report the location on stderr") {
  std::string dir = proc::scratch_dir("cli_parse");
  proc::write_file(dir + "/r.nfer", "A <- B bogus C\n");
  proc::write_file(dir + "/t.csv", "name,time,data\n");
  CliOut r = cli({"eval", "--spec", dir + "/r.nfer", "--trace", dir + "/t.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("line 1") != std::string::npos);
}
