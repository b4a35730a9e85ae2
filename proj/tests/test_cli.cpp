// End-to-end checks of the command-line surface via subprocesses.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

RunResult run_cli(const std::string& args, const std::string& stdin_text = "") {
    std::string in_path = "/tmp/recalc_cli_in.txt";
    std::string out_path = "/tmp/recalc_cli_out.txt";
    std::string err_path = "/tmp/recalc_cli_err.txt";
    {
        std::ofstream in(in_path, std::ios::binary);
        in << stdin_text;
    }
    std::string cmd = std::string(RECALC_CLI_PATH) + " " + args + " <" + in_path + " >" +
                      out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string data(const std::string& name) {
    return std::string(RECALC_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("check reports size and acyclicity") {
    RunResult r = run_cli("check " + data("fig1.xml"));
    CHECK(r.exit_code == 0);
    CHECK(r.out == "6 cells, 6 edges, ACYCLIC\n");

    RunResult cyc = run_cli("check " + data("cycle2.xml"));
    CHECK(cyc.exit_code == 1);
    CHECK(cyc.out == "A1 -> B1 -> A1\n");

    RunResult self = run_cli("check " + data("selfloop.xml"));
    CHECK(self.exit_code == 1);
    CHECK(self.out == "A1 -> A1\n");

    RunResult missing = run_cli("check " + data("nope.xml"));
    CHECK(missing.exit_code == 2);
}

TEST_CASE("deps prints members row-major") {
    RunResult r = run_cli("deps " + data("fig1.xml") + " A1");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "B1\nC1\nE1\nF1\n");

    CHECK(run_cli("deps " + data("fig1.xml") + " F1").out.empty());
    CHECK(run_cli("deps " + data("fig1.xml") + " D1").out == "C1\nE1\nF1\n");

    RunResult unknown = run_cli("deps " + data("fig1.xml") + " Z9");
    CHECK(unknown.exit_code == 1);
    CHECK(unknown.err.find("Z9") != std::string::npos);
}

TEST_CASE("eval agrees across modes") {
    for (std::string mode : {"eager", "lazy", "compiled"}) {
        RunResult r = run_cli("eval " + data("fig1.xml") + " E1 --set A1=2 --mode " + mode);
        CHECK(r.exit_code == 0);
        CHECK(r.out == "15\n");
    }
    CHECK(run_cli("eval " + data("fig1.xml") + " E1").out == "13\n");
    CHECK(run_cli("eval " + data("fig1.xml") + " F1 --set A1=2").out == "12\n");

    CHECK(run_cli("eval " + data("fig1.xml") + " E1 --set E1=2").exit_code == 1);
    CHECK(run_cli("eval " + data("fig1.xml") + " E1 --set bogus").exit_code == 2);
    CHECK(run_cli("eval " + data("fig1.xml") + " E1 --mode warp").exit_code == 2);
    CHECK(run_cli("eval").exit_code == 2);
}

TEST_CASE("trace reproduces the parser-string history") {
    RunResult r = run_cli("trace " + data("fig1.xml") + " E1 --set A1=2");
    CHECK(r.out == "A1=2;B1=1+A1;A1=2;D1=10;C1=A1+D1;E1=B1+C1;\n");

    RunResult h = run_cli("trace " + data("fig1.xml") + " E1 --set A1=2 --history");
    CHECK(h.out ==
          "A1=2;\n"
          "A1=2;B1=1+A1;\n"
          "A1=2;B1=1+A1;A1=2;\n"
          "A1=2;B1=1+A1;A1=2;D1=10;\n"
          "A1=2;B1=1+A1;A1=2;D1=10;C1=A1+D1;\n"
          "A1=2;B1=1+A1;A1=2;D1=10;C1=A1+D1;E1=B1+C1;\n");

    CHECK(run_cli("trace " + data("fig1.xml") + " D1").out == "D1=10;\n");
    CHECK(run_cli("trace " + data("fig1.xml") + " F1 --set A1=2").out ==
          "A1=2;D1=10;C1=A1+D1;F1=C1;\n");
}

TEST_CASE("compile writes a loadable plan and eval accepts it") {
    std::string plan_path = "/tmp/recalc_cli_fig1.plan";
    RunResult r = run_cli("compile " + data("fig1.xml") + " -o " + plan_path);
    CHECK(r.exit_code == 0);
    CHECK(slurp(plan_path) == slurp(data("fig1.plan")));

    RunResult e = run_cli("eval " + data("fig1.xml") +
                          " E1 --set A1=2 --mode compiled --plan " + plan_path);
    CHECK(e.out == "15\n");

    std::ofstream bad("/tmp/recalc_cli_bad.plan");
    bad << "GRIDPLAN 9\nEND\n";
    bad.close();
    RunResult b = run_cli("eval " + data("fig1.xml") +
                          " E1 --mode compiled --plan /tmp/recalc_cli_bad.plan");
    CHECK(b.exit_code == 1);
}

TEST_CASE("bench emits table and csv") {
    RunResult r = run_cli("bench --shape chain --cells 40 --pairs 5 --trials 2 "
                          "--modes eager,compiled --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("mode") != std::string::npos);
    CHECK(r.out.find("eager") != std::string::npos);
    CHECK(r.out.find("compiled") != std::string::npos);

    RunResult csv = run_cli("bench --shape chain --cells 40 --pairs 5 --trials 2 "
                            "--modes lazy --seed 3 --csv");
    CHECK(csv.out.substr(0, 39) == "mode,avg_ms,stddev_ms,evals,recomputes\n");

    CHECK(run_cli("bench --shape pyramid").exit_code == 2);
}

TEST_CASE("repl session") {
    RunResult r = run_cli("repl " + data("fig1.xml"),
                          "set A1 2\nget E1\nget F1\nchanged\nget Z9\nfoo\nquit\n");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("15\n") != std::string::npos);
    CHECK(r.out.find("12\n") != std::string::npos);
    CHECK(r.out.find("A1: 1 -> 2") != std::string::npos);
    CHECK(r.out.find("E1: 13 -> 15") != std::string::npos);
    CHECK(r.out.find("unknown cell Z9") != std::string::npos);
    CHECK(r.out.find("unknown command") != std::string::npos);
    CHECK(r.out.find("warning") == std::string::npos);

    // EOF without quit also ends the session.
    CHECK(run_cli("repl " + data("fig1.xml"), "get D1\n").out == "10\n");
}
