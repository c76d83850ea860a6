// End-to-end checks of the command-line tool: exit codes, document flow,
// determinism of machine-readable artifacts.  The binary path arrives as
// the first command-line argument (see tests/CMakeLists.txt).

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

std::string g_cli;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "/tmp/cmt_cli_out.txt";
    const std::string cmd = g_cli + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(out_path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    r.out = buf.str();
    return r;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

const char* kE1 = R"({
  "schema_version": "cmt/1",
  "dims": [1,1],
  "d_eo": [[[2,0]]],
  "d_oe": [[[0,0]]],
  "ds_eo": [[[0,0]]],
  "ds_oe": [[[3,0]]]
})";

}  // namespace

TEST_CASE("validate: pass, math failure, parse failure") {
    write_file("/tmp/cmt_e1.json", kE1);
    CHECK(run_cli("validate /tmp/cmt_e1.json").exit_code == 0);

    // d^2 != 0
    write_file("/tmp/cmt_bad.json", R"({
      "schema_version": "cmt/1",
      "dims": [1,1],
      "d_eo": [[[1,0]]],
      "d_oe": [[[1,0]]],
      "ds_eo": [[[0,0]]],
      "ds_oe": [[[0,0]]]
    })");
    CHECK(run_cli("validate /tmp/cmt_bad.json").exit_code == 1);

    write_file("/tmp/cmt_corrupt.json", "{ definitely not json");
    CHECK(run_cli("validate /tmp/cmt_corrupt.json").exit_code == 2);
}

TEST_CASE("torsion: E1 gives 6 on both paths, cut collision exits 3") {
    write_file("/tmp/cmt_e1.json", kE1);
    const RunResult def = run_cli("torsion /tmp/cmt_e1.json");
    CHECK(def.exit_code == 0);
    CHECK(def.out.find("(6,") != std::string::npos);

    const RunResult at0 = run_cli("torsion /tmp/cmt_e1.json --lambda 0");
    CHECK(at0.exit_code == 0);
    CHECK(at0.out.find("(6,") != std::string::npos);

    const RunResult at1 = run_cli("torsion /tmp/cmt_e1.json --lambda 1");
    CHECK(at1.exit_code == 0);
    CHECK(at1.out.find("(6,") != std::string::npos);
    CHECK(at1.out.find("tail graded determinant") != std::string::npos);

    const RunResult collide = run_cli("torsion /tmp/cmt_e1.json --lambda 6");
    CHECK(collide.exit_code == 3);
    CHECK(collide.out.find("6") != std::string::npos);  // names the eigenvalue
}

TEST_CASE("torsion: zero complex with a named basis gives 1") {
    write_file("/tmp/cmt_zero.json", R"({
      "schema_version": "cmt/1",
      "dims": [2,2],
      "d_eo": [[[0,0],[0,0]],[[0,0],[0,0]]],
      "d_oe": [[[0,0],[0,0]],[[0,0],[0,0]]],
      "ds_eo": [[[0,0],[0,0]],[[0,0],[0,0]]],
      "ds_oe": [[[0,0],[0,0]],[[0,0],[0,0]]],
      "bases": {"std": {
        "coh0": [[[1,0],[0,0]],[[0,0],[1,0]]],
        "coh1": [[[1,0],[0,0]],[[0,0],[1,0]]],
        "hom0": [[[1,0],[0,0]],[[0,0],[1,0]]],
        "hom1": [[[1,0],[0,0]],[[0,0],[1,0]]]
      }}
    })");
    const RunResult r = run_cli("torsion /tmp/cmt_zero.json --basis std");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("(1,") != std::string::npos);
    CHECK(r.out.find("coh='std'") != std::string::npos);

    CHECK(run_cli("torsion /tmp/cmt_zero.json --basis nope").exit_code == 2);
}

TEST_CASE("generate torus: document validates; even flux exits 4") {
    CHECK(run_cli("generate torus --m 3 --flux 123:2.0 --metric I --out /tmp/cmt_torus.json")
              .exit_code == 0);
    CHECK(run_cli("validate /tmp/cmt_torus.json").exit_code == 0);
    const std::string doc = read_file("/tmp/cmt_torus.json");
    CHECK(doc.find("\"dims\": [4,4]") != std::string::npos);

    CHECK(run_cli("generate torus --m 3 --flux 12:1.0 --out /tmp/cmt_torus_bad.json").exit_code ==
          4);
    // infeasible random generator request also exits 4
    CHECK(run_cli("generate random --dims 2,2 --betti 1,0 --out /tmp/cmt_inf.json").exit_code == 4);
}

TEST_CASE("generate random: deterministic in the seed, validates") {
    CHECK(run_cli("--seed 9 generate random --dims 4,4 --betti 1,1 --out /tmp/cmt_r1.json")
              .exit_code == 0);
    CHECK(run_cli("--seed 9 generate random --dims 4,4 --betti 1,1 --out /tmp/cmt_r2.json")
              .exit_code == 0);
    CHECK(read_file("/tmp/cmt_r1.json") == read_file("/tmp/cmt_r2.json"));
    CHECK(run_cli("validate /tmp/cmt_r1.json").exit_code == 0);

    CHECK(run_cli("--seed 10 generate random --dims 4,4 --betti 1,1 --out /tmp/cmt_r3.json")
              .exit_code == 0);
    CHECK(read_file("/tmp/cmt_r1.json") != read_file("/tmp/cmt_r3.json"));
}

TEST_CASE("generate dolbeault-wrap relabels a document") {
    CHECK(run_cli("generate torus --m 3 --flux 123:2.0 --out /tmp/cmt_src.json").exit_code == 0);
    CHECK(run_cli("generate dolbeault-wrap --from /tmp/cmt_src.json --p 2 --out /tmp/cmt_dw.json")
              .exit_code == 0);
    const std::string doc = read_file("/tmp/cmt_dw.json");
    CHECK(doc.find("dolbeault-wrap") != std::string::npos);
    CHECK(doc.find("\"p\":\"2\"") != std::string::npos);
}

TEST_CASE("torsion reports are byte-identical across runs") {
    write_file("/tmp/cmt_e1.json", kE1);
    CHECK(run_cli("torsion /tmp/cmt_e1.json --lambda 1 --out /tmp/cmt_rep1.json").exit_code == 0);
    CHECK(run_cli("torsion /tmp/cmt_e1.json --lambda 1 --out /tmp/cmt_rep2.json").exit_code == 0);
    const std::string rep = read_file("/tmp/cmt_rep1.json");
    CHECK(rep == read_file("/tmp/cmt_rep2.json"));
    CHECK(rep.find("\"tail_factor\": [6") != std::string::npos);
}

TEST_CASE("sweep: torus metric family passes the constancy policy and is deterministic") {
    const std::string args =
        "sweep torus --family metric --m 3 --flux 123:2.0 --metric-path exp:5 "
        "--param 0:0.4:3 --fd-eps 1e-3 --constancy-tol 1e-6";
    const RunResult r1 = run_cli(args + " --out /tmp/cmt_sw1.json");
    CHECK(r1.exit_code == 0);
    const RunResult r2 = run_cli(args + " --out /tmp/cmt_sw2.json");
    CHECK(r2.exit_code == 0);
    CHECK(read_file("/tmp/cmt_sw1.json") == read_file("/tmp/cmt_sw2.json"));
    CHECK(read_file("/tmp/cmt_sw1.json").find("\"all_ok\": true") != std::string::npos);
}

TEST_CASE("sweep: flux family on a generated acyclic document agrees with the lemma") {
    CHECK(run_cli("--seed 14 generate random --dims 3,3 --betti 0,0 --out /tmp/cmt_ac.json")
              .exit_code == 0);
    const RunResult r = run_cli(
        "sweep /tmp/cmt_ac.json --family flux --beta random:3 --param 0:0.2:3 --fd-eps 1e-3");
    CHECK(r.exit_code == 0);
}

TEST_CASE("sweep: a deliberately coarse stencil surfaces per-point errors") {
    CHECK(run_cli("--seed 14 generate random --dims 3,3 --betti 0,0 --out /tmp/cmt_ac.json")
              .exit_code == 0);
    const RunResult r = run_cli(
        "sweep /tmp/cmt_ac.json --family flux --beta random:3 --param 0:0.2:2 --fd-eps 6.0");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("ERROR") != std::string::npos);
    CHECK(r.out.find("shrink eps") != std::string::npos);
}

TEST_CASE("selftest: suites run; a poisoned tolerance forces failures") {
    const RunResult detline = run_cli("selftest --suite detline");
    CHECK(detline.exit_code == 0);
    CHECK(detline.out.find("suite detline") != std::string::npos);
    CHECK(detline.out.find(" 0 failures") != std::string::npos);

    const RunResult poisoned = run_cli("--validation-tol 1e-30 selftest --suite bicomplex");
    CHECK(poisoned.exit_code == 1);
    CHECK(poisoned.out.find("FAIL") != std::string::npos);
    CHECK(poisoned.out.find("reproduce:") != std::string::npos);

    CHECK(run_cli("selftest --suite nonsense").exit_code == 2);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cmtorsion>\n");
        return 2;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    return ctx.run();
}
