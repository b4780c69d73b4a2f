#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include "testutil.hpp"

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and captures stdout and the exit status.
RunResult run(const std::string& args) {
  std::string cmd = std::string(FACPL_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
  int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

std::string fx(const std::string& name) { return testutil::fixture_path(name); }

}  // namespace

TEST_CASE("eval prints the decision and exits 0") {
  auto r = run("eval " + fx("loan_read.facpl") + " " + fx("req_read_assistant.req"));
  CHECK(r.status == 0);
  CHECK(r.out == "permit\n");
  CHECK(run("eval " + fx("loan_read.facpl") + " " + fx("req_other_doc.req")).out ==
        "not-applicable\n");
  CHECK(run("eval " + fx("loan_read.facpl") + " " + fx("req_write_officier.req")).out ==
        "deny\n");
}

TEST_CASE("input errors exit 2") {
  CHECK(run("eval /nonexistent.facpl " + fx("req_other_doc.req")).status == 2);
  CHECK(run("eval " + fx("banking.dom") + " " + fx("req_other_doc.req")).status == 2);
  CHECK(run("check complete " + fx("policy_a.facpl")).status == 2);  // missing domain
  CHECK(run("bogus-subcommand").status == 2);
}

TEST_CASE("check exits 0 when the property holds and 1 when violated") {
  std::string common = " --config " + fx("banking.cfg");
  CHECK(run("check complete " + fx("policy_b.facpl") + " " + fx("banking.dom") + common)
            .status == 0);
  CHECK(run("check complete " + fx("policy_a.facpl") + " " + fx("banking.dom") + common)
            .status == 1);
  CHECK(run("check enforce " + fx("policy_c.facpl") + " " + fx("banking.dom") +
            " --permit-set " + fx("conj_secure.spec") + " --deny-set " +
            fx("conj_nonsecure.spec") + common)
            .status == 0);
  CHECK(run("check enforce " + fx("policy_b.facpl") + " " + fx("banking.dom") +
            " --permit-set " + fx("conj_secure.spec") + " --deny-set " +
            fx("conj_nonsecure.spec") + common)
            .status == 1);
  CHECK(run("check least-privilege " + fx("policy_c.facpl") + " " + fx("banking.dom") +
            " --permit-set " + fx("conj_secure.spec") + common)
            .status == 0);
  CHECK(run("check disjoint " + fx("policy_a.facpl") + " " + fx("policy_b.facpl") + " " +
            fx("banking.dom") + common)
            .status == 1);
  CHECK(run("check covers " + fx("policy_a.facpl") + " " + fx("policy_a.facpl") + " " +
            fx("banking.dom") + common)
            .status == 0);
  CHECK(run("check redundant " + fx("policy_a.facpl") + " " + fx("banking.dom") +
            " --child 0" + common)
            .status == 1);
}

TEST_CASE("an exceeded cap exits 3") {
  CHECK(run("check complete " + fx("policy_a.facpl") + " " + fx("banking.dom") +
            " --config " + fx("banking.cfg") + " --cap 10")
            .status == 3);
}

TEST_CASE("tsv reports are byte-stable across runs") {
  std::string cmd = "check complete " + fx("policy_a.facpl") + " " + fx("banking.dom") +
                    " --config " + fx("banking.cfg") + " --format tsv";
  auto r1 = run(cmd);
  auto r2 = run(cmd);
  CHECK(r1.status == 1);
  CHECK(r1.out == r2.out);
  CHECK(r1.out.rfind("completeness\tfalse\t", 0) == 0);
}

TEST_CASE("the witness cap limits reported witnesses") {
  std::string cmd = "check complete " + fx("policy_a.facpl") + " " + fx("banking.dom") +
                    " --config " + fx("banking.cfg") + " --format tsv --witnesses 1";
  auto r = run(cmd);
  CHECK(r.out.rfind("completeness\tfalse\t1\n", 0) == 0);
}

TEST_CASE("encode emits a script and --solve runs the bundled solver") {
  auto script = run("encode " + fx("policy_a.facpl") + " " + fx("banking.dom") +
                    " reach:na --config " + fx("banking.cfg"));
  CHECK(script.status == 0);
  CHECK(script.out.rfind("(set-logic QF_LIRA)", 0) == 0);
  auto script2 = run("encode " + fx("policy_a.facpl") + " " + fx("banking.dom") +
                     " reach:na --config " + fx("banking.cfg"));
  CHECK(script.out == script2.out);  // deterministic emission

  auto solved = run("encode " + fx("policy_a.facpl") + " " + fx("banking.dom") +
                    " reach:na --solve --solver " SOLVER_BIN " --config " + fx("banking.cfg"));
  CHECK(solved.status == 0);
  CHECK(solved.out.rfind("sat\n", 0) == 0);
  CHECK(solved.out.find("witness: ") != std::string::npos);

  auto unsat = run("encode " + fx("policy_b.facpl") + " " + fx("banking.dom") +
                   " complete --solve --solver " SOLVER_BIN " --config " + fx("banking.cfg"));
  CHECK(unsat.status == 0);
  CHECK(unsat.out == "unsat\n");

  CHECK(run("encode " + fx("policy_a.facpl") + " " + fx("banking.dom") +
            " reach:frobnicate --config " + fx("banking.cfg"))
            .status == 2);
  CHECK(run("encode " + fx("policy_a.facpl") + " " + fx("banking.dom") +
            " reach:na --solve --solver /nonexistent/smt --config " + fx("banking.cfg"))
            .status == 3);
}

TEST_CASE("case-study reports the expected narrative and exits 0") {
  auto r = run("case-study");
  CHECK(r.status == 0);
  CHECK(r.out.find("A: enforcement FAILS") != std::string::npos);
  CHECK(r.out.find("not-applicable witness") != std::string::npos);
  CHECK(r.out.find("B: enforcement FAILS") != std::string::npos);
  CHECK(r.out.find("circumvention witness") != std::string::npos);
  CHECK(r.out.find("C: enforcement HOLDS, least-privilege HOLDS") != std::string::npos);

  auto tsv = run("case-study --format tsv");
  CHECK(tsv.status == 0);
  auto tsv2 = run("case-study --format tsv");
  CHECK(tsv.out == tsv2.out);
  CHECK(tsv.out.find("A\tenforcement\tfalse") != std::string::npos);
  CHECK(tsv.out.find("C\tleast-privilege\ttrue") != std::string::npos);
}
