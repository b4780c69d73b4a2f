// facpl: evaluate requests against policies, verify security and structural
// properties by exhaustive enumeration, and emit SMT-LIB scripts for the
// constraint-based route.
//
// Exit status: 0 success / property holds, 1 property violated,
// 2 input error, 3 resource error (enumeration cap, solver failure).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "facpl/analyzer.hpp"
#include "facpl/casestudy.hpp"
#include "facpl/eval.hpp"
#include "facpl/parser.hpp"
#include "facpl/printer.hpp"
#include "facpl/smt.hpp"

namespace {

constexpr int kStatusHolds = 0;
constexpr int kStatusViolated = 1;
constexpr int kStatusInputError = 2;
constexpr int kStatusResourceError = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

facpl::EngineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return facpl::parse_config(read_file(path));
}

// Path of the bundled reference solver, expected next to this binary.
std::string bundled_solver(const char* argv0) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path self = fs::canonical(argv0, ec);
  if (!ec) {
    fs::path sibling = self.parent_path() / "facpl-minismt";
    if (fs::exists(sibling)) return sibling.string();
  }
  return "facpl-minismt";
}

struct GlobalOpts {
  std::string config_path;
  unsigned long long cap = facpl::kDefaultCap;
  std::size_t witnesses = facpl::kDefaultWitnessCap;
  std::string format = "text";
};

int report_status(const facpl::CheckReport& rep, const GlobalOpts& g) {
  std::cout << (g.format == "tsv" ? facpl::render_tsv(rep) : facpl::render_text(rep));
  return rep.holds ? kStatusHolds : kStatusViolated;
}

int run(int argc, char** argv) {
  CLI::App app{"policy evaluation and property verification for light FACPL"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "engine configuration file (.cfg)");
  app.add_option("--cap", g.cap, "request enumeration cap");
  app.add_option("--witnesses", g.witnesses, "max witnesses per report");
  app.add_option("--format", g.format, "report format: text or tsv")
      ->check(CLI::IsMember({"text", "tsv"}));

  // ---- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a request against a policy");
  std::string policy_path, request_path;
  eval_cmd->add_option("policy", policy_path, "policy file (.facpl)")->required();
  eval_cmd->add_option("request", request_path, "request file (.req)")->required();

  // ---- check --------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "verify a property by enumeration");
  std::string property, chk_policy, chk_second, chk_domain;
  std::string permit_set_path, deny_set_path, requests_path;
  int child_index = -1;
  bool strict = false;
  check_cmd
      ->add_option("property", property,
                   "complete|redundant|disjoint|covers|enforce|least-privilege")
      ->required()
      ->check(CLI::IsMember(
          {"complete", "redundant", "disjoint", "covers", "enforce", "least-privilege"}));
  check_cmd->add_option("policy", chk_policy, "policy file (.facpl)")->required();
  check_cmd->add_option("second", chk_second, "second policy (disjoint/covers) or domain file");
  check_cmd->add_option("domain", chk_domain, "domain file (.dom)");
  check_cmd->add_option("--permit-set", permit_set_path, "permit-set constraint file (.spec)");
  check_cmd->add_option("--deny-set", deny_set_path, "deny-set constraint file (.spec)");
  check_cmd->add_option("--requests", requests_path, "coverage request-set constraint (.spec)");
  check_cmd->add_option("--child", child_index, "child index for redundant");
  check_cmd->add_flag("--strict", strict, "completeness also rejects indeterminate");

  // ---- encode -------------------------------------------------------------
  auto* encode_cmd = app.add_subcommand("encode", "emit an SMT-LIB property query");
  std::string enc_policy, enc_domain, enc_query, enc_out, solver_cmd;
  bool do_solve = false;
  encode_cmd->add_option("policy", enc_policy, "policy file (.facpl)")->required();
  encode_cmd->add_option("domain", enc_domain, "domain file (.dom)")->required();
  encode_cmd
      ->add_option("query", enc_query,
                   "reach:permit|reach:deny|reach:na|reach:indet|complete|disjoint:<file2>")
      ->required();
  encode_cmd->add_option("--out", enc_out, "write the script here instead of stdout");
  encode_cmd->add_flag("--solve", do_solve, "run the solver and print the verdict");
  encode_cmd->add_option("--solver", solver_cmd, "solver command (overrides FACPL_SMT_SOLVER)");

  // ---- case-study ---------------------------------------------------------
  app.add_subcommand("case-study", "replay the bundled banking fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kStatusInputError;
  }

  try {
    auto cfg = load_config(g.config_path);

    if (eval_cmd->parsed()) {
      auto policy = facpl::parse_policy(read_file(policy_path));
      auto request = facpl::parse_request(read_file(request_path));
      std::cout << facpl::to_string(facpl::eval_any(policy, request, cfg)) << "\n";
      return kStatusHolds;
    }

    if (check_cmd->parsed()) {
      auto policy = facpl::parse_policy(read_file(chk_policy));
      bool two_policies = property == "disjoint" || property == "covers";
      std::string domain_path = two_policies ? chk_domain : chk_second;
      if (domain_path.empty()) throw InputError("missing domain file");
      auto domain = facpl::parse_domain(read_file(domain_path));

      facpl::CheckReport rep;
      if (property == "complete") {
        rep = facpl::check_completeness(policy, domain, cfg, strict, g.cap, g.witnesses);
      } else if (property == "redundant") {
        if (child_index < 0) throw InputError("redundant requires --child N");
        rep = facpl::check_redundancy(policy, static_cast<std::size_t>(child_index), domain,
                                      cfg, g.cap, g.witnesses);
      } else if (property == "disjoint" || property == "covers") {
        if (chk_second.empty()) throw InputError(property + " takes two policy files");
        auto other = facpl::parse_policy(read_file(chk_second));
        if (property == "disjoint") {
          rep = facpl::check_disjointness(policy, other, domain, cfg, g.cap, g.witnesses);
        } else {
          facpl::ExprPtr constraint = requests_path.empty()
                                          ? facpl::expr_true()
                                          : facpl::parse_constraint(read_file(requests_path));
          rep = facpl::check_coverage(policy, other, {domain, constraint}, cfg, g.cap,
                                      g.witnesses);
        }
      } else if (property == "enforce") {
        if (permit_set_path.empty() || deny_set_path.empty())
          throw InputError("enforce requires --permit-set and --deny-set");
        facpl::RequestSetSpec ps{domain, facpl::parse_constraint(read_file(permit_set_path))};
        facpl::RequestSetSpec ds{domain, facpl::parse_constraint(read_file(deny_set_path))};
        rep = facpl::check_enforcement(policy, ps, ds, cfg, g.cap, g.witnesses);
      } else {  // least-privilege
        if (permit_set_path.empty()) throw InputError("least-privilege requires --permit-set");
        facpl::RequestSetSpec ps{domain, facpl::parse_constraint(read_file(permit_set_path))};
        rep = facpl::check_least_privilege(policy, ps, cfg, g.cap, g.witnesses);
      }
      return report_status(rep, g);
    }

    if (encode_cmd->parsed()) {
      auto policy = facpl::parse_policy(read_file(enc_policy));
      auto domain = facpl::parse_domain(read_file(enc_domain));
      auto formulas = facpl::encode(policy, domain, cfg);

      facpl::Query query = facpl::QueryComplete{};
      if (enc_query == "reach:permit") {
        query = facpl::QueryReach{facpl::Decision::permit};
      } else if (enc_query == "reach:deny") {
        query = facpl::QueryReach{facpl::Decision::deny};
      } else if (enc_query == "reach:na") {
        query = facpl::QueryReach{facpl::Decision::not_applicable};
      } else if (enc_query == "reach:indet") {
        query = facpl::QueryReach{facpl::Decision::indeterminate};
      } else if (enc_query == "complete") {
        query = facpl::QueryComplete{};
      } else if (enc_query.rfind("disjoint:", 0) == 0) {
        auto other = facpl::parse_policy(read_file(enc_query.substr(9)));
        query = facpl::QueryDisjoint{facpl::encode(other, domain, cfg)};
      } else {
        throw InputError("unknown query '" + enc_query + "'");
      }

      std::string script = facpl::emit_smtlib(formulas, query, domain);
      if (!enc_out.empty()) {
        std::ofstream out(enc_out);
        if (!out) throw InputError("cannot write " + enc_out);
        out << script;
      } else if (!do_solve) {
        std::cout << script;
      }

      if (do_solve) {
        std::string cmd = solver_cmd.empty()
                              ? facpl::default_solver(bundled_solver(argv[0]))
                              : solver_cmd;
        auto result = facpl::solve(script, cmd);
        std::cout << facpl::to_string(result.verdict) << "\n";
        if (result.verdict == facpl::SatVerdict::sat) {
          facpl::Request witness = facpl::decode_model(result.model_text, domain);
          std::cout << "witness: " << facpl::print_request(witness) << "\n";
        }
      }
      return kStatusHolds;
    }

    // case-study
    auto outcome = facpl::casestudy::run(g.witnesses);
    std::cout << (g.format == "tsv" ? facpl::casestudy::render_tsv(outcome)
                                    : facpl::casestudy::render_text(outcome));
    return outcome.as_expected() ? kStatusHolds : kStatusViolated;
  } catch (const facpl::SourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.snippet().empty()) std::cerr << "  | " << e.snippet() << "\n";
    return kStatusInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStatusInputError;
  } catch (const facpl::EncodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStatusInputError;
  } catch (const facpl::CapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStatusResourceError;
  } catch (const facpl::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStatusResourceError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStatusInputError;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
