// Command-line front end: diagram validation, evaluation, evidence and
// information-value metrics, method benchmarks and the HTTP service.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"

#include "infdiag/bench.hpp"
#include "infdiag/io.hpp"
#include "infdiag/service.hpp"
#include "infdiag/valuation.hpp"

namespace {

using namespace infdiag;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kImpossible = 3,
  kStructural = 4,
};

struct Common {
  std::string file;
  bool allow_forgetting = false;
  bool json = false;
};

struct MetricArgs {
  std::string node;
  std::string mode = "naive";
  std::string joint;
  int method = 1;
  std::string decision;
  std::string via = "voe";
};

Diagram load(const Common& c) { return load_diagram_file(c.file, LoadOptions{c.allow_forgetting}); }

ValuationMode mode_of(const Diagram& d, const MetricArgs& m) {
  if (m.mode == "naive") return ValuationMode::naive();
  if (m.joint.empty()) throw invalid_argument("--mode full needs --joint <file>");
  auto joint = load_joint_file(m.joint, d);
  if (joint.node != m.node)
    throw invalid_argument("joint is for '" + joint.node + "', not '" + m.node + "'");
  return ValuationMode::full(std::move(joint));
}

detail::LedgeredReport report_of(const Diagram& d, const MetricArgs& m) {
  const auto mode = mode_of(d, m);
  return m.method == 2 ? detail::voe_by_lock(d, m.node, mode) : detail::voe_by_propagation(d, m.node, mode);
}

std::string decision_of(const Diagram& d, const MetricArgs& m) {
  if (!m.decision.empty()) return m.decision;
  auto chosen = default_vopi_decision(d, m.node);
  if (!chosen) throw structural_error("every decision already observes '" + m.node + "'");
  return *chosen;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

void print_value(const Common& c, const char* key, double value) {
  if (c.json)
    print_json({{key, canonical_number(value)}});
  else
    std::cout << key << " " << format_number(value) << "\n";
}

int run_validate(const Common& c) {
  load(c);
  if (c.json)
    print_json({{"valid", true}, {"violations", nlohmann::json::array()}});
  else
    std::cout << "valid\n";
  return kOk;
}

int run_evaluate(const Common& c) {
  const Diagram d = load(c);
  const auto e = evaluate(d);
  if (c.json) {
    print_json({{"ev", canonical_number(e.ev)},
                {"policy", policy_to_json(d, e.policy)},
                {"maxSpace", e.ledger.max_space()},
                {"heuristic", std::string(kOrderingHeuristic)}});
  } else {
    std::cout << "EV " << format_number(e.ev) << "\n" << format_policy(d, e.policy) << "max space "
              << e.ledger.max_space() << "\n";
  }
  return kOk;
}

int run_propagate(const Common& c, const std::vector<std::string>& evidence, const std::string& out) {
  Diagram d = load(c);
  const double baseline = evaluate(d).ev;
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& expression : evidence) {
    auto step = propagate_evidence(d, parse_evidence(expression, d));
    weights.push_back({{"evidence", expression}, {"weight", canonical_number(step.evidence_weight)}});
    d = std::move(step.diagram);
  }
  if (!out.empty()) {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw invalid_argument("cannot write '" + out + "'");
    file << save_diagram(d);
  }
  const auto e = evaluate(d);
  if (c.json) {
    print_json({{"ev", canonical_number(e.ev)},
                {"baselineEv", canonical_number(baseline)},
                {"voe", canonical_number(e.ev - baseline)},
                {"policy", policy_to_json(d, e.policy)},
                {"evidence", weights}});
  } else {
    std::cout << "EV " << format_number(e.ev) << "  (baseline " << format_number(baseline) << ", VOE "
              << format_number(e.ev - baseline) << ")\n"
              << format_policy(d, e.policy);
    for (const auto& w : weights)
      std::cout << "P{" << w["evidence"].get<std::string>() << "} " << format_number(w["weight"].get<double>())
                << "\n";
  }
  return kOk;
}

int run_voe(const Common& c, const MetricArgs& m) {
  const Diagram d = load(c);
  const auto run = report_of(d, m);
  if (c.json) {
    auto body = report_to_json(d, run.report);
    body["maxSpace"] = run.ledger.max_space();
    print_json(body);
  } else {
    std::cout << format_report(run.report) << "max space " << run.ledger.max_space() << "\n";
  }
  return kOk;
}

int run_os(const Common& c, const MetricArgs& m) {
  const Diagram d = load(c);
  print_value(c, "OS", outcome_sensitivity(report_of(d, m).report));
  return kOk;
}

int run_vopi(const Common& c, const MetricArgs& m) {
  const Diagram d = load(c);
  if (m.via == "standard")
    print_value(c, "VOPI", vopi_standard(d, m.node, decision_of(d, m), mode_of(d, m)));
  else
    print_value(c, "VOPI", vopi_from_voe(report_of(d, m).report));
  return kOk;
}

int run_voc(const Common& c, const MetricArgs& m) {
  const Diagram d = load(c);
  if (m.via == "standard")
    print_value(c, "VOC", voc_standard(d, m.node));
  else
    print_value(c, "VOC", value_of_control(report_of(d, m).report));
  return kOk;
}

int run_bench(const Common& c, const MetricArgs& m) {
  const Diagram d = load(c);
  const auto comparison = compare_methods(d, m.node, decision_of(d, m), mode_of(d, m));
  if (c.json)
    print_json(comparison_to_json(comparison));
  else
    write_comparison_csv(std::cout, d.name().empty() ? c.file : d.name(), comparison);
  return kOk;
}

int run_gen(std::uint64_t seed, std::size_t nodes, std::size_t outcomes, const std::string& out) {
  const std::string text = save_diagram(generate_random_diagram(seed, nodes, outcomes));
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw invalid_argument("cannot write '" + out + "'");
    file << text;
  }
  return kOk;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(const Common& c, const std::string& host, int port, const std::vector<std::string>& joints,
              const std::string& snapshot) {
  SessionService service;
  if (!snapshot.empty()) {
    std::ifstream in(snapshot);
    if (in) service.restore(nlohmann::json::parse(in));
  }
  if (!c.file.empty()) {
    const Diagram d = load(c);
    nlohmann::json body = {{"diagram", diagram_to_json(d)}, {"joints", nlohmann::json::array()}};
    for (const auto& j : joints) body["joints"].push_back(joint_to_json(load_joint_file(j, d)));
    auto created = service.handle("POST", "/v1/sessions", {}, body.dump());
    if (created.status != 201) throw invalid_argument("initial session failed: " + created.body.dump());
    std::cout << "session " << created.body["id"].get<std::string>() << "\n";
  }
  httplib::Server server;
  mount(server, service);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "listening on " << host << ":" << port << std::endl;
  if (!server.listen(host, port)) throw invalid_argument("cannot listen on " + host + ":" + std::to_string(port));
  g_server = nullptr;
  if (!snapshot.empty()) {
    std::ofstream out(snapshot, std::ios::binary);
    out << service.snapshot().dump(2) << "\n";
  }
  return kOk;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Validation:
      return kValidation;
    case ErrorKind::ImpossibleEvidence:
      return kImpossible;
    case ErrorKind::Structural:
      return kStructural;
    case ErrorKind::UnknownNode:
    case ErrorKind::InvalidArgument:
      return kUsage;
  }
  return kUsage;
}

void add_metric_options(CLI::App* cmd, MetricArgs& m, bool method = true) {
  cmd->add_option("--node", m.node, "Evidence node")->required();
  cmd->add_option("--mode", m.mode, "naive or full")->check(CLI::IsMember({"naive", "full"}));
  cmd->add_option("--joint", m.joint, "Joint conditional table for full mode")->check(CLI::ExistingFile);
  if (method) cmd->add_option("--method", m.method, "1 (propagation) or 2 (lock)")->check(CLI::IsMember({1, 2}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact influence-diagram evaluation and value of evidence"};
  app.require_subcommand(1);

  Common common;
  MetricArgs metric;
  std::vector<std::string> evidence;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t nodes = 5;
  std::size_t outcomes = 3;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> joints;
  std::string snapshot;

  auto with_file = [&](CLI::App* cmd) {
    cmd->add_option("file", common.file, "Diagram document")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--allow-forgetting", common.allow_forgetting, "Skip the no-forgetting check");
    cmd->add_flag("--json", common.json, "Emit JSON");
    return cmd;
  };

  auto* validate = with_file(app.add_subcommand("validate", "Check a diagram document"));
  auto* evaluate = with_file(app.add_subcommand("evaluate", "EV, optimal policy and max space"));
  auto* propagate = with_file(app.add_subcommand("propagate", "Apply evidence and re-evaluate"));
  propagate->add_option("--evidence", evidence, "NODE=OUTCOME or NODE|DEC=alt:out,...")->required();
  propagate->add_option("--out", out, "Write the conditioned diagram");
  auto* voe = with_file(app.add_subcommand("voe", "Value of evidence per outcome"));
  add_metric_options(voe, metric);
  auto* os = with_file(app.add_subcommand("os", "Outcome sensitivity"));
  add_metric_options(os, metric);
  auto* vopi = with_file(app.add_subcommand("vopi", "Value of perfect information"));
  add_metric_options(vopi, metric);
  vopi->add_option("--decision", metric.decision, "Decision informed by the node");
  vopi->add_option("--via", metric.via, "voe or standard")->check(CLI::IsMember({"voe", "standard"}));
  auto* voc = with_file(app.add_subcommand("voc", "Value of control"));
  add_metric_options(voc, metric);
  voc->add_option("--via", metric.via, "voe or standard")->check(CLI::IsMember({"voe", "standard"}));
  auto* bench = with_file(app.add_subcommand("bench", "Compare VOPI pipelines (CSV)"));
  add_metric_options(bench, metric, false);
  bench->add_option("--decision", metric.decision, "Decision informed by the node");

  auto* gen = app.add_subcommand("gen", "Random valid diagram");
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--nodes", nodes, "Node count including the value node")->required()->check(CLI::Range(2, 64));
  gen->add_option("--max-outcomes", outcomes, "Largest outcome space")->required()->check(CLI::Range(2, 16));
  gen->add_option("--out", out, "Output file (stdout when absent)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--diagram", common.file, "Diagram for an initial session")->check(CLI::ExistingFile);
  serve->add_option("--joint", joints, "Joint conditional tables for the initial session")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--snapshot", snapshot, "Restore from and save sessions to this file");
  serve->add_flag("--allow-forgetting", common.allow_forgetting, "Skip the no-forgetting check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return run_validate(common);
    if (*evaluate) return run_evaluate(common);
    if (*propagate) return run_propagate(common, evidence, out);
    if (*voe) return run_voe(common, metric);
    if (*os) return run_os(common, metric);
    if (*vopi) return run_vopi(common, metric);
    if (*voc) return run_voc(common, metric);
    if (*bench) return run_bench(common, metric);
    if (*gen) return run_gen(seed, nodes, outcomes, out);
    if (*serve) return run_serve(common, host, port, joints, snapshot);
  } catch (const ValidationError& e) {
    if (common.json) {
      print_json({{"valid", false}, {"violations", violations_to_json(e.violations())}});
    } else {
      std::cerr << e.what() << "\n";
    }
    return kValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
