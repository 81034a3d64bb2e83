#include "infdiag/service.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "httplib.h"

#include "infdiag/bench.hpp"
#include "infdiag/io.hpp"

namespace infdiag {

using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
  json details = json::object();
};

ApiResponse error_response(const HttpError& e) {
  return {e.status, {{"code", e.code}, {"message", e.message}, {"details", e.details}}};
}

ApiResponse from_exception(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Validation: {
      const auto* v = dynamic_cast<const ValidationError*>(&e);
      json details = {{"violations", v ? violations_to_json(v->violations()) : json::array()}};
      const bool parse = v && !v->violations().empty() && v->violations().front().rule == "parse";
      return error_response({parse ? 400 : 422, parse ? "parse_error" : "validation_failed", e.what(), details});
    }
    case ErrorKind::ImpossibleEvidence:
      return error_response({409, "impossible_evidence", e.what()});
    case ErrorKind::Structural:
      return error_response({409, "inadmissible", e.what()});
    case ErrorKind::UnknownNode:
      return error_response({404, "unknown_node", e.what()});
    case ErrorKind::InvalidArgument:
      return error_response({400, "bad_request", e.what()});
  }
  return error_response({500, "internal", e.what()});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/'))
    if (!part.empty()) out.push_back(part);
  return out;
}

std::string query_value(const SessionService::Query& query, const std::string& key, std::string fallback = {}) {
  auto it = query.find(key);
  return it == query.end() ? fallback : it->second;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError("request body is not JSON", {{"", "parse", e.what()}});
  }
}

struct Replayed {
  Diagram diagram;
  double ev = 0.0;
  std::vector<double> weights;
};

Replayed replay(const Diagram& pristine, const std::vector<Evidence>& log) {
  Replayed out{pristine, 0.0, {}};
  for (const auto& e : log) {
    auto step = propagate_evidence(out.diagram, e);
    out.weights.push_back(step.evidence_weight);
    out.diagram = std::move(step.diagram);
  }
  out.ev = infdiag::evaluate(out.diagram).ev;
  return out;
}

json evidence_log(const std::vector<Evidence>& log) {
  json out = json::array();
  for (const auto& e : log) out.push_back(evidence_to_json(e));
  return out;
}

/// splitmix64, so ids are opaque but reproducible.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t SessionService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError{404, "unknown_session", "no session '" + id + "'"};
  return it->second;
}

std::string SessionService::next_id() {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(mix(++counter_)));
  return buffer;
}

std::shared_ptr<SessionService::Session> SessionService::build(std::string id, const json& document) const {
  auto s = std::make_shared<Session>();
  s->id = std::move(id);
  const bool wrapped = document.is_object() && document.contains("diagram");
  s->pristine = diagram_from_json(wrapped ? document["diagram"] : document);
  if (wrapped && document.contains("joints")) {
    const json& joints = document["joints"];
    if (!joints.is_array()) throw invalid_argument("joints must be an array");
    for (const auto& j : joints) {
      auto joint = joint_from_json(j, s->pristine);
      s->joints.insert_or_assign(joint.node, std::move(joint));
    }
  }
  if (wrapped && document.contains("evidence")) {
    for (const auto& e : document["evidence"]) s->log.push_back(evidence_from_json(e, s->pristine));
  }
  s->baseline_ev = infdiag::evaluate(s->pristine).ev;
  auto state = replay(s->pristine, s->log);
  s->current = std::move(state.diagram);
  s->current_ev = state.ev;
  return s;
}

ApiResponse SessionService::handle(const std::string& method, const std::string& path, const Query& query,
                                   const std::string& body) {
  try {
    const auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "v1" || parts[1] != "sessions")
      throw HttpError{404, "not_found", "no route " + method + " " + path};
    if (parts.size() == 2) {
      if (method == "POST") return create(body);
      throw HttpError{405, "method_not_allowed", method + " " + path};
    }
    auto session = find(parts[2]);
    std::lock_guard lock(session->mutex);
    const std::string tail = parts.size() > 3 ? parts[3] : "";
    if (method == "GET" && parts.size() == 3) return summary(*session);
    if (method == "GET" && parts.size() == 4 && tail == "diagram") return diagram(*session);
    if (method == "GET" && parts.size() == 4 && tail == "evaluate") return evaluate(*session);
    if (method == "GET" && parts.size() == 4 && tail == "metrics") return metrics(*session, query);
    if (method == "GET" && parts.size() == 4 && tail == "bench") return bench(*session, query);
    if (method == "POST" && parts.size() == 4 && tail == "evidence") return apply(*session, body);
    if (method == "DELETE" && parts.size() == 5 && tail == "evidence") return retract(*session, parts[4]);
    if (method == "POST" && parts.size() == 4 && tail == "reset") return reset(*session);
    throw HttpError{404, "not_found", "no route " + method + " " + path};
  } catch (const HttpError& e) {
    return error_response(e);
  } catch (const Error& e) {
    return from_exception(e);
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what()});
  }
}

ApiResponse SessionService::create(const std::string& body) {
  const json document = parse_body(body);
  std::string id;
  {
    std::unique_lock lock(sessions_mutex_);
    id = next_id();
  }
  auto session = build(id, document);
  ApiResponse response = summary(*session);
  response.status = 201;
  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(id, std::move(session));
  return response;
}

ApiResponse SessionService::summary(const Session& s) const {
  json nodes = json::array();
  for (const auto& n : s.current.nodes()) nodes.push_back(n.id);
  json joints = json::array();
  for (const auto& [node, joint] : s.joints) joints.push_back(node);
  return {200,
          {{"id", s.id},
           {"name", s.pristine.name()},
           {"baselineEv", canonical_number(s.baseline_ev)},
           {"ev", canonical_number(s.current_ev)},
           {"voe", canonical_number(s.current_ev - s.baseline_ev)},
           {"evidence", evidence_log(s.log)},
           {"nodes", nodes},
           {"joints", joints}}};
}

ApiResponse SessionService::diagram(const Session& s) const {
  return {200, {{"pristine", diagram_to_json(s.pristine)}, {"current", diagram_to_json(s.current)}}};
}

ApiResponse SessionService::evaluate(const Session& s) const {
  auto e = infdiag::evaluate(s.current);
  return {200,
          {{"ev", canonical_number(e.ev)},
           {"baselineEv", canonical_number(s.baseline_ev)},
           {"policy", policy_to_json(s.current, e.policy)},
           {"ledger", ledger_to_json(e.ledger)}}};
}

ApiResponse SessionService::apply(Session& s, const std::string& body) {
  const json document = parse_body(body);
  Evidence evidence = evidence_from_json(document, s.current);
  auto log = s.log;
  log.push_back(evidence);
  auto state = replay(s.pristine, log);
  const double previous = s.current_ev;
  s.log = std::move(log);
  s.current = std::move(state.diagram);
  s.current_ev = state.ev;
  auto e = infdiag::evaluate(s.current);
  return {200,
          {{"evidence", evidence_to_json(evidence)},
           {"ev", canonical_number(s.current_ev)},
           {"baselineEv", canonical_number(s.baseline_ev)},
           {"voe", canonical_number(s.current_ev - s.baseline_ev)},
           {"delta", canonical_number(s.current_ev - previous)},
           {"evidenceWeight", canonical_number(state.weights.back())},
           {"policy", policy_to_json(s.current, e.policy)},
           {"log", evidence_log(s.log)}}};
}

ApiResponse SessionService::retract(Session& s, const std::string& node) {
  auto it = std::find_if(s.log.begin(), s.log.end(), [&](const Evidence& e) { return e.node == node; });
  if (it == s.log.end()) throw HttpError{404, "unknown_evidence", "no evidence on '" + node + "' in the log"};
  auto log = s.log;
  log.erase(log.begin() + (it - s.log.begin()));
  auto state = replay(s.pristine, log);
  s.log = std::move(log);
  s.current = std::move(state.diagram);
  s.current_ev = state.ev;
  return summary(s);
}

ApiResponse SessionService::reset(Session& s) {
  s.log.clear();
  s.current = s.pristine;
  s.current_ev = s.baseline_ev;
  return summary(s);
}

ApiResponse SessionService::metrics(const Session& s, const Query& query) const {
  const std::string node = query_value(query, "node");
  if (node.empty()) throw invalid_argument("metrics: the node parameter is required");
  s.current.node(node);
  const std::string mode_name = query_value(query, "mode", "naive");
  const std::string method = query_value(query, "method", "1");
  if (method != "1" && method != "2") throw invalid_argument("method must be 1 or 2");

  ValuationMode mode;
  if (mode_name == "full") {
    auto it = s.joints.find(node);
    if (it == s.joints.end())
      throw HttpError{409, "inadmissible", "full mode needs a joint for '" + node + "' supplied at session creation"};
    mode = ValuationMode::full(it->second);
  } else if (mode_name != "naive") {
    throw invalid_argument("mode must be naive or full");
  }

  const auto run = method == "1" ? detail::voe_by_propagation(s.current, node, mode)
                                 : detail::voe_by_lock(s.current, node, mode);
  std::optional<std::string> decision;
  if (auto d = query_value(query, "decision"); !d.empty())
    decision = d;
  else
    decision = default_vopi_decision(s.current, node);

  json vopi = {{"fromVoe", canonical_number(vopi_from_voe(run.report))}, {"standard", nullptr}, {"decision", nullptr}};
  if (decision) {
    vopi["decision"] = *decision;
    try {
      vopi["standard"] = canonical_number(vopi_standard(s.current, node, *decision, mode));
    } catch (const Error& e) {
      vopi["standardError"] = e.what();
    }
  }
  json voc = {{"fromVoe", canonical_number(value_of_control(run.report))}, {"standard", nullptr}};
  if (!mode.is_full()) {
    try {
      voc["standard"] = canonical_number(voc_standard(s.current, node));
    } catch (const Error& e) {
      voc["standardError"] = e.what();
    }
  }
  return {200,
          {{"node", node},
           {"mode", mode_name},
           {"method", std::stoi(method)},
           {"report", report_to_json(s.current, run.report)},
           {"os", canonical_number(outcome_sensitivity(run.report))},
           {"vopi", vopi},
           {"voc", voc},
           {"ledger", ledger_to_json(run.ledger)}}};
}

ApiResponse SessionService::bench(const Session& s, const Query& query) const {
  const std::string node = query_value(query, "node");
  if (node.empty()) throw invalid_argument("bench: the node parameter is required");
  s.current.node(node);
  std::string decision = query_value(query, "decision");
  if (decision.empty()) {
    auto d = default_vopi_decision(s.current, node);
    if (!d) throw HttpError{409, "inadmissible", "no decision left to inform with '" + node + "'"};
    decision = *d;
  }
  ValuationMode mode;
  if (query_value(query, "mode", "naive") == "full") {
    auto it = s.joints.find(node);
    if (it == s.joints.end()) throw HttpError{409, "inadmissible", "full mode needs a joint for '" + node + "'"};
    mode = ValuationMode::full(it->second);
  }
  const auto comparison = compare_methods(s.current, node, decision, mode);
  std::ostringstream csv;
  write_comparison_csv(csv, s.pristine.name(), comparison);
  json body = comparison_to_json(comparison);
  body["csv"] = csv.str();
  return {200, body};
}

json SessionService::snapshot() const {
  std::shared_lock lock(sessions_mutex_);
  json sessions = json::array();
  for (const auto& [id, s] : sessions_) {
    std::lock_guard session_lock(s->mutex);
    json joints = json::array();
    for (const auto& [node, joint] : s->joints) joints.push_back(joint_to_json(joint));
    sessions.push_back({{"id", id},
                        {"diagram", diagram_to_json(s->pristine)},
                        {"joints", joints},
                        {"evidence", evidence_log(s->log)}});
  }
  return {{"counter", counter_}, {"sessions", sessions}};
}

void SessionService::restore(const json& snapshot) {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  for (const auto& entry : snapshot.at("sessions")) {
    const std::string id = entry.at("id").get<std::string>();
    sessions.emplace(id, build(id, entry));
  }
  std::unique_lock lock(sessions_mutex_);
  sessions_ = std::move(sessions);
  counter_ = snapshot.value("counter", std::uint64_t{0});
}

void mount(httplib::Server& server, SessionService& service) {
  auto bind = [&service](const char* method) {
    return [&service, method](const httplib::Request& request, httplib::Response& response) {
      SessionService::Query query(request.params.begin(), request.params.end());
      auto result = service.handle(method, request.path, query, request.body);
      response.status = result.status;
      response.set_content(result.body.dump(), "application/json");
    };
  };
  server.Get("/v1/.*", bind("GET"));
  server.Post("/v1/.*", bind("POST"));
  server.Delete("/v1/.*", bind("DELETE"));
}

}  // namespace infdiag
