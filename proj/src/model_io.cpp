#include "spe/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace spe {

using detail::child;
using detail::Json;

namespace {

Json string_array(const std::vector<std::string>& items) {
  Json a = Json::array();
  for (const auto& s : items) a.push_back(s);
  return a;
}

std::vector<std::string> read_string_array(const Json& obj, const std::string& ptr,
                                           std::string_view key) {
  std::vector<std::string> out;
  const Json& arr = detail::get_array(obj, ptr, key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw SchemaError(child(child(ptr, key), i), "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

Json step_to_json(const Step& step) {
  Json j;
  if (const auto* m = std::get_if<Message>(&step.node)) {
    j["kind"] = "message";
    j["from"] = m->from;
    j["to"] = m->to;
    j["operation"] = m->operation;
    if (m->local) j["local"] = true;
  } else if (const auto* alt = std::get_if<Alt>(&step.node)) {
    j["kind"] = "alt";
    if (!alt->label.empty()) j["label"] = alt->label;
    Json branches = Json::array();
    for (const Branch& b : alt->branches)
      branches.push_back({{"probability", b.probability}, {"body", body_to_json(b.body)}});
    j["branches"] = std::move(branches);
  } else if (const auto* loop = std::get_if<Loop>(&step.node)) {
    j["kind"] = "loop";
    j["count"] = loop->count;
    j["body"] = body_to_json(loop->body);
  }
  return j;
}

Step step_from_json(const Json& j, const std::string& ptr) {
  detail::expect_object(j, ptr);
  const std::string kind = detail::get_string(j, ptr, "kind");
  if (kind == "message") {
    Message m;
    m.from = detail::get_string(j, ptr, "from");
    m.to = detail::get_string(j, ptr, "to");
    m.operation = detail::get_string(j, ptr, "operation");
    m.local = detail::get_bool(j, ptr, "local", false);
    return m;
  }
  if (kind == "alt") {
    Alt alt;
    if (const Json* label = detail::optional_field(j, "label")) {
      if (!label->is_string()) throw SchemaError(child(ptr, "label"), "expected a string");
      alt.label = label->get<std::string>();
    }
    const Json& branches = detail::get_array(j, ptr, "branches");
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const std::string bp = child(child(ptr, "branches"), i);
      Branch b;
      b.probability = detail::get_number(branches[i], bp, "probability");
      b.body = body_from_json(detail::get_array(branches[i], bp, "body"), child(bp, "body"));
      alt.branches.push_back(std::move(b));
    }
    return alt;
  }
  if (kind == "loop") {
    Loop loop;
    loop.count = detail::get_number(j, ptr, "count");
    loop.body = body_from_json(detail::get_array(j, ptr, "body"), child(ptr, "body"));
    return loop;
  }
  throw SchemaError(child(ptr, "kind"), "unknown step kind '" + kind + "'");
}

Json requirement_to_json(const Requirement& r) {
  if (const auto* rt = std::get_if<ResponseTimeRequirement>(&r))
    return {{"id", rt->id}, {"type", "responseTime"}, {"workload", rt->workload},
            {"maxResponseSec", rt->maxResponse}};
  const auto& u = std::get<UtilizationRequirement>(r);
  return {{"id", u.id}, {"type", "utilization"}, {"maxUtilization", u.maxUtilization}};
}

Requirement requirement_from_json(const Json& j, const std::string& ptr) {
  const std::string type = detail::get_string(j, ptr, "type");
  if (type == "responseTime") {
    return ResponseTimeRequirement{detail::get_string(j, ptr, "id"),
                                   detail::get_string(j, ptr, "workload"),
                                   detail::get_number(j, ptr, "maxResponseSec")};
  }
  if (type == "utilization")
    return UtilizationRequirement{detail::get_string(j, ptr, "id"),
                                  detail::get_number(j, ptr, "maxUtilization")};
  throw SchemaError(child(ptr, "type"), "unknown requirement type '" + type + "'");
}

}  // namespace

Json body_to_json(const Body& body) {
  Json a = Json::array();
  for (const Step& s : body) a.push_back(step_to_json(s));
  return a;
}

Body body_from_json(const Json& array, const std::string& ptr) {
  if (!array.is_array()) throw SchemaError(ptr, "expected an array");
  Body body;
  for (std::size_t i = 0; i < array.size(); ++i) body.push_back(step_from_json(array[i], child(ptr, i)));
  return body;
}

Json model_to_json(const SoftwareModel& input) {
  SoftwareModel m = input;
  canonicalize(m);
  Json doc;
  doc["schema"] = kModelSchema;
  doc["version"] = m.version;

  Json components = Json::array();
  Json constraints = Json::array();
  for (const Component& c : m.components) {
    Json jc = {{"id", c.id},
               {"name", c.name},
               {"provided", string_array(c.provided)},
               {"required", string_array(c.required)},
               {"client", c.client},
               {"requestOverheadSec", c.requestOverhead}};
    components.push_back(std::move(jc));
    if (c.frozen) constraints.push_back({{"type", "frozen"}, {"component", c.id}});
  }
  doc["components"] = std::move(components);
  doc["constraints"] = std::move(constraints);

  Json interfaces = Json::array();
  for (const Interface& i : m.interfaces) {
    Json ops = Json::array();
    for (const Operation& o : i.operations) ops.push_back({{"id", o.id}, {"name", o.name}});
    interfaces.push_back({{"id", i.id}, {"name", i.name}, {"operations", std::move(ops)}});
  }
  doc["interfaces"] = std::move(interfaces);

  Json scenarios = Json::array();
  for (const Scenario& s : m.scenarios)
    scenarios.push_back(
        {{"id", s.id}, {"name", s.name}, {"workload", s.workload}, {"body", body_to_json(s.body)}});
  doc["scenarios"] = std::move(scenarios);

  Json workloads = Json::array();
  for (const Workload& w : m.workloads)
    workloads.push_back({{"id", w.id},
                         {"name", w.name},
                         {"population", w.population},
                         {"thinkTimeSec", w.thinkTime}});
  doc["workloads"] = std::move(workloads);

  Json demands = Json::array();
  for (const DemandAnnotation& d : m.demands)
    demands.push_back(
        {{"component", d.component}, {"operation", d.operation}, {"serviceTimeSec", d.serviceTime}});
  doc["demands"] = std::move(demands);

  Json reqs = Json::array();
  for (const Requirement& r : m.requirements) reqs.push_back(requirement_to_json(r));
  doc["requirements"] = std::move(reqs);
  return doc;
}

SoftwareModel model_from_json(const Json& doc, const std::string& base) {
  detail::expect_object(doc, base);
  const std::string found = detail::get_string(doc, base, "schema");
  if (found != kModelSchema)
    throw SchemaError(child(base, "schema"),
                      "expected schema '" + std::string(kModelSchema) + "', found '" + found + "'");

  SoftwareModel m;
  m.version = static_cast<int>(detail::get_integer(doc, base, "version"));

  const std::string cp = child(base, "components");
  const Json& comps = detail::get_array(doc, base, "components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string p = child(cp, i);
    Component c;
    c.id = detail::get_string(comps[i], p, "id");
    c.name = detail::get_string(comps[i], p, "name");
    c.provided = read_string_array(comps[i], p, "provided");
    c.required = read_string_array(comps[i], p, "required");
    c.client = detail::get_bool(comps[i], p, "client", false);
    if (detail::optional_field(comps[i], "requestOverheadSec"))
      c.requestOverhead = detail::get_number(comps[i], p, "requestOverheadSec");
    m.components.push_back(std::move(c));
  }

  const std::string kp = child(base, "constraints");
  const Json& cons = detail::get_array(doc, base, "constraints");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string p = child(kp, i);
    const std::string type = detail::get_string(cons[i], p, "type");
    if (type != "frozen") throw SchemaError(child(p, "type"), "unknown constraint type '" + type + "'");
    const std::string target = detail::get_string(cons[i], p, "component");
    Component* c = m.find_component(target);
    if (!c) throw SchemaError(child(p, "component"), "unknown component '" + target + "'");
    c->frozen = true;
  }

  const std::string ip = child(base, "interfaces");
  const Json& ifaces = detail::get_array(doc, base, "interfaces");
  for (std::size_t i = 0; i < ifaces.size(); ++i) {
    const std::string p = child(ip, i);
    Interface iface;
    iface.id = detail::get_string(ifaces[i], p, "id");
    iface.name = detail::get_string(ifaces[i], p, "name");
    const Json& ops = detail::get_array(ifaces[i], p, "operations");
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const std::string op = child(child(p, "operations"), k);
      iface.operations.push_back({detail::get_string(ops[k], op, "id"), detail::get_string(ops[k], op, "name")});
    }
    m.interfaces.push_back(std::move(iface));
  }

  const std::string sp = child(base, "scenarios");
  const Json& scen = detail::get_array(doc, base, "scenarios");
  for (std::size_t i = 0; i < scen.size(); ++i) {
    const std::string p = child(sp, i);
    Scenario s;
    s.id = detail::get_string(scen[i], p, "id");
    s.name = detail::get_string(scen[i], p, "name");
    s.workload = detail::get_string(scen[i], p, "workload");
    s.body = body_from_json(detail::get_array(scen[i], p, "body"), child(p, "body"));
    m.scenarios.push_back(std::move(s));
  }

  const std::string wp = child(base, "workloads");
  const Json& works = detail::get_array(doc, base, "workloads");
  for (std::size_t i = 0; i < works.size(); ++i) {
    const std::string p = child(wp, i);
    Workload w;
    w.id = detail::get_string(works[i], p, "id");
    w.name = detail::get_string(works[i], p, "name");
    w.population = static_cast<int>(detail::get_integer(works[i], p, "population"));
    w.thinkTime = detail::get_number(works[i], p, "thinkTimeSec");
    m.workloads.push_back(std::move(w));
  }

  const std::string dp = child(base, "demands");
  const Json& dems = detail::get_array(doc, base, "demands");
  for (std::size_t i = 0; i < dems.size(); ++i) {
    const std::string p = child(dp, i);
    m.demands.push_back({detail::get_string(dems[i], p, "component"),
                         detail::get_string(dems[i], p, "operation"),
                         detail::get_number(dems[i], p, "serviceTimeSec")});
  }

  const std::string rp = child(base, "requirements");
  const Json& reqs = detail::get_array(doc, base, "requirements");
  for (std::size_t i = 0; i < reqs.size(); ++i)
    m.requirements.push_back(requirement_from_json(reqs[i], child(rp, i)));

  canonicalize(m);
  return m;
}

SoftwareModel load_model(std::string_view document) {
  return model_from_json(detail::parse_document(document));
}

std::string save_model(const SoftwareModel& model) {
  return detail::dump_document(model_to_json(model));
}

Json validation_to_json(const ValidationReport& report) {
  Json v = Json::array();
  for (const Violation& x : report.violations)
    v.push_back({{"code", x.code}, {"path", x.path}, {"message", x.message}});
  return {{"ok", report.ok()}, {"violations", std::move(v)}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

SoftwareModel load_model_file(const std::string& path) { return load_model(read_text_file(path)); }

void save_model_file(const SoftwareModel& model, const std::string& path) {
  write_text_file(path, save_model(model));
}

}  // namespace spe
