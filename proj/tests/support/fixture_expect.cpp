#include "fixture_expect.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fails::testing {

namespace {

Timestamp ts(const nlohmann::json& j) {
  auto t = Timestamp::parse_iso(j.get<std::string>());
  if (!t) throw std::runtime_error("bad timestamp in expected.json: " + j.dump());
  return *t;
}

std::string show(const std::optional<Timestamp>& t) { return t ? t->iso() : "(none)"; }

}  // namespace

FixtureExpectation load_fixture_expectation(const std::filesystem::path& fixture_dir) {
  std::ifstream in(fixture_dir / "expected.json");
  if (!in) throw std::runtime_error("cannot open " + (fixture_dir / "expected.json").string());
  const auto doc = nlohmann::json::parse(in);
  FixtureExpectation out;
  for (const auto& j : doc.at("records")) {
    IncidentRecord r;
    r.incident_id = j.at("incident_id");
    r.provider = j.at("provider");
    for (const auto& s : j.at("services")) r.services.insert(s.get<std::string>());
    r.title = j.at("title");
    const auto level = impact_level_from_name(j.at("impact").get<std::string>());
    if (!level) throw std::runtime_error("bad impact in expected.json");
    r.impact = {*level, j.at("severity").get<int>()};
    r.impact_color = j.at("impact_color");
    r.start = ts(j.at("start"));
    if (!j.at("end").is_null()) r.end = ts(j.at("end"));
    for (auto s : kAllStages) {
      const auto& v = j.at("stage_times").at(std::string(stage_name(s)));
      if (!v.is_null()) r.stage_time(s) = ts(v);
    }
    for (const auto& u : j.at("updates")) {
      r.updates.push_back({*stage_from_name(u.at("stage").get<std::string>()), ts(u.at("at")),
                           u.at("body").get<std::string>()});
    }
    if (!j.at("source_url").is_null()) r.source_url = j.at("source_url").get<std::string>();
    out.records.push_back(std::move(r));
  }
  for (const auto& m : doc.at("malformed_pages")) {
    out.malformed.emplace_back(m.at("provider"), m.at("file"));
  }
  for (const auto& [_, n] : doc.at("pages").items()) out.page_count += n.get<std::size_t>();
  return out;
}

std::vector<std::string> diff_records(const std::vector<IncidentRecord>& got,
                                      const std::vector<IncidentRecord>& want) {
  std::vector<std::string> out;
  if (got.size() != want.size()) {
    out.push_back("record count " + std::to_string(got.size()) + " != " + std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
    const auto& g = got[i];
    const auto& w = want[i];
    if (g == w) continue;
    std::ostringstream s;
    s << "record " << i << " (" << w.incident_id << "):";
    if (g.incident_id != w.incident_id) s << " id " << g.incident_id;
    if (g.services != w.services) {
      s << " services [";
      for (const auto& x : g.services) s << x << ' ';
      s << "]";
    }
    if (g.title != w.title) s << " title '" << g.title << "'";
    if (g.impact != w.impact) s << " impact";
    if (g.impact_color != w.impact_color) s << " color " << g.impact_color;
    if (g.start != w.start) s << " start " << g.start.iso() << " want " << w.start.iso();
    if (g.end != w.end) s << " end " << show(g.end) << " want " << show(w.end);
    if (g.stage_times != w.stage_times) s << " stage_times";
    if (g.updates != w.updates) s << " updates(" << g.updates.size() << ")";
    if (g.source_url != w.source_url) s << " url " << g.source_url.value_or("(none)");
    out.push_back(s.str());
  }
  return out;
}

}  // namespace fails::testing
