#include "powerwatch/eventlog.hpp"

#include <map>

#include <json.hpp>

#include "powerwatch/errors.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

using nlohmann::ordered_json;

std::string format_event_record(const EventRecord& r) {
  ordered_json j;
  j["tick"] = r.tick;
  j["county"] = r.county;
  j["kind"] = r.kind;
  j["class"] = std::string(to_string(r.cls));
  j["gap"] = r.gap;
  j["tau"] = r.tau;
  j["watch_size"] = r.watch_size;
  return j.dump();
}

EventRecord parse_event_record(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("event record: ") + e.what());
  }
  try {
    EventRecord r;
    r.tick = j.at("tick").get<Tick>();
    r.county = j.at("county").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    if (r.kind != "open" && r.kind != "classify" && r.kind != "close") {
      throw ParseError("event record: unknown kind '" + r.kind + "'");
    }
    auto cls = classification_from_string(j.at("class").get<std::string>());
    if (!cls) throw ParseError("event record: unknown class");
    r.cls = *cls;
    r.gap = j.at("gap").get<double>();
    r.tau = j.at("tau").get<double>();
    r.watch_size = j.at("watch_size").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("event record: ") + e.what());
  }
}

std::vector<EventRecord> records_for(const EventTransition& tr, const ScanAssessment& a, double tau) {
  std::vector<EventRecord> out;
  if (!tr.event) return out;
  const auto& ev = *tr.event;
  auto make = [&](const char* kind) {
    return EventRecord{a.tick, a.county, kind, ev.cls, a.gap, tau, a.watch_size};
  };
  switch (tr.kind) {
    case EventTransition::Kind::Open: out.push_back(make("open")); break;
    case EventTransition::Kind::Sustain:
      if (tr.reclassified) out.push_back(make("classify"));
      break;
    case EventTransition::Kind::Close: out.push_back(make("close")); break;
    case EventTransition::Kind::None: break;
  }
  return out;
}

EventLog::EventLog(const std::filesystem::path& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc) {
  if (!out_) throw Error("cannot open event log " + path.string());
}

void EventLog::write(const EventRecord& r) {
  std::lock_guard lock(mutex_);
  out_ << format_event_record(r) << '\n';
}

void EventLog::flush() {
  std::lock_guard lock(mutex_);
  out_.flush();
}

std::vector<OutageEvent> replay_event_records(const std::vector<EventRecord>& records) {
  std::vector<OutageEvent> events;
  std::map<std::pair<County, double>, std::size_t> open;
  for (const auto& r : records) {
    const auto key = std::pair{r.county, r.tau};
    auto it = open.find(key);
    if (r.kind == "open") {
      if (it != open.end()) {
        throw ParseError("event log: second open for " + r.county + " before close");
      }
      OutageEvent ev;
      ev.county = r.county;
      ev.tau = r.tau;
      ev.cls = r.cls;
      ev.start_tick = r.tick;
      ev.peak_gap = r.gap;
      open.emplace(key, events.size());
      events.push_back(std::move(ev));
      continue;
    }
    if (it == open.end()) {
      throw ParseError("event log: " + r.kind + " without open for " + r.county);
    }
    auto& ev = events[it->second];
    if (r.kind == "classify") {
      ev.cls = r.cls;
      ev.peak_gap = std::max(ev.peak_gap, r.gap);
    } else {
      ev.end_tick = r.tick;
      open.erase(it);
    }
  }
  return events;
}

std::vector<OutageEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event log " + path.string());
  std::vector<EventRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      records.push_back(parse_event_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return replay_event_records(records);
}

}  // namespace powerwatch
