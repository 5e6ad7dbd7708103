#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "powerwatch/detector.hpp"
#include "powerwatch/model.hpp"

namespace powerwatch {

// One line of the event log, a self-contained JSON object:
//   {"tick":2010,"county":"C004","kind":"open","class":"power","gap":0.71,
//    "tau":0.15,"watch_size":249}
// kind is open, classify (class upgraded) or close.
struct EventRecord {
  Tick tick = 0;
  County county;
  std::string kind;
  Classification cls = Classification::Unclassified;
  double gap = 0.0;
  double tau = 0.0;
  std::size_t watch_size = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

std::string format_event_record(const EventRecord& r);
// Throws ParseError.
EventRecord parse_event_record(std::string_view line);

// Builds the log records (zero, one or two) for a tracker transition.
std::vector<EventRecord> records_for(const EventTransition& tr, const ScanAssessment& a, double tau);

// Append-only JSON-lines sink. Writes are serialized.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path, bool append = false);
  void write(const EventRecord& r);
  void flush();

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

// Replays a log into events. Events never closed are returned open.
std::vector<OutageEvent> read_event_log(const std::filesystem::path& path);
std::vector<OutageEvent> replay_event_records(const std::vector<EventRecord>& records);

}  // namespace powerwatch
