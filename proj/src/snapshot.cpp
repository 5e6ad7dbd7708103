#include "powerwatch/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "powerwatch/errors.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

namespace {
constexpr std::string_view kHeader = "address,score,probe_count";
constexpr std::string_view kTrailer = "# end rows=";
}  // namespace

void snapshot_scores(const ScoreStore& store, std::ostream& out) {
  std::vector<std::pair<Ipv4Address, ScoreRecord>> rows(store.records().begin(),
                                                        store.records().end());
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  out << kHeader << '\n';
  for (const auto& [addr, rec] : rows) {
    out << addr.to_string() << ',' << text::exact(rec.score) << ',' << rec.probe_count << '\n';
  }
  out << kTrailer << rows.size() << '\n';
}

void snapshot_scores(const ScoreStore& store, const std::filesystem::path& path) {
  // Write-then-rename so a crash never leaves a half-written snapshot behind.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write snapshot " + tmp.string());
    snapshot_scores(store, out);
    if (!out) throw Error("failed writing snapshot " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ScoreStore restore_scores(std::istream& in, double alpha, double initial_score) {
  ScoreStore store(alpha, initial_score);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw RestoreError("missing header", 1);
  ++line_no;
  if (text::trim(line) != kHeader) throw RestoreError("bad header", line_no);

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.starts_with(kTrailer)) {
      auto n = text::parse_int<std::size_t>(t.substr(kTrailer.size()));
      if (!n || *n != rows) throw RestoreError("row count does not match trailer", line_no);
      if (std::getline(in, line) && !text::trim(line).empty()) {
        throw RestoreError("content after trailer", line_no + 1);
      }
      return store;
    }
    const auto f = text::split(t, ',');
    if (f.size() != 3) throw RestoreError("expected address,score,probe_count", line_no);
    auto addr = Ipv4Address::parse(f[0]);
    auto score = text::parse_double(f[1]);
    auto count = text::parse_int<std::uint64_t>(f[2]);
    if (!addr) throw RestoreError("malformed address", line_no);
    if (!score || !(*score >= 0.0 && *score <= 1.0)) throw RestoreError("score outside [0,1]", line_no);
    if (!count) throw RestoreError("malformed probe_count", line_no);
    store.set(*addr, ScoreRecord{*score, *count});
    ++rows;
  }
  throw RestoreError("truncated snapshot (no trailer)", line_no + 1);
}

ScoreStore restore_scores(const std::filesystem::path& path, double alpha, double initial_score) {
  std::ifstream in(path);
  if (!in) throw RestoreError("cannot open " + path.string(), 0);
  return restore_scores(in, alpha, initial_score);
}

}  // namespace powerwatch
