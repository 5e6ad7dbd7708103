#pragma once

#include <filesystem>
#include <iosfwd>

#include "powerwatch/scoring.hpp"

namespace powerwatch {

// Score snapshot format:
//
//   address,score,probe_count
//   24.0.0.1,0.8123,412
//   ...
//   # end rows=<n>
//
// Rows are sorted by address. Scores are written in shortest round-trip
// form, so a restore reproduces every value bit for bit. The trailer lets a
// reader tell a complete file from a truncated one.
void snapshot_scores(const ScoreStore& store, std::ostream& out);
void snapshot_scores(const ScoreStore& store, const std::filesystem::path& path);

// Throws RestoreError with the offending line number.
ScoreStore restore_scores(std::istream& in, double alpha = ScoreStore::kDefaultAlpha,
                          double initial_score = ScoreStore::kDefaultInitialScore);
ScoreStore restore_scores(const std::filesystem::path& path,
                          double alpha = ScoreStore::kDefaultAlpha,
                          double initial_score = ScoreStore::kDefaultInitialScore);

}  // namespace powerwatch
