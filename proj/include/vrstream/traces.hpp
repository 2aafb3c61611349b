#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vrstream/media.hpp"

namespace vrstream {

// Synthetic head-movement traces: a random-walk viewport center on the tile
// grid (azimuth wraps across columns, elevation clamps at the poles) with a
// fov_block x fov_block viewed region around it. One trace per
// (user, video); deterministic under the seed.
std::vector<fov_trace> generate_traces(int n_users, int n_videos, int chunks, int grid_rows,
                                       int grid_cols, int fov_block, int walk_step,
                                       std::uint64_t seed);

// CSV schema: header "user,video,chunk,tile", integer fields, chunks
// 1-based, tiles 0-based row-major, one row per viewed tile.
void save_traces_csv(const std::string& path, const std::vector<fov_trace>& traces);

// Parses and validates against the expected geometry; malformed rows throw
// parse_error naming the line number.
std::vector<fov_trace> load_traces_csv(const std::string& path, int chunks, int tile_count);

// User-level split: distinct users are shuffled by the seed and the first
// round(train_fraction * n) go to training; every trace follows its user.
// Each video must keep at least one trace on both sides (data_error).
std::pair<std::vector<fov_trace>, std::vector<fov_trace>>
split_traces(const std::vector<fov_trace>& traces, double train_fraction, std::uint64_t seed);

} // namespace vrstream
