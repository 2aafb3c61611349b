#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace vrstream {

// Encoding-rate ladder shared by all tiles of a video.
struct quality_ladder {
    std::vector<double> rates_bps; // strictly increasing, one entry per level

    int levels() const { return static_cast<int>(rates_bps.size()); }
    double mean_rate_bps() const;
    void validate() const; // throws std::invalid_argument
};

// Per-video chunk/tile geometry plus VBR sizes.
// Chunks are 1-based in every public accessor (matching the on-disk trace
// convention); tiles are 0-based row-major; quality levels are 0-based.
struct video_manifest {
    int video_id = 0;
    int chunks = 0;             // C
    double chunk_duration_s = 1.0; // L
    int grid_rows = 5;
    int grid_cols = 10;
    quality_ladder ladder;
    // sizes_bits[c-1][j][q]; may be empty until ensure_sizes() runs
    std::vector<std::vector<std::vector<double>>> sizes_bits;

    int tile_count() const { return grid_rows * grid_cols; }
    bool has_sizes() const { return !sizes_bits.empty(); }
    double size_bits(int c, int j, int q) const;       // X
    double size_delta_bits(int c, int j, int q) const; // Y: X(0) at q=0, else X(q)-X(q-1)
    void validate() const; // throws std::invalid_argument
};

// Startup/margin bookkeeping that fixes every chunk's download window.
struct playback_timeline {
    double startup_delay_s = 2.0; // S
    double margin_s = 0.2;        // m
    double chunk_duration_s = 1.0; // L
    int chunks = 0;               // C

    double deadline_s(int c) const;       // S + (c-1)L - m
    double lower_deadline_s(int c) const; // deadline(c-1); 0 for c=1
    void validate() const;
};

// Ground-truth viewed tiles of one user for one video.
struct fov_trace {
    int user_id = 0;
    int video_id = 0;
    std::vector<std::set<int>> fov; // index c-1 -> tile set

    int chunks() const { return static_cast<int>(fov.size()); }
    const std::set<int>& fov_of_chunk(int c) const;
};

// Population estimate pr[c][j] that tile j is viewed during chunk c.
struct fov_probability_map {
    std::vector<std::vector<double>> pr; // [c-1][j]

    double at(int c, int j) const;
    double expected_fov_size(int c) const; // sum_j pr[c][j]
};

double size_delta(const video_manifest& m, int c, int j, int q);

// Collapse a fine FoV grid onto a half-resolution grid: a coarse tile is
// viewed iff any of its four fine tiles is.
std::set<int> reduce_grid(const std::set<int>& fine_fov, int fine_rows, int fine_cols);

// pr[c][j] = fraction of traces containing j in chunk c. All traces must be
// for the same video and chunk count; tile_count bounds the index space.
fov_probability_map estimate_fov_probability(const std::vector<fov_trace>& traces,
                                             int tile_count);

// Average FoV encoding rate target: K tiles times the mean ladder rate.
double afer_bps(const quality_ladder& ladder, double fov_tile_count);

// Draw VBR sizes X = round(rate * L * (1 + jitter)), re-sorted and bumped to
// keep strict monotonicity in q; integral bit counts keep the telescoping
// delta identity exact. No-op when sizes already present.
void ensure_sizes(video_manifest& m, double vbr_jitter, std::uint64_t seed);

// Manifest JSON: keys video_id, C, L_seconds, grid, ladder_bps, sizes_bits
// (optional). Parse failures throw parse_error.
video_manifest manifest_from_json_text(const std::string& text);
std::string manifest_to_json_text(const video_manifest& m, bool include_sizes);
video_manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const video_manifest& m, bool include_sizes);

} // namespace vrstream
