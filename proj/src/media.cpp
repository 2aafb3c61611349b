#include "vrstream/media.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "vrstream/error.hpp"
#include "vrstream/rng.hpp"

namespace vrstream {

double quality_ladder::mean_rate_bps() const {
    if (rates_bps.empty()) throw std::invalid_argument("ladder has no levels");
    double s = 0.0;
    for (double r : rates_bps) s += r;
    return s / static_cast<double>(rates_bps.size());
}

void quality_ladder::validate() const {
    if (rates_bps.empty()) throw std::invalid_argument("ladder must have at least one level");
    for (std::size_t i = 0; i < rates_bps.size(); ++i) {
        if (!(rates_bps[i] > 0.0))
            throw std::invalid_argument("ladder rates must be positive");
        if (i > 0 && !(rates_bps[i] > rates_bps[i - 1]))
            throw std::invalid_argument("ladder rates must be strictly increasing");
    }
}

double video_manifest::size_bits(int c, int j, int q) const {
    if (c < 1 || c > chunks) throw std::out_of_range("chunk index out of range");
    if (j < 0 || j >= tile_count()) throw std::out_of_range("tile index out of range");
    if (q < 0 || q >= ladder.levels()) throw std::out_of_range("quality index out of range");
    if (!has_sizes()) throw std::invalid_argument("manifest has no sizes");
    return sizes_bits[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(j)]
                     [static_cast<std::size_t>(q)];
}

double video_manifest::size_delta_bits(int c, int j, int q) const {
    double x = size_bits(c, j, q); // validates all three indices
    return q == 0 ? x : x - size_bits(c, j, q - 1);
}

void video_manifest::validate() const {
    if (chunks < 1) throw std::invalid_argument("manifest needs at least one chunk");
    if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("bad tile grid");
    if (!(chunk_duration_s > 0.0)) throw std::invalid_argument("chunk duration must be positive");
    ladder.validate();
    if (!has_sizes()) return;
    if (static_cast<int>(sizes_bits.size()) != chunks)
        throw std::invalid_argument("sizes chunk dimension mismatch");
    for (const auto& per_tile : sizes_bits) {
        if (static_cast<int>(per_tile.size()) != tile_count())
            throw std::invalid_argument("sizes tile dimension mismatch");
        for (const auto& per_q : per_tile) {
            if (static_cast<int>(per_q.size()) != ladder.levels())
                throw std::invalid_argument("sizes quality dimension mismatch");
            for (std::size_t q = 0; q < per_q.size(); ++q) {
                if (!(per_q[q] > 0.0)) throw std::invalid_argument("tile sizes must be positive");
                if (q > 0 && !(per_q[q] > per_q[q - 1]))
                    throw std::invalid_argument("tile sizes must be strictly increasing in quality");
            }
        }
    }
}

double playback_timeline::deadline_s(int c) const {
    if (c < 1 || c > chunks) throw std::out_of_range("chunk index out of range");
    return startup_delay_s + (c - 1) * chunk_duration_s - margin_s;
}

double playback_timeline::lower_deadline_s(int c) const {
    if (c < 1 || c > chunks) throw std::out_of_range("chunk index out of range");
    return c == 1 ? 0.0 : deadline_s(c - 1);
}

void playback_timeline::validate() const {
    if (chunks < 1) throw std::invalid_argument("timeline needs at least one chunk");
    if (!(chunk_duration_s > 0.0)) throw std::invalid_argument("chunk duration must be positive");
    if (margin_s < 0.0) throw std::invalid_argument("margin must be non-negative");
    if (!(deadline_s(1) > 0.0))
        throw std::invalid_argument("first deadline must be positive (startup delay too small)");
    for (int c = 1; c <= chunks; ++c)
        if (!(lower_deadline_s(c) < deadline_s(c)))
            throw std::invalid_argument("lower deadline must precede deadline");
}

const std::set<int>& fov_trace::fov_of_chunk(int c) const {
    if (c < 1 || c > chunks()) throw std::out_of_range("chunk index out of range");
    return fov[static_cast<std::size_t>(c - 1)];
}

double fov_probability_map::at(int c, int j) const {
    if (c < 1 || c > static_cast<int>(pr.size())) throw std::out_of_range("chunk index out of range");
    const auto& row = pr[static_cast<std::size_t>(c - 1)];
    if (j < 0 || j >= static_cast<int>(row.size())) throw std::out_of_range("tile index out of range");
    return row[static_cast<std::size_t>(j)];
}

double fov_probability_map::expected_fov_size(int c) const {
    if (c < 1 || c > static_cast<int>(pr.size())) throw std::out_of_range("chunk index out of range");
    double s = 0.0;
    for (double p : pr[static_cast<std::size_t>(c - 1)]) s += p;
    return s;
}

double size_delta(const video_manifest& m, int c, int j, int q) {
    return m.size_delta_bits(c, j, q);
}

std::set<int> reduce_grid(const std::set<int>& fine_fov, int fine_rows, int fine_cols) {
    if (fine_rows < 2 || fine_cols < 2 || fine_rows % 2 != 0 || fine_cols % 2 != 0)
        throw std::invalid_argument("fine grid dimensions must be even and >= 2");
    const int coarse_cols = fine_cols / 2;
    std::set<int> reduced;
    for (int idx : fine_fov) {
        if (idx < 0 || idx >= fine_rows * fine_cols)
            throw std::out_of_range("fine tile index out of grid");
        int r = idx / fine_cols;
        int c = idx % fine_cols;
        reduced.insert((r / 2) * coarse_cols + c / 2);
    }
    return reduced;
}

fov_probability_map estimate_fov_probability(const std::vector<fov_trace>& traces,
                                             int tile_count) {
    if (traces.empty()) throw std::invalid_argument("need at least one trace");
    if (tile_count < 1) throw std::invalid_argument("tile count must be positive");
    const int video = traces.front().video_id;
    const int chunks = traces.front().chunks();
    for (const auto& t : traces) {
        if (t.video_id != video) throw std::invalid_argument("traces span multiple videos");
        if (t.chunks() != chunks) throw std::invalid_argument("traces have differing chunk counts");
    }
    fov_probability_map map;
    map.pr.assign(static_cast<std::size_t>(chunks),
                  std::vector<double>(static_cast<std::size_t>(tile_count), 0.0));
    for (const auto& t : traces)
        for (int c = 1; c <= chunks; ++c)
            for (int j : t.fov_of_chunk(c)) {
                if (j < 0 || j >= tile_count) throw std::out_of_range("trace tile index out of grid");
                map.pr[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(j)] += 1.0;
            }
    const double n = static_cast<double>(traces.size());
    for (auto& row : map.pr)
        for (double& p : row) p /= n;
    return map;
}

double afer_bps(const quality_ladder& ladder, double fov_tile_count) {
    if (fov_tile_count < 0.0) throw std::invalid_argument("FoV tile count must be non-negative");
    return fov_tile_count * ladder.mean_rate_bps();
}

void ensure_sizes(video_manifest& m, double vbr_jitter, std::uint64_t seed) {
    if (m.has_sizes()) return;
    if (vbr_jitter < 0.0 || vbr_jitter >= 1.0)
        throw std::invalid_argument("vbr jitter must lie in [0, 1)");
    m.ladder.validate();
    rng gen(mix_seed(seed, static_cast<std::uint64_t>(m.video_id)));
    const int levels = m.ladder.levels();
    m.sizes_bits.assign(static_cast<std::size_t>(m.chunks),
                        std::vector<std::vector<double>>(
                            static_cast<std::size_t>(m.tile_count()),
                            std::vector<double>(static_cast<std::size_t>(levels), 0.0)));
    for (auto& per_tile : m.sizes_bits)
        for (auto& per_q : per_tile) {
            for (int q = 0; q < levels; ++q) {
                double eps = gen.uniform(-vbr_jitter, vbr_jitter);
                double bits = m.ladder.rates_bps[static_cast<std::size_t>(q)] *
                              m.chunk_duration_s * (1.0 + eps);
                per_q[static_cast<std::size_t>(q)] = std::max(1.0, std::round(bits));
            }
            std::sort(per_q.begin(), per_q.end());
            for (int q = 1; q < levels; ++q)
                if (per_q[static_cast<std::size_t>(q)] <= per_q[static_cast<std::size_t>(q - 1)])
                    per_q[static_cast<std::size_t>(q)] = per_q[static_cast<std::size_t>(q - 1)] + 1.0;
        }
    m.validate();
}

namespace {

using nlohmann::json;

video_manifest manifest_from_json(const json& doc) {
    video_manifest m;
    try {
        m.video_id = doc.at("video_id").get<int>();
        m.chunks = doc.at("C").get<int>();
        m.chunk_duration_s = doc.at("L_seconds").get<double>();
        const auto& grid = doc.at("grid");
        if (!grid.is_array() || grid.size() != 2)
            throw parse_error("manifest: grid must be [rows, cols]");
        m.grid_rows = grid[0].get<int>();
        m.grid_cols = grid[1].get<int>();
        m.ladder.rates_bps = doc.at("ladder_bps").get<std::vector<double>>();
        if (doc.contains("sizes_bits"))
            m.sizes_bits = doc.at("sizes_bits")
                               .get<std::vector<std::vector<std::vector<double>>>>();
    } catch (const json::exception& e) {
        throw parse_error(std::string("manifest: ") + e.what());
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("manifest: ") + e.what());
    }
    return m;
}

} // namespace

video_manifest manifest_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("manifest: ") + e.what());
    }
    return manifest_from_json(doc);
}

std::string manifest_to_json_text(const video_manifest& m, bool include_sizes) {
    json doc;
    doc["video_id"] = m.video_id;
    doc["C"] = m.chunks;
    doc["L_seconds"] = m.chunk_duration_s;
    doc["grid"] = {m.grid_rows, m.grid_cols};
    doc["ladder_bps"] = m.ladder.rates_bps;
    if (include_sizes && m.has_sizes()) doc["sizes_bits"] = m.sizes_bits;
    return doc.dump(2);
}

video_manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return manifest_from_json_text(ss.str());
}

void save_manifest(const std::string& path, const video_manifest& m, bool include_sizes) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write manifest: " + path);
    out << manifest_to_json_text(m, include_sizes) << '\n';
}

} // namespace vrstream
