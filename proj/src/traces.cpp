#include "vrstream/traces.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vrstream/error.hpp"
#include "vrstream/rng.hpp"

namespace vrstream {

namespace {

std::set<int> fov_block_tiles(int center_row, int center_col, int fov_block, int grid_rows,
                              int grid_cols) {
    std::set<int> tiles;
    int half_lo = (fov_block - 1) / 2;
    for (int dr = -half_lo; dr < fov_block - half_lo; ++dr) {
        int r = center_row + dr;
        if (r < 0 || r >= grid_rows) continue; // clipped at the poles
        for (int dc = -half_lo; dc < fov_block - half_lo; ++dc) {
            int c = ((center_col + dc) % grid_cols + grid_cols) % grid_cols; // azimuth wrap
            tiles.insert(r * grid_cols + c);
        }
    }
    return tiles;
}

} // namespace

std::vector<fov_trace> generate_traces(int n_users, int n_videos, int chunks, int grid_rows,
                                       int grid_cols, int fov_block, int walk_step,
                                       std::uint64_t seed) {
    if (n_users < 1 || n_videos < 1) throw std::invalid_argument("need users and videos");
    if (chunks < 1) throw std::invalid_argument("need at least one chunk");
    if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("bad grid");
    if (fov_block < 1 || fov_block > std::min(grid_rows, grid_cols) * 2)
        throw std::invalid_argument("bad FoV block size");
    if (walk_step < 0) throw std::invalid_argument("walk step must be non-negative");

    std::vector<fov_trace> traces;
    traces.reserve(static_cast<std::size_t>(n_users) * n_videos);
    for (int u = 0; u < n_users; ++u)
        for (int v = 0; v < n_videos; ++v) {
            rng gen(mix_seed(seed, static_cast<std::uint64_t>(u) * 1000003ull +
                                       static_cast<std::uint64_t>(v)));
            fov_trace t;
            t.user_id = u;
            t.video_id = v;
            t.fov.resize(static_cast<std::size_t>(chunks));
            int row = static_cast<int>(gen.below(static_cast<std::uint64_t>(grid_rows)));
            int col = static_cast<int>(gen.below(static_cast<std::uint64_t>(grid_cols)));
            for (int c = 0; c < chunks; ++c) {
                t.fov[static_cast<std::size_t>(c)] =
                    fov_block_tiles(row, col, fov_block, grid_rows, grid_cols);
                int span = 2 * walk_step + 1;
                int dr = static_cast<int>(gen.below(static_cast<std::uint64_t>(span))) - walk_step;
                int dc = static_cast<int>(gen.below(static_cast<std::uint64_t>(span))) - walk_step;
                row = std::clamp(row + dr, 0, grid_rows - 1);
                col = ((col + dc) % grid_cols + grid_cols) % grid_cols;
            }
            traces.push_back(std::move(t));
        }
    return traces;
}

void save_traces_csv(const std::string& path, const std::vector<fov_trace>& traces) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write traces: " + path);
    out << "user,video,chunk,tile\n";
    for (const auto& t : traces)
        for (int c = 1; c <= t.chunks(); ++c)
            for (int j : t.fov_of_chunk(c))
                out << t.user_id << ',' << t.video_id << ',' << c << ',' << j << '\n';
    if (!out) throw io_error("short write on traces: " + path);
}

std::vector<fov_trace> load_traces_csv(const std::string& path, int chunks, int tile_count) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open traces: " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "user,video,chunk,tile")
        throw parse_error(path + ":1: bad header, expected user,video,chunk,tile");

    std::map<std::pair<int, int>, fov_trace> by_key; // (user, video) -> trace
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        long long field[4];
        char sep = ',';
        bool ok = true;
        for (int i = 0; i < 4 && ok; ++i) {
            if (!(row >> field[i])) ok = false;
            if (ok && i < 3 && !(row >> sep && sep == ',')) ok = false;
        }
        std::string rest;
        if (ok && (row >> rest) && !rest.empty()) ok = false;
        if (!ok)
            throw parse_error(path + ":" + std::to_string(line_no) +
                              ": expected four comma-separated integers");
        int user = static_cast<int>(field[0]);
        int video = static_cast<int>(field[1]);
        int chunk = static_cast<int>(field[2]);
        int tile = static_cast<int>(field[3]);
        if (chunk < 1 || chunk > chunks)
            throw parse_error(path + ":" + std::to_string(line_no) + ": chunk " +
                              std::to_string(chunk) + " outside [1, " + std::to_string(chunks) + "]");
        if (tile < 0 || tile >= tile_count)
            throw parse_error(path + ":" + std::to_string(line_no) + ": tile " +
                              std::to_string(tile) + " outside [0, " + std::to_string(tile_count) +
                              ")");
        auto& t = by_key[{user, video}];
        if (t.fov.empty()) {
            t.user_id = user;
            t.video_id = video;
            t.fov.resize(static_cast<std::size_t>(chunks));
        }
        t.fov[static_cast<std::size_t>(chunk - 1)].insert(tile);
    }
    std::vector<fov_trace> traces;
    traces.reserve(by_key.size());
    for (auto& [key, t] : by_key) traces.push_back(std::move(t));
    return traces;
}

std::pair<std::vector<fov_trace>, std::vector<fov_trace>>
split_traces(const std::vector<fov_trace>& traces, double train_fraction, std::uint64_t seed) {
    if (traces.empty()) throw data_error("no traces to split");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");

    std::vector<int> users;
    for (const auto& t : traces)
        if (std::find(users.begin(), users.end(), t.user_id) == users.end())
            users.push_back(t.user_id);
    std::sort(users.begin(), users.end());
    if (users.size() < 2) throw data_error("need at least two distinct users to split");

    rng gen(mix_seed(seed, 0x51117ull));
    for (std::size_t i = users.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(gen.below(i + 1));
        std::swap(users[i], users[j]);
    }
    std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(users.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, users.size() - 1);
    std::set<int> train_users(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(n_train));

    std::pair<std::vector<fov_trace>, std::vector<fov_trace>> out;
    for (const auto& t : traces)
        (train_users.count(t.user_id) ? out.first : out.second).push_back(t);

    std::map<int, std::pair<int, int>> per_video; // video -> (train, test)
    for (const auto& t : out.first) ++per_video[t.video_id].first;
    for (const auto& t : out.second) ++per_video[t.video_id].second;
    for (const auto& [video, counts] : per_video)
        if (counts.first == 0 || counts.second == 0)
            throw data_error("video " + std::to_string(video) +
                             " lacks traces on one side of the split");
    return out;
}

} // namespace vrstream
