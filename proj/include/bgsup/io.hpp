#pragma once

// File formats:
//   manifest      JSON {"height", "width", "bit_depth", "frames": [paths...]}
//                 with paths relative to the manifest's directory.
//   raw matrix    u64 rows, u64 cols, then rows*cols f64 in column-major
//                 order, all little-endian.
//   trace         CSV "iter,residual,rank_B,nnz_X,mu".
//   detections    JSON [{"frame", "x", "y", "w", "h", "score"}, ...]
//   annotations   JSON [{"frame", "x", "y", "w", "h"}, ...]

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/metrics.hpp"
#include "bgsup/pgm.hpp"
#include "bgsup/solver.hpp"

namespace bgsup {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline json parse_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": malformed JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Manifest and frame loading

struct Manifest {
    std::size_t height = 0;
    std::size_t width = 0;
    int bit_depth = 8;
    std::vector<fs::path> frames;  // resolved paths
};

inline Manifest parse_manifest(const json& doc, const fs::path& base_dir) {
    Manifest m;
    try {
        m.height = doc.at("height").get<std::size_t>();
        m.width = doc.at("width").get<std::size_t>();
        m.bit_depth = doc.at("bit_depth").get<int>();
        for (const auto& f : doc.at("frames")) {
            fs::path p = f.get<std::string>();
            m.frames.push_back(p.is_absolute() ? p : base_dir / p);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("manifest: ") + e.what());
    }
    if (m.height == 0 || m.width == 0) throw InputError("manifest: zero frame dimension");
    if (m.bit_depth != 8 && m.bit_depth != 16) throw InputError("manifest: bit_depth must be 8 or 16");
    if (m.frames.size() < 2) throw InputError("manifest: need at least 2 frames");
    return m;
}

inline Manifest read_manifest(const fs::path& path) {
    return parse_manifest(parse_json_file(path), path.parent_path());
}

inline Frame load_frame(const fs::path& path, const Manifest& m) {
    const GrayImage img = read_pgm(path);
    if (img.height != m.height || img.width != m.width) {
        throw InputError(path.string() + ": frame is " + std::to_string(img.height) + "x" +
                         std::to_string(img.width) + ", manifest says " +
                         std::to_string(m.height) + "x" + std::to_string(m.width));
    }
    if (img.bit_depth() != m.bit_depth) {
        throw InputError(path.string() + ": " + std::to_string(img.bit_depth()) +
                         "-bit samples, manifest says " + std::to_string(m.bit_depth));
    }
    try {
        return normalize(img.samples, m.bit_depth, img.height, img.width);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

/// Frames in manifest order.
inline FrameStack load_frames(const Manifest& m) {
    std::vector<Frame> frames;
    frames.reserve(m.frames.size());
    for (const auto& p : m.frames) frames.push_back(load_frame(p, m));
    return FrameStack(std::move(frames));
}

// ---------------------------------------------------------------------------
// Raw matrix dump

namespace detail {

template <typename T>
void append_le(std::string& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T read_le(const std::string& in, std::size_t offset) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= std::uint64_t{static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])}
                << (8 * i);
    }
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace detail

inline std::string encode_raw_matrix(const Matrix& m) {
    std::string out;
    out.reserve(16 + static_cast<std::size_t>(m.size()) * 8);
    detail::append_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    detail::append_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    // Eigen's default storage is column-major.
    for (Eigen::Index i = 0; i < m.size(); ++i) detail::append_le<double>(out, m.data()[i]);
    return out;
}

inline Matrix decode_raw_matrix(const std::string& bytes, const std::string& what = "<memory>") {
    if (bytes.size() < 16) throw InputError(what + ": raw matrix header truncated");
    const auto rows = detail::read_le<std::uint64_t>(bytes, 0);
    const auto cols = detail::read_le<std::uint64_t>(bytes, 8);
    if (rows != 0 && cols > (bytes.size() - 16) / 8 / rows) {
        throw InputError(what + ": raw matrix payload truncated");
    }
    if (bytes.size() != 16 + rows * cols * 8) {
        throw InputError(what + ": raw matrix size does not match header");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = detail::read_le<double>(bytes, 16 + static_cast<std::size_t>(i) * 8);
    }
    return m;
}

inline void write_raw_matrix(const fs::path& path, const Matrix& m) {
    write_file(path, encode_raw_matrix(m));
}

inline Matrix read_raw_matrix(const fs::path& path) {
    return decode_raw_matrix(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Trace CSV

inline std::string format_trace_csv(const std::vector<IterationTrace>& trace) {
    std::ostringstream os;
    os << "iter,residual,rank_B,nnz_X,mu\n";
    os << std::setprecision(17);
    for (const auto& t : trace) {
        os << t.iter << ',' << t.residual << ',' << t.rank_b << ',' << t.nnz_x << ',' << t.mu
           << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Boxes, detections, reports

inline void check_box(const BoundingBox& b, const std::string& what) {
    if (b.w < 1 || b.h < 1) throw InputError(what + ": box width and height must be >= 1");
}

inline json to_json(const std::vector<Detection>& dets) {
    json arr = json::array();
    for (const auto& d : dets) {
        arr.push_back({{"frame", d.frame_index},
                       {"x", d.box.x},
                       {"y", d.box.y},
                       {"w", d.box.w},
                       {"h", d.box.h},
                       {"score", d.score}});
    }
    return arr;
}

inline std::vector<Detection> detections_from_json(const json& doc) {
    if (!doc.is_array()) throw InputError("detections: expected a JSON array");
    std::vector<Detection> out;
    try {
        for (const auto& e : doc) {
            Detection d;
            d.frame_index = e.at("frame").get<std::size_t>();
            d.box = {e.at("x").get<std::int64_t>(), e.at("y").get<std::int64_t>(),
                     e.at("w").get<std::int64_t>(), e.at("h").get<std::int64_t>()};
            d.score = e.at("score").get<double>();
            check_box(d.box, "detections");
            if (!(d.score >= 0.0 && d.score <= 1.0)) {
                throw InputError("detections: score must lie in [0, 1]");
            }
            out.push_back(d);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("detections: ") + e.what());
    }
    return out;
}

inline json to_json(const std::vector<GroundTruth>& gts) {
    json arr = json::array();
    for (const auto& g : gts) {
        arr.push_back({{"frame", g.frame_index},
                       {"x", g.box.x},
                       {"y", g.box.y},
                       {"w", g.box.w},
                       {"h", g.box.h}});
    }
    return arr;
}

inline std::vector<GroundTruth> annotations_from_json(const json& doc) {
    if (!doc.is_array()) throw InputError("annotations: expected a JSON array");
    std::vector<GroundTruth> out;
    try {
        for (const auto& e : doc) {
            GroundTruth g;
            g.frame_index = e.at("frame").get<std::size_t>();
            g.box = {e.at("x").get<std::int64_t>(), e.at("y").get<std::int64_t>(),
                     e.at("w").get<std::int64_t>(), e.at("h").get<std::int64_t>()};
            check_box(g.box, "annotations");
            out.push_back(g);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("annotations: ") + e.what());
    }
    return out;
}

inline json to_json(const EvalReport& r) {
    json curve = json::array();
    for (const auto& p : r.curve) curve.push_back({{"recall", p.recall}, {"precision", p.precision}});
    return {{"gt_count", r.gt_count},
            {"detection_count", r.detection_count},
            {"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"recall", r.recall},
            {"precision", r.precision},
            {"ap", r.ap},
            {"curve", curve}};
}

inline json to_json(const ResolvedConfig& c) {
    return {{"xi", c.xi},       {"gamma", c.gamma}, {"rho", c.rho},         {"mu0", c.mu0},
            {"mu_max", c.mu_max}, {"tol", c.tol},   {"max_iter", c.max_iter}};
}

inline void write_json(const fs::path& path, const json& doc) {
    write_file(path, doc.dump(2) + "\n");
}

}  // namespace bgsup
