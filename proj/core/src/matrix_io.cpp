#include "dyncs/matrix_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dyncs {

namespace {
constexpr std::uint64_t kFrameMagic = 0x44594e4353465230ULL; // "DYNCSFR0"
}

Mat load_dense_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dense_matrix: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue;
        if (!rows.empty() && rows.front().size() != row.size())
            throw std::runtime_error("load_dense_matrix: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_dense_matrix: no data in " + path);
    Mat a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return a;
}

void save_dense_matrix(const std::string& path, const Mat& a) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dense_matrix: cannot open " + path);
    out.precision(17);
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) out << (j ? " " : "") << a(i, j);
        out << "\n";
    }
}

Vec load_vector(const std::string& path) {
    Mat a = load_dense_matrix(path);
    if (a.cols() == 1) return a.col(0);
    if (a.rows() == 1) return a.row(0).transpose();
    throw std::runtime_error("load_vector: " + path + " is not a vector");
}

void save_frames(const std::string& path, const std::vector<Mat>& frames) {
    if (frames.empty()) throw std::invalid_argument("save_frames: empty sequence");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_frames: cannot open " + path);
    const std::uint64_t magic = kFrameMagic;
    const std::uint64_t m1 = static_cast<std::uint64_t>(frames.front().rows());
    const std::uint64_t m2 = static_cast<std::uint64_t>(frames.front().cols());
    const std::uint64_t count = frames.size();
    const std::uint64_t dtype = 8; // bytes per sample, IEEE double
    out.write(reinterpret_cast<const char*>(&magic), 8);
    out.write(reinterpret_cast<const char*>(&m1), 8);
    out.write(reinterpret_cast<const char*>(&m2), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(&dtype), 8);
    for (const Mat& f : frames) {
        if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols())
            throw std::invalid_argument("save_frames: inconsistent dims");
        for (Index r = 0; r < f.rows(); ++r)
            for (Index c = 0; c < f.cols(); ++c) {
                const double v = f(r, c);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
    }
}

std::vector<Mat> load_frames(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_frames: cannot open " + path);
    std::uint64_t magic = 0, m1 = 0, m2 = 0, count = 0, dtype = 0;
    in.read(reinterpret_cast<char*>(&magic), 8);
    in.read(reinterpret_cast<char*>(&m1), 8);
    in.read(reinterpret_cast<char*>(&m2), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&dtype), 8);
    if (magic != kFrameMagic || dtype != 8) throw std::runtime_error("load_frames: bad header in " + path);
    std::vector<Mat> frames;
    for (std::uint64_t k = 0; k < count; ++k) {
        Mat f(static_cast<Index>(m1), static_cast<Index>(m2));
        for (Index r = 0; r < f.rows(); ++r)
            for (Index c = 0; c < f.cols(); ++c) {
                double v;
                in.read(reinterpret_cast<char*>(&v), 8);
                f(r, c) = v;
            }
        if (!in) throw std::runtime_error("load_frames: truncated file " + path);
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace dyncs
