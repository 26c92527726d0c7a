#pragma once

#include <string>
#include <vector>

#include "dyncs/types.hpp"

namespace dyncs {

/// Plain-text matrix: one whitespace-separated row per line. Blank lines and
/// lines starting with '#' are skipped.
Mat load_dense_matrix(const std::string& path);
void save_dense_matrix(const std::string& path, const Mat& a);

Vec load_vector(const std::string& path);

/// Binary frame container: magic, dims, frame count, dtype tag, then
/// row-major double frames.
void save_frames(const std::string& path, const std::vector<Mat>& frames);
std::vector<Mat> load_frames(const std::string& path);

} // namespace dyncs
