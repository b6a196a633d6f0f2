// Copyright 2026 The qfedsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "data.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>

namespace qfed {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.n_features = n_features;
    out.n_classes = n_classes;
    out.features.reserve(indices.size() * static_cast<std::size_t>(n_features));
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

void Dataset::validate() const {
    if (labels.empty()) {
        fail(ErrorCode::DataFormat, "dataset is empty");
    }
    if (features.size() != labels.size() * static_cast<std::size_t>(n_features)) {
        fail(ErrorCode::DataFormat, "feature matrix does not match label count");
    }
    for (int y : labels) {
        if (y < 0 || y >= n_classes) {
            fail(ErrorCode::DataFormat, "label " + std::to_string(y) + " outside 0.." +
                                            std::to_string(n_classes - 1));
        }
    }
    for (double v : features) {
        if (!std::isfinite(v)) {
            fail(ErrorCode::DataFormat, "non-finite feature value");
        }
    }
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t> &buf, std::size_t offset,
                        const std::filesystem::path &path) {
    if (offset + 4 > buf.size()) {
        fail(ErrorCode::DataFormat, path.string() + ": truncated header at byte " +
                                        std::to_string(offset));
    }
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void put_be32(std::ofstream &out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
}

} // namespace

Dataset load_idx(const std::filesystem::path &images, const std::filesystem::path &labels) {
    const auto img = read_file(images);
    const auto lab = read_file(labels);

    if (const auto magic = read_be32(img, 0, images); magic != 0x00000803U) {
        fail(ErrorCode::DataFormat, images.string() + ": bad magic at byte 0 (expected 0x00000803)");
    }
    if (const auto magic = read_be32(lab, 0, labels); magic != 0x00000801U) {
        fail(ErrorCode::DataFormat, labels.string() + ": bad magic at byte 0 (expected 0x00000801)");
    }
    const std::size_t n = read_be32(img, 4, images);
    const std::size_t rows = read_be32(img, 8, images);
    const std::size_t cols = read_be32(img, 12, images);
    const std::size_t n_labels = read_be32(lab, 4, labels);
    if (n != n_labels) {
        fail(ErrorCode::DataFormat, "count mismatch: " + std::to_string(n) + " images vs " +
                                        std::to_string(n_labels) + " labels (byte 4)");
    }
    const std::size_t width = rows * cols;
    if (img.size() < 16 + n * width) {
        fail(ErrorCode::DataFormat, images.string() + ": truncated payload at byte " +
                                        std::to_string(img.size()) + ", expected " +
                                        std::to_string(16 + n * width));
    }
    if (lab.size() < 8 + n) {
        fail(ErrorCode::DataFormat, labels.string() + ": truncated payload at byte " +
                                        std::to_string(lab.size()) + ", expected " +
                                        std::to_string(8 + n));
    }
    Dataset d;
    d.n_features = static_cast<int>(width);
    d.features.resize(n * width);
    for (std::size_t i = 0; i < n * width; ++i) {
        d.features[i] = img[16 + i] / 255.0;
    }
    d.labels.resize(n);
    int max_label = -1;
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = lab[8 + i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.n_classes = max_label + 1;
    d.validate();
    return d;
}

void write_idx(const std::filesystem::path &images, const std::filesystem::path &labels,
               std::uint32_t rows, std::uint32_t cols, std::span<const std::uint8_t> pixels,
               std::span<const std::uint8_t> label_bytes) {
    const std::size_t width = std::size_t{rows} * cols;
    if (width == 0 || pixels.size() % width != 0) {
        fail(ErrorCode::Shape, "pixel buffer is not a whole number of images");
    }
    std::ofstream img(images, std::ios::binary);
    std::ofstream lab(labels, std::ios::binary);
    if (!img || !lab) {
        fail(ErrorCode::Io, "cannot create IDX files");
    }
    put_be32(img, 0x00000803U);
    put_be32(img, static_cast<std::uint32_t>(pixels.size() / width));
    put_be32(img, rows);
    put_be32(img, cols);
    img.write(reinterpret_cast<const char *>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    put_be32(lab, 0x00000801U);
    put_be32(lab, static_cast<std::uint32_t>(label_bytes.size()));
    lab.write(reinterpret_cast<const char *>(label_bytes.data()),
              static_cast<std::streamsize>(label_bytes.size()));
}

namespace {

std::string trim_cell(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    s = s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(trim_cell(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

Dataset load_csv(const std::filesystem::path &path, int declared_classes) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorCode::DataFormat, path.string() + ":1: missing header");
    }
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) {
        line.erase(0, 3);
    }
    const auto header = split_csv(line);
    if (header.size() < 2 || header.back() != "label") {
        fail(ErrorCode::DataFormat, path.string() + ":1: header must be f0,...,f{d-1},label");
    }
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        if (header[i] != "f" + std::to_string(i)) {
            fail(ErrorCode::DataFormat, path.string() + ":1: expected column f" +
                                            std::to_string(i) + ", got '" + header[i] + "'");
        }
    }
    Dataset d;
    d.n_features = static_cast<int>(header.size() - 1);
    int line_no = 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_cell(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        if (cells.size() != header.size()) {
            fail(ErrorCode::DataFormat, where + "expected " + std::to_string(header.size()) +
                                            " cells, got " + std::to_string(cells.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[i], &used);
            } catch (const std::exception &) {
                used = std::string::npos;
            }
            if (used != cells[i].size() || cells[i].empty() || !std::isfinite(v)) {
                fail(ErrorCode::DataFormat, where + "non-numeric cell '" + cells[i] + "'");
            }
            if (i + 1 < cells.size()) {
                d.features.push_back(v);
            } else {
                if (v != std::floor(v) || v < 0) {
                    fail(ErrorCode::DataFormat, where + "label '" + cells[i] +
                                                    "' is not a non-negative integer");
                }
                const int y = static_cast<int>(v);
                if (declared_classes > 0 && y >= declared_classes) {
                    fail(ErrorCode::DataFormat, where + "label " + std::to_string(y) +
                                                    " out of range for " +
                                                    std::to_string(declared_classes) + " classes");
                }
                d.labels.push_back(y);
                max_label = std::max(max_label, y);
            }
        }
    }
    if (d.labels.empty()) {
        fail(ErrorCode::DataFormat, path.string() + ": no data rows after header");
    }
    d.n_classes = declared_classes > 0 ? declared_classes : max_label + 1;
    d.validate();
    return d;
}

std::vector<double> synth_center(int c, int d) {
    std::vector<double> levels(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double t = d == 1 ? 0.5 : static_cast<double>(i) / (d - 1);
        levels[static_cast<std::size_t>(i)] = std::numbers::pi * (0.2 + 0.6 * t);
    }
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        mu[static_cast<std::size_t>(i)] = levels[static_cast<std::size_t>((i - c % d + d) % d)];
    }
    return mu;
}

Dataset synth_dataset(std::uint64_t seed, std::size_t n_samples, int n_classes, int d,
                      double sigma) {
    if (d < 1 || n_classes < 1) {
        fail(ErrorCode::Config, "synthetic data needs d >= 1 and at least one class");
    }
    if (n_classes > d) {
        fail(ErrorCode::Config, "synthetic data needs n_classes <= d (" +
                                    std::to_string(n_classes) + " > " + std::to_string(d) + ")");
    }
    if (n_samples == 0) {
        fail(ErrorCode::Config, "synthetic data needs n_samples >= 1");
    }
    std::vector<std::vector<double>> centers;
    for (int c = 0; c < n_classes; ++c) {
        centers.push_back(synth_center(c, d));
    }
    Rng rng(seed, {tag(Stream::Data)});
    Dataset out;
    out.n_features = d;
    out.n_classes = n_classes;
    out.features.reserve(n_samples * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n_samples; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(n_classes));
        for (double mu : centers[static_cast<std::size_t>(c)]) {
            const double v = sigma > 0 ? rng.normal(mu, sigma) : mu;
            out.features.push_back(std::clamp(v, 0.0, std::numbers::pi));
        }
        out.labels.push_back(c);
    }
    return out;
}

std::vector<double> reduce_features(std::span<const double> rows, std::size_t width,
                                    std::size_t d) {
    if (d == 0 || d > width || rows.size() % width != 0) {
        fail(ErrorCode::Shape, "cannot pool " + std::to_string(width) + " features into " +
                                   std::to_string(d));
    }
    const std::size_t n = rows.size() / width;
    std::vector<double> out(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        const double *src = rows.data() + r * width;
        for (std::size_t b = 0; b < d; ++b) {
            const std::size_t lo = b * width / d;
            const std::size_t hi = (b + 1) * width / d;
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                s += src[i];
            }
            out[r * d + b] = s / static_cast<double>(hi - lo);
        }
    }
    return out;
}

Dataset reduce_features(const Dataset &data, int d) {
    Dataset out = data;
    out.features = reduce_features(data.features, static_cast<std::size_t>(data.n_features),
                                   static_cast<std::size_t>(d));
    out.n_features = d;
    return out;
}

std::vector<double> normalize_to_angles(std::span<const double> values, std::size_t *clipped) {
    std::vector<double> out;
    out.reserve(values.size());
    std::size_t n_clipped = 0;
    for (double v : values) {
        if (v < 0.0 || v > 1.0) {
            ++n_clipped;
        }
        out.push_back(std::clamp(v, 0.0, 1.0) * std::numbers::pi);
    }
    if (clipped) {
        *clipped = n_clipped;
    }
    return out;
}

void validate_fractions(std::span<const double> fractions) {
    if (fractions.empty()) {
        fail(ErrorCode::Config, "partition needs at least one fraction");
    }
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            fail(ErrorCode::Config, "partition fractions must be positive");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        fail(ErrorCode::Config, "partition fractions sum to " + std::to_string(sum) + ", not 1");
    }
}

std::vector<std::size_t> shard_sizes(std::size_t n, std::span<const double> fractions) {
    validate_fractions(fractions);
    const std::size_t m = fractions.size();
    std::vector<std::size_t> sizes(m);
    std::vector<std::pair<double, std::size_t>> remainders(m);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = fractions[i] * static_cast<double>(n);
        // Guard against 0.35 * 100 evaluating to 34.999999...
        const double fl = std::floor(exact + 1e-9);
        sizes[i] = static_cast<std::size_t>(fl);
        remainders[i] = {std::max(0.0, exact - fl), i};
        assigned += sizes[i];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first + 1e-12; });
    for (std::size_t r = 0; assigned < n; ++r) {
        ++sizes[remainders[r % m].second];
        ++assigned;
    }
    while (assigned > n) {
        // Only reachable through pathological rounding; trim from the largest.
        auto it = std::max_element(sizes.begin(), sizes.end());
        --*it;
        --assigned;
    }
    return sizes;
}

std::vector<std::vector<std::size_t>> partition_noniid(const Dataset &data,
                                                       std::span<const double> fractions,
                                                       Rng &rng) {
    const std::size_t n = data.size();
    if (fractions.size() > n) {
        fail(ErrorCode::Config, "more clients (" + std::to_string(fractions.size()) +
                                    ") than samples (" + std::to_string(n) + ")");
    }
    const auto sizes = shard_sizes(n, fractions);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.labels[a] < data.labels[b];
    });
    std::vector<std::vector<std::size_t>> shards(sizes.size());
    std::size_t pos = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        shards[s].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + sizes[s]));
        std::shuffle(shards[s].begin(), shards[s].end(), rng.engine());
        pos += sizes[s];
    }
    return shards;
}

std::vector<double> default_fractions(int n_clients) {
    if (n_clients < 1) {
        fail(ErrorCode::Config, "need at least one client");
    }
    if (n_clients == 1) {
        return {1.0};
    }
    if (n_clients == 3) {
        return {0.25, 0.35, 0.40};
    }
    if (n_clients == 5) {
        // The published split is 14/18/22/26/30 percent, which sums to 110;
        // keep the proportions and renormalize.
        return {14.0 / 110, 18.0 / 110, 22.0 / 110, 26.0 / 110, 30.0 / 110};
    }
    std::vector<double> f(static_cast<std::size_t>(n_clients));
    double sum = 0.0;
    for (int i = 0; i < n_clients; ++i) {
        f[static_cast<std::size_t>(i)] = 0.09 + 0.07 * i / (n_clients - 1);
        sum += f[static_cast<std::size_t>(i)];
    }
    for (double &v : f) {
        v /= sum;
    }
    return f;
}

} // namespace qfed
