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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

using namespace qfed;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "qfed_data_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path &p, const std::string &text) {
    std::ofstream(p, std::ios::binary) << text;
}

void write_bytes(const fs::path &p, const std::vector<std::uint8_t> &bytes) {
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char *>(bytes.data()),
                                             static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> be32(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

// Hand-assembled IDX pair, independent of write_idx.
void handmade_idx(const fs::path &img, const fs::path &lab, std::uint32_t n_images,
                  std::uint32_t n_labels) {
    std::vector<std::uint8_t> a{0, 0, 8, 3};
    for (auto v : {n_images, 2u, 2u}) {
        const auto b = be32(v);
        a.insert(a.end(), b.begin(), b.end());
    }
    for (std::uint32_t i = 0; i < n_images * 4; ++i) a.push_back(static_cast<std::uint8_t>(i % 2 ? 255 : 0));
    std::vector<std::uint8_t> l{0, 0, 8, 1};
    const auto b = be32(n_labels);
    l.insert(l.end(), b.begin(), b.end());
    for (std::uint32_t i = 0; i < n_labels; ++i) l.push_back(static_cast<std::uint8_t>(i % 2));
    write_bytes(img, a);
    write_bytes(lab, l);
}

Dataset labelled(std::vector<int> labels, int n_classes) {
    Dataset d;
    d.n_features = 1;
    d.n_classes = n_classes;
    d.labels = std::move(labels);
    d.features.assign(d.labels.size(), 0.5);
    return d;
}

} // namespace

TEST(Idx, HandmadeFixture) {
    const auto img = temp_file("a-images.idx"), lab = temp_file("a-labels.idx");
    handmade_idx(img, lab, 3, 3);
    const auto d = load_idx(img, lab);
    EXPECT_EQ(d.size(), 3u);
    EXPECT_EQ(d.n_features, 4);
    EXPECT_DOUBLE_EQ(d.row(0)[0], 0.0);
    EXPECT_DOUBLE_EQ(d.row(0)[1], 1.0);
    EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 0}));
}

TEST(Idx, CountMismatch) {
    const auto img = temp_file("b-images.idx"), lab = temp_file("b-labels.idx");
    handmade_idx(img, lab, 3, 5);
    try {
        load_idx(img, lab);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::DataFormat);
    }
}

TEST(Idx, BadMagicAndTruncation) {
    const auto img = temp_file("c-images.idx"), lab = temp_file("c-labels.idx");
    handmade_idx(img, lab, 3, 3);
    write_bytes(img, {0, 0, 8, 1, 0, 0, 0, 3});
    try {
        load_idx(img, lab);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
    }
    handmade_idx(img, lab, 3, 3);
    auto size = fs::file_size(img);
    fs::resize_file(img, size - 2);
    EXPECT_THROW(load_idx(img, lab), Error);
}

TEST(Idx, RoundTrip) {
    const auto img = temp_file("d-images.idx"), lab = temp_file("d-labels.idx");
    std::vector<std::uint8_t> pixels;
    for (int i = 0; i < 2 * 3 * 5; ++i) pixels.push_back(static_cast<std::uint8_t>(i * 7));
    std::vector<std::uint8_t> labels{4, 9};
    write_idx(img, lab, 3, 5, pixels, labels);
    const auto d = load_idx(img, lab);
    ASSERT_EQ(d.size(), 2u);
    ASSERT_EQ(d.n_features, 15);
    for (std::size_t i = 0; i < pixels.size(); ++i) EXPECT_DOUBLE_EQ(d.features[i], pixels[i] / 255.0);
    EXPECT_EQ(d.labels, (std::vector<int>{4, 9}));
}

TEST(Csv, ThreeRows) {
    const auto p = temp_file("ok.csv");
    write_text(p, "f0,f1,label\n0.1,0.2,0\n0.3,0.4,1\r\n0.5,0.6,1\n");
    const auto d = load_csv(p);
    EXPECT_EQ(d.size(), 3u);
    EXPECT_EQ(d.n_features, 2);
    EXPECT_EQ(d.n_classes, 2);
    EXPECT_DOUBLE_EQ(d.row(1)[1], 0.4);
}

TEST(Csv, LabelOutOfDeclaredRange) {
    const auto p = temp_file("range.csv");
    write_text(p, "f0,f1,label\n0.1,0.2,2\n");
    EXPECT_THROW(load_csv(p, 2), Error);
}

TEST(Csv, EmptyAfterHeader) {
    const auto p = temp_file("empty.csv");
    write_text(p, "f0,f1,label\n");
    try {
        load_csv(p);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::DataFormat);
    }
}

TEST(Csv, ErrorsCarryLineNumbers) {
    const auto p = temp_file("bad.csv");
    write_text(p, "f0,f1,label\n0.1,0.2,0\n0.1,zz,1\n");
    try {
        load_csv(p);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
    write_text(p, "f0,f1,label\n0.1,0.2,0\n0.1,1\n");
    EXPECT_THROW(load_csv(p), Error);
    EXPECT_THROW(load_csv(temp_file("missing.csv")), Error);
}

TEST(Synth, Deterministic) {
    const auto a = synth_dataset(5, 50, 2, 4);
    const auto b = synth_dataset(5, 50, 2, 4);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    const auto c = synth_dataset(6, 50, 2, 4);
    EXPECT_NE(a.features, c.features);
}

TEST(Synth, ZeroJitterGivesCentres) {
    const auto d = synth_dataset(1, 20, 3, 4, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto mu = synth_center(d.labels[i], 4);
        for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(d.row(i)[j], mu[j]);
    }
}

TEST(Synth, CentresShiftTowardTheReadoutQubits) {
    // Class c rotates the class-0 centre by c places toward qubit 0, which puts
    // the largest class-0/class-1 contrast on a readout qubit.
    const std::vector<double> c1{0.8 * pi, 0.2 * pi, 0.4 * pi, 0.6 * pi};
    const auto mu = synth_center(1, 4);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(mu[j], c1[j], 1e-15);
    for (int c = 0; c < 3; ++c) {
        const auto m = synth_center(c, 3);
        EXPECT_EQ(std::max_element(m.begin(), m.end()) - m.begin(), (c + 2) % 3);
    }
}

TEST(Synth, RangeAndClassCheck) {
    const auto d = synth_dataset(2, 300, 4, 4);
    for (double v : d.features) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, pi);
    }
    EXPECT_THROW(synth_dataset(2, 10, 5, 4), Error);
}

TEST(Synth, NearestCentroidSeparates) {
    const auto d = synth_dataset(3, 200, 2, 4);
    int correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        int best = -1;
        double best_d = 1e300;
        for (int c = 0; c < 2; ++c) {
            const auto mu = synth_center(c, 4);
            double dist = 0;
            for (int j = 0; j < 4; ++j) dist += (d.row(i)[j] - mu[j]) * (d.row(i)[j] - mu[j]);
            if (dist < best_d) {
                best_d = dist;
                best = c;
            }
        }
        correct += best == d.labels[i];
    }
    EXPECT_GE(correct, 190);
}

TEST(Reduce, Pooling) {
    const std::vector<double> constant(12, 0.3);
    for (double v : reduce_features(constant, 12, 5)) EXPECT_DOUBLE_EQ(v, 0.3);
    const std::vector<double> img{0, 1, 0, 1};
    EXPECT_EQ(reduce_features(img, 4, 2), (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(reduce_features(img, 4, 4), img);
}

TEST(Normalize, EndpointsAndClipping) {
    std::size_t clipped = 0;
    const std::vector<double> in{0.0, 1.0, 0.5, 1.2, -0.1};
    const auto out = normalize_to_angles(in, &clipped);
    EXPECT_DOUBLE_EQ(out[0], 0.0);
    EXPECT_DOUBLE_EQ(out[1], pi);
    EXPECT_DOUBLE_EQ(out[2], pi / 2);
    EXPECT_DOUBLE_EQ(out[3], pi);
    EXPECT_DOUBLE_EQ(out[4], 0.0);
    EXPECT_EQ(clipped, 2u);
}

TEST(Partition, PaperSplits) {
    const std::vector<double> three{0.25, 0.35, 0.40};
    EXPECT_EQ(shard_sizes(100, three), (std::vector<std::size_t>{25, 35, 40}));
    EXPECT_EQ(default_fractions(3), three);
    // 14:18:22:26:30 sums to 110, so the exact sizes appear on n = 110.
    const auto five = default_fractions(5);
    EXPECT_EQ(shard_sizes(110, five), (std::vector<std::size_t>{14, 18, 22, 26, 30}));
    EXPECT_EQ(shard_sizes(100, five), (std::vector<std::size_t>{13, 16, 20, 24, 27}));
    const std::vector<double> raw{0.14, 0.18, 0.22, 0.26, 0.30};
    EXPECT_THROW(shard_sizes(100, raw), Error);
}

TEST(Partition, TenClientRamp) {
    const auto f = default_fractions(10);
    ASSERT_EQ(f.size(), 10u);
    double sum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sum += f[i];
        if (i) {
            EXPECT_GT(f[i], f[i - 1]);
        }
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(f.back() / f.front(), 16.0 / 9.0, 1e-12);
}

TEST(Partition, LargestRemainderOracle) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const int k = 1 + static_cast<int>(rng.below(8));
        std::vector<double> f(k);
        double s = 0;
        for (double &v : f) s += (v = 0.05 + rng.uniform());
        for (double &v : f) v /= s;
        const std::size_t n = k + rng.below(300);
        const auto sizes = shard_sizes(n, f);
        // Oracle: floors, then hand out the rest by descending remainder.
        std::vector<std::size_t> want(k);
        std::vector<std::pair<double, int>> rem;
        std::size_t used = 0;
        for (int i = 0; i < k; ++i) {
            const double exact = f[i] * n;
            want[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
            used += want[i];
            rem.push_back({exact - want[i], i});
        }
        std::stable_sort(rem.begin(), rem.end(),
                         [](auto a, auto b) { return a.first > b.first + 1e-12; });
        for (std::size_t i = 0; used < n; ++i, ++used) ++want[rem[i].second];
        EXPECT_EQ(sizes, want);
    }
}

TEST(Partition, SingleShardIsWholeDataset) {
    const auto d = synth_dataset(1, 30, 2, 2);
    Rng rng(1);
    const std::vector<double> one{1.0};
    const auto shards = partition_noniid(d, one, rng);
    ASSERT_EQ(shards.size(), 1u);
    EXPECT_EQ(std::set<std::size_t>(shards[0].begin(), shards[0].end()).size(), 30u);
}

TEST(Partition, UnionDisjointAndSkewed) {
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 20 + rng.below(200);
        const int classes = 2 + static_cast<int>(rng.below(3));
        std::vector<int> labels(n);
        for (auto &y : labels) y = static_cast<int>(rng.below(classes));
        const auto d = labelled(labels, classes);
        const auto f = default_fractions(static_cast<int>(2 + rng.below(9)));
        const auto shards = partition_noniid(d, f, rng);
        std::vector<int> seen(n, 0);
        for (const auto &s : shards) for (auto i : s) ++seen[i];
        for (int c : seen) ASSERT_EQ(c, 1);
        ASSERT_EQ(shards.size(), f.size());
        const auto sizes = shard_sizes(n, f);
        for (std::size_t i = 0; i < shards.size(); ++i) ASSERT_EQ(shards[i].size(), sizes[i]);

        std::map<int, double> global;
        for (int y : labels) global[y] += 1.0 / n;
        if (global.size() < 2) continue;
        double max_tv = 0;
        for (const auto &s : shards) {
            if (s.empty()) continue;
            std::map<int, double> h;
            for (auto i : s) h[labels[i]] += 1.0 / s.size();
            double tv = 0;
            for (int c = 0; c < classes; ++c) tv += std::abs(h[c] - global[c]);
            max_tv = std::max(max_tv, tv / 2);
        }
        EXPECT_GE(max_tv, 0.1);
    }
}

TEST(Partition, Errors) {
    const auto d = synth_dataset(1, 3, 2, 2);
    Rng rng(1);
    const auto four = default_fractions(4);
    try {
        partition_noniid(d, four, rng);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Config);
    }
    const std::vector<double> bad{0.5, 0.6};
    EXPECT_THROW(validate_fractions(bad), Error);
    const std::vector<double> neg{1.2, -0.2};
    EXPECT_THROW(validate_fractions(neg), Error);
}
