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
#include "config.hpp"

#include "data.hpp"
#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace qfed {

void ExperimentConfig::materialize() {
    if (fractions.empty() && n_clients >= 1) {
        fractions = default_fractions(n_clients);
    }
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string &what) {
        if (!ok) fail(ErrorCode::Config, what);
    };
    qnn.validate();
    train.validate();
    fed.validate();
    require(rounds >= 0, "train.rounds must be >= 0");
    require(init_scale >= 0 && std::isfinite(init_scale), "train.init_scale must be >= 0");
    require(n_clients >= 1, "federation.n_clients must be >= 1");
    require(fractions.size() == static_cast<std::size_t>(n_clients),
            "federation.fractions has " + std::to_string(fractions.size()) +
                " entries but federation.n_clients is " + std::to_string(n_clients));
    try {
        validate_fractions(fractions);
    } catch (const Error &e) {
        fail(ErrorCode::Config, std::string("federation.fractions: ") + e.what());
    }
    switch (source) {
    case DataSource::Synth:
        require(synth_samples >= 1, "dataset.n_samples must be >= 1");
        require(synth_jitter >= 0, "dataset.jitter must be >= 0");
        break;
    case DataSource::Csv: require(!csv_path.empty(), "dataset.path is required for csv"); break;
    case DataSource::Idx:
        require(!idx_images.empty() && !idx_labels.empty(),
                "dataset.images and dataset.labels are required for idx");
        break;
    }
    require(declared_classes >= 0, "dataset.n_classes must be >= 0");
    require(iteration_constant > 0, "theory.iteration_constant must be > 0");
    require(!verify_shots.empty(), "theory.verify_shots must not be empty");
    for (int m : verify_shots) require(m >= 1, "theory.verify_shots entries must be >= 1");
    require(verify_circuits >= 1, "theory.verify_circuits must be >= 1");
    require(verify_repeats >= 30, "theory.verify_repeats must be >= 30");
    require(compare_seeds >= 1, "compare.seeds must be >= 1");
    require(acc_threshold >= 0 && acc_threshold <= 1, "compare.acc_threshold must be in [0, 1]");
    for (int m : sweep_shots) require(m >= 1, "sweep.shots entries must be >= 1");
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string &v) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(v);
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

struct TypeError {
    std::string expected;
};

double to_double(const std::string &v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw TypeError{"a number"};
    }
    return out;
}

long long to_int(const std::string &v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw TypeError{"an integer"};
    }
    return out;
}

int to_int32(const std::string &v) {
    const long long x = to_int(v);
    if (x < -2147483647LL || x > 2147483647LL) throw TypeError{"a 32-bit integer"};
    return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string &v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw TypeError{"an unsigned 64-bit integer"};
    }
    return out;
}

bool to_bool(const std::string &v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw TypeError{"true or false"};
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) {
            return shorter;
        }
    }
    return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T, typename F>
std::string join(const std::vector<T> &xs, F f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += f(xs[i]);
    }
    return out;
}

std::vector<int> to_int_list(const std::string &v) {
    std::vector<int> out;
    for (const auto &c : split_list(v)) out.push_back(to_int32(c));
    return out;
}

struct Key {
    const char *name;
    std::function<void(ExperimentConfig &, const std::string &)> set;
    std::function<std::string(const ExperimentConfig &)> get;
};

const std::vector<Key> &key_table() {
    using C = ExperimentConfig;
    static const std::vector<Key> keys = {
        {"seed", [](C &c, const std::string &v) { c.seed = to_u64(v); },
         [](const C &c) { return std::to_string(c.seed); }},
        {"output.dir", [](C &c, const std::string &v) { c.output_dir = v; },
         [](const C &c) { return c.output_dir; }},
        {"output.wall_time", [](C &c, const std::string &v) { c.record_wall_time = to_bool(v); },
         [](const C &c) { return fmt_bool(c.record_wall_time); }},

        {"dataset.source",
         [](C &c, const std::string &v) {
             if (v == "synth") c.source = DataSource::Synth;
             else if (v == "csv") c.source = DataSource::Csv;
             else if (v == "idx") c.source = DataSource::Idx;
             else throw TypeError{"one of synth, csv, idx"};
         },
         [](const C &c) {
             switch (c.source) {
             case DataSource::Synth: return std::string("synth");
             case DataSource::Csv: return std::string("csv");
             case DataSource::Idx: return std::string("idx");
             }
             return std::string();
         }},
        {"dataset.path", [](C &c, const std::string &v) { c.csv_path = v; },
         [](const C &c) { return c.csv_path; }},
        {"dataset.images", [](C &c, const std::string &v) { c.idx_images = v; },
         [](const C &c) { return c.idx_images; }},
        {"dataset.labels", [](C &c, const std::string &v) { c.idx_labels = v; },
         [](const C &c) { return c.idx_labels; }},
        {"dataset.n_classes", [](C &c, const std::string &v) { c.declared_classes = to_int32(v); },
         [](const C &c) { return std::to_string(c.declared_classes); }},
        {"dataset.limit",
         [](C &c, const std::string &v) { c.limit = static_cast<std::size_t>(to_u64(v)); },
         [](const C &c) { return std::to_string(c.limit); }},
        {"dataset.n_samples",
         [](C &c, const std::string &v) { c.synth_samples = static_cast<std::size_t>(to_u64(v)); },
         [](const C &c) { return std::to_string(c.synth_samples); }},
        {"dataset.jitter", [](C &c, const std::string &v) { c.synth_jitter = to_double(v); },
         [](const C &c) { return fmt_double(c.synth_jitter); }},

        {"qnn.n_qubits", [](C &c, const std::string &v) { c.qnn.n_qubits = to_int32(v); },
         [](const C &c) { return std::to_string(c.qnn.n_qubits); }},
        {"qnn.n_layers", [](C &c, const std::string &v) { c.qnn.n_layers = to_int32(v); },
         [](const C &c) { return std::to_string(c.qnn.n_layers); }},
        {"qnn.n_classes", [](C &c, const std::string &v) { c.qnn.n_classes = to_int32(v); },
         [](const C &c) { return std::to_string(c.qnn.n_classes); }},

        {"train.eta", [](C &c, const std::string &v) { c.train.eta = to_double(v); },
         [](const C &c) { return fmt_double(c.train.eta); }},
        {"train.lambda", [](C &c, const std::string &v) { c.train.lambda = to_double(v); },
         [](const C &c) { return fmt_double(c.train.lambda); }},
        {"train.gamma", [](C &c, const std::string &v) { c.train.gamma = to_double(v); },
         [](const C &c) { return fmt_double(c.train.gamma); }},
        {"train.local_steps", [](C &c, const std::string &v) { c.train.local_steps = to_int32(v); },
         [](const C &c) { return std::to_string(c.train.local_steps); }},
        {"train.rounds", [](C &c, const std::string &v) { c.rounds = to_int32(v); },
         [](const C &c) { return std::to_string(c.rounds); }},
        {"train.shots",
         [](C &c, const std::string &v) {
             if (v == "exact") {
                 c.train.shots = Shots::exact();
                 return;
             }
             const int m = to_int32(v);
             if (m < 1) throw TypeError{"a positive integer or 'exact'"};
             c.train.shots = Shots::count(m);
         },
         [](const C &c) {
             return c.train.shots.is_exact() ? std::string("exact")
                                             : std::to_string(c.train.shots.value());
         }},
        {"train.extra_epochs_max",
         [](C &c, const std::string &v) { c.train.extra_epochs_max = to_int32(v); },
         [](const C &c) { return std::to_string(c.train.extra_epochs_max); }},
        {"train.extra_epochs_gain",
         [](C &c, const std::string &v) { c.train.extra_epochs_gain = to_double(v); },
         [](const C &c) { return fmt_double(c.train.extra_epochs_gain); }},
        {"train.noise_repeats",
         [](C &c, const std::string &v) { c.train.noise_repeats = to_int32(v); },
         [](const C &c) { return std::to_string(c.train.noise_repeats); }},
        {"train.batch_size", [](C &c, const std::string &v) { c.train.batch_size = to_int32(v); },
         [](const C &c) { return std::to_string(c.train.batch_size); }},
        {"train.sporadic", [](C &c, const std::string &v) { c.train.sporadic = to_bool(v); },
         [](const C &c) { return fmt_bool(c.train.sporadic); }},
        {"train.personalization",
         [](C &c, const std::string &v) { c.train.personalization = to_bool(v); },
         [](const C &c) { return fmt_bool(c.train.personalization); }},
        {"train.noise_estimate",
         [](C &c, const std::string &v) {
             if (v == "empirical") c.train.noise_estimate = NoiseEstimate::Empirical;
             else if (v == "analytic") c.train.noise_estimate = NoiseEstimate::Analytic;
             else throw TypeError{"empirical or analytic"};
         },
         [](const C &c) {
             return std::string(c.train.noise_estimate == NoiseEstimate::Empirical ? "empirical"
                                                                                   : "analytic");
         }},
        {"train.init",
         [](C &c, const std::string &v) {
             if (v == "zeros") c.init = InitMode::Zeros;
             else if (v == "uniform") c.init = InitMode::Uniform;
             else throw TypeError{"zeros or uniform"};
         },
         [](const C &c) { return std::string(c.init == InitMode::Zeros ? "zeros" : "uniform"); }},
        {"train.init_scale", [](C &c, const std::string &v) { c.init_scale = to_double(v); },
         [](const C &c) { return fmt_double(c.init_scale); }},

        {"noise.calibration", [](C &c, const std::string &v) { c.calibration = v; },
         [](const C &c) { return c.calibration; }},
        {"noise.regime",
         [](C &c, const std::string &v) {
             if (v != "low" && v != "medium" && v != "high") {
                 throw TypeError{"low, medium or high"};
             }
             c.regime = parse_regime(v);
         },
         [](const C &c) { return std::string(to_string(c.regime)); }},
        {"noise.recalibrate", [](C &c, const std::string &v) { c.recalibrate = to_bool(v); },
         [](const C &c) { return fmt_bool(c.recalibrate); }},

        {"federation.n_clients", [](C &c, const std::string &v) { c.n_clients = to_int32(v); },
         [](const C &c) { return std::to_string(c.n_clients); }},
        {"federation.fractions",
         [](C &c, const std::string &v) {
             c.fractions.clear();
             for (const auto &x : split_list(v)) c.fractions.push_back(to_double(x));
         },
         [](const C &c) { return join(c.fractions, fmt_double); }},
        {"federation.select_fraction",
         [](C &c, const std::string &v) { c.fed.select_fraction = to_double(v); },
         [](const C &c) { return fmt_double(c.fed.select_fraction); }},
        {"federation.workers", [](C &c, const std::string &v) { c.fed.workers = to_int32(v); },
         [](const C &c) { return std::to_string(c.fed.workers); }},

        {"theory.nu", [](C &c, const std::string &v) { c.train.nu = to_double(v); },
         [](const C &c) { return fmt_double(c.train.nu); }},
        {"theory.trace_h2", [](C &c, const std::string &v) { c.train.trace_h2 = to_double(v); },
         [](const C &c) { return fmt_double(c.train.trace_h2); }},
        {"theory.n_outcomes",
         [](C &c, const std::string &v) { c.train.n_outcomes = to_double(v); },
         [](const C &c) { return fmt_double(c.train.n_outcomes); }},
        {"theory.iteration_constant",
         [](C &c, const std::string &v) { c.iteration_constant = to_double(v); },
         [](const C &c) { return fmt_double(c.iteration_constant); }},
        {"theory.verify_shots", [](C &c, const std::string &v) { c.verify_shots = to_int_list(v); },
         [](const C &c) { return join(c.verify_shots, [](int m) { return std::to_string(m); }); }},
        {"theory.verify_circuits",
         [](C &c, const std::string &v) { c.verify_circuits = to_int32(v); },
         [](const C &c) { return std::to_string(c.verify_circuits); }},
        {"theory.verify_repeats",
         [](C &c, const std::string &v) { c.verify_repeats = to_int32(v); },
         [](const C &c) { return std::to_string(c.verify_repeats); }},

        {"compare.methods",
         [](C &c, const std::string &v) {
             c.compare_methods.clear();
             for (const auto &m : split_list(v)) {
                 if (m != "qfl" && m != "pqfl" && m != "spqfl") throw TypeError{"qfl, pqfl, spqfl"};
                 c.compare_methods.push_back(parse_method(m));
             }
         },
         [](const C &c) {
             return join(c.compare_methods, [](Method m) { return std::string(to_string(m)); });
         }},
        {"compare.seeds", [](C &c, const std::string &v) { c.compare_seeds = to_int32(v); },
         [](const C &c) { return std::to_string(c.compare_seeds); }},
        {"compare.acc_threshold",
         [](C &c, const std::string &v) { c.acc_threshold = to_double(v); },
         [](const C &c) { return fmt_double(c.acc_threshold); }},

        {"sweep.shots", [](C &c, const std::string &v) { c.sweep_shots = to_int_list(v); },
         [](const C &c) { return join(c.sweep_shots, [](int m) { return std::to_string(m); }); }},
    };
    return keys;
}

} // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto &k : key_table()) out.emplace_back(k.name);
    return out;
}

ExperimentConfig parse_config_text(std::string_view text, const std::string &source) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::map<std::string, const Key *> by_name;
    for (const auto &k : key_table()) by_name[k.name] = &k;

    ExperimentConfig cfg;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        bool quoted = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') {
                quoted = !quoted;
            } else if (raw[i] == '#' && !quoted) {
                raw.erase(i);
                break;
            }
        }
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) {
            fail(ErrorCode::Config, where + "expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        const auto it = by_name.find(key);
        if (it == by_name.end()) {
            fail(ErrorCode::Config, where + "unknown key '" + key + "'");
        }
        if (seen.count(key)) {
            fail(ErrorCode::Config, where + key + ": duplicate of line " +
                                        std::to_string(seen[key]));
        }
        seen[key] = line_no;
        try {
            it->second->set(cfg, value);
        } catch (const TypeError &e) {
            fail(ErrorCode::Config, where + key + ": expected " + e.expected + ", got '" + value + "'");
        } catch (const Error &e) {
            fail(ErrorCode::Config, where + key + ": " + e.what());
        }
    }

    cfg.materialize();
    try {
        cfg.validate();
    } catch (const Error &e) {
        std::string msg = e.what();
        // Point at the line of the key the message starts with, when known.
        const std::string first = msg.substr(0, msg.find_first_of(" :"));
        const auto line = seen.find(first);
        const std::string where =
            line != seen.end() ? source + ":" + std::to_string(line->second) + ": " : source + ": ";
        fail(ErrorCode::Config, where + msg);
    }
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string render_config(const ExperimentConfig &config) {
    std::ostringstream out;
    out << "# resolved configuration\n";
    std::string section;
    for (const auto &k : key_table()) {
        const std::string name = k.name;
        const auto dot = name.find('.');
        const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
        if (sec != section) {
            out << '\n';
            section = sec;
        }
        std::string value = k.get(config);
        if (value.find('#') != std::string::npos || value.find('"') == 0 ||
            (!value.empty() && (std::isspace(static_cast<unsigned char>(value.front())) ||
                                std::isspace(static_cast<unsigned char>(value.back()))))) {
            value = '"' + value + '"';
        }
        out << name << " = " << value << '\n';
    }
    return out.str();
}

} // namespace qfed
