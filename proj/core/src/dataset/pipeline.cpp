#include "scada/dataset/pipeline.hpp"

#include "scada/error.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace scada::dataset {

namespace detail {
void warn_short_file(const std::string& file, std::size_t size, std::size_t n) {
    spdlog::warn("{}: only {} instances, fewer than threshold {}", file, size, n);
}
}  // namespace detail

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::vector<std::size_t> feature_columns(const std::vector<std::string>& wanted) {
    const auto& names = feature_names();
    std::vector<std::size_t> cols;
    if (wanted.empty()) {
        cols.resize(feature_count);
        std::iota(cols.begin(), cols.end(), 0);
        return cols;
    }
    for (const auto& w : wanted) {
        auto it = std::find(names.begin(), names.end(), w);
        if (it == names.end()) throw config_error("unknown feature '" + w + "'");
        cols.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return cols;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::vector<std::string> labeled_set::labels(task view) const {
    std::vector<std::string> out;
    out.reserve(y_scenario.size());
    for (auto s : y_scenario) out.push_back(relabel(s, view));
    return out;
}

void labeled_set::append(std::span<const double> features, plant::scenario_kind label, std::string source,
                         std::size_t index) {
    x.append_row(features);
    y_scenario.push_back(label);
    source_file.push_back(std::move(source));
    source_index.push_back(index);
}

labeled_set labeled_set::subset(std::span<const std::size_t> rows) const {
    labeled_set out;
    out.feature_names = feature_names;
    out.x = x.select_rows(rows);
    for (std::size_t r : rows) {
        out.y_scenario.push_back(y_scenario[r]);
        out.source_file.push_back(source_file[r]);
        out.source_index.push_back(source_index[r]);
    }
    return out;
}

std::size_t default_threshold(const per_file_features& per_file) {
    if (per_file.empty()) throw validation_error("default_threshold: no files");
    std::size_t n = per_file.begin()->second.size();
    for (const auto& [file, items] : per_file) n = std::min(n, items.size());
    if (n == 0) throw validation_error("default_threshold: a file has no usable instances");
    return n;
}

labeled_set serialize(const per_file_features& per_file, const std::vector<std::string>& features) {
    const auto cols = feature_columns(features);
    labeled_set set;
    for (std::size_t c : cols) set.feature_names.emplace_back(feature_names()[c]);
    set.x = matrix(0, cols.size());
    std::vector<double> row(cols.size());
    for (const auto& [file, items] : per_file) {
        for (const auto& item : items) {
            for (std::size_t j = 0; j < cols.size(); ++j) row[j] = item.features[cols[j]];
            set.append(row, item.source.scenario, file, item.index);
        }
    }
    return set;
}

minmax_scaler minmax_scaler::fit(const matrix& x) {
    if (x.empty()) throw validation_error("normalize: empty training set");
    std::vector<double> lo(x.cols()), hi(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        lo[c] = hi[c] = x(0, c);
        for (std::size_t r = 1; r < x.rows(); ++r) {
            lo[c] = std::min(lo[c], x(r, c));
            hi[c] = std::max(hi[c], x(r, c));
        }
    }
    return {std::move(lo), std::move(hi)};
}

void minmax_scaler::transform_row(std::span<double> row) const {
    if (row.size() != min_.size()) throw dimension_error("scaler: feature count mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) {
        const double span = max_[c] - min_[c];
        row[c] = span > 0 ? std::clamp((row[c] - min_[c]) / span, 0.0, 1.0) : 0.0;
    }
}

matrix minmax_scaler::transform(const matrix& x) const {
    matrix out = x;
    for (std::size_t r = 0; r < out.rows(); ++r) transform_row(out.row(r));
    return out;
}

std::string minmax_scaler::id() const { return sha256_hex(to_json().dump()).substr(0, 16); }

nlohmann::json minmax_scaler::to_json() const { return {{"min", min_}, {"max", max_}}; }

minmax_scaler minmax_scaler::from_json(const nlohmann::json& j) {
    auto lo = j.at("min").get<std::vector<double>>();
    auto hi = j.at("max").get<std::vector<double>>();
    if (lo.size() != hi.size()) throw config_error("scaler: min/max length mismatch");
    return {std::move(lo), std::move(hi)};
}

split_indices stratified_split(const std::vector<plant::scenario_kind>& labels, double ratio, std::uint64_t seed) {
    if (!(ratio > 0 && ratio < 1)) throw validation_error("split: ratio must be in (0,1)");
    std::map<plant::scenario_kind, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    const auto total_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(labels.size())));
    struct share {
        plant::scenario_kind kind;
        std::size_t quota;
        double remainder;
    };
    std::vector<share> shares;
    std::size_t allotted = 0;
    for (const auto& [kind, rows] : by_class) {
        const double exact = ratio * static_cast<double>(rows.size());
        const auto quota = static_cast<std::size_t>(std::floor(exact));
        shares.push_back({kind, quota, exact - static_cast<double>(quota)});
        allotted += quota;
    }
    std::vector<std::size_t> order(shares.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
    for (std::size_t k = 0; allotted < total_train && k < order.size(); ++k, ++allotted) ++shares[order[k]].quota;

    split_indices out;
    for (const auto& s : shares) {
        auto rows = by_class[s.kind];
        std::seed_seq seq{seed, static_cast<std::uint64_t>(s.kind)};
        std::mt19937_64 rng(seq);
        std::shuffle(rows.begin(), rows.end(), rng);
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(s.quota));
        out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(s.quota), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

nlohmann::json pipeline_config::to_json() const {
    nlohmann::json j{{"train_ratio", train_ratio},
                     {"seed", seed},
                     {"paper_faithful_order", paper_faithful_order},
                     {"features", features}};
    j["threshold"] = threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr);
    return j;
}

pipeline_config pipeline_config::from_json(const nlohmann::json& j) {
    pipeline_config c;
    try {
        if (j.contains("threshold") && !j.at("threshold").is_null()) c.threshold = j.at("threshold").get<std::size_t>();
        c.train_ratio = j.value("train_ratio", 0.8);
        c.seed = j.value("seed", std::uint64_t{42});
        c.paper_faithful_order = j.value("paper_faithful_order", false);
        c.features = j.value("features", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("pipeline config: ") + e.what());
    }
    if (!(c.train_ratio > 0 && c.train_ratio < 1)) throw config_error("pipeline config: train_ratio must be in (0,1)");
    if (c.threshold && *c.threshold == 0) throw config_error("pipeline config: threshold must be positive");
    return c;
}

std::pair<labeled_set, labeled_set> normalize(const labeled_set& train, const labeled_set& test,
                                              minmax_scaler& scaler) {
    scaler = minmax_scaler::fit(train.x);
    labeled_set a = train, b = test;
    a.x = scaler.transform(train.x);
    b.x = scaler.transform(test.x);
    return {std::move(a), std::move(b)};
}

std::string prepared_dataset::content_hash() const {
    if (serialized.size() == 0 && !recorded_sha256.empty()) return recorded_sha256;
    std::ostringstream out;
    write_labeled_set(out, serialized);
    return sha256_hex(out.str());
}

prepared_dataset prepare(const per_file_features& per_file, const pipeline_config& cfg) {
    prepared_dataset out;
    out.config = cfg;
    out.threshold_used = cfg.threshold ? *cfg.threshold : default_threshold(per_file);
    out.serialized = serialize(apply_threshold(per_file, out.threshold_used), cfg.features);
    if (out.serialized.size() < 2) throw validation_error("prepare: fewer than two instances after threshold");

    const auto idx = stratified_split(out.serialized.y_scenario, cfg.train_ratio, cfg.seed);
    const labeled_set train = out.serialized.subset(idx.train);
    const labeled_set test = out.serialized.subset(idx.test);
    if (cfg.paper_faithful_order) {
        out.scaler = minmax_scaler::fit(out.serialized.x);
        out.train = train;
        out.test = test;
        out.train.x = out.scaler.transform(train.x);
        out.test.x = out.scaler.transform(test.x);
    } else {
        std::tie(out.train, out.test) = normalize(train, test, out.scaler);
    }
    return out;
}

std::optional<plant::scenario_kind> scenario_for_file(const std::string& file_name, const modbus::log_mapping& mapping) {
    const std::string stem = std::filesystem::path(file_name).stem().string();
    for (const auto& [file, label] : mapping.file_labels) {
        if (file == file_name || file == stem) {
            auto kind = plant::parse_scenario(label);
            if (!kind) throw config_error("mapping: unknown scenario label '" + label + "' for " + file);
            return kind;
        }
    }
    // "NN_<id>" as written by the simulator.
    const auto underscore = stem.find('_');
    if (underscore != std::string::npos && underscore > 0 &&
        std::all_of(stem.begin(), stem.begin() + static_cast<std::ptrdiff_t>(underscore),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        if (auto kind = plant::parse_scenario(stem.substr(underscore + 1))) return kind;
    }
    return plant::parse_scenario(stem);
}

std::map<std::string, labeled_log> load_log_directory(const std::filesystem::path& dir,
                                                      const modbus::log_mapping& mapping) {
    if (!std::filesystem::is_directory(dir)) throw error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, labeled_log> out;
    for (const auto& path : files) {
        const std::string name = path.filename().string();
        const auto kind = scenario_for_file(name, mapping);
        if (!kind) {
            spdlog::warn("{}: cannot determine scenario, skipped", name);
            continue;
        }
        out[name] = {*kind, modbus::read_log(path, mapping)};
    }
    if (out.empty()) throw error("no labelled log files in " + dir.string());
    return out;
}

per_file_features featurize_logs(const std::map<std::string, labeled_log>& logs) {
    per_file_features out;
    for (const auto& [name, log] : logs) {
        const auto instances = extract_instances(log.rows, name, log.scenario);
        out[name] = featurize(instances);
    }
    return out;
}

void write_labeled_set(std::ostream& out, const labeled_set& set, const std::vector<std::string>* split_column) {
    if (split_column) out << "split,";
    for (const auto& f : set.feature_names) out << f << ',';
    out << "scenario,component,binary,source_file,source_index\n";
    for (std::size_t r = 0; r < set.size(); ++r) {
        if (split_column) out << (*split_column)[r] << ',';
        for (double v : set.x.row(r)) out << format_double(v) << ',';
        const auto s = set.y_scenario[r];
        out << relabel(s, task::scenario) << ',' << relabel(s, task::component) << ',' << relabel(s, task::binary)
            << ',' << set.source_file[r] << ',' << set.source_index[r] << '\n';
    }
}

void save_prepared(const prepared_dataset& data, const std::filesystem::path& csv_path) {
    labeled_set all = data.train;
    std::vector<std::string> split(data.train.size(), "train");
    for (std::size_t r = 0; r < data.test.size(); ++r) {
        all.append(data.test.x.row(r), data.test.y_scenario[r], data.test.source_file[r], data.test.source_index[r]);
        split.emplace_back("test");
    }
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw error("cannot write " + csv_path.string());
        write_labeled_set(out, all, &split);
    }
    nlohmann::json side{{"format", "scada-siem-dataset"},
                        {"version", 1},
                        {"normalized", true},
                        {"features", data.train.feature_names},
                        {"pipeline", data.config.to_json()},
                        {"threshold_used", data.threshold_used},
                        {"scaler", data.scaler.to_json()},
                        {"scaler_id", data.scaler.id()},
                        {"serialized_sha256", data.content_hash()},
                        {"train_rows", data.train.size()},
                        {"test_rows", data.test.size()}};
    auto sidecar = csv_path;
    sidecar.replace_extension(".json");
    std::ofstream out(sidecar, std::ios::binary);
    if (!out) throw error("cannot write " + sidecar.string());
    out << side.dump(2) << '\n';
}

prepared_dataset load_prepared(const std::filesystem::path& csv_path) {
    auto sidecar_path = csv_path;
    sidecar_path.replace_extension(".json");
    std::ifstream side_in(sidecar_path);
    if (!side_in) throw error("missing dataset sidecar " + sidecar_path.string());
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(side_in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(sidecar_path.string() + ": " + e.what());
    }

    prepared_dataset data;
    data.config = pipeline_config::from_json(side.at("pipeline"));
    data.threshold_used = side.at("threshold_used").get<std::size_t>();
    data.scaler = minmax_scaler::from_json(side.at("scaler"));
    data.recorded_sha256 = side.value("serialized_sha256", std::string{});
    const auto features = side.at("features").get<std::vector<std::string>>();
    data.train.feature_names = data.test.feature_names = features;
    data.train.x = data.test.x = matrix(0, features.size());

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw error("cannot open " + csv_path.string());
    std::string line;
    std::getline(in, line);
    const std::size_t expected = 1 + features.size() + 5;
    std::size_t line_no = 1;
    std::vector<double> row(features.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != expected) throw structural_error("dataset row has wrong column count", line_no);
        for (std::size_t j = 0; j < features.size(); ++j) {
            const auto& c = cells[1 + j];
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), row[j]);
            if (ec != std::errc{}) throw structural_error("bad feature value '" + c + "'", line_no);
        }
        const auto kind = plant::parse_scenario(cells[1 + features.size()]);
        if (!kind) throw structural_error("unknown scenario label", line_no);
        auto& target = cells[0] == "train" ? data.train : data.test;
        target.append(row, *kind, cells[expected - 2], std::stoull(cells[expected - 1]));
    }
    return data;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace scada::dataset
