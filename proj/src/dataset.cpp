#include "calib/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "calib/error.hpp"
#include "calib/text.hpp"

namespace calib {

namespace {

constexpr double kSimplexTol = 1e-6;

std::string row_label(const PredictionRecord& r) { return "row '" + r.id + "'"; }

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(start, nl - start);
        if (!text::trim(line).empty()) {
            lines.push_back(line);
        }
        start = nl + 1;
    }
    return lines;
}

}  // namespace

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) {
            best = i;
        }
    }
    return best;
}

void validate_record(const PredictionRecord& r, int num_classes) {
    if (!(r.conf >= 0.0 && r.conf <= 1.0)) {
        throw ValidationError(row_label(r) + ": conf " + text::format_double(r.conf) + " outside [0,1]");
    }
    if (r.y_true < 0 || r.y_true >= num_classes || r.y_pred < 0 || r.y_pred >= num_classes) {
        throw ValidationError(row_label(r) + ": label outside {0.." + std::to_string(num_classes - 1) + "}");
    }
    if (!r.has_probs()) {
        return;
    }
    if (static_cast<int>(r.probs.size()) != num_classes) {
        throw ValidationError(row_label(r) + ": probability vector has " + std::to_string(r.probs.size()) +
                              " entries, expected " + std::to_string(num_classes));
    }
    double sum = 0.0;
    for (double p : r.probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError(row_label(r) + ": negative or non-finite probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTol) {
        throw ValidationError(row_label(r) + ": probabilities sum to " + text::format_double(sum));
    }
    const auto top = argmax(r.probs);
    if (std::abs(r.probs[top] - r.conf) > kSimplexTol) {
        throw ValidationError(row_label(r) + ": conf does not equal max(probs)");
    }
    if (static_cast<int>(top) != r.y_pred) {
        throw ValidationError(row_label(r) + ": y_pred does not equal argmax(probs)");
    }
}

int infer_num_classes(const std::vector<PredictionRecord>& records) {
    int m = 2;
    for (const auto& r : records) {
        if (r.has_probs()) {
            return static_cast<int>(r.probs.size());
        }
        m = std::max({m, r.y_true + 1, r.y_pred + 1});
    }
    return m;
}

Dataset make_dataset(std::vector<PredictionRecord> records, FeatureMatrix features,
                     std::optional<int> num_classes) {
    if (records.size() != features.n) {
        throw AlignmentError("dataset has " + std::to_string(records.size()) + " records but " +
                             std::to_string(features.n) + " feature rows");
    }
    const int m = num_classes.value_or(infer_num_classes(records));
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (const auto& r : records) {
        if (!seen.insert(r.id).second) {
            throw ValidationError("duplicate id '" + r.id + "'");
        }
        validate_record(r, m);
    }
    for (double v : features.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("feature matrix contains a non-finite entry");
        }
    }
    Dataset d;
    d.records = std::move(records);
    d.features = std::move(features);
    d.num_classes = m;
    return d;
}

std::vector<PredictionRecord> parse_predictions(std::string_view text, std::optional<int> num_classes) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw SchemaError("predictions file has no header row");
    }
    const auto header = text::split_csv_line(lines.front());
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col.emplace(header[i], i);
    }
    for (const char* required : {"id", "y_true", "y_pred", "conf"}) {
        if (!col.contains(required)) {
            throw SchemaError(std::string("predictions file is missing column '") + required + "'");
        }
    }
    const std::optional<std::size_t> group_col =
        col.contains("group") ? std::optional<std::size_t>(col.at("group")) : std::nullopt;
    std::vector<std::size_t> prob_cols;
    while (col.contains("p" + std::to_string(prob_cols.size()))) {
        prob_cols.push_back(col.at("p" + std::to_string(prob_cols.size())));
    }

    std::vector<PredictionRecord> records;
    records.reserve(lines.size() - 1);
    std::unordered_set<std::string> seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto fields = text::split_csv_line(lines[li]);
        // Trailing fields may be omitted; extra trailing fields must be empty.
        for (std::size_t i = header.size(); i < fields.size(); ++i) {
            if (!fields[i].empty()) {
                throw SchemaError("line " + std::to_string(li + 1) + " has more fields than the header");
            }
        }
        fields.resize(header.size());
        PredictionRecord r;
        r.id = fields[col.at("id")];
        if (r.id.empty()) {
            throw ValidationError("line " + std::to_string(li + 1) + ": empty id");
        }
        const auto where = "row '" + r.id + "' ";
        r.y_true = static_cast<int>(text::parse_int(fields[col.at("y_true")], where + "y_true"));
        r.y_pred = static_cast<int>(text::parse_int(fields[col.at("y_pred")], where + "y_pred"));
        r.conf = text::parse_double(fields[col.at("conf")], where + "conf");
        if (group_col && !fields[*group_col].empty()) {
            r.group = fields[*group_col];
        }
        std::size_t present = 0;
        for (auto c : prob_cols) {
            present += fields[c].empty() ? 0 : 1;
        }
        if (present == prob_cols.size() && present > 0) {
            for (auto c : prob_cols) {
                r.probs.push_back(text::parse_double(fields[c], where + "probability"));
            }
        } else if (present != 0) {
            throw ValidationError(where + "has a partially filled probability vector");
        }
        if (!(r.conf >= 0.0 && r.conf <= 1.0)) {
            throw ValidationError(where + "conf " + fields[col.at("conf")] + " outside [0,1]");
        }
        if (!seen.insert(r.id).second) {
            throw ValidationError("duplicate id '" + r.id + "'");
        }
        records.push_back(std::move(r));
    }
    const int m = num_classes.value_or(infer_num_classes(records));
    for (const auto& r : records) {
        validate_record(r, m);
    }
    return records;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::optional<int> num_classes) {
    return parse_predictions(text::read_file(path), num_classes);
}

FeatureMatrix parse_features_csv(std::string_view text, const std::vector<PredictionRecord>& records) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw SchemaError("features file has no header row");
    }
    const auto header = text::split_csv_line(lines.front());
    if (header.empty() || header.front() != "id") {
        throw SchemaError("features file is missing column 'id'");
    }
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[j + 1] != "f" + std::to_string(j)) {
            throw SchemaError("features file is missing column 'f" + std::to_string(j) + "'");
        }
    }

    std::unordered_map<std::string, std::size_t> slot;
    slot.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        slot.emplace(records[i].id, i);
    }

    FeatureMatrix m(records.size(), d);
    std::vector<bool> filled(records.size(), false);
    std::vector<std::string> extra;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = text::split_csv_line(lines[li]);
        if (fields.size() != d + 1) {
            throw SchemaError("features line " + std::to_string(li + 1) + " has " +
                              std::to_string(fields.size()) + " fields, expected " + std::to_string(d + 1));
        }
        auto it = slot.find(fields[0]);
        if (it == slot.end()) {
            extra.push_back(fields[0]);
            continue;
        }
        if (filled[it->second]) {
            throw ValidationError("duplicate feature id '" + fields[0] + "'");
        }
        filled[it->second] = true;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = text::parse_double(fields[j + 1], "feature of '" + fields[0] + "'");
            if (!std::isfinite(v)) {
                throw ValidationError("feature row '" + fields[0] + "' contains a non-finite entry");
            }
            m(it->second, j) = v;
        }
    }

    std::vector<std::string> missing;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!filled[i]) {
            missing.push_back(records[i].id);
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::ostringstream msg;
        msg << "feature ids do not match prediction ids";
        if (!missing.empty()) {
            msg << "; " << missing.size() << " missing:";
            for (std::size_t i = 0; i < std::min<std::size_t>(5, missing.size()); ++i) {
                msg << ' ' << missing[i];
            }
        }
        if (!extra.empty()) {
            msg << "; " << extra.size() << " unexpected:";
            for (std::size_t i = 0; i < std::min<std::size_t>(5, extra.size()); ++i) {
                msg << ' ' << extra[i];
            }
        }
        throw AlignmentError(msg.str());
    }
    return m;
}

FeatureMatrix load_features_csv(const std::filesystem::path& path, const std::vector<PredictionRecord>& records) {
    return parse_features_csv(text::read_file(path), records);
}

FeatureMatrix decode_features_raw(std::span<const unsigned char> bytes, std::size_t n, std::size_t d) {
    const std::size_t expected = n * d * 4;
    if (bytes.size() != expected) {
        throw LengthError("raw feature payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(expected) + " for n=" + std::to_string(n) + ", d=" + std::to_string(d));
    }
    FeatureMatrix m(n, d);
    for (std::size_t k = 0; k < n * d; ++k) {
        const unsigned char* p = bytes.data() + 4 * k;
        const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                   (static_cast<std::uint32_t>(p[2]) << 16) |
                                   (static_cast<std::uint32_t>(p[3]) << 24);
        const float f = std::bit_cast<float>(bits);
        if (!std::isfinite(f)) {
            throw ValidationError("raw feature row " + std::to_string(k / d) + " contains a non-finite entry");
        }
        m.values[k] = static_cast<double>(f);
    }
    return m;
}

std::vector<unsigned char> encode_features_raw(const FeatureMatrix& m) {
    std::vector<unsigned char> out(m.values.size() * 4);
    for (std::size_t k = 0; k < m.values.size(); ++k) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m.values[k]));
        for (int b = 0; b < 4; ++b) {
            out[4 * k + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu);
        }
    }
    return out;
}

FeatureMatrix load_features_raw(const std::filesystem::path& path, const std::filesystem::path& descriptor) {
    nlohmann::json desc;
    try {
        desc = nlohmann::json::parse(text::read_file(descriptor));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad feature descriptor " + descriptor.string() + ": " + e.what());
    }
    if (!desc.contains("n") || !desc.contains("d") || !desc["n"].is_number_unsigned() ||
        !desc["d"].is_number_unsigned()) {
        throw SchemaError("feature descriptor must be {\"n\":N,\"d\":D}");
    }
    const auto raw = text::read_file(path);
    return decode_features_raw(std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()),
                               desc["n"].get<std::size_t>(), desc["d"].get<std::size_t>());
}

Dataset load_dataset(const std::filesystem::path& predictions, const std::filesystem::path& features,
                     std::optional<int> num_classes) {
    auto records = load_predictions(predictions, num_classes);
    FeatureMatrix f;
    if (features.extension() == ".f32") {
        auto desc = features;
        desc += ".json";
        f = load_features_raw(features, desc);
    } else {
        f = load_features_csv(features, records);
    }
    return make_dataset(std::move(records), std::move(f), num_classes);
}

std::string format_predictions(const Dataset& d) {
    const bool any_probs = std::any_of(d.records.begin(), d.records.end(),
                                       [](const PredictionRecord& r) { return r.has_probs(); });
    const int m = any_probs ? d.num_classes : 0;
    std::string out = "id,y_true,y_pred,conf,group";
    for (int c = 0; c < m; ++c) {
        out += ",p" + std::to_string(c);
    }
    out += '\n';
    for (const auto& r : d.records) {
        out += r.id;
        out += ',' + std::to_string(r.y_true);
        out += ',' + std::to_string(r.y_pred);
        out += ',' + text::format_double(r.conf);
        out += ',' + r.group.value_or("");
        for (int c = 0; c < m; ++c) {
            out += ',';
            if (r.has_probs()) {
                out += text::format_double(r.probs[static_cast<std::size_t>(c)]);
            }
        }
        out += '\n';
    }
    return out;
}

std::string format_features_csv(const Dataset& d) {
    std::string out = "id";
    for (std::size_t j = 0; j < d.features.d; ++j) {
        out += ",f" + std::to_string(j);
    }
    out += '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += d.records[i].id;
        for (double v : d.features.row(i)) {
            out += ',' + text::format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace calib
