#include "calib/persist.hpp"

#include <json.hpp>

#include "calib/error.hpp"
#include "calib/text.hpp"

namespace calib {

using nlohmann::json;

namespace {

json to_json(const BinningScheme& s) { return {{"kind", to_string(s.kind())}, {"edges", s.edges()}}; }

BinningScheme scheme_from(const json& j) {
    return BinningScheme(parse_bin_kind(j.at("kind").get<std::string>()), j.at("edges").get<std::vector<double>>());
}

json to_json(const KernelSpec& k) {
    return {{"family", to_string(k.family)}, {"gamma", k.gamma}, {"dim", k.dim}};
}

KernelSpec kernel_from(const json& j) {
    KernelSpec k;
    k.family = parse_kernel_family(j.at("family").get<std::string>());
    k.gamma = j.at("gamma").get<double>();
    k.dim = j.at("dim").get<std::size_t>();
    return k;
}

json to_json(const FeatureMatrix& m) { return {{"n", m.n}, {"d", m.d}, {"values", m.values}}; }

FeatureMatrix matrix_from(const json& j) {
    FeatureMatrix m;
    m.n = j.at("n").get<std::size_t>();
    m.d = j.at("d").get<std::size_t>();
    m.values = j.at("values").get<std::vector<double>>();
    if (m.values.size() != m.n * m.d) {
        throw FormatVersionError("matrix payload does not match its shape");
    }
    return m;
}

json to_json(const PcaTransform& t) {
    return {{"k", t.k}, {"mean", t.mean}, {"components", t.components}, {"variances", t.variances}};
}

PcaTransform pca_from(const json& j) {
    PcaTransform t;
    t.k = j.at("k").get<std::size_t>();
    t.mean = j.at("mean").get<std::vector<double>>();
    t.components = j.at("components").get<std::vector<double>>();
    t.variances = j.at("variances").get<std::vector<double>>();
    return t;
}

json to_json(const HbState& s) {
    return {{"scheme", to_json(s.scheme)},
            {"accuracy", s.accuracy},
            {"count", s.count},
            {"global_accuracy", s.global_accuracy}};
}

HbState hb_from(const json& j) {
    HbState s;
    s.scheme = scheme_from(j.at("scheme"));
    s.accuracy = j.at("accuracy").get<std::vector<double>>();
    s.count = j.at("count").get<std::vector<std::size_t>>();
    s.global_accuracy = j.at("global_accuracy").get<double>();
    if (s.accuracy.size() != s.scheme.size() || s.count.size() != s.scheme.size()) {
        throw FormatVersionError("histogram-binning state does not match its bin count");
    }
    return s;
}

json to_json(const LoReState& s) {
    json groups = json::array();
    for (const auto& g : s.ref_groups) {
        groups.push_back(g ? json(*g) : json(nullptr));
    }
    json j = {{"kernel", to_json(s.kernel)},
              {"scheme", to_json(s.scheme)},
              {"ref_conf", s.ref_conf},
              {"ref_correct", s.ref_correct},
              {"ref_features", to_json(s.ref_features)},
              {"ref_groups", groups},
              {"global_accuracy", s.global_accuracy}};
    j["pca"] = s.pca ? to_json(*s.pca) : json(nullptr);
    return j;
}

LoReState lore_from(const json& j) {
    LoReState s;
    s.kernel = kernel_from(j.at("kernel"));
    s.scheme = scheme_from(j.at("scheme"));
    s.ref_conf = j.at("ref_conf").get<std::vector<double>>();
    s.ref_correct = j.at("ref_correct").get<std::vector<std::uint8_t>>();
    s.ref_features = matrix_from(j.at("ref_features"));
    for (const auto& g : j.at("ref_groups")) {
        s.ref_groups.push_back(g.is_null() ? std::nullopt : std::optional<std::string>(g.get<std::string>()));
    }
    s.global_accuracy = j.at("global_accuracy").get<double>();
    if (!j.at("pca").is_null()) {
        s.pca = pca_from(j.at("pca"));
    }
    const auto n = s.ref_conf.size();
    if (s.ref_correct.size() != n || s.ref_groups.size() != n ||
        (s.kernel.uses_features() && s.ref_features.n != n)) {
        throw FormatVersionError("LoRe reference arrays have inconsistent lengths");
    }
    return s;
}

template <class State, class Fn>
json group_map(const std::map<std::string, State>& groups, Fn&& fn) {
    json j = json::object();
    for (const auto& [name, st] : groups) {
        j[name] = fn(st);
    }
    return j;
}

}  // namespace

std::string serialize_recalibrator(const RecalibratorState& state) {
    json body;
    if (const auto* s = std::get_if<LoReState>(&state)) {
        body = to_json(*s);
    } else if (const auto* s = std::get_if<HbState>(&state)) {
        body = to_json(*s);
    } else if (const auto* s = std::get_if<TsState>(&state)) {
        body = {{"temperature", s->temperature}};
    } else if (const auto* s = std::get_if<IrState>(&state)) {
        body = {{"x", s->x}, {"v", s->v}};
    } else if (const auto* s = std::get_if<GroupwiseHbState>(&state)) {
        body = {{"groups", group_map(s->groups, [](const HbState& h) { return to_json(h); })},
                {"global", to_json(s->global)}};
    } else if (const auto* s = std::get_if<GroupwiseTsState>(&state)) {
        body = {{"groups", group_map(s->groups, [](const TsState& t) { return json{{"temperature", t.temperature}}; })},
                {"global", {{"temperature", s->global.temperature}}}};
    }
    json doc = {{"format", "calib-recalibrator"},
                {"version", kRecalibratorFormatVersion},
                {"method", method_tag(state)},
                {"state", body}};
    return doc.dump(1) + "\n";
}

RecalibratorState deserialize_recalibrator(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatVersionError(std::string("recalibrator file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("format", "") != "calib-recalibrator") {
            throw FormatVersionError("not a recalibrator file");
        }
        if (doc.value("version", 0) != kRecalibratorFormatVersion) {
            throw FormatVersionError("unsupported recalibrator format version " + doc.value("version", json()).dump());
        }
        const auto method = doc.value("method", "");
        const json& body = doc.at("state");
        if (method == "lore") {
            return lore_from(body);
        }
        if (method == "hb") {
            return hb_from(body);
        }
        if (method == "ts") {
            return TsState{body.at("temperature").get<double>()};
        }
        if (method == "ir") {
            IrState s{body.at("x").get<std::vector<double>>(), body.at("v").get<std::vector<double>>()};
            if (s.x.size() != s.v.size()) {
                throw FormatVersionError("isotonic state has mismatched breakpoints");
            }
            return s;
        }
        if (method == "group-hb") {
            GroupwiseHbState s;
            for (const auto& [name, st] : body.at("groups").items()) {
                s.groups.emplace(name, hb_from(st));
            }
            s.global = hb_from(body.at("global"));
            return s;
        }
        if (method == "group-ts") {
            GroupwiseTsState s;
            for (const auto& [name, st] : body.at("groups").items()) {
                s.groups.emplace(name, TsState{st.at("temperature").get<double>()});
            }
            s.global = TsState{body.at("global").at("temperature").get<double>()};
            return s;
        }
        throw FormatVersionError("unknown recalibration method tag '" + method + "'");
    } catch (const json::exception& e) {
        throw FormatVersionError(std::string("malformed recalibrator file: ") + e.what());
    } catch (const ArgumentError& e) {
        throw FormatVersionError(std::string("malformed recalibrator file: ") + e.what());
    }
}

void save_recalibrator(const RecalibratorState& state, const std::filesystem::path& path) {
    text::write_file_atomic(path, serialize_recalibrator(state));
}

RecalibratorState load_recalibrator(const std::filesystem::path& path) {
    return deserialize_recalibrator(text::read_file(path));
}

}  // namespace calib
