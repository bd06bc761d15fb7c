#pragma once

#include "lumpcheck/abstraction.hpp"
#include "lumpcheck/engine.hpp"
#include "lumpcheck/errors.hpp"
#include "lumpcheck/interval.hpp"
#include "lumpcheck/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lumpcheck::io {

using nlohmann::json;

/// 12 significant digits, the precision of every emitted number.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    std::string s(buf);
    return s == "-0" ? "0" : s;
}

/// Rounds to 12 significant digits so that JSON output prints the short form.
inline double round12(double v) { return std::stod(format_number(v)); }

inline json vector_json(const Vector& v) {
    json out = json::array();
    for (double x : v) out.push_back(round12(x));
    return out;
}

inline json label_json(const LabelSet& label) {
    json out = json::array();
    for (const auto& p : label) out.push_back(p);
    return out;
}

inline LabelSet label_from_json(const json& j) {
    if (!j.is_array()) throw InvalidModel("a label must be an array of strings");
    LabelSet out;
    for (const auto& p : j) {
        if (!p.is_string()) throw InvalidModel("a label must be an array of strings");
        out.insert(p.get<std::string>());
    }
    return out;
}

inline Vector numbers_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw InvalidModel(std::string(what) + " must be an array of numbers");
    Vector out;
    for (const auto& x : j) {
        if (!x.is_number()) throw InvalidModel(std::string(what) + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidModel(std::string("malformed JSON: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidModel("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

// Model files

inline RawModel raw_model_from_json(const json& j) {
    if (!j.is_object()) throw InvalidModel("model file must be a JSON object");
    RawModel raw;
    if (!j.contains("states") || !j["states"].is_array()) throw InvalidModel("missing 'states' array");
    for (const auto& s : j["states"]) {
        if (!s.is_object() || !s.contains("id") || !s["id"].is_string())
            throw InvalidModel("every state needs a string 'id'");
        raw.states.push_back(s["id"].get<std::string>());
        if (s.contains("label")) raw.labels.emplace_back(label_from_json(s["label"]));
        else raw.labels.emplace_back(std::nullopt);
    }
    if (!j.contains("initial") || !j["initial"].is_string()) throw InvalidModel("missing 'initial' state id");
    raw.initial = j["initial"].get<std::string>();
    if (!j.contains("matrix") || !j["matrix"].is_array()) throw InvalidModel("missing 'matrix'");
    for (const auto& row : j["matrix"]) raw.matrix.push_back(numbers_from_json(row, "a matrix row"));
    if (j.contains("initial_distribution"))
        raw.initial_distribution = numbers_from_json(j["initial_distribution"], "'initial_distribution'");
    return raw;
}

inline LabeledMarkovChain model_from_json(const json& j) { return validate_model(raw_model_from_json(j)); }

inline LabeledMarkovChain load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

inline json model_json(const LabeledMarkovChain& chain) {
    json j;
    j["states"] = json::array();
    for (State s = 0; s < chain.size(); ++s)
        j["states"].push_back({{"id", chain.id(s)}, {"label", label_json(chain.label(s))}});
    j["initial"] = chain.id(chain.initial_state());
    j["matrix"] = json::array();
    for (const auto& row : chain.matrix()) j["matrix"].push_back(vector_json(row));
    if (chain.has_explicit_distribution()) j["initial_distribution"] = vector_json(chain.initial_distribution());
    return j;
}

// Abstractions

inline json lumped_json(const LumpedChain& lumped, const LabeledMarkovChain& concrete) {
    json j = model_json(lumped.chain);
    j["epsilon"] = round12(lumped.epsilon);
    j["representatives"] = json::array();
    for (State s : lumped.representatives) j["representatives"].push_back(concrete.id(s));
    return j;
}

inline json interval_row_json(const IntervalRow& row) {
    json out = json::array();
    for (std::size_t l = 0; l < row.size(); ++l) out.push_back({round12(row.lower[l]), round12(row.upper[l])});
    return out;
}

inline IntervalRow interval_row_from_json(const json& j) {
    if (!j.is_array()) throw InvalidModel("an interval row must be an array of [lo,hi] pairs");
    IntervalRow row;
    for (const auto& pair : j) {
        const auto v = numbers_from_json(pair, "an interval");
        if (v.size() != 2) throw InvalidModel("an interval must be a [lo,hi] pair");
        row.lower.push_back(v[0]);
        row.upper.push_back(v[1]);
    }
    return row;
}

inline void put_blocks(json& j, const BlockStructure& b) {
    j["names"] = b.names;
    j["blocks"] = b.members;
    j["labels"] = json::array();
    for (const auto& l : b.labels) j["labels"].push_back(label_json(l));
    j["initial"] = b.names[b.initial];
}

inline BlockStructure blocks_from_json(const json& j) {
    if (!j.is_object() || !j.contains("blocks") || !j.contains("labels"))
        throw InvalidModel("abstraction file needs 'blocks' and 'labels'");
    BlockStructure b;
    b.members = j["blocks"].get<std::vector<std::vector<std::string>>>();
    for (const auto& l : j["labels"]) b.labels.push_back(label_from_json(l));
    if (b.labels.size() != b.members.size()) throw InvalidModel("'labels' and 'blocks' differ in length");
    if (j.contains("names")) {
        b.names = j["names"].get<std::vector<std::string>>();
    } else {
        for (std::size_t i = 0; i < b.members.size(); ++i) b.names.push_back("S" + std::to_string(i));
    }
    if (b.names.size() != b.members.size()) throw InvalidModel("'names' and 'blocks' differ in length");
    b.initial = j.contains("initial") ? b.index_of(j["initial"].get<std::string>()) : 0;
    return b;
}

inline Vector xi_from_json(const json& j, std::size_t m) {
    if (!j.contains("xi")) throw InvalidModel("abstraction file needs 'xi'");
    auto xi = numbers_from_json(j["xi"], "'xi'");
    if (xi.size() != m) throw InvalidModel("'xi' has the wrong length");
    for (double x : xi)
        if (!(x >= 0.0 && x <= 1.0)) throw InvalidModel("'xi' entries must lie in [0,1]");
    return xi;
}

inline json imdpa_json(const Imdpa& imdpa) {
    json j;
    put_blocks(j, imdpa.blocks);
    j["interval_rows"] = json::array();
    for (const auto& row : imdpa.intervals.rows()) j["interval_rows"].push_back(interval_row_json(row));
    j["xi"] = vector_json(imdpa.xi);
    return j;
}

inline Imdpa imdpa_from_json(const json& j) {
    Imdpa out;
    out.blocks = blocks_from_json(j);
    if (!j.contains("interval_rows")) throw InvalidModel("IMDPA file needs 'interval_rows'");
    std::vector<IntervalRow> rows;
    for (const auto& r : j["interval_rows"]) rows.push_back(interval_row_from_json(r));
    if (rows.size() != out.blocks.size()) throw InvalidModel("'interval_rows' has the wrong length");
    out.intervals = IntervalMatrix(std::move(rows));
    out.xi = xi_from_json(j, out.blocks.size());
    return out;
}

inline json mdpa_json(const Mdpa& mdpa) {
    json j;
    put_blocks(j, mdpa.blocks);
    j["actions"] = json::array();
    for (const auto& acts : mdpa.actions) {
        json a = json::array();
        for (const auto& v : acts) a.push_back(vector_json(v));
        j["actions"].push_back(std::move(a));
    }
    j["xi"] = vector_json(mdpa.xi);
    return j;
}

inline Mdpa mdpa_from_json(const json& j) {
    Mdpa out;
    out.blocks = blocks_from_json(j);
    if (!j.contains("actions") || !j["actions"].is_array()) throw InvalidModel("MDPA file needs 'actions'");
    const std::size_t m = out.blocks.size();
    for (const auto& acts : j["actions"]) {
        auto& list = out.actions.emplace_back();
        for (const auto& a : acts) {
            auto v = numbers_from_json(a, "an action");
            if (v.size() != m) throw InvalidModel("action has the wrong dimension");
            if (!is_stochastic(v)) throw InvalidModel("action is not a stochastic vector");
            for (const auto& prev : list)
                if (detail::approx_equal(prev, v, kEqualityTolerance)) throw InvalidModel("duplicate action");
            list.push_back(std::move(v));
        }
        if (list.empty()) throw InvalidModel("every block needs at least one action");
    }
    if (out.actions.size() != m) throw InvalidModel("'actions' has the wrong length");
    out.xi = xi_from_json(j, m);
    return out;
}

// Comparison table

inline constexpr const char* kComparisonHeader =
    "k,p_concrete,std_p,std_lo,std_hi,mdpa_pmin,mdpa_pmax,mdpa_lo,mdpa_hi,eps_k";

inline void write_csv(std::ostream& out, const ComparisonTable& table) {
    out << kComparisonHeader << '\n';
    for (const auto& r : table.rows) {
        out << r.k;
        for (double v : {r.p_concrete, r.std_p, r.std_lo, r.std_hi, r.mdpa_pmin, r.mdpa_pmax, r.mdpa_lo,
                         r.mdpa_hi, r.eps_k})
            out << ',' << format_number(v);
        out << '\n';
    }
}

} // namespace lumpcheck::io
