#pragma once

// The document model: 100 novelle with day, position, storyteller, rubric and
// text, plus optional frame-tale passages. Reads and writes the simplified
// JSON interchange format and produces integrity reports.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "brigata/unicode.hpp"

namespace brigata {

/// Schema violation in an input file; `path` points at the offending field,
/// e.g. "novelle[0].day".
struct SchemaError : std::runtime_error {
    std::string path;
    SchemaError(const std::string& msg, std::string p)
        : std::runtime_error(msg + " at " + p), path(std::move(p)) {}
};

struct ValidationFailure : std::runtime_error {
    explicit ValidationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Gender { woman, man };

/// The ten brigata members in the fixed roster order used for class indices
/// and table columns throughout the toolkit.
struct NarratorRoster {
    std::vector<std::string> names;
    std::unordered_map<std::string, Gender> gender;

    static const NarratorRoster& canonical() {
        static const NarratorRoster r = [] {
            NarratorRoster r;
            r.names = {"Panfilo", "Neifile",    "Filomena", "Dioneo", "Fiammetta",
                       "Emilia",  "Filostrato", "Lauretta", "Elissa", "Pampinea"};
            for (const auto& n : r.names) r.gender[n] = Gender::woman;
            r.gender["Panfilo"] = Gender::man;
            r.gender["Dioneo"] = Gender::man;
            r.gender["Filostrato"] = Gender::man;
            return r;
        }();
        return r;
    }

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    // Case-insensitive match against the canonical names.
    std::optional<std::string> canonicalize(std::string_view name) const {
        auto cps = to_codepoints(name);
        for (auto& cp : cps) cp = lower_cp(cp);
        std::string lowered = from_codepoints(cps.data(), cps.size());
        for (const auto& n : names) {
            auto ncps = to_codepoints(n);
            for (auto& cp : ncps) cp = lower_cp(cp);
            if (from_codepoints(ncps.data(), ncps.size()) == lowered) return n;
        }
        return std::nullopt;
    }
};

struct Novella {
    int day = 0;       // 1..10
    int position = 0;  // 1..10, ordinal within the day
    std::string storyteller;
    std::optional<std::string> rubric;
    std::string text;

    bool operator==(const Novella&) const = default;
};

struct FramePassage {
    std::string label;
    std::string text;
    bool operator==(const FramePassage&) const = default;
};

struct Corpus {
    std::string source_note;
    bool complete = false;
    std::vector<Novella> novelle;
    std::vector<FramePassage> frame_passages;

    bool operator==(const Corpus&) const = default;
};

struct ValidationReport {
    bool complete = false;
    std::map<std::string, int> storyteller_counts;   // all canonical names listed
    std::vector<std::pair<int, int>> gaps;           // (day,position) missing from the 10x10 grid
    std::vector<std::pair<int, int>> duplicates;     // (day,position) seen more than once
    std::vector<size_t> empty_texts;                 // indices of whitespace-only novelle
    std::vector<std::string> findings;

    std::string to_string() const {
        std::ostringstream out;
        out << "complete: " << (complete ? "true" : "false") << "\n";
        out << "storyteller counts:";
        for (const auto& [name, n] : storyteller_counts) out << " " << name << "=" << n;
        out << "\n";
        if (findings.empty()) {
            out << "findings: none\n";
        } else {
            out << "findings (" << findings.size() << "):\n";
            for (const auto& f : findings) out << "  - " << f << "\n";
        }
        return out.str();
    }
};

namespace detail {

inline std::string json_type_name(const nlohmann::json& j) {
    return std::string(j.type_name());
}

inline void warn(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

}  // namespace detail

/// Parses the simplified JSON corpus format. Field ranges are checked here;
/// corpus-level integrity (coverage, counts) belongs to validate_corpus.
/// Unknown keys are skipped and reported through `warnings` when given.
inline Corpus load_json(std::string_view json_text, std::vector<std::string>* warnings = nullptr) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what(), "$");
    }
    if (!root.is_object()) throw SchemaError("expected an object", "$");

    Corpus corpus;
    const auto& roster = NarratorRoster::canonical();

    for (const auto& [key, value] : root.items()) {
        if (key == "source_note") {
            if (!value.is_string()) throw SchemaError("source_note must be a string", "source_note");
            corpus.source_note = value.get<std::string>();
        } else if (key == "complete") {
            if (!value.is_boolean()) throw SchemaError("complete must be a bool", "complete");
            corpus.complete = value.get<bool>();
        } else if (key == "novelle") {
            if (!value.is_array()) throw SchemaError("novelle must be an array", "novelle");
        } else if (key == "frame_passages") {
            if (!value.is_array())
                throw SchemaError("frame_passages must be an array", "frame_passages");
        } else {
            detail::warn(warnings, "ignoring unknown key '" + key + "'");
        }
    }
    if (!root.contains("novelle")) throw SchemaError("missing required key", "novelle");

    size_t i = 0;
    for (const auto& item : root["novelle"]) {
        const std::string base = "novelle[" + std::to_string(i) + "]";
        if (!item.is_object()) throw SchemaError("expected an object", base);
        Novella nov;
        bool saw_day = false, saw_pos = false, saw_teller = false, saw_text = false;
        for (const auto& [key, value] : item.items()) {
            if (key == "day") {
                if (!value.is_number_integer())
                    throw SchemaError("day must be an integer", base + ".day");
                nov.day = value.get<int>();
                saw_day = true;
            } else if (key == "position") {
                if (!value.is_number_integer())
                    throw SchemaError("position must be an integer", base + ".position");
                nov.position = value.get<int>();
                saw_pos = true;
            } else if (key == "storyteller") {
                if (!value.is_string())
                    throw SchemaError("storyteller must be a string", base + ".storyteller");
                nov.storyteller = value.get<std::string>();
                saw_teller = true;
            } else if (key == "rubric") {
                if (value.is_null()) {
                    nov.rubric = std::nullopt;
                } else if (value.is_string()) {
                    nov.rubric = value.get<std::string>();
                } else {
                    throw SchemaError("rubric must be a string or null", base + ".rubric");
                }
            } else if (key == "text") {
                if (!value.is_string()) throw SchemaError("text must be a string", base + ".text");
                nov.text = value.get<std::string>();
                saw_text = true;
            } else {
                detail::warn(warnings, "ignoring unknown key '" + key + "' at " + base);
            }
        }
        if (!saw_day) throw SchemaError("missing required key", base + ".day");
        if (!saw_pos) throw SchemaError("missing required key", base + ".position");
        if (!saw_teller) throw SchemaError("missing required key", base + ".storyteller");
        if (!saw_text) throw SchemaError("missing required key", base + ".text");
        if (nov.day < 1 || nov.day > 10)
            throw SchemaError("day out of range [1,10]", base + ".day");
        if (nov.position < 1 || nov.position > 10)
            throw SchemaError("position out of range [1,10]", base + ".position");
        auto canon = roster.canonicalize(nov.storyteller);
        if (!canon)
            throw SchemaError("unknown storyteller '" + nov.storyteller + "'",
                              base + ".storyteller");
        nov.storyteller = *canon;
        if (normalize_whitespace(nov.text).empty())
            throw SchemaError("text is empty", base + ".text");
        corpus.novelle.push_back(std::move(nov));
        ++i;
    }

    if (root.contains("frame_passages")) {
        size_t j = 0;
        for (const auto& item : root["frame_passages"]) {
            const std::string base = "frame_passages[" + std::to_string(j) + "]";
            if (!item.is_object()) throw SchemaError("expected an object", base);
            FramePassage fp;
            if (!item.contains("label") || !item["label"].is_string())
                throw SchemaError("label must be a string", base + ".label");
            if (!item.contains("text") || !item["text"].is_string())
                throw SchemaError("text must be a string", base + ".text");
            fp.label = item["label"].get<std::string>();
            fp.text = item["text"].get<std::string>();
            for (const auto& [key, value] : item.items()) {
                (void)value;
                if (key != "label" && key != "text")
                    detail::warn(warnings, "ignoring unknown key '" + key + "' at " + base);
            }
            corpus.frame_passages.push_back(std::move(fp));
            ++j;
        }
    }
    return corpus;
}

/// Deterministic serialization: fixed key order, 2-space indent, UTF-8 kept
/// raw, trailing newline. load_json(save_json(c)) == c field-for-field.
inline std::string save_json(const Corpus& corpus) {
    nlohmann::ordered_json root;
    root["source_note"] = corpus.source_note;
    root["complete"] = corpus.complete;
    root["novelle"] = nlohmann::ordered_json::array();
    for (const auto& nov : corpus.novelle) {
        nlohmann::ordered_json j;
        j["day"] = nov.day;
        j["position"] = nov.position;
        j["storyteller"] = nov.storyteller;
        if (nov.rubric)
            j["rubric"] = *nov.rubric;
        else
            j["rubric"] = nullptr;
        j["text"] = nov.text;
        root["novelle"].push_back(std::move(j));
    }
    root["frame_passages"] = nlohmann::ordered_json::array();
    for (const auto& fp : corpus.frame_passages) {
        nlohmann::ordered_json j;
        j["label"] = fp.label;
        j["text"] = fp.text;
        root["frame_passages"].push_back(std::move(j));
    }
    return root.dump(2, ' ', false) + "\n";
}

/// Integrity report: storyteller counts, (day,position) coverage gaps,
/// duplicates and empty texts. complete := 100 novelle and every canonical
/// storyteller counted exactly 10 times.
inline ValidationReport validate_corpus(const Corpus& corpus) {
    const auto& roster = NarratorRoster::canonical();
    ValidationReport report;
    for (const auto& name : roster.names) report.storyteller_counts[name] = 0;

    std::map<std::pair<int, int>, int> position_counts;
    for (size_t i = 0; i < corpus.novelle.size(); ++i) {
        const auto& nov = corpus.novelle[i];
        ++report.storyteller_counts[nov.storyteller];
        if (roster.index_of(nov.storyteller) < 0)
            report.findings.push_back("unknown storyteller '" + nov.storyteller + "' in novella (" +
                                      std::to_string(nov.day) + "," +
                                      std::to_string(nov.position) + ")");
        ++position_counts[{nov.day, nov.position}];
        if (normalize_whitespace(nov.text).empty()) {
            report.empty_texts.push_back(i);
            report.findings.push_back("empty text in novella (" + std::to_string(nov.day) + "," +
                                      std::to_string(nov.position) + ")");
        }
    }
    for (int day = 1; day <= 10; ++day) {
        for (int pos = 1; pos <= 10; ++pos) {
            auto it = position_counts.find({day, pos});
            if (it == position_counts.end()) {
                report.gaps.emplace_back(day, pos);
            } else if (it->second > 1) {
                report.duplicates.emplace_back(day, pos);
                report.findings.push_back("(" + std::to_string(day) + "," + std::to_string(pos) +
                                          ") appears " + std::to_string(it->second) + " times");
            }
        }
    }
    bool counts_ok = true;
    for (const auto& name : roster.names) {
        int n = report.storyteller_counts[name];
        if (n != 10) counts_ok = false;
    }
    report.complete = corpus.novelle.size() == 100 && counts_ok;
    if (!report.complete) {
        for (const auto& g : report.gaps)
            report.findings.push_back("(" + std::to_string(g.first) + "," +
                                      std::to_string(g.second) + ") absent");
        for (const auto& name : roster.names) {
            int n = report.storyteller_counts[name];
            if (n != 10)
                report.findings.push_back(name + " told " + std::to_string(n) +
                                          " novelle, expected 10");
        }
    }
    return report;
}

}  // namespace brigata
