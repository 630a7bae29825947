#pragma once

// Rule-driven TEI P4 ingestion. The rules file names the division types that
// delimit days and novelle, the elements whose content must never reach the
// corpus (editorial notes, page breaks, headers) and the (day,position) ->
// storyteller table absent from the digitized edition.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brigata/corpus.hpp"
#include "brigata/unicode.hpp"
#include "brigata/xml.hpp"

namespace brigata {

/// Division structure did not match the ingestion rules.
struct StructureError : std::runtime_error {
    explicit StructureError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IngestionRules {
    std::vector<std::string> deny_elements;
    std::string day_div_type = "giornata";
    std::string novella_div_type = "novella";
    std::string rubric_element = "head";
    std::map<std::pair<int, int>, std::string> teller_table;

    bool denied(const std::string& element_name) const {
        for (const auto& d : deny_elements)
            if (d == element_name) return true;
        return false;
    }

    static IngestionRules from_json(std::string_view json_text) {
        nlohmann::json root;
        try {
            root = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("not valid JSON: ") + e.what(), "$");
        }
        if (!root.is_object()) throw SchemaError("expected an object", "$");
        IngestionRules rules;
        if (root.contains("deny_elements")) {
            if (!root["deny_elements"].is_array())
                throw SchemaError("deny_elements must be an array", "deny_elements");
            for (const auto& e : root["deny_elements"]) {
                if (!e.is_string())
                    throw SchemaError("deny_elements entries must be strings", "deny_elements");
                rules.deny_elements.push_back(e.get<std::string>());
            }
        }
        if (root.contains("day_div_type")) rules.day_div_type = root["day_div_type"].get<std::string>();
        if (root.contains("novella_div_type"))
            rules.novella_div_type = root["novella_div_type"].get<std::string>();
        if (root.contains("rubric_element"))
            rules.rubric_element = root["rubric_element"].get<std::string>();
        if (root.contains("teller_table")) {
            if (!root["teller_table"].is_object())
                throw SchemaError("teller_table must be an object", "teller_table");
            for (const auto& [key, value] : root["teller_table"].items()) {
                int day = 0, pos = 0;
                char comma = 0;
                std::istringstream in(key);
                if (!(in >> day >> comma >> pos) || comma != ',')
                    throw SchemaError("teller_table keys must look like \"day,position\"",
                                      "teller_table." + key);
                if (!value.is_string())
                    throw SchemaError("teller_table values must be strings", "teller_table." + key);
                rules.teller_table[{day, pos}] = value.get<std::string>();
            }
        }
        return rules;
    }

    static IngestionRules load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open rules file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_json(buf.str());
    }
};

namespace detail {

// Appends the narrative text under `node`, skipping deny-listed subtrees.
// Element boundaries become spaces via fragment joining; the caller
// normalizes whitespace at the end.
inline void collect_text(const xml::Node& node, const IngestionRules& rules, std::string& out) {
    if (node.kind == xml::Node::Kind::text) {
        out += node.text;
        out += ' ';
        return;
    }
    if (rules.denied(node.name)) return;
    for (const auto& child : node.children) collect_text(child, rules, out);
}

inline const std::string* div_type(const xml::Node& node) {
    if (node.kind != xml::Node::Kind::element) return nullptr;
    return node.attr("type");
}

inline std::optional<int> parse_int_attr(const xml::Node& node, std::string_view key) {
    const std::string* v = node.attr(key);
    if (!v) return std::nullopt;
    try {
        size_t used = 0;
        int n = std::stoi(*v, &used);
        if (used != v->size()) return std::nullopt;
        return n;
    } catch (...) {
        return std::nullopt;
    }
}

struct TeiWalk {
    const IngestionRules& rules;
    Corpus& corpus;
    std::string stray;  // text outside any day division

    TeiWalk(const IngestionRules& r, Corpus& c) : rules(r), corpus(c) {}

    void walk_document(const xml::Node& node) {
        if (node.kind == xml::Node::Kind::text) {
            stray += node.text;
            stray += ' ';
            return;
        }
        if (rules.denied(node.name)) return;
        const std::string* type = div_type(node);
        if (type && *type == rules.day_div_type) {
            ++day_ordinal_;
            handle_day(node);
            return;
        }
        if (type && *type == rules.novella_div_type)
            throw StructureError("novella division at offset " + std::to_string(node.offset) +
                                 " is outside any day division");
        for (const auto& child : node.children) walk_document(child);
    }

    void finish() {
        std::string text = normalize_whitespace(stray);
        if (!text.empty()) corpus.frame_passages.push_back({"frame", std::move(text)});
    }

private:
    int day_ordinal_ = 0;

    void handle_day(const xml::Node& day_div) {
        int day = parse_int_attr(day_div, "n").value_or(day_ordinal_);
        if (day < 1 || day > 10)
            throw StructureError("day division at offset " + std::to_string(day_div.offset) +
                                 " has day number " + std::to_string(day) + ", expected 1..10");
        std::string frame;
        int novella_ordinal = 0;
        collect_day(day_div, day, novella_ordinal, frame, /*is_root=*/true);
        std::string text = normalize_whitespace(frame);
        if (!text.empty())
            corpus.frame_passages.push_back({"giornata " + std::to_string(day), std::move(text)});
    }

    void collect_day(const xml::Node& node, int day, int& novella_ordinal, std::string& frame,
                     bool is_root) {
        if (node.kind == xml::Node::Kind::text) {
            frame += node.text;
            frame += ' ';
            return;
        }
        if (rules.denied(node.name)) return;
        if (!is_root) {
            const std::string* type = div_type(node);
            if (type && *type == rules.novella_div_type) {
                ++novella_ordinal;
                handle_novella(node, day, novella_ordinal);
                return;
            }
            if (type && *type == rules.day_div_type)
                throw StructureError("nested day division at offset " +
                                     std::to_string(node.offset));
        }
        for (const auto& child : node.children) collect_day(child, day, novella_ordinal, frame, false);
    }

    void handle_novella(const xml::Node& div, int day, int ordinal) {
        int position = parse_int_attr(div, "n").value_or(ordinal);
        if (position < 1 || position > 10)
            throw StructureError("novella division at offset " + std::to_string(div.offset) +
                                 " has position " + std::to_string(position) + ", expected 1..10");
        Novella nov;
        nov.day = day;
        nov.position = position;

        std::string rubric;
        std::string body;
        for (const auto& child : div.children) {
            if (child.kind == xml::Node::Kind::element && child.name == rules.rubric_element) {
                collect_text(child, rules, rubric);
                continue;
            }
            collect_text(child, rules, body);
        }
        std::string rubric_text = normalize_whitespace(rubric);
        if (!rubric_text.empty()) nov.rubric = std::move(rubric_text);
        nov.text = normalize_whitespace(body);
        if (nov.text.empty())
            throw StructureError("novella (" + std::to_string(day) + "," +
                                 std::to_string(position) + ") has no narrative text");

        nov.storyteller = resolve_teller(div, day, position);
        corpus.novelle.push_back(std::move(nov));
    }

    std::string resolve_teller(const xml::Node& div, int day, int position) {
        const auto& roster = NarratorRoster::canonical();
        const std::string* from_xml = div.attr("teller");
        if (!from_xml) from_xml = div.attr("storyteller");
        std::string raw;
        if (from_xml) {
            raw = *from_xml;
        } else {
            auto it = rules.teller_table.find({day, position});
            if (it == rules.teller_table.end())
                throw StructureError("no storyteller mapping for novella (" + std::to_string(day) +
                                     "," + std::to_string(position) + ")");
            raw = it->second;
        }
        auto canon = roster.canonicalize(raw);
        if (!canon)
            throw ValidationFailure("unknown storyteller name '" + raw + "' for novella (" +
                                    std::to_string(day) + "," + std::to_string(position) + ")");
        return *canon;
    }
};

}  // namespace detail

/// Parses TEI P4 text into a Corpus under the given rules. Novelle are sorted
/// by (day, position); day-level text outside novella divisions is kept as
/// frame passages and never enters any analysis.
inline Corpus parse_tei(std::string_view xml_text, const IngestionRules& rules) {
    xml::Node root = xml::parse(xml_text);
    Corpus corpus;
    corpus.source_note = "TEI P4 import";
    detail::TeiWalk walk{rules, corpus};
    walk.walk_document(root);
    walk.finish();
    std::stable_sort(corpus.novelle.begin(), corpus.novelle.end(),
                     [](const Novella& a, const Novella& b) {
                         if (a.day != b.day) return a.day < b.day;
                         return a.position < b.position;
                     });
    corpus.complete = validate_corpus(corpus).complete;
    return corpus;
}

}  // namespace brigata
