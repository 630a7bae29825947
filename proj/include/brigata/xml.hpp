#pragma once

// Minimal non-validating XML parser, enough for TEI P4 corpus files and for
// checking the well-formedness of emitted SVG. Builds a plain DOM of element
// and text nodes; comments, processing instructions and the DOCTYPE are
// skipped. Every error carries the byte offset it was raised at.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brigata/unicode.hpp"

namespace brigata::xml {

struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& msg, size_t off)
        : std::runtime_error(msg + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

struct Node {
    enum class Kind { element, text };
    Kind kind = Kind::element;
    std::string name;  // element nodes only
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Node> children;
    std::string text;  // text nodes only, entities decoded
    size_t offset = 0;

    const std::string* attr(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (k == key) return &v;
        return nullptr;
    }
};

namespace detail {

// ISO Latin-1 named entities that TEI P4 editions lean on, plus the XML five.
inline uint32_t named_entity(std::string_view name) {
    struct Ent { std::string_view n; uint32_t cp; };
    static constexpr Ent table[] = {
        {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''},
        {"nbsp", 0xA0}, {"iexcl", 0xA1}, {"sect", 0xA7}, {"laquo", 0xAB}, {"raquo", 0xBB},
        {"middot", 0xB7}, {"iquest", 0xBF},
        {"Agrave", 0xC0}, {"Aacute", 0xC1}, {"Acirc", 0xC2}, {"Atilde", 0xC3},
        {"Auml", 0xC4}, {"Aring", 0xC5}, {"AElig", 0xC6}, {"Ccedil", 0xC7},
        {"Egrave", 0xC8}, {"Eacute", 0xC9}, {"Ecirc", 0xCA}, {"Euml", 0xCB},
        {"Igrave", 0xCC}, {"Iacute", 0xCD}, {"Icirc", 0xCE}, {"Iuml", 0xCF},
        {"Ntilde", 0xD1}, {"Ograve", 0xD2}, {"Oacute", 0xD3}, {"Ocirc", 0xD4},
        {"Otilde", 0xD5}, {"Ouml", 0xD6}, {"Ugrave", 0xD9}, {"Uacute", 0xDA},
        {"Ucirc", 0xDB}, {"Uuml", 0xDC}, {"Yacute", 0xDD}, {"szlig", 0xDF},
        {"agrave", 0xE0}, {"aacute", 0xE1}, {"acirc", 0xE2}, {"atilde", 0xE3},
        {"auml", 0xE4}, {"aring", 0xE5}, {"aelig", 0xE6}, {"ccedil", 0xE7},
        {"egrave", 0xE8}, {"eacute", 0xE9}, {"ecirc", 0xEA}, {"euml", 0xEB},
        {"igrave", 0xEC}, {"iacute", 0xED}, {"icirc", 0xEE}, {"iuml", 0xEF},
        {"ntilde", 0xF1}, {"ograve", 0xF2}, {"oacute", 0xF3}, {"ocirc", 0xF4},
        {"otilde", 0xF5}, {"ouml", 0xF6}, {"ugrave", 0xF9}, {"uacute", 0xFA},
        {"ucirc", 0xFB}, {"uuml", 0xFC}, {"yacute", 0xFD}, {"yuml", 0xFF},
    };
    for (const auto& e : table)
        if (e.n == name) return e.cp;
    return 0;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Node parse_document() {
        skip_misc();
        if (eof()) fail("document has no root element");
        Node root = parse_element();
        skip_misc();
        if (!eof()) fail("content after document element");
        return root;
    }

private:
    std::string_view src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }
    bool starts_with(std::string_view s) const { return src_.compare(pos_, s.size(), s) == 0; }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
            ++pos_;
    }

    // Prolog / inter-element misc: whitespace, comments, PIs, DOCTYPE.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_comment();
            } else if (starts_with("<?")) {
                skip_pi();
            } else if (starts_with("<!DOCTYPE") || starts_with("<!doctype")) {
                skip_doctype();
            } else {
                return;
            }
        }
    }

    void skip_comment() {
        size_t at = pos_;
        pos_ += 4;
        size_t end = src_.find("-->", pos_);
        if (end == std::string_view::npos) { pos_ = at; fail("unterminated comment"); }
        pos_ = end + 3;
    }

    void skip_pi() {
        size_t at = pos_;
        pos_ += 2;
        size_t end = src_.find("?>", pos_);
        if (end == std::string_view::npos) { pos_ = at; fail("unterminated processing instruction"); }
        pos_ = end + 2;
    }

    void skip_doctype() {
        size_t at = pos_;
        int bracket = 0;
        while (!eof()) {
            char c = peek();
            ++pos_;
            if (c == '[') ++bracket;
            else if (c == ']') --bracket;
            else if (c == '>' && bracket == 0) return;
        }
        pos_ = at;
        fail("unterminated DOCTYPE");
    }

    static bool name_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    }
    static bool name_char(char c) {
        return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    std::string parse_name() {
        if (eof() || !name_start(peek())) fail("expected a name");
        size_t start = pos_;
        while (!eof() && name_char(peek())) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    void decode_entity(std::string& out) {
        size_t at = pos_;
        ++pos_;  // '&'
        if (!eof() && peek() == '#') {
            ++pos_;
            uint32_t cp = 0;
            if (!eof() && (peek() == 'x' || peek() == 'X')) {
                ++pos_;
                size_t digits = 0;
                while (!eof() && peek() != ';') {
                    char c = peek();
                    uint32_t d;
                    if (c >= '0' && c <= '9') d = c - '0';
                    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
                    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
                    else { pos_ = at; fail("bad character reference"); }
                    cp = cp * 16 + d;
                    ++pos_;
                    ++digits;
                }
                if (digits == 0) { pos_ = at; fail("bad character reference"); }
            } else {
                size_t digits = 0;
                while (!eof() && peek() != ';') {
                    char c = peek();
                    if (c < '0' || c > '9') { pos_ = at; fail("bad character reference"); }
                    cp = cp * 10 + (c - '0');
                    ++pos_;
                    ++digits;
                }
                if (digits == 0) { pos_ = at; fail("bad character reference"); }
            }
            if (eof()) { pos_ = at; fail("unterminated character reference"); }
            ++pos_;  // ';'
            append_utf8(out, cp);
            return;
        }
        size_t start = pos_;
        while (!eof() && peek() != ';' && peek() != '&' && peek() != '<' && pos_ - start < 12) ++pos_;
        if (eof() || peek() != ';') { pos_ = at; fail("unterminated entity reference"); }
        std::string_view name = src_.substr(start, pos_ - start);
        uint32_t cp = named_entity(name);
        if (cp == 0) { pos_ = at; fail("unknown entity '&" + std::string(name) + ";'"); }
        ++pos_;  // ';'
        append_utf8(out, cp);
    }

    std::string parse_attr_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        char quote = peek();
        ++pos_;
        std::string out;
        while (!eof() && peek() != quote) {
            if (peek() == '&') decode_entity(out);
            else if (peek() == '<') fail("'<' in attribute value");
            else { out.push_back(peek()); ++pos_; }
        }
        if (eof()) fail("unterminated attribute value");
        ++pos_;
        return out;
    }

    Node parse_element() {
        size_t at = pos_;
        if (eof() || peek() != '<') fail("expected '<'");
        ++pos_;
        Node node;
        node.kind = Node::Kind::element;
        node.offset = at;
        node.name = parse_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag <" + node.name + ">");
            if (peek() == '/') {
                ++pos_;
                if (eof() || peek() != '>') fail("malformed empty-element tag");
                ++pos_;
                return node;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (eof() || peek() != '=') fail("expected '=' after attribute name");
            ++pos_;
            skip_ws();
            node.attrs.emplace_back(std::move(key), parse_attr_value());
        }
        parse_content(node);
        return node;
    }

    void parse_content(Node& parent) {
        std::string text;
        size_t text_at = pos_;
        auto flush_text = [&] {
            if (!text.empty()) {
                Node t;
                t.kind = Node::Kind::text;
                t.text = std::move(text);
                t.offset = text_at;
                parent.children.push_back(std::move(t));
                text.clear();
            }
        };
        for (;;) {
            if (eof()) fail("missing close tag </" + parent.name + ">");
            if (peek() == '<') {
                if (starts_with("</")) {
                    flush_text();
                    size_t at = pos_;
                    pos_ += 2;
                    std::string name = parse_name();
                    skip_ws();
                    if (eof() || peek() != '>') { pos_ = at; fail("malformed close tag"); }
                    ++pos_;
                    if (name != parent.name) {
                        pos_ = at;
                        fail("close tag </" + name + "> does not match <" + parent.name + ">");
                    }
                    return;
                }
                if (starts_with("<!--")) {
                    skip_comment();
                    if (text.empty()) text_at = pos_;
                    continue;
                }
                if (starts_with("<![CDATA[")) {
                    size_t at = pos_;
                    pos_ += 9;
                    size_t end = src_.find("]]>", pos_);
                    if (end == std::string_view::npos) { pos_ = at; fail("unterminated CDATA section"); }
                    text.append(src_.substr(pos_, end - pos_));
                    pos_ = end + 3;
                    continue;
                }
                if (starts_with("<?")) {
                    skip_pi();
                    if (text.empty()) text_at = pos_;
                    continue;
                }
                flush_text();
                parent.children.push_back(parse_element());
                text_at = pos_;
                continue;
            }
            if (peek() == '&') {
                decode_entity(text);
                continue;
            }
            text.push_back(peek());
            ++pos_;
        }
    }
};

}  // namespace detail

inline Node parse(std::string_view src) { return detail::Parser(src).parse_document(); }

}  // namespace brigata::xml
