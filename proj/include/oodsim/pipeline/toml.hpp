#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oodsim/error.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim::toml {

// Reader for the TOML subset used by run configurations: tables, arrays of
// tables, dotted keys, strings (basic, literal, multi-line), integers,
// floats, booleans, arrays and inline tables. Date-times are rejected.
// The document is returned as a JSON object.
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* current = &root;
        for (;;) {
            skip_ws_comments_newlines();
            if (eof()) break;
            if (peek() == '[') {
                const bool array = peek(1) == '[';
                pos_ += array ? 2 : 1;
                skip_inline_ws();
                auto path = parse_key_path();
                skip_inline_ws();
                expect(']');
                if (array) expect(']');
                current = array ? &open_array_table(root, path) : &open_table(root, path);
            } else {
                auto path = parse_key_path();
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                auto value = parse_value();
                assign(*current, path, std::move(value));
            }
            end_of_line();
        }
        return root;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

    std::size_t line() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) n += text_[i] == '\n';
        return n;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("TOML line " + std::to_string(line()) + ": " + what);
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_ws_comments_newlines() {
        for (;;) {
            skip_inline_ws();
            skip_comment();
            if (peek() == '\r' || peek() == '\n') {
                ++pos_;
                continue;
            }
            break;
        }
    }

    void end_of_line() {
        skip_inline_ws();
        skip_comment();
        if (peek() == '\r') ++pos_;
        if (!eof() && peek() != '\n') fail("unexpected trailing characters");
    }

    static bool bare_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> path;
        for (;;) {
            skip_inline_ws();
            if (peek() == '"') {
                path.push_back(parse_basic_string());
            } else if (peek() == '\'') {
                path.push_back(parse_literal_string());
            } else {
                const auto start = pos_;
                while (!eof() && bare_key_char(peek())) ++pos_;
                if (pos_ == start) fail("expected a key");
                path.emplace_back(text_.substr(start, pos_ - start));
            }
            skip_inline_ws();
            if (peek() != '.') break;
            ++pos_;
        }
        return path;
    }

    nlohmann::json& descend(nlohmann::json& node, const std::string& key) {
        auto& child = node[key];
        if (child.is_null()) child = nlohmann::json::object();
        if (child.is_array()) {
            if (child.empty() || !child.back().is_object()) fail("key '" + key + "' is not a table");
            return child.back();
        }
        if (!child.is_object()) fail("key '" + key + "' is not a table");
        return child;
    }

    nlohmann::json& open_table(nlohmann::json& root, const std::vector<std::string>& path) {
        nlohmann::json* node = &root;
        for (const auto& k : path) node = &descend(*node, k);
        return *node;
    }

    nlohmann::json& open_array_table(nlohmann::json& root, const std::vector<std::string>& path) {
        nlohmann::json* node = &root;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
        auto& arr = (*node)[path.back()];
        if (arr.is_null()) arr = nlohmann::json::array();
        if (!arr.is_array()) fail("key '" + path.back() + "' is not an array of tables");
        arr.push_back(nlohmann::json::object());
        return arr.back();
    }

    void assign(nlohmann::json& table, const std::vector<std::string>& path, nlohmann::json value) {
        nlohmann::json* node = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
        if (node->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*node)[path.back()] = std::move(value);
    }

    static void append_utf8(std::string& out, std::uint32_t cp) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }

    void parse_escape(std::string& out) {
        const char c = peek();
        ++pos_;
        switch (c) {
        case 'b': out.push_back('\b'); break;
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'f': out.push_back('\f'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u':
        case 'U': {
            const std::size_t len = c == 'u' ? 4 : 8;
            if (pos_ + len > text_.size()) fail("truncated unicode escape");
            std::uint32_t cp = 0;
            for (std::size_t i = 0; i < len; ++i) {
                const char h = text_[pos_ + i];
                if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad unicode escape");
                cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h)) ? h - '0' : (std::tolower(h) - 'a' + 10));
            }
            pos_ += len;
            append_utf8(out, cp);
            break;
        }
        default: fail(std::string("unknown escape \\") + c);
        }
    }

    std::string parse_basic_string() {
        if (text_.substr(pos_, 3) == "\"\"\"") {
            pos_ += 3;
            if (peek() == '\n') ++pos_;
            else if (peek() == '\r' && peek(1) == '\n') pos_ += 2;
            std::string out;
            for (;;) {
                if (eof()) fail("unterminated multi-line string");
                if (text_.substr(pos_, 3) == "\"\"\"") {
                    pos_ += 3;
                    return out;
                }
                if (peek() == '\\') {
                    ++pos_;
                    if (peek() == '\n' || peek() == '\r' || peek() == ' ' || peek() == '\t') {
                        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
                        continue;
                    }
                    parse_escape(out);
                    continue;
                }
                out.push_back(peek());
                ++pos_;
            }
        }
        expect('"');
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = peek();
            ++pos_;
            if (c == '"') return out;
            if (c == '\\') parse_escape(out);
            else out.push_back(c);
        }
    }

    std::string parse_literal_string() {
        if (text_.substr(pos_, 3) == "'''") {
            pos_ += 3;
            if (peek() == '\n') ++pos_;
            const auto end = text_.find("'''", pos_);
            if (end == std::string_view::npos) fail("unterminated multi-line literal string");
            std::string out(text_.substr(pos_, end - pos_));
            pos_ = end + 3;
            return out;
        }
        expect('\'');
        const auto start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
        if (peek() != '\'') fail("unterminated literal string");
        std::string out(text_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    nlohmann::json parse_array() {
        expect('[');
        nlohmann::json arr = nlohmann::json::array();
        for (;;) {
            skip_ws_comments_newlines();
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            arr.push_back(parse_value());
            skip_ws_comments_newlines();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            skip_ws_comments_newlines();
            expect(']');
            return arr;
        }
    }

    nlohmann::json parse_inline_table() {
        expect('{');
        nlohmann::json table = nlohmann::json::object();
        skip_inline_ws();
        if (peek() == '}') {
            ++pos_;
            return table;
        }
        for (;;) {
            auto path = parse_key_path();
            skip_inline_ws();
            expect('=');
            skip_inline_ws();
            assign(table, path, parse_value());
            skip_inline_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect('}');
            return table;
        }
    }

    nlohmann::json parse_scalar() {
        const auto start = pos_;
        while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '}' && peek() != '#')
            ++pos_;
        std::string token(text_.substr(start, pos_ - start));
        if (token == "true") return true;
        if (token == "false") return false;
        if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
        if (token == "-inf") return -std::numeric_limits<double>::infinity();
        if (token == "nan" || token == "+nan" || token == "-nan") return std::numeric_limits<double>::quiet_NaN();
        std::string clean;
        for (std::size_t i = 0; i < token.size(); ++i) {
            if (token[i] == '_') {
                if (i == 0 || i + 1 == token.size() || !std::isdigit(static_cast<unsigned char>(token[i - 1])) ||
                    !std::isdigit(static_cast<unsigned char>(token[i + 1])))
                    fail("misplaced '_' in number '" + token + "'");
                continue;
            }
            clean.push_back(token[i]);
        }
        if (clean.empty()) fail("expected a value");
        const bool is_float = clean.find_first_of(".eE") != std::string::npos;
        if (!is_float) {
            if (auto v = parse_integer<std::int64_t>(clean.front() == '+' ? clean.substr(1) : clean)) return *v;
        } else if (auto v = parse_double(clean)) {
            return *v;
        }
        fail("unsupported value '" + token + "'");
    }

    nlohmann::json parse_value() {
        switch (peek()) {
        case '"': return parse_basic_string();
        case '\'': return parse_literal_string();
        case '[': return parse_array();
        case '{': return parse_inline_table();
        default: return parse_scalar();
        }
    }
};

inline nlohmann::json parse(std::string_view text) { return Parser(text).parse(); }

} // namespace oodsim::toml
