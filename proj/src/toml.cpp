#include "scenalloc/toml.hpp"

#include <cctype>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::cli {

namespace {

using nlohmann::json;

struct Cursor {
    const std::string& text;
    size_t pos = 0;
    size_t line = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Config, strfmt("toml line %zu: %s", line, msg.c_str()));
    }

    void skip_ws_inline() {
        while (!done() && (peek() == ' ' || peek() == '\t')) take();
    }
    // Whitespace, newlines and comments.
    void skip_ws_all() {
        for (;;) {
            skip_ws_inline();
            if (!done() && peek() == '#') {
                while (!done() && peek() != '\n') take();
            }
            if (!done() && (peek() == '\n' || peek() == '\r')) {
                take();
                continue;
            }
            return;
        }
    }
    void expect_eol() {
        skip_ws_inline();
        if (!done() && peek() == '#')
            while (!done() && peek() != '\n') take();
        if (done()) return;
        if (peek() == '\r') take();
        if (done()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        take();
    }
};

bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& cur) {
    cur.take();  // opening quote
    std::string out;
    while (!cur.done()) {
        char c = cur.take();
        if (c == '"') return out;
        if (c == '\n') cur.fail("unterminated string");
        if (c == '\\') {
            if (cur.done()) cur.fail("dangling escape");
            char e = cur.take();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default: cur.fail(strfmt("unsupported escape '\\%c'", e));
            }
        } else {
            out.push_back(c);
        }
    }
    cur.fail("unterminated string");
}

std::string parse_key_part(Cursor& cur) {
    cur.skip_ws_inline();
    if (cur.done()) cur.fail("expected key");
    if (cur.peek() == '"') return parse_basic_string(cur);
    std::string out;
    while (!cur.done() && bare_key_char(cur.peek())) out.push_back(cur.take());
    if (out.empty()) cur.fail("expected key");
    return out;
}

json parse_value(Cursor& cur);

json parse_array(Cursor& cur) {
    cur.take();  // '['
    json out = json::array();
    for (;;) {
        cur.skip_ws_all();
        if (cur.done()) cur.fail("unterminated array");
        if (cur.peek() == ']') {
            cur.take();
            return out;
        }
        out.push_back(parse_value(cur));
        cur.skip_ws_all();
        if (cur.done()) cur.fail("unterminated array");
        if (cur.peek() == ',') {
            cur.take();
            continue;
        }
        if (cur.peek() == ']') {
            cur.take();
            return out;
        }
        cur.fail("expected ',' or ']' in array");
    }
}

json parse_scalar_token(Cursor& cur) {
    std::string token;
    while (!cur.done() && cur.peek() != '\n' && cur.peek() != '#' && cur.peek() != ',' &&
           cur.peek() != ']' && cur.peek() != ' ' && cur.peek() != '\t' && cur.peek() != '\r')
        token.push_back(cur.take());
    if (token.empty()) cur.fail("expected a value");
    if (token == "true") return true;
    if (token == "false") return false;

    // Bare ISO dates stay strings.
    if (token.size() == 10 && token[4] == '-' && token[7] == '-') return token;

    bool looks_float = token.find_first_of(".eE") != std::string::npos;
    char* end = nullptr;
    if (!looks_float) {
        long long v = std::strtoll(token.c_str(), &end, 10);
        if (end && *end == '\0') return v;
    }
    double d = std::strtod(token.c_str(), &end);
    if (end && *end == '\0') return d;
    cur.fail(strfmt("cannot parse value '%s'", token.c_str()));
}

json parse_value(Cursor& cur) {
    cur.skip_ws_inline();
    if (cur.done()) cur.fail("expected a value");
    char c = cur.peek();
    if (c == '"') return parse_basic_string(cur);
    if (c == '[') return parse_array(cur);
    return parse_scalar_token(cur);
}

std::vector<std::string> parse_dotted(Cursor& cur, char terminator) {
    std::vector<std::string> parts;
    for (;;) {
        parts.push_back(parse_key_part(cur));
        cur.skip_ws_inline();
        if (!cur.done() && cur.peek() == '.') {
            cur.take();
            continue;
        }
        if (!cur.done() && cur.peek() == terminator) return parts;
        if (terminator == '=' && !cur.done() && cur.peek() == '=') return parts;
        cur.fail("malformed key path");
    }
}

json* navigate(json& root, const std::vector<std::string>& parts, Cursor& cur) {
    json* node = &root;
    for (const auto& part : parts) {
        if (!node->is_object()) cur.fail(strfmt("'%s' is not a table", part.c_str()));
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        // Dotted paths through an array of tables address the last element.
        if (node->is_array()) {
            if (node->empty()) cur.fail(strfmt("'%s' is an empty table array", part.c_str()));
            node = &node->back();
        }
    }
    return node;
}

}  // namespace

json parse_toml(const std::string& text) {
    json root = json::object();
    json* current = &root;
    Cursor cur{text};

    for (;;) {
        cur.skip_ws_all();
        if (cur.done()) break;
        char c = cur.peek();
        if (c == '[') {
            cur.take();
            bool table_array = !cur.done() && cur.peek() == '[';
            if (table_array) cur.take();
            auto parts = parse_dotted(cur, ']');
            if (cur.done() || cur.take() != ']') cur.fail("expected ']'");
            if (table_array && (cur.done() || cur.take() != ']')) cur.fail("expected ']]'");

            if (table_array) {
                std::vector<std::string> head(parts.begin(), parts.end() - 1);
                json* parent = navigate(root, head, cur);
                json& slot = (*parent)[parts.back()];
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) cur.fail("key already used as a non-array");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                current = navigate(root, parts, cur);
            }
            cur.expect_eol();
            continue;
        }
        // key = value
        auto parts = parse_dotted(cur, '=');
        cur.skip_ws_inline();
        if (cur.done() || cur.take() != '=') cur.fail("expected '='");
        json value = parse_value(cur);
        cur.expect_eol();

        json* node = current;
        for (size_t i = 0; i + 1 < parts.size(); ++i) {
            node = &(*node)[parts[i]];
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) cur.fail("dotted key through a non-table");
        }
        if (!node->is_object()) cur.fail("assignment into a non-table");
        if (node->contains(parts.back())) cur.fail(strfmt("duplicate key '%s'", parts.back().c_str()));
        (*node)[parts.back()] = std::move(value);
    }
    return root;
}

json parse_toml_file(const std::string& path) {
    try {
        return parse_toml(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config)
            throw Error(ErrorKind::Config, strfmt("%s: %s", path.c_str(), e.what()));
        throw;
    }
}

}  // namespace scenalloc::cli
