#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oodsim/corpus.hpp"
#include "oodsim/error.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

using Vector = std::vector<double>;

enum class VectorFormat { Text, Binary };

inline VectorFormat parse_vector_format(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "text" || s == "txt") return VectorFormat::Text;
    if (s == "binary" || s == "bin") return VectorFormat::Binary;
    throw ConfigError("unknown word-vector format '" + std::string(text) + "'");
}

inline std::string_view to_string(VectorFormat f) { return f == VectorFormat::Text ? "text" : "binary"; }

/// Immutable-after-load token -> vector map with a fixed dimensionality.
class WordVectorTable {
public:
    explicit WordVectorTable(std::size_t dim, std::string source_path = {})
        : dim_(dim), source_path_(std::move(source_path)) {
        if (dim_ == 0) throw DataError("word vectors must have positive dimension");
    }

    /// Adds a token. Returns false and counts a duplicate if the token exists.
    bool add(std::string_view token, std::span<const double> values) {
        if (token.empty()) throw DataError("empty token in word-vector table");
        for (unsigned char c : token)
            if (std::isspace(c)) throw DataError("token '" + std::string(token) + "' contains whitespace");
        if (values.size() != dim_)
            throw DataError("token '" + std::string(token) + "': expected " + std::to_string(dim_) + " values, got " +
                            std::to_string(values.size()));
        for (double v : values)
            if (!std::isfinite(v)) throw DataError("token '" + std::string(token) + "': non-finite vector entry");
        auto [it, inserted] = index_.try_emplace(std::string(token), tokens_.size());
        if (!inserted) {
            ++duplicates_;
            return false;
        }
        tokens_.emplace_back(token);
        data_.insert(data_.end(), values.begin(), values.end());
        return true;
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return tokens_.size(); }
    std::size_t duplicates_skipped() const { return duplicates_; }
    const std::string& source_path() const { return source_path_; }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }

    std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::optional<std::span<const double>> find(const std::string& token) const {
        const auto it = index_.find(token);
        if (it == index_.end()) return std::nullopt;
        return vector(it->second);
    }

    friend bool operator==(const WordVectorTable& a, const WordVectorTable& b) {
        return a.dim_ == b.dim_ && a.tokens_ == b.tokens_ && a.data_ == b.data_;
    }

private:
    std::size_t dim_;
    std::string source_path_;
    std::vector<std::string> tokens_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t duplicates_ = 0;
};

namespace detail {

struct VectorHeader {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::size_t body_offset = 0;
};

inline VectorHeader parse_vector_header(std::string_view data, const std::string& where) {
    const auto nl = data.find('\n');
    if (nl == std::string_view::npos) throw DataError(where + ": missing header line");
    const auto header = trim(data.substr(0, nl));
    const auto sp = header.find_first_of(" \t");
    if (sp == std::string_view::npos) throw DataError(where + ": header must be '<vocab_count> <dim>'");
    const auto count = parse_integer<std::size_t>(header.substr(0, sp));
    const auto dim = parse_integer<std::size_t>(trim(header.substr(sp + 1)));
    if (!count || !dim || *dim == 0) throw DataError(where + ": header must be '<vocab_count> <dim>'");
    return {*count, *dim, nl + 1};
}

inline float load_le_float(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<float>(bits);
}

inline void store_le_float(std::string& out, float value) {
    const auto bits = std::bit_cast<std::uint32_t>(value);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline WordVectorTable parse_text_vectors(std::string_view data, const std::string& where) {
    const auto header = parse_vector_header(data, where);
    WordVectorTable table(header.dim, where);
    std::size_t pos = header.body_offset;
    std::size_t line_no = 1;
    std::size_t rows = 0;
    std::vector<double> values;
    while (pos < data.size()) {
        auto nl = data.find('\n', pos);
        if (nl == std::string_view::npos) nl = data.size();
        const auto line = trim(data.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        auto sp = line.find_first_of(" \t");
        const auto token = line.substr(0, sp);
        values.clear();
        while (sp != std::string_view::npos) {
            const auto start = line.find_first_not_of(" \t", sp);
            if (start == std::string_view::npos) break;
            sp = line.find_first_of(" \t", start);
            const auto piece = line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
            const auto v = parse_double(piece);
            if (!v)
                throw DataError(where + ": line " + std::to_string(line_no) + ": token '" + std::string(token) +
                                "' has non-numeric entry '" + std::string(piece) + "'");
            values.push_back(*v);
        }
        if (values.size() != header.dim)
            throw DataError(where + ": line " + std::to_string(line_no) + ": token '" + std::string(token) +
                            "' has " + std::to_string(values.size()) + " values, header declares dimension " +
                            std::to_string(header.dim));
        table.add(token, values);
        ++rows;
    }
    if (rows != header.count)
        throw DataError(where + ": header declares " + std::to_string(header.count) + " tokens, file has " +
                        std::to_string(rows));
    return table;
}

inline WordVectorTable parse_binary_vectors(std::string_view data, const std::string& where) {
    const auto header = parse_vector_header(data, where);
    WordVectorTable table(header.dim, where);
    std::size_t pos = header.body_offset;
    std::vector<double> values(header.dim);
    const std::size_t payload = header.dim * 4;
    for (std::size_t r = 0; r < header.count; ++r) {
        // word2vec writers put a newline after each vector; tolerate it
        while (pos < data.size() && data[pos] == '\n') ++pos;
        const auto sp = data.find(' ', pos);
        if (sp == std::string_view::npos)
            throw DataError(where + ": truncated binary payload at entry " + std::to_string(r));
        const auto token = data.substr(pos, sp - pos);
        pos = sp + 1;
        if (data.size() - pos < payload)
            throw DataError(where + ": truncated binary payload for token '" + std::string(token) + "'");
        for (std::size_t d = 0; d < header.dim; ++d) values[d] = load_le_float(data.data() + pos + 4 * d);
        pos += payload;
        table.add(token, values);
    }
    return table;
}

} // namespace detail

inline WordVectorTable parse_word_vectors(std::string_view data, VectorFormat format, const std::string& where = "<memory>") {
    return format == VectorFormat::Text ? detail::parse_text_vectors(data, where)
                                        : detail::parse_binary_vectors(data, where);
}

inline WordVectorTable load_word_vectors(const std::filesystem::path& path, VectorFormat format) {
    return parse_word_vectors(read_file(path), format, path.string());
}

inline std::string serialize_word_vectors(const WordVectorTable& table, VectorFormat format) {
    std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        out += table.token(i);
        const auto v = table.vector(i);
        if (format == VectorFormat::Text) {
            for (double x : v) {
                out.push_back(' ');
                out += format_double(x);
            }
            out.push_back('\n');
        } else {
            out.push_back(' ');
            for (double x : v) detail::store_le_float(out, static_cast<float>(x));
        }
    }
    return out;
}

inline void write_word_vectors(const WordVectorTable& table, const std::filesystem::path& path, VectorFormat format) {
    write_file(path, serialize_word_vectors(table, format));
}

namespace detail {

// Length of a Unicode whitespace sequence starting at text[i], or 0.
inline std::size_t whitespace_length(std::string_view text, std::size_t i) {
    const auto b = [&](std::size_t k) { return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0u; };
    const unsigned c0 = b(0);
    if (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0d) || c0 == 0x1c || c0 == 0x1d || c0 == 0x1e || c0 == 0x1f) return 1;
    if (c0 == 0xc2 && (b(1) == 0x85 || b(1) == 0xa0)) return 2;
    if (c0 == 0xe1 && b(1) == 0x9a && b(2) == 0x80) return 3; // U+1680
    if (c0 == 0xe2 && b(1) == 0x80) {
        const unsigned c2 = b(2);
        if ((c2 >= 0x80 && c2 <= 0x8a) || c2 == 0xa8 || c2 == 0xa9 || c2 == 0xaf) return 3;
    }
    if (c0 == 0xe2 && b(1) == 0x81 && b(2) == 0x9f) return 3; // U+205F
    if (c0 == 0xe3 && b(1) == 0x80 && b(2) == 0x80) return 3; // U+3000
    return 0;
}

inline bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
}

} // namespace detail

/// Lowercases, splits on Unicode whitespace and strips ASCII punctuation from
/// both ends of each piece. Interior punctuation is kept.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        std::string_view piece = current;
        while (!piece.empty() && detail::is_ascii_punct(piece.front())) piece.remove_prefix(1);
        while (!piece.empty() && detail::is_ascii_punct(piece.back())) piece.remove_suffix(1);
        if (!piece.empty()) tokens.emplace_back(piece);
        current.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        if (const auto ws = detail::whitespace_length(text, i)) {
            flush();
            i += ws;
            continue;
        }
        const auto u = static_cast<unsigned char>(text[i]);
        current.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : text[i]);
        ++i;
    }
    flush();
    return tokens;
}

struct SentenceEmbedding {
    Vector vector;
    double oov_ratio = 0.0;
    bool degenerate = false;
};

/// Weighted point cloud of the in-vocabulary token vectors of one text.
struct TokenCloud {
    std::vector<Vector> points;
    std::vector<double> weights;
    bool degenerate = false;

    std::size_t size() const { return points.size(); }
};

/// Parallel per-sample sentence vectors and token clouds for one corpus draw.
struct EmbeddingSet {
    std::string corpus_name;
    std::vector<SentenceEmbedding> sentences;
    std::vector<TokenCloud> clouds;

    std::size_t size() const { return sentences.size(); }

    std::size_t degenerate_count() const {
        std::size_t n = 0;
        for (const auto& s : sentences) n += s.degenerate ? 1 : 0;
        return n;
    }
};

inline SentenceEmbedding embed_tokens(const WordVectorTable& table, const std::vector<std::string>& tokens) {
    SentenceEmbedding out;
    out.vector.assign(table.dim(), 0.0);
    std::size_t found = 0;
    for (const auto& t : tokens) {
        const auto v = table.find(t);
        if (!v) continue;
        ++found;
        for (std::size_t d = 0; d < table.dim(); ++d) out.vector[d] += (*v)[d];
    }
    if (found == 0) {
        out.oov_ratio = 1.0;
        out.degenerate = true;
        return out;
    }
    for (auto& x : out.vector) x /= static_cast<double>(found);
    out.oov_ratio = static_cast<double>(tokens.size() - found) / static_cast<double>(tokens.size());
    return out;
}

/// Mean of the in-vocabulary token vectors of text.
inline SentenceEmbedding embed_sentence(const WordVectorTable& table, std::string_view text) {
    return embed_tokens(table, tokenize(text));
}

inline TokenCloud cloud_from_tokens(const WordVectorTable& table, const std::vector<std::string>& tokens) {
    TokenCloud cloud;
    for (const auto& t : tokens) {
        if (const auto v = table.find(t)) cloud.points.emplace_back(v->begin(), v->end());
    }
    if (cloud.points.empty()) {
        cloud.degenerate = true;
        return cloud;
    }
    cloud.weights.assign(cloud.points.size(), 1.0 / static_cast<double>(cloud.points.size()));
    return cloud;
}

/// One uniformly weighted point per in-vocabulary token occurrence.
inline TokenCloud token_cloud(const WordVectorTable& table, std::string_view text) {
    return cloud_from_tokens(table, tokenize(text));
}

inline EmbeddingSet embed_set(const WordVectorTable& table, const Corpus& corpus) {
    EmbeddingSet set;
    set.corpus_name = corpus.name;
    set.sentences.reserve(corpus.size());
    set.clouds.reserve(corpus.size());
    for (const auto& sample : corpus.samples) {
        const auto tokens = tokenize(flatten(sample));
        set.sentences.push_back(embed_tokens(table, tokens));
        set.clouds.push_back(cloud_from_tokens(table, tokens));
    }
    return set;
}

} // namespace oodsim
