#include "rnmt/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rnmt {

namespace {
const char* kReservedNames[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() {
    for (const char* name : kReservedNames) id_to_token_.emplace_back(name);
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    for (const auto& line : lines) out << line << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Vocabulary Vocabulary::build_from_lines(const std::vector<std::string>& lines,
                                        std::size_t max_size) {
    std::unordered_map<std::string, std::size_t> count;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::size_t pos = 0;
    for (const auto& line : lines) {
        for (auto& tok : split_tokens(line)) {
            auto [it, inserted] = count.try_emplace(tok, 0);
            it->second++;
            if (inserted) first_seen.emplace(tok, pos);
            ++pos;
        }
    }
    // Reserved names never come from corpus text; drop them if present.
    for (const char* name : kReservedNames) {
        count.erase(name);
        first_seen.erase(name);
    }

    std::vector<std::string> ordered;
    ordered.reserve(count.size());
    for (const auto& [tok, _] : count) ordered.push_back(tok);
    std::sort(ordered.begin(), ordered.end(),
              [&](const std::string& a, const std::string& b) {
                  if (count[a] != count[b]) return count[a] > count[b];
                  return first_seen[a] < first_seen[b];
              });
    if (ordered.size() > max_size) ordered.resize(max_size);
    return from_tokens(ordered);
}

Vocabulary Vocabulary::build_from_file(const std::string& path, std::size_t max_size) {
    return build_from_lines(read_lines(path), max_size);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (const auto& tok : tokens) {
        if (v.token_to_id_.count(tok)) {
            throw InvalidArgument("duplicate vocabulary token: " + tok);
        }
        TokenId id = static_cast<TokenId>(v.id_to_token_.size());
        v.id_to_token_.push_back(tok);
        v.token_to_id_.emplace(tok, id);
    }
    return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
    return from_tokens(read_lines(path));
}

void Vocabulary::save(const std::string& path) const {
    write_lines(path, corpus_tokens());
}

TokenId Vocabulary::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id < 0 || id >= size()) {
        throw InvalidArgument("token id out of range: " + std::to_string(id));
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

TokenIds Vocabulary::encode(const std::vector<std::string>& tokens) const {
    TokenIds ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(id(tok));
    return ids;
}

std::vector<std::string> Vocabulary::decode(const TokenIds& ids) const {
    std::vector<std::string> tokens;
    tokens.reserve(ids.size());
    for (TokenId id : ids) tokens.push_back(token(id));
    return tokens;
}

std::vector<std::string> Vocabulary::corpus_tokens() const {
    return std::vector<std::string>(id_to_token_.begin() + kNumReserved,
                                    id_to_token_.end());
}

}  // namespace rnmt
