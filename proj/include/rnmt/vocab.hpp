#pragma once

#include "rnmt/types.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace rnmt {

/// Token <-> id mapping with four reserved ids. Ids are dense: reserved
/// tokens occupy 0..3, corpus tokens follow in frequency order.
class Vocabulary {
  public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kBos = 1;
    static constexpr TokenId kEos = 2;
    static constexpr TokenId kUnk = 3;
    static constexpr int kNumReserved = 4;

    Vocabulary();

    /// Keeps the `max_size` most frequent tokens of a one-sentence-per-line
    /// file; ties broken by first occurrence. Empty file yields the reserved
    /// tokens only.
    static Vocabulary build_from_file(const std::string& path, std::size_t max_size);
    static Vocabulary build_from_lines(const std::vector<std::string>& lines,
                                       std::size_t max_size);

    /// From an explicit non-reserved token list (checkpoint / vocab file load).
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);

    /// One non-reserved token per line; id = line number - 1 + 4.
    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    TokenId id(const std::string& token) const;  // UNK for unknown tokens
    const std::string& token(TokenId id) const;
    bool contains(const std::string& token) const;

    int size() const { return static_cast<int>(id_to_token_.size()); }

    TokenIds encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const TokenIds& ids) const;

    /// Non-reserved tokens in id order (what save() writes).
    std::vector<std::string> corpus_tokens() const;

  private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;  // non-reserved only
};

/// Whitespace tokenization for pre-tokenized corpus lines.
std::vector<std::string> split_tokens(const std::string& line);
std::string join_tokens(const std::vector<std::string>& tokens);

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace rnmt
