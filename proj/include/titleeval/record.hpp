#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "titleeval/error.hpp"
#include "titleeval/textprep.hpp"

namespace titleeval {

// Per-token vectors for one text field, produced by the encoder named in
// `model`. Stored row-major as 32-bit floats, the precision the interchange
// files carry.
struct EmbeddingMatrix {
  std::string model;
  std::size_t dim = 0;
  std::vector<float> values;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::string model_tag, std::size_t dimension, std::vector<float> data)
      : model(std::move(model_tag)), dim(dimension), values(std::move(data)) {
    if (dim == 0) throw Error("embedding matrix '" + model + "': dim must be positive");
    if (values.size() % dim != 0)
      throw Error("embedding matrix '" + model + "': value count is not a multiple of dim");
  }

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }

  bool operator==(const EmbeddingMatrix&) const = default;
};

// Lowercased, punctuation-free words of an entity surface string.
inline std::vector<std::string> entity_words(std::string_view surface) {
  std::vector<std::string> words;
  for (auto& tok : tokenize(surface).tokens)
    if (!is_punct_token(tok)) words.push_back(std::move(tok));
  return words;
}

struct EntityMention {
  std::string surface;
  std::vector<std::string> words;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive

  EntityMention() = default;
  EntityMention(std::string surface_text, std::size_t start, std::size_t end)
      : surface(std::move(surface_text)), words(entity_words(surface)), token_start(start), token_end(end) {
    if (words.empty()) throw Error("entity '" + surface + "' has no words");
    if (end <= start) throw Error("entity '" + surface + "' has an empty token span");
  }

  bool operator==(const EntityMention&) const = default;
};

// One text of a record: the abstract, the reference title or a hypothesis.
// Tokens are filled in at load time; entities and embeddings only when the
// corpus file provides them.
struct AnnotatedField {
  std::string raw_text;
  std::optional<TokenizedText> tokens;
  std::optional<std::vector<EntityMention>> entities;
  std::vector<EmbeddingMatrix> embeddings;

  std::size_t token_count() const {
    if (!tokens) throw Error("field is not tokenized");
    return tokens->size();
  }

  const EmbeddingMatrix* find_embeddings(std::string_view model) const {
    for (const auto& e : embeddings)
      if (e.model == model) return &e;
    return nullptr;
  }

  bool operator==(const AnnotatedField&) const = default;
};

struct EvalRecord {
  std::string id;
  AnnotatedField abstract;
  AnnotatedField reference_title;
  std::map<std::string, AnnotatedField> hypotheses;

  bool operator==(const EvalRecord&) const = default;
};

}  // namespace titleeval
