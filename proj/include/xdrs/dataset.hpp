#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xdrs/clause_format.hpp"
#include "xdrs/embeddings.hpp"
#include "xdrs/lexicon.hpp"
#include "xdrs/sentence.hpp"
#include "xdrs/vocab.hpp"

namespace xdrs {

struct Example {
  std::string id;
  std::string lang;
  SentenceAnnotation sentence;
  Drs drs;
  std::string text;
};

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

// Sentence ids per split, one id per line in `<prefix>.train|dev|test`.
struct Manifest {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

Manifest read_manifest(const std::filesystem::path& prefix);
void write_manifest(const std::filesystem::path& prefix, const Manifest& m);
// First n_train ids to train, the next n_dev to dev, the next n_test to test.
Manifest manifest_by_counts(const std::vector<Example>& pairs, std::size_t n_train, std::size_t n_dev,
                            std::size_t n_test);

// Overlapping or unknown manifest ids -> PairingError.
DatasetSplit assemble_split(const std::vector<Example>& pairs, const Manifest& manifest);
// Every pair goes to test (target languages are never trained on).
DatasetSplit assemble_test_split(const std::vector<Example>& pairs);

// Counts from the training examples. Gold DRSs are canonicalized before
// their stage streams are counted.
VocabularySet build_vocab(const std::vector<Example>& train, int min_freq, const Lexicon& lexicon);

// Dataset bundle directory:
//   clauses/<id>.clf  conllu/<lang>.conllu  manifest.{train,dev,test}
//   manifest.<lang>   vocab/*.txt  embeddings.vec  embeddings.unk  bundle.manifest
struct Bundle {
  std::string source_lang = "en";
  std::map<std::string, DatasetSplit> splits;
  std::optional<EmbeddingTable> embeddings;
  VocabularySet vocab;
  std::map<std::string, std::string> info;

  // Closed sort-predicate list plus every input lemma of every split.
  Lexicon lexicon() const;
  std::vector<std::string> languages() const;
};

struct IngestOptions {
  std::filesystem::path clauses_dir;
  std::filesystem::path conllu_dir;
  std::optional<std::filesystem::path> embeddings;
  int embedding_dim = 300;
  std::filesystem::path manifest_prefix;
  std::string source_lang = "en";
  int min_freq = 1;
};

// Reads the raw corpus, merges presuppositions, strips senses, reverts
// target-language predicates to aligned lemmas and builds vocabularies.
Bundle ingest_corpus(const IngestOptions& options);

void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& dir);

}  // namespace xdrs
