#pragma once

#include <string>
#include <vector>

#include "oodgen/types.hpp"
#include "oodgen/vocab.hpp"

namespace oodgen {

enum class DatasetFormat { generic_tsv, rostd_tsv, osq_json };

DatasetFormat dataset_format_from_string(const std::string& s);

// Raw rows before vocabulary construction.
struct RawExample {
  std::string label;  // empty for OOD rows
  std::string text;
  bool is_ood = false;
};

struct RawSplits {
  std::vector<RawExample> train, valid, test;
};

// Reads the split files for `format` rooted at `path` (a directory for the
// TSV formats, a single JSON file for osq_json). Throws with a file name and
// line number on malformed rows.
RawSplits read_raw_splits(const std::string& path, DatasetFormat format);

struct LoadedData {
  DatasetSplit split;
  Vocabulary vocab;
};

// Full ingestion: read, tokenize, build the vocabulary from the train split,
// map labels (train defines the label set; unknown labels elsewhere are an
// error) and encode every utterance to max_len.
LoadedData load_dataset(const std::string& path, DatasetFormat format, int max_len,
                        int min_count);

// generic_tsv output: one `label<TAB>text` per line; lines starting with '#'
// are comments and are skipped on read.
void write_generic_tsv(const std::string& path, const std::vector<std::pair<std::string, std::string>>& rows,
                       const std::string& comment = "");

inline constexpr const char* kOodLabel = "__ood__";
inline constexpr const char* kGeneratedOodLabel = "__generated_ood__";

}  // namespace oodgen
