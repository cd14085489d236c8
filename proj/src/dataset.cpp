#include "oodgen/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "oodgen/text.hpp"

namespace oodgen {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetFormat dataset_format_from_string(const std::string& s) {
  if (s == "generic_tsv") return DatasetFormat::generic_tsv;
  if (s == "rostd_tsv") return DatasetFormat::rostd_tsv;
  if (s == "osq_json") return DatasetFormat::osq_json;
  throw std::invalid_argument("unknown dataset format: " + s);
}

namespace {

// ROSTD ships its OOD rows inside the regular splits under this label.
constexpr const char* kRostdOodLabel = "outOfDomain";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<RawExample> read_tsv_file(const std::string& path, DatasetFormat format,
                                      bool allow_ood) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot open " + path);

  std::vector<RawExample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const auto fields = split_tabs(line);
    const auto fail = [&](const std::string& why) {
      throw std::runtime_error("dataset: " + path + ":" + std::to_string(line_no) + ": " + why);
    };

    RawExample ex;
    if (format == DatasetFormat::generic_tsv) {
      if (fields.size() < 2) fail("expected label<TAB>text");
      ex.label = fields[0];
      ex.text = fields[1];
      ex.is_ood = (ex.label == kOodLabel || ex.label == kGeneratedOodLabel);
    } else {  // rostd_tsv: label, annotation, utterance, ...
      if (fields.size() < 3) fail("expected at least 3 tab-separated columns");
      ex.label = fields[0];
      ex.text = fields[2];
      ex.is_ood = (ex.label == kRostdOodLabel);
    }
    if (ex.label.empty()) fail("empty label");
    if (ex.text.find_first_not_of(" \t") == std::string::npos) fail("empty text");
    if (ex.is_ood) {
      ex.label.clear();
      if (!allow_ood) fail("OOD row outside the test split");
    }
    rows.push_back(std::move(ex));
  }
  if (rows.empty()) throw std::runtime_error("dataset: " + path + " contains no examples");
  return rows;
}

std::vector<RawExample> read_osq_section(const json& j, const std::string& key, bool is_ood) {
  std::vector<RawExample> rows;
  if (!j.contains(key)) throw std::runtime_error("dataset: osq json has no key " + key);
  for (const auto& pair : j.at(key)) {
    if (!pair.is_array() || pair.size() != 2)
      throw std::runtime_error("dataset: osq entry under " + key + " is not a [text, label] pair");
    RawExample ex;
    ex.text = pair[0].get<std::string>();
    ex.is_ood = is_ood;
    if (!is_ood) ex.label = pair[1].get<std::string>();
    rows.push_back(std::move(ex));
  }
  return rows;
}

}  // namespace

RawSplits read_raw_splits(const std::string& path, DatasetFormat format) {
  RawSplits raw;
  if (format == DatasetFormat::osq_json) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);
    json j = json::parse(in);
    raw.train = read_osq_section(j, "train", false);
    raw.valid = read_osq_section(j, "val", false);
    raw.test = read_osq_section(j, "test", false);
    // oos_train/oos_val exist in the file but are not used: the generator is
    // the only source of training OOD. Test OOD is kept for evaluation.
    auto ood = read_osq_section(j, "oos_test", true);
    raw.test.insert(raw.test.end(), ood.begin(), ood.end());
    return raw;
  }

  const fs::path dir(path);
  const char* valid_name = format == DatasetFormat::rostd_tsv ? "eval.tsv" : "valid.tsv";
  raw.train = read_tsv_file((dir / "train.tsv").string(), format, false);
  raw.valid = read_tsv_file((dir / valid_name).string(), format, false);
  raw.test = read_tsv_file((dir / "test.tsv").string(), format, true);
  return raw;
}

LoadedData load_dataset(const std::string& path, DatasetFormat format, int max_len,
                        int min_count) {
  const RawSplits raw = read_raw_splits(path, format);

  // Train labels define the class set, in sorted order for determinism.
  std::set<std::string> label_set;
  for (const auto& ex : raw.train) label_set.insert(ex.label);
  std::map<std::string, int> label_ids;
  LoadedData out;
  for (const auto& name : label_set) {
    label_ids.emplace(name, static_cast<int>(out.split.label_names.size()));
    out.split.label_names.push_back(name);
  }

  std::vector<std::vector<std::string>> train_tokens;
  train_tokens.reserve(raw.train.size());
  for (const auto& ex : raw.train) train_tokens.push_back(tokenize(ex.text));
  out.vocab = Vocabulary::build(train_tokens, min_count);

  // Cross-split duplicates would leak evaluation data into training.
  std::set<std::string> seen;
  for (const auto* split : {&raw.train, &raw.valid, &raw.test}) {
    for (const auto& ex : *split) {
      if (!seen.insert(ex.text).second)
        throw std::runtime_error("dataset: duplicate text across splits: " + ex.text);
    }
  }

  const auto convert = [&](const std::vector<RawExample>& rows, const char* split_name,
                           std::vector<LabeledExample>& ind, std::vector<TokenSequence>* ood) {
    int truncated = 0;
    for (const auto& ex : rows) {
      const auto tokens = tokenize(ex.text);
      if (static_cast<int>(tokens.size()) > max_len - 2) ++truncated;
      if (ex.is_ood) {
        ood->push_back(out.vocab.encode(tokens, max_len));
        continue;
      }
      auto it = label_ids.find(ex.label);
      if (it == label_ids.end())
        throw std::runtime_error(std::string("dataset: label '") + ex.label + "' in " +
                                 split_name + " does not occur in train");
      LabeledExample le;
      le.sequence = out.vocab.encode(tokens, max_len);
      le.label = it->second;
      ind.push_back(std::move(le));
    }
    return truncated;
  };

  std::vector<TokenSequence> unused;
  int truncated = 0;
  truncated += convert(raw.train, "train", out.split.train, &unused);
  truncated += convert(raw.valid, "valid", out.split.valid, &unused);
  truncated += convert(raw.test, "test", out.split.test, &out.split.test_ood);
  if (!unused.empty()) throw std::logic_error("dataset: OOD rows outside test survived parsing");
  if (truncated > 0)
    std::fprintf(stderr, "dataset: %d utterances longer than max_len-2 were truncated\n",
                 truncated);
  return out;
}

void write_generic_tsv(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& rows,
                       const std::string& comment) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::runtime_error("dataset: cannot write " + path);
  if (!comment.empty()) outf << "# " << comment << '\n';
  for (const auto& [label, text] : rows) outf << label << '\t' << text << '\n';
}

}  // namespace oodgen
