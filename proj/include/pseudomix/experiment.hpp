#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pseudomix/config.hpp"
#include "pseudomix/corpus.hpp"
#include "pseudomix/metrics.hpp"
#include "pseudomix/subword.hpp"

namespace pseudomix::pipeline {

// BPE model per language code.
using Segmenters = std::map<std::string, subword::BpeModel>;

// Applies the BPE model of each sentence's language.
corpus::ParallelCorpus segment(const corpus::ParallelCorpus& words, const Segmenters& bpe);

struct CleanedCorpora {
  std::vector<corpus::ParallelCorpus> units;  // subword units
  std::vector<corpus::ParallelCorpus> words;  // same pairs, word level
  std::vector<std::size_t> kept;              // surviving input indices
};

// Segments every corpus, drops empty and over-long pairs, and keeps only the
// indices that survive in all of them, so the outputs have equal sizes.
// All inputs must have the same number of pairs.
CleanedCorpora clean_jointly(const std::vector<corpus::ParallelCorpus>& word_corpora,
                             const Segmenters& bpe, std::size_t max_units);

struct PseudoCorpora {
  corpus::ParallelCorpus source_originated;  // subword units
  corpus::ParallelCorpus target_originated;
  corpus::ParallelCorpus mixed;
  corpus::ParallelCorpus source_originated_words;
  corpus::ParallelCorpus target_originated_words;
  corpus::ParallelCorpus mixed_words;
  std::vector<std::size_t> kept_triples;
  std::string stats_table;  // size and average lengths per corpus, word level
};

// Source-originated (pivot translated to the target language),
// target-originated (pivot translated to the source language) and their mix,
// cleaned to equal sizes.
PseudoCorpora build_all_corpora(const corpus::MultiParallelCorpus& multi,
                                const corpus::Translator& to_source,
                                const corpus::Translator& to_target, const Segmenters& bpe,
                                std::size_t max_units, std::uint64_t mix_seed);

// Display names used in reports.
std::string source_originated_name(const std::string& src, const std::string& tgt);  // "src-tgt*"
std::string target_originated_name(const std::string& src, const std::string& tgt);  // "src*-tgt"
inline constexpr const char* kMixedName = "PSEUDO_mix";

// BLEU x 100 rounded to hundredths, kept as an integer so that reported
// deltas are exact differences of reported values.
using CentiBleu = long long;
CentiBleu to_centi(double bleu100);
std::string format_centi(CentiBleu c);

struct ReportRow {
  std::string corpus;
  std::string direction;
  std::string set;
  CentiBleu pseudo_only = 0;
  bool has_finetuned = false;
  CentiBleu finetuned = 0;

  CentiBleu delta() const { return finetuned - pseudo_only; }
};

// Header "corpus direction set pseudo_only real_finetuning delta", preceded by
// '#' comment lines. Missing fine-tuning values print as "-".
std::string format_report_tsv(const std::vector<ReportRow>& rows,
                              const std::vector<std::string>& comments);
// Parses the rows back (comments skipped). Throws FormatError.
std::vector<ReportRow> parse_report_tsv(const std::string& tsv);

// Runs the scenario end to end and returns the output directory, which holds
// report.tsv, report.txt, runs.tsv, stats.tsv, manifest.json, the data,
// models and logs. Throws StageError naming the failed stage.
std::string run_scenario(const ExperimentConfig& cfg);

}  // namespace pseudomix::pipeline
