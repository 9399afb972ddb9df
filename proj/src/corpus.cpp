#include "pseudomix/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "pseudomix/error.hpp"
#include "pseudomix/rng.hpp"

namespace pseudomix::corpus {

using nlohmann::json;

std::string to_string(Provenance p) { return p == Provenance::Real ? "real" : "synthetic"; }

std::string to_string(CorpusKind k) {
  switch (k) {
    case CorpusKind::Real:
      return "real";
    case CorpusKind::SourceOriginated:
      return "source-originated";
    case CorpusKind::TargetOriginated:
      return "target-originated";
    case CorpusKind::Mixed:
      return "mixed";
  }
  return "?";
}

CorpusKind parse_kind(const std::string& s) {
  if (s == "real") return CorpusKind::Real;
  if (s == "source-originated") return CorpusKind::SourceOriginated;
  if (s == "target-originated") return CorpusKind::TargetOriginated;
  if (s == "mixed") return CorpusKind::Mixed;
  throw ConfigError("unknown corpus kind '" + s + "'");
}

Sentence::Sentence(Tokens tokens, Provenance provenance, std::string language)
    : tokens_(std::move(tokens)), provenance_(provenance), language_(std::move(language)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw ConfigError("sentence contains an empty token");
  }
}

Sentence Sentence::with_tokens(Tokens tokens) const {
  return Sentence(std::move(tokens), provenance_, language_);
}

char pattern_of(const SentencePair& pair) {
  const bool s = pair.source.provenance() == Provenance::Real;
  const bool t = pair.target.provenance() == Provenance::Real;
  if (s && t) return 'r';
  if (s) return 's';
  if (t) return 't';
  return 'x';
}

namespace {

char expected_pattern(CorpusKind k) {
  switch (k) {
    case CorpusKind::Real:
      return 'r';
    case CorpusKind::SourceOriginated:
      return 's';
    case CorpusKind::TargetOriginated:
      return 't';
    case CorpusKind::Mixed:
      return 'm';
  }
  return '?';
}

CorpusKind kind_for_pattern(char p) {
  switch (p) {
    case 'r':
      return CorpusKind::Real;
    case 's':
      return CorpusKind::SourceOriginated;
    case 't':
      return CorpusKind::TargetOriginated;
    default:
      throw ConfigError("no corpus kind has both sides synthetic");
  }
}

// A Mixed corpus that lost one of its patterns (e.g. to filtering) is
// reported as the remaining single-originated kind.
CorpusKind settle_kind(CorpusKind kind, const std::vector<SentencePair>& pairs) {
  if (kind != CorpusKind::Mixed || pairs.empty()) return kind;
  bool has_s = false, has_t = false;
  for (const auto& p : pairs) {
    const char c = pattern_of(p);
    has_s |= c == 's';
    has_t |= c == 't';
  }
  if (has_s && !has_t) return CorpusKind::SourceOriginated;
  if (has_t && !has_s) return CorpusKind::TargetOriginated;
  return kind;
}

}  // namespace

ParallelCorpus::ParallelCorpus(LanguagePair langs, CorpusKind kind, std::vector<SentencePair> pairs)
    : langs_(std::move(langs)), kind_(kind), pairs_(std::move(pairs)) {
  if (langs_.source == langs_.target) {
    throw ConfigError("source and target language are both '" + langs_.source + "'");
  }
  const char want = expected_pattern(kind_);
  bool has_s = false, has_t = false;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (p.source.language() != langs_.source || p.target.language() != langs_.target) {
      throw ConfigError("pair " + std::to_string(i) + " has languages (" + p.source.language() +
                        ", " + p.target.language() + "), corpus is (" + langs_.source + ", " +
                        langs_.target + ")");
    }
    const char c = pattern_of(p);
    has_s |= c == 's';
    has_t |= c == 't';
    const bool ok = want == 'm' ? (c == 's' || c == 't') : c == want;
    if (!ok) {
      throw ConfigError("pair " + std::to_string(i) + " provenance does not fit a " +
                        to_string(kind_) + " corpus");
    }
  }
  if (kind_ == CorpusKind::Mixed && !pairs_.empty() && !(has_s && has_t)) {
    throw ConfigError("mixed corpus needs both source- and target-originated pairs");
  }
}

MultiParallelCorpus::MultiParallelCorpus(std::string source_lang, std::string pivot_lang,
                                         std::string target_lang, std::vector<Triple> triples)
    : source_lang_(std::move(source_lang)),
      pivot_lang_(std::move(pivot_lang)),
      target_lang_(std::move(target_lang)),
      triples_(std::move(triples)) {
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    if (t.source.provenance() != Provenance::Real || t.pivot.provenance() != Provenance::Real ||
        t.target.provenance() != Provenance::Real) {
      throw ConfigError("multi-parallel triple " + std::to_string(i) + " has a synthetic side");
    }
    if (t.source.language() != source_lang_ || t.pivot.language() != pivot_lang_ ||
        t.target.language() != target_lang_) {
      throw ConfigError("multi-parallel triple " + std::to_string(i) + " has wrong languages");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> read_checked(const std::string& path) {
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::find_invalid_utf8(lines[i]) != std::string::npos) {
      throw DecodeError(i + 1, "invalid UTF-8 in " + path);
    }
  }
  return lines;
}

std::vector<std::string> render(const ParallelCorpus& c, bool source) {
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& p : c.pairs()) out.push_back(text::join((source ? p.source : p.target).tokens()));
  return out;
}

}  // namespace

ParallelCorpus load_parallel(const std::string& source_path, const std::string& target_path,
                             const LanguagePair& langs, SideProvenance provenance) {
  const auto src = read_checked(source_path);
  const auto tgt = read_checked(target_path);
  if (src.size() != tgt.size()) {
    throw AlignmentError(src.size(), tgt.size(),
                         "line count mismatch: " + source_path + " / " + target_path);
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    pairs.push_back({Sentence(text::split_whitespace(src[i]), provenance.source, langs.source),
                     Sentence(text::split_whitespace(tgt[i]), provenance.target, langs.target)});
  }
  const char pattern = provenance.source == Provenance::Real
                           ? (provenance.target == Provenance::Real ? 'r' : 's')
                           : (provenance.target == Provenance::Real ? 't' : 'x');
  return ParallelCorpus(langs, kind_for_pattern(pattern), std::move(pairs));
}

std::string source_path(const std::string& basename, const ParallelCorpus& c) {
  return basename + "." + c.source_language();
}

std::string target_path(const std::string& basename, const ParallelCorpus& c) {
  return basename + "." + c.target_language();
}

void save_corpus(const ParallelCorpus& corpus, const std::string& basename, const Lineage& lineage) {
  text::write_lines(source_path(basename, corpus), render(corpus, true));
  text::write_lines(target_path(basename, corpus), render(corpus, false));
  json meta;
  meta["source_lang"] = corpus.source_language();
  meta["target_lang"] = corpus.target_language();
  meta["kind"] = to_string(corpus.kind());
  meta["size"] = corpus.size();
  meta["seed"] = lineage.seed ? json(*lineage.seed) : json(nullptr);
  meta["parents"] = lineage.parents;
  meta["preprocessing"] = lineage.preprocessing;
  std::string pattern;
  pattern.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) pattern += pattern_of(p);
  meta["provenance_pattern"] = pattern;
  text::write_file(meta_path(basename), meta.dump(2) + "\n");
}

LoadedCorpus load_corpus(const std::string& basename) {
  json meta;
  try {
    meta = json::parse(text::read_file(meta_path(basename)));
  } catch (const json::exception& e) {
    throw FormatError("bad metadata " + meta_path(basename) + ": " + e.what());
  }
  try {
    const LanguagePair langs{meta.at("source_lang").get<std::string>(),
                             meta.at("target_lang").get<std::string>()};
    const auto kind = parse_kind(meta.at("kind").get<std::string>());
    const auto pattern = meta.value("provenance_pattern", std::string{});

    const auto src = read_checked(basename + "." + langs.source);
    const auto tgt = read_checked(basename + "." + langs.target);
    if (src.size() != tgt.size()) throw AlignmentError(src.size(), tgt.size(), "corpus " + basename);
    if (meta.at("size").get<std::size_t>() != src.size()) {
      throw AlignmentError(meta.at("size").get<std::size_t>(), src.size(),
                           "metadata size disagrees with files for " + basename);
    }
    if (!pattern.empty() && pattern.size() != src.size()) {
      throw AlignmentError(pattern.size(), src.size(), "provenance pattern length for " + basename);
    }
    std::vector<SentencePair> pairs;
    pairs.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      char c = pattern.empty() ? expected_pattern(kind) : pattern[i];
      if (c == 'm') throw FormatError("mixed corpus without provenance pattern: " + basename);
      const auto ps = (c == 'r' || c == 's') ? Provenance::Real : Provenance::Synthetic;
      const auto pt = (c == 'r' || c == 't') ? Provenance::Real : Provenance::Synthetic;
      pairs.push_back({Sentence(text::split_whitespace(src[i]), ps, langs.source),
                       Sentence(text::split_whitespace(tgt[i]), pt, langs.target)});
    }
    Lineage lineage;
    if (!meta.at("seed").is_null()) lineage.seed = meta.at("seed").get<std::uint64_t>();
    lineage.parents = meta.at("parents").get<std::vector<std::string>>();
    lineage.preprocessing = meta.value("preprocessing", std::vector<std::string>{});
    return {ParallelCorpus(langs, kind, std::move(pairs)), std::move(lineage)};
  } catch (const json::exception& e) {
    throw FormatError("bad metadata " + meta_path(basename) + ": " + e.what());
  }
}

MultiParallelCorpus load_multi(const std::string& source_path, const std::string& pivot_path,
                               const std::string& target_path, const std::string& source_lang,
                               const std::string& pivot_lang, const std::string& target_lang) {
  const auto s = read_checked(source_path);
  const auto p = read_checked(pivot_path);
  const auto t = read_checked(target_path);
  if (s.size() != p.size()) throw AlignmentError(s.size(), p.size(), "source/pivot line counts");
  if (p.size() != t.size()) throw AlignmentError(p.size(), t.size(), "pivot/target line counts");
  std::vector<Triple> triples;
  triples.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    triples.push_back({Sentence(text::split_whitespace(s[i]), Provenance::Real, source_lang),
                       Sentence(text::split_whitespace(p[i]), Provenance::Real, pivot_lang),
                       Sentence(text::split_whitespace(t[i]), Provenance::Real, target_lang)});
  }
  return MultiParallelCorpus(source_lang, pivot_lang, target_lang, std::move(triples));
}

void save_multi(const MultiParallelCorpus& multi, const std::string& basename) {
  std::vector<std::string> s, p, t;
  for (const auto& tr : multi.triples()) {
    s.push_back(text::join(tr.source.tokens()));
    p.push_back(text::join(tr.pivot.tokens()));
    t.push_back(text::join(tr.target.tokens()));
  }
  text::write_lines(basename + "." + multi.source_language(), s);
  text::write_lines(basename + "." + multi.pivot_language(), p);
  text::write_lines(basename + "." + multi.target_language(), t);
}

// ---------------------------------------------------------------------------

AlignResult pivot_align(const ParallelCorpus& src_pivot, const ParallelCorpus& pivot_tgt) {
  if (src_pivot.target_language() != pivot_tgt.source_language()) {
    throw ConfigError("pivot languages differ: " + src_pivot.target_language() + " vs " +
                      pivot_tgt.source_language());
  }
  AlignResult result{MultiParallelCorpus(src_pivot.source_language(), src_pivot.target_language(),
                                         pivot_tgt.target_language(), {}),
                     {}};
  if (src_pivot.empty() || pivot_tgt.empty()) return result;

  // Tokens are whitespace-split already, so joining them is the normalized line.
  std::unordered_map<std::string, std::vector<std::size_t>> by_pivot;
  for (std::size_t j = 0; j < pivot_tgt.size(); ++j) {
    by_pivot[text::join(pivot_tgt.pairs()[j].source.tokens())].push_back(j);
  }

  std::vector<Triple> triples;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& sp : src_pivot.pairs()) {
    const auto key = text::join(sp.target.tokens());
    auto it = by_pivot.find(key);
    if (it == by_pivot.end()) continue;
    ++result.stats.matched_pairs;
    for (std::size_t j : it->second) {
      const auto& pt = pivot_tgt.pairs()[j];
      ++result.stats.candidate_triples;
      auto id = std::make_tuple(text::join(sp.source.tokens()), key, text::join(pt.target.tokens()));
      if (!seen.insert(std::move(id)).second) {
        ++result.stats.duplicates_removed;
        continue;
      }
      triples.push_back({sp.source, sp.target, pt.target});
    }
  }
  if (triples.empty()) ++result.stats.warnings;
  result.multi = MultiParallelCorpus(src_pivot.source_language(), src_pivot.target_language(),
                                     pivot_tgt.target_language(), std::move(triples));
  return result;
}

ParallelCorpus project_synthetic(const MultiParallelCorpus& multi, Side side,
                                 const Translator& translator) {
  std::vector<Tokens> pivots;
  pivots.reserve(multi.size());
  for (const auto& t : multi.triples()) pivots.push_back(t.pivot.tokens());
  auto outputs = multi.empty() ? std::vector<std::optional<Tokens>>{} : translator(pivots);
  if (outputs.size() != pivots.size()) {
    throw AlignmentError(pivots.size(), outputs.size(), "translator output count");
  }

  const LanguagePair langs{multi.source_language(), multi.target_language()};
  std::vector<SentencePair> pairs;
  pairs.reserve(multi.size());
  for (std::size_t i = 0; i < multi.size(); ++i) {
    if (!outputs[i]) throw TranslationError(i, "translator failed on triple");
    const auto& tr = multi.triples()[i];
    if (side == Side::Target) {
      pairs.push_back({tr.source, Sentence(std::move(*outputs[i]), Provenance::Synthetic,
                                           multi.target_language())});
    } else {
      pairs.push_back({Sentence(std::move(*outputs[i]), Provenance::Synthetic,
                                multi.source_language()),
                       tr.target});
    }
  }
  const auto kind =
      side == Side::Target ? CorpusKind::SourceOriginated : CorpusKind::TargetOriginated;
  return ParallelCorpus(langs, kind, std::move(pairs));
}

ParallelCorpus mix_pseudo(const ParallelCorpus& source_originated,
                          const ParallelCorpus& target_originated, std::uint64_t seed) {
  if (source_originated.source_language() != target_originated.source_language() ||
      source_originated.target_language() != target_originated.target_language()) {
    throw ConfigError("cannot mix corpora with different language pairs");
  }
  if (source_originated.kind() != CorpusKind::SourceOriginated) {
    throw ConfigError("first corpus must be source-originated, got " +
                      to_string(source_originated.kind()));
  }
  if (target_originated.kind() != CorpusKind::TargetOriginated) {
    throw ConfigError("second corpus must be target-originated, got " +
                      to_string(target_originated.kind()));
  }
  if (source_originated.empty()) throw DegenerateInputError("source-originated corpus is empty");
  if (target_originated.empty()) throw DegenerateInputError("target-originated corpus is empty");
  const std::size_t n1 = source_originated.size() / 2;
  const std::size_t n2 = (target_originated.size() + 1) / 2;
  if (n1 == 0) {
    throw DegenerateInputError("source-originated corpus has a single pair; its half-sample is empty");
  }

  Rng rng(seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(n1 + n2);
  for (auto i : rng.sample_without_replacement(source_originated.size(), n1)) {
    pairs.push_back(source_originated.pairs()[i]);
  }
  for (auto i : rng.sample_without_replacement(target_originated.size(), n2)) {
    pairs.push_back(target_originated.pairs()[i]);
  }
  rng.shuffle(pairs);
  return ParallelCorpus(source_originated.languages(), CorpusKind::Mixed, std::move(pairs));
}

namespace {

FilterResult keep_if(const ParallelCorpus& corpus,
                     const std::function<bool(const SentencePair&)>& keep) {
  std::vector<SentencePair> pairs;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (keep(corpus.pairs()[i])) {
      pairs.push_back(corpus.pairs()[i]);
      kept.push_back(i);
    }
  }
  const std::size_t removed = corpus.size() - pairs.size();
  const auto kind = settle_kind(corpus.kind(), pairs);
  return {ParallelCorpus(corpus.languages(), kind, std::move(pairs)), std::move(kept), removed};
}

}  // namespace

FilterResult filter_length(const ParallelCorpus& corpus, std::size_t max_units) {
  return keep_if(corpus, [max_units](const SentencePair& p) {
    return p.source.size() <= max_units && p.target.size() <= max_units;
  });
}

FilterResult drop_empty(const ParallelCorpus& corpus) {
  return keep_if(corpus,
                 [](const SentencePair& p) { return !p.source.empty() && !p.target.empty(); });
}

ParallelCorpus select(const ParallelCorpus& corpus, const std::vector<std::size_t>& indices) {
  std::vector<SentencePair> pairs;
  pairs.reserve(indices.size());
  for (auto i : indices) pairs.push_back(corpus.pairs().at(i));
  const auto kind = settle_kind(corpus.kind(), pairs);
  return ParallelCorpus(corpus.languages(), kind, std::move(pairs));
}

ParallelCorpus swap_sides(const ParallelCorpus& corpus) {
  std::vector<SentencePair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) pairs.push_back({p.target, p.source});
  CorpusKind kind = corpus.kind();
  if (kind == CorpusKind::SourceOriginated) {
    kind = CorpusKind::TargetOriginated;
  } else if (kind == CorpusKind::TargetOriginated) {
    kind = CorpusKind::SourceOriginated;
  }
  return ParallelCorpus({corpus.target_language(), corpus.source_language()}, kind,
                        std::move(pairs));
}

ParallelCorpus map_tokens(const ParallelCorpus& corpus,
                          const std::function<Tokens(const Sentence&)>& fn) {
  std::vector<SentencePair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) {
    pairs.push_back({p.source.with_tokens(fn(p.source)), p.target.with_tokens(fn(p.target))});
  }
  return ParallelCorpus(corpus.languages(), corpus.kind(), std::move(pairs));
}

CorpusStats corpus_stats(const ParallelCorpus& corpus) {
  CorpusStats s;
  s.size = corpus.size();
  if (corpus.empty()) return s;
  double src = 0.0, tgt = 0.0;
  for (const auto& p : corpus.pairs()) {
    src += static_cast<double>(p.source.size());
    tgt += static_cast<double>(p.target.size());
  }
  s.avg_source_length = src / static_cast<double>(s.size);
  s.avg_target_length = tgt / static_cast<double>(s.size);
  return s;
}

std::string format_stats_table(const std::vector<StatsRow>& rows, const std::string& source_lang,
                               const std::string& target_lang) {
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "Corpus\tSize\tAvg len " << source_lang << "\tAvg len " << target_lang << "\n";
  for (const auto& r : rows) {
    out << r.name << '\t' << r.stats.size << '\t' << fmt(r.stats.avg_source_length) << '\t'
        << fmt(r.stats.avg_target_length) << "\n";
  }
  return out.str();
}

}  // namespace pseudomix::corpus
