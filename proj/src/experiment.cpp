#include "pseudomix/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "pseudomix/checkpoint.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/hash.hpp"
#include "pseudomix/rng.hpp"
#include "pseudomix/translator.hpp"

namespace pseudomix::pipeline {

namespace fs = std::filesystem;
using corpus::MultiParallelCorpus;
using corpus::ParallelCorpus;
using corpus::Provenance;
using corpus::Sentence;
using corpus::SentencePair;
using nlohmann::ordered_json;

corpus::ParallelCorpus segment(const ParallelCorpus& words, const Segmenters& bpe) {
  return corpus::map_tokens(words, [&](const Sentence& s) {
    auto it = bpe.find(s.language());
    if (it == bpe.end()) throw ConfigError("no BPE model for language '" + s.language() + "'");
    return subword::bpe_apply(it->second, s.tokens());
  });
}

CleanedCorpora clean_jointly(const std::vector<ParallelCorpus>& word_corpora, const Segmenters& bpe,
                             std::size_t max_units) {
  CleanedCorpora out;
  if (word_corpora.empty()) return out;
  const std::size_t n = word_corpora.front().size();
  std::vector<ParallelCorpus> units;
  std::vector<int> survives(n, 1);
  for (const auto& w : word_corpora) {
    if (w.size() != n) throw AlignmentError(n, w.size(), "corpora cleaned together differ in size");
    auto u = segment(w, bpe);
    auto non_empty = corpus::drop_empty(u);
    auto short_enough = corpus::filter_length(non_empty.corpus, max_units);
    std::vector<int> ok(n, 0);
    for (auto k : short_enough.kept) ok[non_empty.kept[k]] = 1;
    for (std::size_t i = 0; i < n; ++i) survives[i] &= ok[i];
    units.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (survives[i]) out.kept.push_back(i);
  }
  for (std::size_t c = 0; c < word_corpora.size(); ++c) {
    out.units.push_back(corpus::select(units[c], out.kept));
    out.words.push_back(corpus::select(word_corpora[c], out.kept));
  }
  return out;
}

std::string source_originated_name(const std::string& src, const std::string& tgt) {
  return src + "-" + tgt + "*";
}

std::string target_originated_name(const std::string& src, const std::string& tgt) {
  return src + "*-" + tgt;
}

namespace {

ParallelCorpus real_pairs(const MultiParallelCorpus& multi) {
  std::vector<SentencePair> pairs;
  pairs.reserve(multi.size());
  for (const auto& t : multi.triples()) pairs.push_back({t.source, t.target});
  return ParallelCorpus({multi.source_language(), multi.target_language()},
                        corpus::CorpusKind::Real, std::move(pairs));
}

}  // namespace

PseudoCorpora build_all_corpora(const MultiParallelCorpus& multi, const corpus::Translator& to_source,
                                const corpus::Translator& to_target, const Segmenters& bpe,
                                std::size_t max_units, std::uint64_t mix_seed) {
  auto so = corpus::project_synthetic(multi, corpus::Side::Target, to_target);
  auto to = corpus::project_synthetic(multi, corpus::Side::Source, to_source);
  auto cleaned = clean_jointly({so, to}, bpe, max_units);

  const auto& S = multi.source_language();
  const auto& T = multi.target_language();
  PseudoCorpora out{cleaned.units[0],
                    cleaned.units[1],
                    corpus::mix_pseudo(cleaned.units[0], cleaned.units[1], mix_seed),
                    cleaned.words[0],
                    cleaned.words[1],
                    corpus::mix_pseudo(cleaned.words[0], cleaned.words[1], mix_seed),
                    cleaned.kept,
                    {}};
  out.stats_table = corpus::format_stats_table(
      {{S + "-" + multi.pivot_language() + "-" + T, corpus::corpus_stats(real_pairs(multi))},
       {source_originated_name(S, T), corpus::corpus_stats(out.source_originated_words)},
       {target_originated_name(S, T), corpus::corpus_stats(out.target_originated_words)},
       {kMixedName, corpus::corpus_stats(out.mixed_words)}},
      S, T);
  return out;
}

// ---------------------------------------------------------------------------
// Report table

CentiBleu to_centi(double bleu100) { return std::llround(bleu100 * 100.0); }

std::string format_centi(CentiBleu c) {
  const bool neg = c < 0;
  const auto a = neg ? -c : c;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", neg ? "-" : "", a / 100, a % 100);
  return buf;
}

namespace {

CentiBleu parse_centi(const std::string& s) {
  const bool neg = !s.empty() && s[0] == '-';
  const auto body = neg ? s.substr(1) : s;
  const auto dot = body.find('.');
  if (dot == std::string::npos || body.size() != dot + 3) throw FormatError("bad BLEU value '" + s + "'");
  try {
    const CentiBleu v = std::stoll(body.substr(0, dot)) * 100 + std::stoll(body.substr(dot + 1));
    return neg ? -v : v;
  } catch (const std::exception&) {
    throw FormatError("bad BLEU value '" + s + "'");
  }
}

}  // namespace

std::string format_report_tsv(const std::vector<ReportRow>& rows,
                              const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "corpus\tdirection\tset\tpseudo_only\treal_finetuning\tdelta\n";
  for (const auto& r : rows) {
    out << r.corpus << '\t' << r.direction << '\t' << r.set << '\t' << format_centi(r.pseudo_only)
        << '\t';
    if (r.has_finetuned) {
      out << format_centi(r.finetuned) << '\t' << (r.delta() >= 0 ? "+" : "") << format_centi(r.delta());
    } else {
      out << "-\t-";
    }
    out << "\n";
  }
  return out.str();
}

std::vector<ReportRow> parse_report_tsv(const std::string& tsv) {
  std::vector<ReportRow> rows;
  std::istringstream in(tsv);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) f.push_back(cell);
    if (f.size() != 6) throw FormatError("report row has " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.corpus = f[0];
    r.direction = f[1];
    r.set = f[2];
    r.pseudo_only = parse_centi(f[3]);
    if (f[4] != "-") {
      r.has_finetuned = true;
      r.finetuned = parse_centi(f[4]);
      const auto d = f[5].size() && f[5][0] == '+' ? f[5].substr(1) : f[5];
      if (parse_centi(d) != r.delta()) {
        throw FormatError("report delta " + f[5] + " disagrees with its columns");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Scenario runner

namespace {

struct TrainedModel {
  nmt::ModelBundle bundle;
  nmt::TrainResult result;
};

struct Direction {
  std::string name;  // "src->tgt"
  bool reversed;
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg), out_(cfg.output_dir) {}

  std::string run() {
    cfg_.validate();
    fs::create_directories(out_ / "data");
    fs::create_directories(out_ / "models");
    fs::create_directories(out_ / "logs");
    fs::create_directories(out_ / "hyp");
    const auto cfg_text = serialize_config(cfg_);
    text::write_file((out_ / "config.json").string(), cfg_text);
    auto located_anywhere = cfg_;
    located_anywhere.output_dir = "-";
    config_hash_ = sha256_hex(serialize_config(located_anywhere));

    stage("prepare-data", [&] { prepare_data(); });
    stage("learn-bpe", [&] { learn_bpe(); });
    switch (cfg_.scenario) {
      case Scenario::PseudoOnly:
      case Scenario::RealFineTuning:
        run_pseudo(cfg_.scenario == Scenario::RealFineTuning);
        break;
      case Scenario::MergedBaseline:
        run_merged();
        break;
      case Scenario::BeamAblation:
        run_ablation();
        break;
      case Scenario::MotherModelSweep:
        run_sweep();
        break;
    }
    stage("report", [&] { write_reports(); });
    return out_.string();
  }

 private:
  template <typename F>
  void stage(const std::string& name, F&& f) {
    try {
      f();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  std::string rel(const fs::path& p) const { return fs::relative(p, out_).generic_string(); }

  void record_corpus(const std::string& name, const ParallelCorpus& c, const std::string& basename,
                     corpus::Lineage lineage = {}) {
    corpus::save_corpus(c, basename, lineage);
    ordered_json files;
    for (const auto& path : {corpus::source_path(basename, c), corpus::target_path(basename, c),
                             corpus::meta_path(basename)}) {
      files[rel(path)] = sha256_file(path);
    }
    corpora_[name] = files;
  }

  static text::Tokens retokenize(const text::Tokens& t) { return subword::tokenize(text::join(t)); }

  MultiParallelCorpus tokenized(const MultiParallelCorpus& m) {
    std::vector<corpus::Triple> triples;
    triples.reserve(m.size());
    for (const auto& t : m.triples()) {
      triples.push_back({t.source.with_tokens(retokenize(t.source.tokens())),
                         t.pivot.with_tokens(retokenize(t.pivot.tokens())),
                         t.target.with_tokens(retokenize(t.target.tokens()))});
    }
    return MultiParallelCorpus(m.source_language(), m.pivot_language(), m.target_language(),
                               std::move(triples));
  }

  ParallelCorpus tokenized(const ParallelCorpus& c) {
    return corpus::map_tokens(c, [](const Sentence& s) { return retokenize(s.tokens()); });
  }

  void prepare_data() {
    const auto data = out_ / "data";
    if (cfg_.data_source == "toy") {
      const auto& spec = cfg_.toy;
      toy_ = generate_toy_multiparallel(spec);
      S_ = spec.source_lang;
      P_ = spec.pivot_lang;
      T_ = spec.target_lang;
      multi_ = tokenized(toy_->train);
      dev_ = tokenized(real_pairs(toy_->dev));
      test_ = tokenized(real_pairs(toy_->test));
      if (!toy_->real.empty()) real_ = tokenized(toy_->real);
      mother_src_ = tokenized(toy_->mother_source);
      mother_tgt_ = tokenized(toy_->mother_target);
      dev_pivot_src_ = tokenized(ParallelCorpus(
          {P_, S_}, corpus::CorpusKind::Real, pivot_side_pairs(toy_->dev, true)));
      dev_pivot_tgt_ = tokenized(ParallelCorpus(
          {P_, T_}, corpus::CorpusKind::Real, pivot_side_pairs(toy_->dev, false)));
      record_corpus("mother-" + P_ + "-" + S_, *mother_src_, (data / ("mother." + P_ + "-" + S_)).string(),
                    {spec.seed, {}, {std::string("tokenize:") + subword::kTokenizerVersion}});
      record_corpus("mother-" + P_ + "-" + T_, *mother_tgt_, (data / ("mother." + P_ + "-" + T_)).string(),
                    {spec.seed, {}, {std::string("tokenize:") + subword::kTokenizerVersion}});
    } else {
      const auto& f = cfg_.files;
      S_ = f.source_lang;
      P_ = f.pivot_lang;
      T_ = f.target_lang;
      multi_ = tokenized(corpus::load_multi(f.multi_prefix + "." + S_, f.multi_prefix + "." + P_,
                                            f.multi_prefix + "." + T_, S_, P_, T_));
      auto load = [&](const std::string& prefix) {
        return tokenized(corpus::load_parallel(prefix + "." + S_, prefix + "." + T_, {S_, T_}));
      };
      dev_ = load(f.dev_prefix);
      test_ = load(f.test_prefix);
      if (!f.real_prefix.empty()) real_ = load(f.real_prefix);
    }
    const std::vector<std::string> prep = {std::string("tokenize:") + subword::kTokenizerVersion};
    corpus::save_multi(multi_, (data / "multi").string());
    ordered_json multi_files;
    for (const auto& lang : {S_, P_, T_}) {
      const auto path = (data / ("multi." + lang)).string();
      multi_files[rel(path)] = sha256_file(path);
    }
    corpora_["multi"] = multi_files;
    record_corpus("dev", *dev_, (data / "dev").string(), {cfg_.data_seed, {}, prep});
    record_corpus("test", *test_, (data / "test").string(), {cfg_.data_seed, {}, prep});
    if (real_) record_corpus("real", *real_, (data / "real").string(), {cfg_.data_seed, {}, prep});
  }

  static std::vector<SentencePair> pivot_side_pairs(const MultiParallelCorpus& m, bool to_source) {
    std::vector<SentencePair> out;
    for (const auto& t : m.triples()) out.push_back({t.pivot, to_source ? t.source : t.target});
    return out;
  }

  void learn_bpe() {
    std::map<std::string, std::vector<text::Tokens>> text_by_lang;
    auto add = [&](const Sentence& s) { text_by_lang[s.language()].push_back(s.tokens()); };
    for (const auto& t : multi_.triples()) {
      add(t.source);
      add(t.pivot);
      add(t.target);
    }
    for (const auto* c : {real_ ? &*real_ : nullptr, mother_src_ ? &*mother_src_ : nullptr,
                          mother_tgt_ ? &*mother_tgt_ : nullptr}) {
      if (!c) continue;
      for (const auto& p : c->pairs()) {
        add(p.source);
        add(p.target);
      }
    }
    for (const auto& lang : {S_, P_, T_}) {
      bpe_[lang] = subword::bpe_learn(text_by_lang[lang], cfg_.bpe_merges);
      subword::save_bpe(bpe_[lang], (out_ / "data" / ("bpe." + lang)).string());
    }
  }

  // Oriented subword corpus for a direction.
  ParallelCorpus orient(const ParallelCorpus& c, bool reversed) const {
    return reversed ? corpus::swap_sides(c) : c;
  }

  static std::vector<nmt::IdPair> encode_pairs(const ParallelCorpus& units, const nmt::Vocabulary& sv,
                                               const nmt::Vocabulary& tv) {
    std::vector<nmt::IdPair> out;
    out.reserve(units.size());
    for (const auto& p : units.pairs()) out.push_back({sv.encode(p.source.tokens()), tv.encode(p.target.tokens())});
    return out;
  }

  TrainedModel train_model(const std::string& name, const ParallelCorpus& train_units,
                           const ParallelCorpus& dev_units, const nmt::TrainConfig& base,
                           std::uint64_t seed, const nmt::TrainOptions& opts = {}) {
    TrainedModel m;
    stage("train:" + name, [&] {
      std::vector<text::Tokens> src, tgt;
      for (const auto& p : train_units.pairs()) {
        src.push_back(p.source.tokens());
        tgt.push_back(p.target.tokens());
      }
      m.bundle.source_vocab = nmt::Vocabulary::build(src, base.vocab_cap);
      m.bundle.target_vocab = nmt::Vocabulary::build(tgt, base.vocab_cap);
      auto cfg = base;
      cfg.seed = seed;
      const nmt::ModelShape shape{m.bundle.source_vocab.size(), m.bundle.target_vocab.size(),
                                  cfg.emb_dim, cfg.hidden_dim};
      auto init = nmt::ModelParameters::random(shape, seed, cfg.init_range);
      std::cerr << "[pseudomix] training " << name << " on " << train_units.size() << " pairs\n";
      m.result = nmt::train(init, encode_pairs(train_units, m.bundle.source_vocab, m.bundle.target_vocab),
                            cfg, encode_pairs(dev_units, m.bundle.source_vocab, m.bundle.target_vocab),
                            opts);
      m.bundle.params = m.result.params;
      save_model(name, m);
    });
    return m;
  }

  TrainedModel fine_tune_model(const std::string& name, const TrainedModel& base,
                               const ParallelCorpus& real_units, const ParallelCorpus& dev_units,
                               std::uint64_t seed) {
    TrainedModel m;
    stage("finetune:" + name, [&] {
      auto cfg = cfg_.train;
      cfg.learning_rate = cfg_.finetune_learning_rate;
      cfg.epochs = cfg_.finetune_epochs;
      cfg.seed = seed;
      m.bundle = base.bundle;
      std::cerr << "[pseudomix] fine-tuning " << name << " on " << real_units.size() << " pairs\n";
      m.result = nmt::fine_tune(
          base.bundle.params, encode_pairs(real_units, base.bundle.source_vocab, base.bundle.target_vocab),
          cfg, encode_pairs(dev_units, base.bundle.source_vocab, base.bundle.target_vocab));
      m.bundle.params = m.result.params;
      save_model(name, m);
    });
    return m;
  }

  void save_model(const std::string& name, const TrainedModel& m) {
    const auto path = out_ / "models" / (name + ".ckpt");
    nmt::save_bundle(m.bundle, path.string());
    models_[name] = sha256_file(path.string());
    text::write_file((out_ / "logs" / (name + ".log")).string(), nmt::format_train_log(m.result.log));
  }

  // Word-level BLEU x 100 on an oriented word corpus.
  double evaluate(const std::string& name, const TrainedModel& m, const ParallelCorpus& words,
                  const std::string& set) {
    double score = 0.0;
    stage("evaluate:" + name + ":" + set, [&] {
      auto translate = model_translator(m.bundle, bpe_.at(words.source_language()),
                                        bpe_.at(words.target_language()), cfg_.eval_decode);
      std::vector<text::Tokens> inputs, refs, hyps;
      for (const auto& p : words.pairs()) {
        inputs.push_back(p.source.tokens());
        refs.push_back(p.target.tokens());
      }
      std::vector<std::string> lines;
      for (auto& h : translate(inputs)) {
        hyps.push_back(h ? std::move(*h) : text::Tokens{});
        lines.push_back(text::join(hyps.back()));
      }
      text::write_lines((out_ / "hyp" / (name + "." + set + ".txt")).string(), lines);
      score = metrics::corpus_bleu(hyps, refs).score100();
    });
    return score;
  }

  std::vector<Direction> directions() const {
    return {{S_ + "->" + T_, false}, {T_ + "->" + S_, true}};
  }

  std::uint64_t replication_seed(std::size_t r) const { return cfg_.init_seed + r; }
  std::uint64_t mother_seed() const { return cfg_.init_seed + 7919; }

  // Mother models translate the pivot into one side.
  corpus::Translator mother_translator(bool to_source, const decode::DecodeConfig& dc,
                                       std::optional<TrainedModel>* keep = nullptr,
                                       const nmt::TrainOptions& opts = {}) {
    if (cfg_.data_source == "files") {
      return translator_from_spec(to_source ? cfg_.files.translator_to_source
                                            : cfg_.files.translator_to_target,
                                  dc);
    }
    const auto& lang = to_source ? S_ : T_;
    const auto name = "mother." + P_ + "-" + lang;
    auto& cached = to_source ? mother_to_source_ : mother_to_target_;
    if (!cached) {
      const auto& train_words = to_source ? *mother_src_ : *mother_tgt_;
      const auto& dev_words = to_source ? *dev_pivot_src_ : *dev_pivot_tgt_;
      auto m = train_model(name, segment(train_words, bpe_), segment(dev_words, bpe_), cfg_.mother,
                           mother_seed() + (to_source ? 0 : 1), opts);
      const auto path = (out_ / "models" / (name + ".ckpt")).string();
      subword::save_bpe(bpe_.at(P_), path + ".in.bpe");
      subword::save_bpe(bpe_.at(lang), path + ".out.bpe");
      mother_dev_bleu_[lang] = evaluate(name, m, dev_words, "dev");
      cached = std::move(m);
    }
    if (keep) *keep = cached;
    return model_translator(cached->bundle, bpe_.at(P_), bpe_.at(lang), dc);
  }

  struct Cell {
    std::vector<double> pseudo;
    std::vector<double> finetuned;
  };
  using CellKey = std::tuple<std::string, std::string, std::string>;  // corpus, direction, set

  void add_run(const std::string& corpus, const std::string& direction, std::size_t r,
               const std::string& set, double po, std::optional<double> ft, std::size_t best_epoch) {
    auto& cell = cells_[{corpus, direction, set}];
    if (std::find(order_.begin(), order_.end(), CellKey{corpus, direction, set}) == order_.end()) {
      order_.push_back({corpus, direction, set});
    }
    cell.pseudo.push_back(po);
    if (ft) cell.finetuned.push_back(*ft);
    runs_ << corpus << '\t' << direction << '\t' << r + 1 << '\t' << replication_seed(r) << '\t' << set
          << '\t' << fixed(po, 4) << '\t' << (ft ? fixed(*ft, 4) : "-") << '\t' << best_epoch << "\n";
  }

  // Trains (and optionally fine-tunes) R models per direction on one corpus.
  void run_corpus(const std::string& display, const std::string& id, const ParallelCorpus& units,
                  bool finetune) {
    for (const auto& dir : directions()) {
      const auto train_units = orient(units, dir.reversed);
      const auto dev_words = orient(*dev_, dir.reversed);
      const auto test_words = orient(*test_, dir.reversed);
      const auto dev_units = segment(dev_words, bpe_);
      for (std::size_t r = 0; r < cfg_.replications; ++r) {
        const auto name = id + "." + (dir.reversed ? "rev" : "fwd") + ".r" + std::to_string(r + 1);
        auto model = train_model(name, train_units, dev_units, cfg_.train, replication_seed(r));
        const double po_dev = evaluate(name, model, dev_words, "dev");
        const double po_test = evaluate(name, model, test_words, "test");
        std::optional<double> ft_dev, ft_test;
        if (finetune) {
          const auto real_units = segment(orient(*real_, dir.reversed), bpe_);
          auto tuned = fine_tune_model(name + ".ft", model, real_units, dev_units, replication_seed(r));
          ft_dev = evaluate(name + ".ft", tuned, dev_words, "dev");
          ft_test = evaluate(name + ".ft", tuned, test_words, "test");
        }
        add_run(display, dir.name, r, "dev", po_dev, ft_dev, model.result.best_epoch);
        add_run(display, dir.name, r, "test", po_test, ft_test, model.result.best_epoch);
      }
    }
  }

  PseudoCorpora build(const decode::DecodeConfig& dc) {
    PseudoCorpora pc{ParallelCorpus({S_, T_}, corpus::CorpusKind::SourceOriginated, {}),
                     ParallelCorpus({S_, T_}, corpus::CorpusKind::TargetOriginated, {}),
                     ParallelCorpus({S_, T_}, corpus::CorpusKind::Mixed, {}),
                     ParallelCorpus({S_, T_}, corpus::CorpusKind::SourceOriginated, {}),
                     ParallelCorpus({S_, T_}, corpus::CorpusKind::TargetOriginated, {}),
                     ParallelCorpus({S_, T_}, corpus::CorpusKind::Mixed, {}),
                     {},
                     {}};
    auto to_source = mother_translator(true, dc);
    auto to_target = mother_translator(false, dc);
    stage("build-corpora", [&] {
      pc = build_all_corpora(multi_, to_source, to_target, bpe_, cfg_.max_units, cfg_.data_seed);
    });
    return pc;
  }

  void save_pseudo(const PseudoCorpora& pc, const std::string& suffix) {
    const auto data = out_ / "data";
    const std::vector<std::string> prep = {std::string("tokenize:") + subword::kTokenizerVersion,
                                           "clean:drop-empty,max-units=" + std::to_string(cfg_.max_units)};
    const std::vector<std::string> parents = {rel(data / "multi")};
    record_corpus("source-originated" + suffix, pc.source_originated_words,
                  (data / ("source-originated" + suffix)).string(), {std::nullopt, parents, prep});
    record_corpus("target-originated" + suffix, pc.target_originated_words,
                  (data / ("target-originated" + suffix)).string(), {std::nullopt, parents, prep});
    record_corpus("pseudo-mix" + suffix, pc.mixed_words, (data / ("pseudo-mix" + suffix)).string(),
                  {cfg_.data_seed,
                   {rel(data / ("source-originated" + suffix)), rel(data / ("target-originated" + suffix))},
                   prep});
    stats_ += pc.stats_table;
  }

  void run_pseudo(bool finetune) {
    auto pc = build(cfg_.synth_decode);
    save_pseudo(pc, "");
    run_corpus(source_originated_name(S_, T_), "so", pc.source_originated, finetune);
    run_corpus(target_originated_name(S_, T_), "to", pc.target_originated, finetune);
    run_corpus(kMixedName, "mix", pc.mixed, finetune);
  }

  void run_merged() {
    auto pc = build(cfg_.synth_decode);
    save_pseudo(pc, "");
    const auto real_units = segment(*real_, bpe_);
    // Target-originated for each direction: src*-tgt forward, src-tgt* reversed.
    for (const auto& dir : directions()) {
      const auto dev_words = orient(*dev_, dir.reversed);
      const auto test_words = orient(*test_, dir.reversed);
      const auto dev_units = segment(dev_words, bpe_);
      const auto real_dir = orient(real_units, dir.reversed);
      const auto synth = dir.reversed ? corpus::swap_sides(pc.source_originated) : pc.target_originated;
      std::vector<SentencePair> merged = real_dir.pairs();
      merged.insert(merged.end(), synth.pairs().begin(), synth.pairs().end());
      const ParallelCorpus real_only = real_dir;
      for (std::size_t r = 0; r < cfg_.replications; ++r) {
        const auto tag = std::string(dir.reversed ? "rev" : "fwd") + ".r" + std::to_string(r + 1);
        auto a = train_model("baseline-real." + tag, real_only, dev_units, cfg_.train, replication_seed(r));
        add_run("(a) real", dir.name, r, "dev", evaluate("baseline-real." + tag, a, dev_words, "dev"),
                std::nullopt, a.result.best_epoch);
        add_run("(a) real", dir.name, r, "test", evaluate("baseline-real." + tag, a, test_words, "test"),
                std::nullopt, a.result.best_epoch);
        auto b = train_merged("baseline-merged." + tag, merged, dev_units, replication_seed(r));
        const auto label = "(b) real+" + (dir.reversed ? target_originated_name(T_, S_)
                                                        : target_originated_name(S_, T_));
        add_run(label, dir.name, r, "dev", evaluate("baseline-merged." + tag, b, dev_words, "dev"),
                std::nullopt, b.result.best_epoch);
        add_run(label, dir.name, r, "test", evaluate("baseline-merged." + tag, b, test_words, "test"),
                std::nullopt, b.result.best_epoch);
      }
    }
  }

  TrainedModel train_merged(const std::string& name, const std::vector<SentencePair>& pairs,
                            const ParallelCorpus& dev_units, std::uint64_t seed) {
    std::vector<SentencePair> relabeled;
    relabeled.reserve(pairs.size());
    for (const auto& p : pairs) {
      relabeled.push_back({Sentence(p.source.tokens(), Provenance::Real, p.source.language()),
                           Sentence(p.target.tokens(), Provenance::Real, p.target.language())});
    }
    const auto& langs = dev_units.languages();
    return train_model(name, ParallelCorpus(langs, corpus::CorpusKind::Real, std::move(relabeled)),
                       dev_units, cfg_.train, seed);
  }

  void run_ablation() {
    std::vector<PseudoCorpora> by_beam;
    std::vector<ParallelCorpus> words;
    for (auto k : cfg_.ablation_beams) {
      auto dc = cfg_.synth_decode;
      dc.beam_size = k;
      auto so = corpus::project_synthetic(multi_, corpus::Side::Target, mother_translator(false, dc));
      auto to = corpus::project_synthetic(multi_, corpus::Side::Source, mother_translator(true, dc));
      words.push_back(std::move(so));
      words.push_back(std::move(to));
    }
    CleanedCorpora cleaned;
    stage("build-corpora", [&] { cleaned = clean_jointly(words, bpe_, cfg_.max_units); });
    const auto n = cfg_.ablation_beams.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = std::to_string(cfg_.ablation_beams[i]);
      const auto& so = cleaned.units[2 * i];
      const auto& to = cleaned.units[2 * i + 1];
      record_corpus("source-originated.K" + k, cleaned.words[2 * i],
                    (out_ / "data" / ("source-originated.K" + k)).string());
      record_corpus("target-originated.K" + k, cleaned.words[2 * i + 1],
                    (out_ / "data" / ("target-originated.K" + k)).string());
      run_corpus(target_originated_name(S_, T_) + " (K=" + k + ")", "to.K" + k, to, false);
      run_corpus(source_originated_name(S_, T_) + " (K=" + k + ")", "so.K" + k, so, false);
    }
    const auto k0 = std::to_string(cfg_.ablation_beams[n - 2]);
    const auto k1 = std::to_string(cfg_.ablation_beams[n - 1]);
    // Same-kind mixes: half of each beam's corpus.
    auto halves = [&](const ParallelCorpus& a, const ParallelCorpus& b) {
      Rng rng(cfg_.data_seed);
      std::vector<SentencePair> pairs;
      for (auto i : rng.sample_without_replacement(a.size(), a.size() / 2)) pairs.push_back(a.pairs()[i]);
      for (auto i : rng.sample_without_replacement(b.size(), (b.size() + 1) / 2)) pairs.push_back(b.pairs()[i]);
      rng.shuffle(pairs);
      return ParallelCorpus(a.languages(), a.kind(), std::move(pairs));
    };
    run_corpus(target_originated_name(S_, T_) + " (K=" + k0 + ")+(K=" + k1 + ")", "to.mix",
               halves(cleaned.units[2 * (n - 2) + 1], cleaned.units[2 * (n - 1) + 1]), false);
    run_corpus(source_originated_name(S_, T_) + " (K=" + k0 + ")+(K=" + k1 + ")", "so.mix",
               halves(cleaned.units[2 * (n - 2)], cleaned.units[2 * (n - 1)]), false);
    run_corpus(std::string(kMixedName) + " (K=" + k1 + ")", "mix",
               corpus::mix_pseudo(cleaned.units[2 * (n - 1)], cleaned.units[2 * (n - 1) + 1],
                                  cfg_.data_seed),
               false);
  }

  void run_sweep() {
    // Mother for the target side is fixed; the pivot->source mother is
    // checkpointed after every epoch and each checkpoint yields one corpus.
    auto to_target = mother_translator(false, cfg_.synth_decode);
    std::vector<nmt::ModelParameters> snapshots;
    nmt::TrainOptions opts;
    opts.on_epoch = [&](std::size_t, const nmt::ModelParameters& p) { snapshots.push_back(p); };
    std::optional<TrainedModel> mother;
    mother_translator(true, cfg_.synth_decode, &mother, opts);

    auto so_words = corpus::project_synthetic(multi_, corpus::Side::Target, to_target);
    const auto dev_words = *dev_pivot_src_;
    std::ostringstream sweep;
    sweep << "mother_epoch\tmother_dev_loss\tmother_dev_bleu\tcorpus\tdirection\tbleu\n";
    const Direction dir{T_ + "->" + S_, true};
    for (std::size_t e = 0; e < snapshots.size(); ++e) {
      TrainedModel m = *mother;
      m.bundle.params = snapshots[e];
      const auto ep = std::to_string(e + 1);
      const double mother_bleu = evaluate("mother.epoch" + ep, m, dev_words, "dev");
      const double mother_loss = mother->result.log[e].dev_loss;
      auto to_words = corpus::project_synthetic(
          multi_, corpus::Side::Source,
          model_translator(m.bundle, bpe_.at(P_), bpe_.at(S_), cfg_.synth_decode));
      CleanedCorpora cleaned;
      stage("build-corpora", [&] { cleaned = clean_jointly({so_words, to_words}, bpe_, cfg_.max_units); });
      const auto mix = corpus::mix_pseudo(cleaned.units[0], cleaned.units[1], cfg_.data_seed);
      struct Entry {
        std::string display, id;
        const ParallelCorpus* units;
      };
      const std::vector<Entry> entries = {
          {target_originated_name(S_, T_), "to", &cleaned.units[1]},
          {kMixedName, "mix", &mix},
      };
      for (const auto& en : entries) {
        const auto display = en.display + " @mother-epoch " + ep;
        const auto train_units = orient(*en.units, true);
        const auto dev_t = orient(*dev_, true);
        const auto test_t = orient(*test_, true);
        const auto dev_units = segment(dev_t, bpe_);
        std::vector<double> scores;
        for (std::size_t r = 0; r < cfg_.replications; ++r) {
          const auto name = en.id + ".epoch" + ep + ".rev.r" + std::to_string(r + 1);
          auto model = train_model(name, train_units, dev_units, cfg_.train, replication_seed(r));
          const double test_bleu = evaluate(name, model, test_t, "test");
          scores.push_back(test_bleu);
          add_run(display, dir.name, r, "test", test_bleu, std::nullopt, model.result.best_epoch);
        }
        sweep << ep << '\t' << fixed(mother_loss, 6) << '\t' << fixed(mother_bleu, 2) << '\t'
              << en.display << '\t' << dir.name << '\t' << format_centi(to_centi(mean(scores))) << "\n";
      }
    }
    text::write_file((out_ / "sweep.tsv").string(), sweep.str());
  }

  void write_reports() {
    std::vector<ReportRow> rows;
    for (const auto& key : order_) {
      const auto& cell = cells_.at(key);
      ReportRow r;
      std::tie(r.corpus, r.direction, r.set) = key;
      r.pseudo_only = to_centi(mean(cell.pseudo));
      if (!cell.finetuned.empty()) {
        r.has_finetuned = true;
        r.finetuned = to_centi(mean(cell.finetuned));
      }
      rows.push_back(std::move(r));
    }
    // Test rows first, as in the results tables.
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ReportRow& a, const ReportRow& b) { return a.set == "test" && b.set != "test"; });

    const std::vector<std::string> comments = {
        "config_sha256=" + config_hash_, "scenario=" + to_string(cfg_.scenario),
        "replications=" + std::to_string(cfg_.replications),
        "bleu=case-sensitive tokenized corpus BLEU x100, mean over replications"};
    text::write_file((out_ / "report.tsv").string(), format_report_tsv(rows, comments));
    text::write_file((out_ / "runs.tsv").string(),
                     "corpus\tdirection\treplication\tseed\tset\tpseudo_only\treal_finetuning\tbest_epoch\n" +
                         runs_.str());
    text::write_file((out_ / "stats.tsv").string(), stats_);

    ordered_json manifest;
    manifest["config_sha256"] = config_hash_;
    manifest["scenario"] = to_string(cfg_.scenario);
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < cfg_.replications; ++r) seeds.push_back(replication_seed(r));
    manifest["seeds"] = {{"data_seed", cfg_.data_seed},
                         {"init_seed", cfg_.init_seed},
                         {"toy_seed", cfg_.toy.seed},
                         {"replication_seeds", seeds}};
    manifest["corpora"] = corpora_;
    manifest["models"] = models_;
    ordered_json mothers;
    for (const auto& [lang, bleu] : mother_dev_bleu_) mothers[P_ + "->" + lang] = fixed(bleu, 2);
    manifest["mother_dev_bleu"] = mothers;
    text::write_file((out_ / "manifest.json").string(), manifest.dump(2) + "\n");

    text::write_file((out_ / "report.txt").string(), render_text(rows));
  }

  std::string render_text(const std::vector<ReportRow>& rows) const {
    std::vector<std::vector<std::string>> table = {
        {"Corpus", "Direction", "Set", "Pseudo Only", "Real Fine-tuning"}};
    for (const auto& r : rows) {
      std::string ft = "-";
      if (r.has_finetuned) {
        ft = "(" + std::string(r.delta() >= 0 ? "+" : "") + format_centi(r.delta()) + ") " +
             format_centi(r.finetuned);
      }
      table.push_back({r.corpus, r.direction, r.set, format_centi(r.pseudo_only), ft});
    }
    std::vector<std::size_t> width(table[0].size(), 0);
    for (const auto& row : table) {
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream out;
    out << "scenario: " << to_string(cfg_.scenario) << "\n";
    out << "config sha256: " << config_hash_ << "\n";
    out << "replications: " << cfg_.replications << " (seeds " << replication_seed(0) << ".."
        << replication_seed(cfg_.replications - 1) << ")\n\n";
    for (std::size_t k = 0; k < table.size(); ++k) {
      for (std::size_t i = 0; i < table[k].size(); ++i) {
        out << table[k][i] << std::string(width[i] - table[k][i].size() + 2, ' ');
      }
      out << "\n";
      if (k == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        out << std::string(total, '-') << "\n";
      }
    }
    if (!stats_.empty()) out << "\ncorpus statistics\n" << stats_;
    out << "\ncorpus checksums (sha256)\n";
    for (const auto& [name, files] : corpora_.items()) {
      for (const auto& [path, sum] : files.items()) out << "  " << path << "  " << sum.get<std::string>() << "\n";
    }
    return out.str();
  }

  const ExperimentConfig& cfg_;
  fs::path out_;
  std::string config_hash_;
  std::string S_, P_, T_;
  std::optional<ToyData> toy_;
  MultiParallelCorpus multi_;
  std::optional<ParallelCorpus> dev_, test_, real_, mother_src_, mother_tgt_, dev_pivot_src_,
      dev_pivot_tgt_;
  Segmenters bpe_;
  std::optional<TrainedModel> mother_to_source_, mother_to_target_;
  std::map<std::string, double> mother_dev_bleu_;
  std::map<CellKey, Cell> cells_;
  std::vector<CellKey> order_;
  std::ostringstream runs_;
  std::string stats_;
  ordered_json corpora_ = ordered_json::object();
  ordered_json models_ = ordered_json::object();
};

}  // namespace

std::string run_scenario(const ExperimentConfig& cfg) { return Runner(cfg).run(); }

}  // namespace pseudomix::pipeline
