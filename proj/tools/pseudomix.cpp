#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pseudomix/checkpoint.hpp"
#include "pseudomix/config.hpp"
#include "pseudomix/corpus.hpp"
#include "pseudomix/decode.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/experiment.hpp"
#include "pseudomix/metrics.hpp"
#include "pseudomix/subword.hpp"
#include "pseudomix/text.hpp"
#include "pseudomix/train.hpp"
#include "pseudomix/translator.hpp"

namespace fs = std::filesystem;
using namespace pseudomix;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

std::vector<std::string> read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  return text::read_lines(path);
}

void write_output(const std::string& path, const std::vector<std::string>& lines) {
  if (path.empty() || path == "-") {
    for (const auto& l : lines) std::cout << l << "\n";
  } else {
    text::write_lines(path, lines);
  }
}

std::string require_out(const Globals& g, const std::string& what) {
  if (g.out.empty()) throw ConfigError("--out is required (" + what + ")");
  return g.out;
}

std::string out_basename(const Globals& g, const std::string& name) {
  const auto dir = require_out(g, "output directory");
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

pipeline::ExperimentConfig base_config(const Globals& g) {
  return g.config.empty() ? pipeline::ExperimentConfig{} : pipeline::load_config(g.config);
}

std::vector<nmt::IdPair> encode_corpus(const corpus::ParallelCorpus& c, const nmt::Vocabulary& sv,
                                       const nmt::Vocabulary& tv) {
  std::vector<nmt::IdPair> out;
  for (const auto& p : c.pairs()) out.push_back({sv.encode(p.source.tokens()), tv.encode(p.target.tokens())});
  return out;
}

struct TrainFlags {
  std::string train;
  std::string dev;
  std::optional<std::size_t> epochs, hidden, emb, minibatch, vocab_cap;
  std::optional<double> lr;
  bool full_scale = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--train", f.train, "Training corpus basename (<basename>.<lang> + .meta.json)")->required();
  cmd->add_option("--dev", f.dev, "Dev corpus basename");
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--hidden", f.hidden);
  cmd->add_option("--emb", f.emb);
  cmd->add_option("--minibatch", f.minibatch);
  cmd->add_option("--vocab-cap", f.vocab_cap);
  cmd->add_option("--lr", f.lr, "Learning rate");
}

nmt::TrainConfig train_config(const Globals& g, const TrainFlags& f, bool finetune) {
  auto exp = base_config(g);
  auto cfg = f.full_scale ? nmt::TrainConfig{} : exp.train;
  if (finetune) {
    cfg.learning_rate = exp.finetune_learning_rate;
    cfg.epochs = exp.finetune_epochs;
  }
  if (g.seed) cfg.seed = *g.seed;
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.hidden) cfg.hidden_dim = *f.hidden;
  if (f.emb) cfg.emb_dim = *f.emb;
  if (f.minibatch) cfg.minibatch_size = *f.minibatch;
  if (f.vocab_cap) cfg.vocab_cap = *f.vocab_cap;
  if (f.lr) cfg.learning_rate = *f.lr;
  cfg.validate();
  return cfg;
}

void print_log(const nmt::TrainResult& r) {
  std::cerr << "epoch\ttrain\tdev\tseconds\n" << nmt::format_train_log(r.log);
  std::cerr << "best epoch " << r.best_epoch << " (initial dev loss " << r.initial_dev_loss << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudomix: pseudo parallel corpora and attentional NMT"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--config", g.config, "Experiment config file (JSON)");
  app.add_option("--out", g.out, "Output directory or file, depending on the subcommand");

  // align-pivot
  std::string ap_src, ap_piv1, ap_piv2, ap_tgt;
  std::vector<std::string> ap_langs{"src", "piv", "tgt"};
  auto* align = app.add_subcommand("align-pivot", "Join source-pivot and pivot-target corpora on the pivot");
  align->add_option("--source", ap_src, "Source side of the source-pivot corpus")->required();
  align->add_option("--pivot-a", ap_piv1, "Pivot side of the source-pivot corpus")->required();
  align->add_option("--pivot-b", ap_piv2, "Pivot side of the pivot-target corpus")->required();
  align->add_option("--target", ap_tgt, "Target side of the pivot-target corpus")->required();
  align->add_option("--langs", ap_langs, "Source, pivot and target codes")->expected(3);
  align->callback([&] {
    auto sp = corpus::load_parallel(ap_src, ap_piv1, {ap_langs[0], ap_langs[1]});
    auto pt = corpus::load_parallel(ap_piv2, ap_tgt, {ap_langs[1], ap_langs[2]});
    auto r = corpus::pivot_align(sp, pt);
    corpus::save_multi(r.multi, out_basename(g, "multi"));
    std::cerr << "triples " << r.multi.size() << ", matched pairs " << r.stats.matched_pairs
              << ", candidates " << r.stats.candidate_triples << ", duplicates removed "
              << r.stats.duplicates_removed << "\n";
  });

  // synthesize
  std::string sy_multi, sy_side = "target", sy_translator;
  std::size_t sy_beam = 5, sy_max_len = decode::kDefaultMaxLen;
  auto* synth = app.add_subcommand("synthesize", "Translate the pivot of a multi-parallel corpus into one side");
  synth->add_option("--multi", sy_multi, "Multi-parallel prefix (<prefix>.<lang>)")->required();
  synth->add_option("--side", sy_side, "Side to replace")->check(CLI::IsMember({"source", "target"}));
  synth->add_option("--translator", sy_translator, "exec:<command> or model:<bundle>")->required();
  synth->add_option("--langs", ap_langs, "Source, pivot and target codes")->expected(3);
  synth->add_option("--beam", sy_beam);
  synth->add_option("--max-len", sy_max_len);
  synth->callback([&] {
    auto multi = corpus::load_multi(sy_multi + "." + ap_langs[0], sy_multi + "." + ap_langs[1],
                                    sy_multi + "." + ap_langs[2], ap_langs[0], ap_langs[1], ap_langs[2]);
    const bool target = sy_side == "target";
    auto tr = pipeline::translator_from_spec(sy_translator, {sy_beam, sy_max_len, true});
    auto c = corpus::project_synthetic(multi, target ? corpus::Side::Target : corpus::Side::Source, tr);
    const auto name = target ? "source-originated" : "target-originated";
    corpus::save_corpus(c, out_basename(g, name), {std::nullopt, {sy_multi}, {}});
    std::cerr << name << ": " << c.size() << " pairs\n";
  });

  // mix
  std::string mx_so, mx_to;
  auto* mix = app.add_subcommand("mix", "Half of a source-originated plus half of a target-originated corpus");
  mix->add_option("--source-originated", mx_so, "Corpus basename")->required();
  mix->add_option("--target-originated", mx_to, "Corpus basename")->required();
  mix->callback([&] {
    const auto seed = g.seed.value_or(1);
    auto m = corpus::mix_pseudo(corpus::load_corpus(mx_so).corpus, corpus::load_corpus(mx_to).corpus, seed);
    corpus::save_corpus(m, out_basename(g, "pseudo-mix"), {seed, {mx_so, mx_to}, {}});
    std::cerr << "mixed " << m.size() << " pairs\n";
  });

  // filter
  std::string fl_in;
  std::size_t fl_max = corpus::kDefaultMaxUnits;
  auto* filter = app.add_subcommand("filter", "Drop empty pairs and pairs longer than --max-units");
  filter->add_option("--in", fl_in, "Corpus basename")->required();
  filter->add_option("--max-units", fl_max);
  filter->callback([&] {
    auto loaded = corpus::load_corpus(fl_in);
    auto a = corpus::drop_empty(loaded.corpus);
    auto b = corpus::filter_length(a.corpus, fl_max);
    auto lineage = loaded.lineage;
    lineage.parents = {fl_in};
    lineage.preprocessing.push_back("clean:drop-empty,max-units=" + std::to_string(fl_max));
    corpus::save_corpus(b.corpus, out_basename(g, fs::path(fl_in).filename().string() + ".filtered"), lineage);
    std::cerr << "kept " << b.corpus.size() << ", removed " << a.removed + b.removed << "\n";
  });

  // stats
  std::vector<std::string> st_in;
  auto* stats = app.add_subcommand("stats", "Size and average sentence lengths");
  stats->add_option("--in", st_in, "Corpus basenames")->required();
  stats->callback([&] {
    std::vector<corpus::StatsRow> rows;
    std::string s, t;
    for (const auto& b : st_in) {
      auto c = corpus::load_corpus(b).corpus;
      s = c.source_language();
      t = c.target_language();
      rows.push_back({fs::path(b).filename().string(), corpus::corpus_stats(c)});
    }
    std::cout << corpus::format_stats_table(rows, s, t);
  });

  // bpe-learn
  std::vector<std::string> bl_in;
  std::size_t bl_merges = 150;
  auto* bpe_learn = app.add_subcommand("bpe-learn", "Learn BPE merges; --out names the model file");
  bpe_learn->add_option("--in", bl_in, "Tokenized text files")->required();
  bpe_learn->add_option("--merges", bl_merges)->required();
  bpe_learn->callback([&] {
    std::vector<text::Tokens> lines;
    for (const auto& f : bl_in) {
      for (const auto& l : text::read_lines(f)) lines.push_back(subword::tokenize(l));
    }
    auto model = subword::bpe_learn(lines, bl_merges);
    subword::save_bpe(model, require_out(g, "model file"));
    std::cerr << "learned " << model.num_merges() << " merges\n";
  });

  // bpe-apply / bpe-undo
  std::string ba_model, ba_in;
  auto* bpe_apply = app.add_subcommand("bpe-apply", "Segment text into subword units");
  bpe_apply->add_option("--model", ba_model)->required();
  bpe_apply->add_option("--in", ba_in, "Input file (default stdin)");
  bpe_apply->callback([&] {
    auto model = subword::load_bpe(ba_model);
    std::vector<std::string> out;
    for (const auto& l : read_input(ba_in)) out.push_back(text::join(subword::bpe_apply(model, subword::tokenize(l))));
    write_output(g.out, out);
  });

  std::string bu_in;
  bool bu_lenient = false;
  auto* bpe_undo = app.add_subcommand("bpe-undo", "Join subword units back into words");
  bpe_undo->add_option("--in", bu_in, "Input file (default stdin)");
  bpe_undo->add_flag("--lenient", bu_lenient, "Close an unterminated final word instead of failing");
  bpe_undo->callback([&] {
    std::vector<std::string> out;
    for (const auto& l : read_input(bu_in)) {
      const auto units = text::split_whitespace(l);
      out.push_back(text::join(bu_lenient ? subword::bpe_undo_lenient(units) : subword::bpe_undo(units)));
    }
    write_output(g.out, out);
  });

  // train
  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a model on a subword corpus; --out names the checkpoint");
  add_train_flags(train, tf);
  train->add_flag("--full-scale", tf.full_scale, "Start from the full-size defaults instead of the desk preset");
  train->callback([&] {
    auto cfg = train_config(g, tf, false);
    auto c = corpus::load_corpus(tf.train).corpus;
    std::vector<text::Tokens> s, t;
    for (const auto& p : c.pairs()) {
      s.push_back(p.source.tokens());
      t.push_back(p.target.tokens());
    }
    nmt::ModelBundle b;
    b.source_vocab = nmt::Vocabulary::build(s, cfg.vocab_cap);
    b.target_vocab = nmt::Vocabulary::build(t, cfg.vocab_cap);
    std::vector<nmt::IdPair> dev;
    if (!tf.dev.empty()) dev = encode_corpus(corpus::load_corpus(tf.dev).corpus, b.source_vocab, b.target_vocab);
    auto init = nmt::ModelParameters::random(
        {b.source_vocab.size(), b.target_vocab.size(), cfg.emb_dim, cfg.hidden_dim}, cfg.seed,
        cfg.init_range);
    auto r = nmt::train(init, encode_corpus(c, b.source_vocab, b.target_vocab), cfg, dev);
    b.params = r.params;
    nmt::save_bundle(b, require_out(g, "checkpoint path"));
    print_log(r);
  });

  // finetune
  TrainFlags ff;
  std::string ft_model;
  auto* finetune = app.add_subcommand("finetune", "Fine-tune a model with frozen embeddings; --out names the checkpoint");
  add_train_flags(finetune, ff);
  finetune->add_option("--model", ft_model, "Checkpoint to start from")->required();
  finetune->callback([&] {
    auto cfg = train_config(g, ff, true);
    auto b = nmt::load_bundle(ft_model);
    auto c = corpus::load_corpus(ff.train).corpus;
    std::vector<nmt::IdPair> dev;
    if (!ff.dev.empty()) dev = encode_corpus(corpus::load_corpus(ff.dev).corpus, b.source_vocab, b.target_vocab);
    auto r = nmt::fine_tune(b.params, encode_corpus(c, b.source_vocab, b.target_vocab), cfg, dev);
    b.params = r.params;
    nmt::save_bundle(b, require_out(g, "checkpoint path"));
    print_log(r);
  });

  // translate
  std::string tr_model, tr_in, tr_norm = "on";
  std::size_t tr_beam = 12, tr_max_len = decode::kDefaultMaxLen;
  auto* translate = app.add_subcommand("translate", "Beam-search translation of subword lines");
  translate->add_option("--model", tr_model)->required();
  translate->add_option("--in", tr_in, "Input file (default stdin)");
  translate->add_option("--beam", tr_beam);
  translate->add_option("--max-len", tr_max_len);
  translate->add_option("--normalize-length", tr_norm)->check(CLI::IsMember({"on", "off"}));
  translate->callback([&] {
    const decode::DecodeConfig dc{tr_beam, tr_max_len, tr_norm == "on"};
    dc.validate();
    auto b = nmt::load_bundle(tr_model);
    std::vector<decode::Ids> sources;
    for (const auto& l : read_input(tr_in)) sources.push_back(b.source_vocab.encode(text::split_whitespace(l)));
    auto t = decode::translate_corpus(b.params, sources, dc);
    std::vector<std::string> out;
    for (const auto& ids : t.outputs) out.push_back(text::join(b.target_vocab.decode(ids)));
    write_output(g.out, out);
    for (auto i : t.failures) std::cerr << "warning: line " << i + 1 << " could not be translated\n";
  });

  // bleu
  std::string bl_hyp, bl_ref;
  auto* bleu = app.add_subcommand("bleu", "Case-sensitive corpus BLEU of tokenized text");
  bleu->add_option("--hyp", bl_hyp)->required();
  bleu->add_option("--ref", bl_ref)->required();
  bleu->callback([&] {
    std::vector<text::Tokens> h, r;
    for (const auto& l : text::read_lines(bl_hyp)) h.push_back(text::split_whitespace(l));
    for (const auto& l : text::read_lines(bl_ref)) r.push_back(text::split_whitespace(l));
    std::cout << metrics::format_bleu(metrics::corpus_bleu(h, r)) << "\n";
  });

  // experiment
  std::string ex_scenario;
  std::optional<std::size_t> ex_reps;
  bool ex_dump = false;
  auto* experiment = app.add_subcommand("experiment", "Run a full scenario and write its reports");
  experiment->add_option("--scenario", ex_scenario)
      ->check(CLI::IsMember({"pseudo-only", "real-fine-tuning", "merged-baseline", "beam-ablation",
                             "mother-model-sweep"}));
  experiment->add_option("--replications", ex_reps);
  experiment->add_flag("--print-config", ex_dump, "Print the effective config and exit");
  experiment->callback([&] {
    auto cfg = base_config(g);
    if (!ex_scenario.empty()) cfg.scenario = pipeline::parse_scenario(ex_scenario);
    if (ex_reps) cfg.replications = *ex_reps;
    if (g.seed) {
      cfg.data_seed = *g.seed;
      cfg.init_seed = *g.seed;
    }
    if (!g.out.empty()) cfg.output_dir = g.out;
    if (ex_dump) {
      std::cout << pipeline::serialize_config(cfg);
      return;
    }
    const auto dir = pipeline::run_scenario(cfg);
    std::cout << text::read_file((fs::path(dir) / "report.txt").string());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "pseudomix: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pseudomix: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
