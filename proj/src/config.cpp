#include "pseudomix/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "pseudomix/error.hpp"

namespace pseudomix::pipeline {

using nlohmann::ordered_json;

namespace {

const std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::PseudoOnly, "pseudo-only"},
    {Scenario::RealFineTuning, "real-fine-tuning"},
    {Scenario::MergedBaseline, "merged-baseline"},
    {Scenario::BeamAblation, "beam-ablation"},
    {Scenario::MotherModelSweep, "mother-model-sweep"},
};

template <typename Cfg, typename F>
void visit_train(const std::string& prefix, Cfg& t, F&& f) {
  f(prefix + ".emb_dim", t.emb_dim);
  f(prefix + ".hidden_dim", t.hidden_dim);
  f(prefix + ".epochs", t.epochs);
  f(prefix + ".minibatch_size", t.minibatch_size);
  f(prefix + ".learning_rate", t.learning_rate);
  f(prefix + ".init_range", t.init_range);
  f(prefix + ".clip_norm", t.clip_norm);
  f(prefix + ".vocab_cap", t.vocab_cap);
  f(prefix + ".max_len", t.max_len);
  f(prefix + ".adam_beta1", t.adam_beta1);
  f(prefix + ".adam_beta2", t.adam_beta2);
  f(prefix + ".adam_eps", t.adam_eps);
  f(prefix + ".seed", t.seed);
  f(prefix + ".desk_scale_preset", t.desk_scale_preset);
}

template <typename Cfg, typename F>
void visit_decode(const std::string& prefix, Cfg& d, F&& f) {
  f(prefix + ".beam_size", d.beam_size);
  f(prefix + ".max_len", d.max_len);
  f(prefix + ".length_normalize", d.length_normalize);
}

// Every serialized field except schema_version and scenario.
template <typename Cfg, typename F>
void visit(Cfg& c, F&& f) {
  f(std::string("data_source"), c.data_source);
  f(std::string("toy.source_lang"), c.toy.source_lang);
  f(std::string("toy.pivot_lang"), c.toy.pivot_lang);
  f(std::string("toy.target_lang"), c.toy.target_lang);
  f(std::string("toy.source_vocab"), c.toy.source_vocab);
  f(std::string("toy.pivot_vocab"), c.toy.pivot_vocab);
  f(std::string("toy.target_vocab"), c.toy.target_vocab);
  f(std::string("toy.noise"), c.toy.noise);
  f(std::string("toy.zipf_exponent"), c.toy.zipf_exponent);
  f(std::string("toy.min_len"), c.toy.min_len);
  f(std::string("toy.max_len"), c.toy.max_len);
  f(std::string("toy.train_triples"), c.toy.train_triples);
  f(std::string("toy.dev_size"), c.toy.dev_size);
  f(std::string("toy.test_size"), c.toy.test_size);
  f(std::string("toy.mother_size"), c.toy.mother_size);
  f(std::string("toy.real_size"), c.toy.real_size);
  f(std::string("toy.seed"), c.toy.seed);
  f(std::string("files.multi_prefix"), c.files.multi_prefix);
  f(std::string("files.dev_prefix"), c.files.dev_prefix);
  f(std::string("files.test_prefix"), c.files.test_prefix);
  f(std::string("files.real_prefix"), c.files.real_prefix);
  f(std::string("files.source_lang"), c.files.source_lang);
  f(std::string("files.pivot_lang"), c.files.pivot_lang);
  f(std::string("files.target_lang"), c.files.target_lang);
  f(std::string("files.translator_to_source"), c.files.translator_to_source);
  f(std::string("files.translator_to_target"), c.files.translator_to_target);
  visit_train("train", c.train, f);
  visit_train("mother", c.mother, f);
  f(std::string("finetune.learning_rate"), c.finetune_learning_rate);
  f(std::string("finetune.epochs"), c.finetune_epochs);
  visit_decode("eval_decode", c.eval_decode, f);
  visit_decode("synth_decode", c.synth_decode, f);
  f(std::string("bpe_merges"), c.bpe_merges);
  f(std::string("max_units"), c.max_units);
  f(std::string("replications"), c.replications);
  f(std::string("data_seed"), c.data_seed);
  f(std::string("init_seed"), c.init_seed);
  f(std::string("ablation_beams"), c.ablation_beams);
  f(std::string("output_dir"), c.output_dir);
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [v, name] : kScenarioNames) {
    if (v == s) return name;
  }
  return "?";
}

Scenario parse_scenario(const std::string& s) {
  for (const auto& [v, name] : kScenarioNames) {
    if (s == name) return v;
  }
  throw ConfigError("unknown scenario '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigError("unsupported config schema_version " + std::to_string(schema_version));
  }
  train.validate();
  mother.validate();
  eval_decode.validate();
  synth_decode.validate();
  if (!(finetune_learning_rate > 0)) throw ConfigError("finetune.learning_rate must be > 0");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (max_units < 1) throw ConfigError("max_units must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (data_source == "toy") {
    toy.validate();
    if (scenario == Scenario::RealFineTuning || scenario == Scenario::MergedBaseline) {
      if (toy.real_size == 0) throw ConfigError(to_string(scenario) + " needs a real corpus (toy.real_size > 0)");
    }
    if (toy.train_triples < 2) throw ConfigError("toy.train_triples must be >= 2");
  } else if (data_source == "files") {
    if (scenario == Scenario::MotherModelSweep) {
      throw ConfigError("mother-model-sweep trains its own mother models and needs data_source toy");
    }
    if (files.multi_prefix.empty()) throw ConfigError("files.multi_prefix is required");
    if (files.translator_to_source.empty() || files.translator_to_target.empty()) {
      throw ConfigError("files.translator_to_source and files.translator_to_target are required");
    }
    if (files.dev_prefix.empty() || files.test_prefix.empty()) {
      throw ConfigError("files.dev_prefix and files.test_prefix are required");
    }
    if ((scenario == Scenario::RealFineTuning || scenario == Scenario::MergedBaseline) &&
        files.real_prefix.empty()) {
      throw ConfigError(to_string(scenario) + " needs a real corpus (files.real_prefix)");
    }
  } else {
    throw ConfigError("data_source must be 'toy' or 'files', got '" + data_source + "'");
  }
  if (scenario == Scenario::BeamAblation && ablation_beams.size() < 2) {
    throw ConfigError("beam-ablation needs at least two beam sizes");
  }
  for (auto k : ablation_beams) {
    if (k < 1) throw ConfigError("ablation beam sizes must be >= 1");
  }
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["scenario"] = to_string(cfg.scenario);
  visit(cfg, [&](const std::string& key, const auto& value) { j[key] = value; });
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  std::set<std::string> known = {"schema_version", "scenario"};
  try {
    if (j.contains("schema_version")) cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != kConfigSchemaVersion) {
      throw ConfigError("unsupported config schema_version " + std::to_string(cfg.schema_version));
    }
    if (j.contains("scenario")) cfg.scenario = parse_scenario(j.at("scenario").get<std::string>());
    visit(cfg, [&](const std::string& key, auto& value) {
      known.insert(key);
      if (j.contains(key)) value = j.at(key).get<std::decay_t<decltype(value)>>();
    });
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(text::read_file(path)); }

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  text::write_file(path, serialize_config(cfg));
}

}  // namespace pseudomix::pipeline
