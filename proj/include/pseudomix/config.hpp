#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pseudomix/decode.hpp"
#include "pseudomix/toy.hpp"
#include "pseudomix/train.hpp"

namespace pseudomix::pipeline {

inline constexpr int kConfigSchemaVersion = 1;

enum class Scenario { PseudoOnly, RealFineTuning, MergedBaseline, BeamAblation, MotherModelSweep };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

// Inputs for data_source = "files". Parallel files are <prefix>.<lang>.
struct FileInputs {
  std::string multi_prefix;  // source / pivot / target
  std::string dev_prefix;    // source / target
  std::string test_prefix;   // source / target
  std::string real_prefix;   // source / target, used for fine-tuning and the merged baseline
  std::string source_lang = "src";
  std::string pivot_lang = "piv";
  std::string target_lang = "tgt";
  // "exec:<command>" or "model:<bundle>" translating pivot to each side.
  std::string translator_to_source;
  std::string translator_to_target;

  friend bool operator==(const FileInputs&, const FileInputs&) = default;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  Scenario scenario = Scenario::PseudoOnly;
  std::string data_source = "toy";  // "toy" or "files"
  ToyLanguageSpec toy;
  FileInputs files;

  nmt::TrainConfig train = nmt::TrainConfig::desk_scale();
  nmt::TrainConfig mother = nmt::TrainConfig::desk_scale();
  double finetune_learning_rate = nmt::kFineTuneLearningRate;
  std::size_t finetune_epochs = 5;

  decode::DecodeConfig eval_decode{12, decode::kDefaultMaxLen, true};
  decode::DecodeConfig synth_decode{5, decode::kDefaultMaxLen, true};

  std::size_t bpe_merges = 150;
  std::size_t max_units = 50;
  std::size_t replications = 3;
  std::uint64_t data_seed = 1;
  std::uint64_t init_seed = 1;
  std::vector<std::size_t> ablation_beams{1, 5};
  std::string output_dir = "pseudomix-out";

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Flat JSON object with dotted keys ("train.hidden_dim": 64, ...).
std::string serialize_config(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys and a schema mismatch throw
// ConfigError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace pseudomix::pipeline
