#pragma once

#include <optional>
#include <string>

#include "pseudomix/checkpoint.hpp"
#include "pseudomix/corpus.hpp"
#include "pseudomix/decode.hpp"
#include "pseudomix/subword.hpp"

namespace pseudomix::pipeline {

// Word-level translator backed by a model bundle: input tokens are segmented
// with `input_bpe` (when given), decoded, mapped back to units and joined
// with `output_bpe`. Sentences that fail to decode come back as nullopt.
corpus::Translator model_translator(const nmt::ModelBundle& bundle,
                                    std::optional<subword::BpeModel> input_bpe,
                                    std::optional<subword::BpeModel> output_bpe,
                                    const decode::DecodeConfig& cfg);

// Runs `command <input file> <output file>` through the shell. The command
// must write exactly one line per input line. Throws AlignmentError on a
// line-count mismatch and Error on a non-zero exit status.
corpus::Translator external_translator(const std::string& command);

// "exec:<command>" or "model:<bundle path>" (BPE models read from
// <path>.in.bpe / <path>.out.bpe when present).
corpus::Translator translator_from_spec(const std::string& spec, const decode::DecodeConfig& cfg);

}  // namespace pseudomix::pipeline
