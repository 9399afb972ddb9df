#include "pseudomix/translator.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "pseudomix/error.hpp"

namespace pseudomix::pipeline {

namespace fs = std::filesystem;

corpus::Translator model_translator(const nmt::ModelBundle& bundle,
                                    std::optional<subword::BpeModel> input_bpe,
                                    std::optional<subword::BpeModel> output_bpe,
                                    const decode::DecodeConfig& cfg) {
  cfg.validate();
  return [bundle, in = std::move(input_bpe), out = std::move(output_bpe),
          cfg](const std::vector<text::Tokens>& pivots) {
    std::vector<nmt::Ids> sources;
    sources.reserve(pivots.size());
    for (const auto& p : pivots) {
      sources.push_back(bundle.source_vocab.encode(in ? subword::bpe_apply(*in, p) : p));
    }
    auto decoded = decode::translate_corpus(bundle.params, sources, cfg);
    std::vector<std::optional<text::Tokens>> result(pivots.size());
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      auto units = bundle.target_vocab.decode(decoded.outputs[i]);
      result[i] = out ? subword::bpe_undo_lenient(units, out->eow_marker()) : units;
    }
    for (auto i : decoded.failures) result[i].reset();
    return result;
  };
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

fs::path scratch_file(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  return fs::temp_directory_path() /
         ("pseudomix-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "." + tag);
}

}  // namespace

corpus::Translator external_translator(const std::string& command) {
  return [command](const std::vector<text::Tokens>& pivots) {
    const auto in = scratch_file("in");
    const auto out = scratch_file("out");
    std::vector<std::string> lines;
    lines.reserve(pivots.size());
    for (const auto& p : pivots) lines.push_back(text::join(p));
    text::write_lines(in.string(), lines);
    const std::string cmd = command + " " + shell_quote(in.string()) + " " + shell_quote(out.string());
    const int status = std::system(cmd.c_str());
    std::error_code ec;
    fs::remove(in, ec);
    if (status != 0) {
      fs::remove(out, ec);
      throw Error("external translator exited with status " + std::to_string(status) + ": " + command);
    }
    const auto produced = text::read_lines(out.string());
    fs::remove(out, ec);
    if (produced.size() != pivots.size()) {
      throw AlignmentError(pivots.size(), produced.size(), "external translator line count");
    }
    std::vector<std::optional<text::Tokens>> result;
    result.reserve(produced.size());
    for (const auto& l : produced) result.emplace_back(text::split_whitespace(l));
    return result;
  };
}

corpus::Translator translator_from_spec(const std::string& spec, const decode::DecodeConfig& cfg) {
  if (spec.rfind("exec:", 0) == 0) return external_translator(spec.substr(5));
  if (spec.rfind("model:", 0) == 0) {
    const auto path = spec.substr(6);
    auto bundle = nmt::load_bundle(path);
    std::optional<subword::BpeModel> in, out;
    if (fs::exists(path + ".in.bpe")) in = subword::load_bpe(path + ".in.bpe");
    if (fs::exists(path + ".out.bpe")) out = subword::load_bpe(path + ".out.bpe");
    return model_translator(bundle, std::move(in), std::move(out), cfg);
  }
  throw ConfigError("translator spec must start with 'exec:' or 'model:', got '" + spec + "'");
}

}  // namespace pseudomix::pipeline
