#include "pseudomix/subword.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "pseudomix/error.hpp"

namespace pseudomix::subword {

namespace {

const std::set<std::string>& punctuation() {
  static const std::set<std::string> p = {".", ",", "!", "?", ";", ":", "(", ")",
                                          "\"", "'", "«", "»", "-"};
  return p;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Tokens tokenize(std::string_view line) {
  Tokens out;
  for (const auto& word : text::split_whitespace(line)) {
    const auto chars = text::split_code_points(word);
    std::size_t lo = 0, hi = chars.size();
    while (lo < hi && punctuation().count(chars[lo])) ++lo;
    while (hi > lo && punctuation().count(chars[hi - 1])) --hi;
    for (std::size_t i = 0; i < lo; ++i) out.push_back(chars[i]);
    if (hi > lo) {
      std::string core;
      for (std::size_t i = lo; i < hi; ++i) core += chars[i];
      out.push_back(std::move(core));
    }
    for (std::size_t i = hi; i < chars.size(); ++i) out.push_back(chars[i]);
  }
  return out;
}

BpeModel::BpeModel(std::vector<Merge> merges, std::string eow_marker)
    : merges_(std::move(merges)), eow_(std::move(eow_marker)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    if (!ranks_.emplace(merges_[i], i).second) {
      throw ConfigError("duplicate merge '" + merges_[i].first + " " + merges_[i].second + "'");
    }
  }
}

std::size_t BpeModel::rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find({left, right});
  return it == ranks_.end() ? std::string::npos : it->second;
}

namespace {

Tokens initial_symbols(const std::string& token, const std::string& eow) {
  auto syms = text::split_code_points(token);
  if (!syms.empty()) syms.back() += eow;
  return syms;
}

void merge_in_place(Tokens& syms, const std::string& left, const std::string& right) {
  Tokens out;
  out.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(syms[i]));
    }
  }
  syms = std::move(out);
}

}  // namespace

BpeModel bpe_learn(const std::vector<Tokens>& corpus, std::size_t num_merges) {
  std::map<std::string, std::size_t> freq;
  for (const auto& line : corpus) {
    for (const auto& tok : line) ++freq[tok];
  }
  if (freq.empty()) throw ConfigError("cannot learn BPE from an empty corpus");

  // Words in sorted order so that counting is independent of hash layout.
  std::vector<std::pair<Tokens, std::size_t>> words;
  words.reserve(freq.size());
  for (const auto& [w, n] : freq) words.emplace_back(initial_symbols(w, kEndOfWord), n);

  std::vector<BpeModel::Merge> merges;
  while (merges.size() < num_merges) {
    std::map<BpeModel::Merge, std::size_t> counts;
    for (const auto& [syms, n] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += n;
    }
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    const BpeModel::Merge* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [pair, n] : counts) {
      if (n > best_count) {
        best = &pair;
        best_count = n;
      }
    }
    if (best == nullptr || best_count < 2) break;
    const auto merge = *best;
    for (auto& [syms, n] : words) merge_in_place(syms, merge.first, merge.second);
    merges.push_back(merge);
  }
  return BpeModel(std::move(merges));
}

Tokens bpe_segment(const BpeModel& model, const std::string& token) {
  auto syms = initial_symbols(token, model.eow_marker());
  while (syms.size() > 1) {
    std::size_t best = std::string::npos;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const auto r = model.rank(syms[i], syms[i + 1]);
      if (r < best) {
        best = r;
        at = i;
      }
    }
    if (best == std::string::npos) break;
    const auto left = syms[at];
    const auto right = syms[at + 1];
    merge_in_place(syms, left, right);
  }
  return syms;
}

Tokens bpe_apply(const BpeModel& model, const Tokens& tokens) {
  Tokens out;
  for (const auto& t : tokens) {
    for (auto& u : bpe_segment(model, t)) out.push_back(std::move(u));
  }
  return out;
}

namespace {

Tokens undo(const Tokens& units, const std::string& eow, bool lenient) {
  Tokens out;
  std::string current;
  std::size_t start = 0;
  bool open = false;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!open) {
      start = i;
      open = true;
    }
    if (ends_with(units[i], eow)) {
      current.append(units[i], 0, units[i].size() - eow.size());
      out.push_back(std::move(current));
      current.clear();
      open = false;
    } else {
      current += units[i];
    }
  }
  if (open) {
    if (!lenient) throw MalformedStreamError(start, "subword stream ends without end-of-word marker");
    out.push_back(std::move(current));
  }
  // A unit that was only the marker would give an empty token.
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

}  // namespace

Tokens bpe_undo(const Tokens& units, const std::string& eow_marker) {
  return undo(units, eow_marker, false);
}

Tokens bpe_undo_lenient(const Tokens& units, const std::string& eow_marker) {
  return undo(units, eow_marker, true);
}

void save_bpe(const BpeModel& model, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(model.num_merges() + 1);
  lines.emplace_back("#version 1");
  for (const auto& [l, r] : model.merges()) lines.push_back(l + " " + r);
  text::write_lines(path, lines);
}

BpeModel load_bpe(const std::string& path) {
  const auto lines = text::read_lines(path);
  if (lines.empty() || lines[0] != "#version 1") {
    throw FormatError(path + ": expected '#version 1' header");
  }
  std::vector<BpeModel::Merge> merges;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto parts = text::split_whitespace(lines[i]);
    if (parts.size() != 2) {
      throw FormatError(path + ": line " + std::to_string(i + 1) + " is not 'left right'");
    }
    merges.emplace_back(parts[0], parts[1]);
  }
  return BpeModel(std::move(merges));
}

}  // namespace pseudomix::subword
