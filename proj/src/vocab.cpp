#include "pseudomix/vocab.hpp"

#include <algorithm>
#include <map>

#include "pseudomix/error.hpp"

namespace pseudomix::nmt {

namespace {
const std::vector<std::string> kReservedNames = {"<pad>", "<unk>", "<s>", "</s>"};
}

Vocabulary::Vocabulary() : units_(kReservedNames) {
  for (std::size_t i = 0; i < units_.size(); ++i) ids_.emplace(units_[i], static_cast<Id>(i));
}

Vocabulary Vocabulary::from_units(std::vector<std::string> units) {
  if (units.size() < kNumReserved ||
      !std::equal(kReservedNames.begin(), kReservedNames.end(), units.begin())) {
    throw FormatError("vocabulary must start with the reserved entries");
  }
  Vocabulary v;
  v.units_ = std::move(units);
  v.ids_.clear();
  for (std::size_t i = 0; i < v.units_.size(); ++i) {
    if (!v.ids_.emplace(v.units_[i], static_cast<Id>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + v.units_[i] + "'");
    }
  }
  return v;
}

Vocabulary Vocabulary::build(const std::vector<text::Tokens>& corpus, std::size_t max_size) {
  if (max_size < kNumReserved) throw ConfigError("vocabulary cap below reserved size");
  std::map<std::string, std::size_t> freq;
  for (const auto& line : corpus) {
    for (const auto& u : line) ++freq[u];
  }
  for (const auto& r : kReservedNames) freq.erase(r);
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> units = kReservedNames;
  for (const auto& [u, n] : entries) {
    if (units.size() >= max_size) break;
    units.push_back(u);
  }
  return from_units(std::move(units));
}

Id Vocabulary::id(const std::string& unit) const {
  auto it = ids_.find(unit);
  return it == ids_.end() ? kUnk : it->second;
}

Ids Vocabulary::encode(const text::Tokens& units) const {
  Ids out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(id(u));
  return out;
}

text::Tokens Vocabulary::decode(const Ids& ids) const {
  text::Tokens out;
  for (Id i : ids) {
    if (i < static_cast<Id>(kNumReserved) || static_cast<std::size_t>(i) >= units_.size()) continue;
    out.push_back(units_[static_cast<std::size_t>(i)]);
  }
  return out;
}

void Vocabulary::save(const std::string& path) const { text::write_lines(path, units_); }

Vocabulary Vocabulary::load(const std::string& path) { return from_units(text::read_lines(path)); }

}  // namespace pseudomix::nmt
