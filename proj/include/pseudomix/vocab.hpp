#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pseudomix/text.hpp"

namespace pseudomix::nmt {

using Id = std::int32_t;
using Ids = std::vector<Id>;

inline constexpr Id kPad = 0;
inline constexpr Id kUnk = 1;
inline constexpr Id kBos = 2;
inline constexpr Id kEos = 3;
inline constexpr std::size_t kNumReserved = 4;
inline constexpr std::size_t kDefaultVocabCap = 30000;
inline constexpr std::size_t kDeskVocabCap = 200;

// Unit <-> id map with PAD, UNK, BOS, EOS at ids 0..3.
class Vocabulary {
 public:
  Vocabulary();

  // Most frequent units first, ties in byte order; at most max_size entries
  // including the reserved ones.
  static Vocabulary build(const std::vector<text::Tokens>& corpus, std::size_t max_size);
  // Units in id order, reserved names first.
  static Vocabulary from_units(std::vector<std::string> units);

  std::size_t size() const { return units_.size(); }
  Id id(const std::string& unit) const;
  const std::string& unit(Id id) const { return units_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& units() const { return units_; }

  Ids encode(const text::Tokens& units) const;
  // Reserved ids are dropped.
  text::Tokens decode(const Ids& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.units_ == b.units_; }

 private:
  std::vector<std::string> units_;
  std::unordered_map<std::string, Id> ids_;
};

}  // namespace pseudomix::nmt
