#ifndef DEEPCHROMA_ANNOTATIONS_HPP
#define DEEPCHROMA_ANNOTATIONS_HPP

// Harte chord labels, .lab annotation files, maj/min reduction and per-frame
// chroma targets.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deepchroma/binio.hpp"
#include "deepchroma/error.hpp"

namespace deepchroma {

inline constexpr std::array<std::string_view, 12> kPitchClassNames = {"C",  "C#", "D",  "D#", "E",  "F",
                                                                       "F#", "G",  "G#", "A",  "A#", "B"};

struct ChordSymbol {
  enum class Kind : std::uint8_t { chord, no_chord, unknown };

  Kind kind = Kind::no_chord;
  int root_pc = -1;           // 0 = C; -1 unless kind == chord
  std::string quality;        // "maj", "min7", ... ; empty when only a degree list was given
  std::set<int> extra;        // added intervals in semitones (mod 12)
  std::set<int> omitted;      // intervals removed with '*'
  std::optional<int> bass;    // bass interval in semitones (mod 12)

  bool is_chord() const { return kind == Kind::chord; }
  bool operator==(const ChordSymbol&) const = default;
};

/// 0-11 major by root, 12-23 minor by root, 24 no-chord, 255 excluded.
struct ChordClass {
  static constexpr std::uint8_t kNoChord = 24;
  static constexpr std::uint8_t kExcluded = 255;
  static constexpr int kCount = 25;

  std::uint8_t index = kNoChord;

  static constexpr ChordClass major(int root) { return {static_cast<std::uint8_t>(root)}; }
  static constexpr ChordClass minor(int root) { return {static_cast<std::uint8_t>(12 + root)}; }
  static constexpr ChordClass no_chord() { return {kNoChord}; }
  static constexpr ChordClass excluded() { return {kExcluded}; }

  constexpr bool is_excluded() const { return index == kExcluded; }
  auto operator<=>(const ChordClass&) const = default;
};

using TargetChroma = std::array<std::uint8_t, 12>;

struct ChordSegment {
  double start = 0.0;
  double end = 0.0;
  ChordSymbol symbol;
};

struct ChordAnnotation {
  std::string song_id;
  std::vector<ChordSegment> segments;

  double end_time() const { return segments.empty() ? 0.0 : segments.back().end; }
};

namespace detail {

struct QualityEntry {
  std::string_view name;
  std::vector<int> intervals;
};

inline const std::vector<QualityEntry>& quality_table() {
  static const std::vector<QualityEntry> table = {
      {"maj", {0, 4, 7}},           {"min", {0, 3, 7}},          {"dim", {0, 3, 6}},
      {"aug", {0, 4, 8}},           {"maj7", {0, 4, 7, 11}},     {"min7", {0, 3, 7, 10}},
      {"7", {0, 4, 7, 10}},         {"dim7", {0, 3, 6, 9}},      {"hdim7", {0, 3, 6, 10}},
      {"minmaj7", {0, 3, 7, 11}},   {"maj6", {0, 4, 7, 9}},      {"min6", {0, 3, 7, 9}},
      {"9", {0, 4, 7, 10, 2}},      {"maj9", {0, 4, 7, 11, 2}},  {"min9", {0, 3, 7, 10, 2}},
      {"11", {0, 4, 7, 10, 2, 5}},  {"min11", {0, 3, 7, 10, 2, 5}},
      {"13", {0, 4, 7, 10, 2, 9}},  {"maj13", {0, 4, 7, 11, 2, 9}},
      {"min13", {0, 3, 7, 10, 2, 9}},
      {"sus2", {0, 2, 7}},          {"sus4", {0, 5, 7}},         {"5", {0, 7}},
      {"1", {0}},
  };
  return table;
}

inline const QualityEntry* find_quality(std::string_view name) {
  for (const auto& q : quality_table())
    if (q.name == name) return &q;
  return nullptr;
}

inline int parse_root(std::string_view s, std::string_view label) {
  static constexpr std::array<int, 7> kNatural = {9, 11, 0, 2, 4, 5, 7};  // A..G
  if (s.empty() || s[0] < 'A' || s[0] > 'G') throw DataError("unknown chord root in '" + std::string(label) + "'");
  int pc = kNatural[static_cast<std::size_t>(s[0] - 'A')];
  for (char c : s.substr(1)) {
    if (c == '#') ++pc;
    else if (c == 'b') --pc;
    else throw DataError("unknown chord root in '" + std::string(label) + "'");
  }
  return ((pc % 12) + 12) % 12;
}

/// Harte scale degree ("b7", "#9", "3") to a semitone interval mod 12.
inline int parse_degree(std::string_view s, std::string_view label) {
  static constexpr std::array<int, 7> kMajorScale = {0, 2, 4, 5, 7, 9, 11};
  int shift = 0;
  std::size_t i = 0;
  for (; i < s.size() && (s[i] == '#' || s[i] == 'b'); ++i) shift += s[i] == '#' ? 1 : -1;
  int degree = 0;
  const auto* first = s.data() + i;
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, degree);
  if (ec != std::errc{} || ptr != last || degree < 1 || degree > 13)
    throw DataError("bad scale degree '" + std::string(s) + "' in '" + std::string(label) + "'");
  const int base = kMajorScale[static_cast<std::size_t>((degree - 1) % 7)];
  return ((base + shift) % 12 + 12) % 12;
}

inline std::string degree_name(int semitones) {
  static constexpr std::array<std::string_view, 12> kNames = {"1", "b2", "2", "b3", "3", "4",
                                                              "b5", "5", "b6", "6", "b7", "7"};
  return std::string(kNames[static_cast<std::size_t>(semitones)]);
}

}  // namespace detail

/// Parses ROOT[:QUALITY][(DEGREES)][/BASS], "N" or "X". A bare root is major.
inline ChordSymbol parse_chord(std::string_view label) {
  ChordSymbol sym;
  if (label == "N") return sym;
  if (label == "X") {
    sym.kind = ChordSymbol::Kind::unknown;
    return sym;
  }
  std::string_view rest = label;
  std::string_view bass;
  if (const auto slash = rest.find('/'); slash != std::string_view::npos) {
    bass = rest.substr(slash + 1);
    rest = rest.substr(0, slash);
  }
  std::string_view degrees;
  bool has_degrees = false;
  if (const auto open = rest.find('('); open != std::string_view::npos) {
    if (rest.back() != ')') throw DataError("unbalanced parenthesis in '" + std::string(label) + "'");
    degrees = rest.substr(open + 1, rest.size() - open - 2);
    rest = rest.substr(0, open);
    has_degrees = true;
  }
  std::string_view root = rest;
  std::string_view quality;
  bool has_colon = false;
  if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
    root = rest.substr(0, colon);
    quality = rest.substr(colon + 1);
    has_colon = true;
  }

  sym.kind = ChordSymbol::Kind::chord;
  sym.root_pc = detail::parse_root(root, label);
  if (quality.empty()) {
    if (has_colon && !has_degrees) throw DataError("empty chord quality in '" + std::string(label) + "'");
    sym.quality = has_degrees && has_colon ? "" : "maj";
  } else {
    if (!detail::find_quality(quality))
      throw DataError("unknown chord quality '" + std::string(quality) + "' in '" + std::string(label) + "'");
    sym.quality = std::string(quality);
  }
  while (has_degrees && !degrees.empty()) {
    const auto comma = degrees.find(',');
    std::string_view tok = degrees.substr(0, comma);
    degrees = comma == std::string_view::npos ? std::string_view{} : degrees.substr(comma + 1);
    if (!tok.empty() && tok[0] == '*') sym.omitted.insert(detail::parse_degree(tok.substr(1), label));
    else sym.extra.insert(detail::parse_degree(tok, label));
  }
  if (!bass.empty()) sym.bass = detail::parse_degree(bass, label);
  else if (label.back() == '/') throw DataError("empty bass degree in '" + std::string(label) + "'");
  return sym;
}

/// Canonical Harte spelling (sharps, explicit quality).
inline std::string to_string(const ChordSymbol& s) {
  if (s.kind == ChordSymbol::Kind::no_chord) return "N";
  if (s.kind == ChordSymbol::Kind::unknown) return "X";
  std::string out(kPitchClassNames[static_cast<std::size_t>(s.root_pc)]);
  out += ':';
  out += s.quality;
  if (!s.extra.empty() || !s.omitted.empty() || s.quality.empty()) {
    out += '(';
    bool first = true;
    for (int e : s.extra) {
      if (!first) out += ',';
      out += detail::degree_name(e);
      first = false;
    }
    for (int o : s.omitted) {
      if (!first) out += ',';
      out += '*' + detail::degree_name(o);
      first = false;
    }
    out += ')';
  }
  if (s.bass) out += '/' + detail::degree_name(*s.bass);
  return out;
}

/// Intervals (semitones above the root) sounding in the chord.
inline std::set<int> chord_intervals(const ChordSymbol& s) {
  std::set<int> iv;
  if (!s.is_chord()) return iv;
  if (const auto* q = detail::find_quality(s.quality)) iv.insert(q->intervals.begin(), q->intervals.end());
  iv.insert(s.extra.begin(), s.extra.end());
  for (int o : s.omitted) iv.erase(o);
  return iv;
}

/// Full pitch-class set of the chord (extensions kept). Bass is ignored.
inline TargetChroma chord_template(const ChordSymbol& s) {
  TargetChroma t{};
  for (int i : chord_intervals(s)) t[static_cast<std::size_t>((s.root_pc + i) % 12)] = 1;
  return t;
}

inline ChordClass reduce_majmin(const ChordSymbol& s) {
  switch (s.kind) {
    case ChordSymbol::Kind::no_chord:
      return ChordClass::no_chord();
    case ChordSymbol::Kind::unknown:
      return ChordClass::excluded();
    case ChordSymbol::Kind::chord:
      break;
  }
  const auto iv = chord_intervals(s);
  if (iv.contains(4)) return ChordClass::major(s.root_pc);
  if (iv.contains(3)) return ChordClass::minor(s.root_pc);
  return ChordClass::excluded();
}

inline std::string class_name(ChordClass c) {
  if (c.is_excluded()) return "X";
  if (c.index == ChordClass::kNoChord) return "N";
  const int root = c.index % 12;
  return std::string(kPitchClassNames[static_cast<std::size_t>(root)]) + (c.index < 12 ? ":maj" : ":min");
}

namespace detail {

inline double parse_time(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line_no) + ": malformed number '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses "start end label" lines; blank lines and lines starting with '#' are skipped.
inline ChordAnnotation parse_lab(std::string_view text, std::string song_id = {}) {
  ChordAnnotation ann;
  ann.song_id = std::move(song_id);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens.size() != 3)
      throw DataError("line " + std::to_string(line_no) + ": expected 'start end label'");
    ChordSegment seg;
    seg.start = detail::parse_time(tokens[0], line_no);
    seg.end = detail::parse_time(tokens[1], line_no);
    if (seg.start < 0.0 || seg.end <= seg.start)
      throw DataError("line " + std::to_string(line_no) + ": end must be after start");
    seg.symbol = parse_chord(tokens[2]);
    ann.segments.push_back(std::move(seg));
  }
  std::stable_sort(ann.segments.begin(), ann.segments.end(),
                   [](const ChordSegment& a, const ChordSegment& b) { return a.start < b.start; });
  for (std::size_t k = 1; k < ann.segments.size(); ++k)
    if (ann.segments[k].start < ann.segments[k - 1].end)
      throw DataError("overlapping segments at " + std::to_string(ann.segments[k].start) + " s");
  return ann;
}

inline std::string format_time(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

inline std::string format_lab(const ChordAnnotation& ann) {
  std::string out;
  for (const auto& s : ann.segments) out += format_time(s.start) + ' ' + format_time(s.end) + ' ' + to_string(s.symbol) + '\n';
  return out;
}

/// Symbol governing time `t` (half-open segments); no-chord outside all segments.
inline const ChordSymbol& symbol_at(const ChordAnnotation& ann, double t) {
  static const ChordSymbol kNone{};
  auto it = std::upper_bound(ann.segments.begin(), ann.segments.end(), t,
                             [](double time, const ChordSegment& s) { return time < s.start; });
  if (it == ann.segments.begin()) return kNone;
  --it;
  return t < it->end ? it->symbol : kNone;
}

inline std::vector<ChordClass> frame_labels(const ChordAnnotation& ann, std::size_t n_frames, double fps = 10.0) {
  if (!(fps > 0.0)) throw UsageError("frame_labels: fps must be positive");
  std::vector<ChordClass> out(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) out[t] = reduce_majmin(symbol_at(ann, static_cast<double>(t) / fps));
  return out;
}

inline std::vector<TargetChroma> frame_targets(const ChordAnnotation& ann, std::size_t n_frames, double fps = 10.0) {
  if (!(fps > 0.0)) throw UsageError("frame_targets: fps must be positive");
  std::vector<TargetChroma> out(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) out[t] = chord_template(symbol_at(ann, static_cast<double>(t) / fps));
  return out;
}

inline RowMatrix targets_matrix(const std::vector<TargetChroma>& rows) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), 12);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int i = 0; i < 12; ++i) m(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i)];
  return m;
}

inline std::vector<std::uint8_t> label_bytes(const std::vector<ChordClass>& labels) {
  std::vector<std::uint8_t> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [](ChordClass c) { return c.index; });
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_ANNOTATIONS_HPP
