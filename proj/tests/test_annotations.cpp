#include <gtest/gtest.h>

#include <random>
#include <set>

#include "deepchroma/annotations.hpp"
#include "deepchroma/binio.hpp"

using namespace deepchroma;

namespace {

std::set<int> pcs(const TargetChroma& t) {
  std::set<int> s;
  for (int i = 0; i < 12; ++i)
    if (t[static_cast<std::size_t>(i)]) s.insert(i);
  return s;
}

ChordAnnotation lab(std::string_view text) { return parse_lab(text, "song"); }

}  // namespace

TEST(ParseChord, BareRootIsMajor) {
  const auto c = parse_chord("C");
  EXPECT_TRUE(c.is_chord());
  EXPECT_EQ(c.root_pc, 0);
  EXPECT_EQ(c.quality, "maj");
}

TEST(ParseChord, RootsAndEnharmonics) {
  EXPECT_EQ(parse_chord("F#:min").root_pc, 6);
  EXPECT_EQ(parse_chord("F#:min").quality, "min");
  EXPECT_EQ(parse_chord("Db:7").root_pc, 1);
  EXPECT_EQ(parse_chord("Db:7").quality, "7");
  EXPECT_EQ(parse_chord("Cb").root_pc, 11);
  EXPECT_EQ(parse_chord("B#").root_pc, 0);
  EXPECT_EQ(parse_chord("Ebb:min").root_pc, 2);
}

TEST(ParseChord, NoChordAndUnknown) {
  EXPECT_EQ(parse_chord("N").kind, ChordSymbol::Kind::no_chord);
  EXPECT_EQ(parse_chord("X").kind, ChordSymbol::Kind::unknown);
}

TEST(ParseChord, DegreesAndBass) {
  const auto c = parse_chord("G:maj(b7,*5)/3");
  EXPECT_EQ(c.extra, (std::set<int>{10}));
  EXPECT_EQ(c.omitted, (std::set<int>{7}));
  ASSERT_TRUE(c.bass.has_value());
  EXPECT_EQ(*c.bass, 4);
  EXPECT_EQ(pcs(chord_template(c)), (std::set<int>{7, 11, 5}));
  const auto only = parse_chord("C:(1,b3,5)");
  EXPECT_EQ(pcs(chord_template(only)), (std::set<int>{0, 3, 7}));
  EXPECT_EQ(reduce_majmin(only), ChordClass::minor(0));
}

TEST(ParseChord, RejectsMalformedLabels) {
  for (const char* bad : {"H", "C:foo", "C:", "C:maj(3", "C/", "", ":maj", "C:maj(q)"})
    EXPECT_THROW(parse_chord(bad), DataError) << bad;
}

TEST(ParseChord, ToStringRoundTrips) {
  for (const char* s : {"C:maj", "F#:min7", "A:sus4", "G:7(b9)/3", "D:min(*5)", "N", "X", "C:(1,3)"}) {
    const auto c = parse_chord(s);
    EXPECT_EQ(parse_chord(to_string(c)), c) << s;
  }
  EXPECT_EQ(to_string(parse_chord("Db")), "C#:maj");
}

TEST(ChordTemplate, Examples) {
  EXPECT_EQ(pcs(chord_template(parse_chord("A:min7"))), (std::set<int>{9, 0, 4, 7}));
  EXPECT_EQ(pcs(chord_template(parse_chord("C:maj"))), (std::set<int>{0, 4, 7}));
  EXPECT_EQ(pcs(chord_template(parse_chord("F#:min"))), (std::set<int>{6, 9, 1}));
  EXPECT_TRUE(pcs(chord_template(parse_chord("N"))).empty());
  EXPECT_TRUE(pcs(chord_template(parse_chord("X"))).empty());
}

TEST(ChordTemplate, RootBitAlwaysSetForEveryQuality) {
  for (const char* q : {"maj", "min", "dim", "aug", "maj7", "min7", "7", "dim7", "hdim7", "minmaj7", "maj6", "min6", "9",
                        "maj9", "min9", "11", "min11", "13", "maj13", "min13", "sus2", "sus4", "5", "1"})
    for (int root = 0; root < 12; ++root) {
      const auto c = parse_chord(std::string(kPitchClassNames[static_cast<std::size_t>(root)]) + ":" + q);
      EXPECT_EQ(chord_template(c)[static_cast<std::size_t>(root)], 1) << q;
    }
}

TEST(ChordTemplate, MajMinTemplatesAreClassUnique) {
  std::set<std::set<int>> seen;
  for (int root = 0; root < 12; ++root)
    for (const char* q : {"maj", "min"})
      EXPECT_TRUE(seen.insert(pcs(chord_template(parse_chord(std::string(kPitchClassNames[static_cast<std::size_t>(root)]) + ":" + q)))).second);
  EXPECT_EQ(seen.size(), 24u);
}

TEST(ReduceMajMin, Examples) {
  EXPECT_EQ(reduce_majmin(parse_chord("G:7")), ChordClass::major(7));
  EXPECT_EQ(reduce_majmin(parse_chord("A:min7")), ChordClass::minor(9));
  EXPECT_TRUE(reduce_majmin(parse_chord("D:sus4")).is_excluded());
  EXPECT_TRUE(reduce_majmin(parse_chord("D:sus2")).is_excluded());
  EXPECT_TRUE(reduce_majmin(parse_chord("E:5")).is_excluded());
  EXPECT_TRUE(reduce_majmin(parse_chord("X")).is_excluded());
  EXPECT_EQ(reduce_majmin(parse_chord("N")), ChordClass::no_chord());
  EXPECT_EQ(reduce_majmin(parse_chord("B:dim")), ChordClass::minor(11));
  EXPECT_EQ(reduce_majmin(parse_chord("Eb:aug")), ChordClass::major(3));
  EXPECT_EQ(reduce_majmin(parse_chord("C:hdim7")), ChordClass::minor(0));
}

TEST(ReduceMajMin, ExtensionsKeepTheClass) {
  for (int root = 0; root < 12; ++root) {
    const std::string r(kPitchClassNames[static_cast<std::size_t>(root)]);
    EXPECT_EQ(reduce_majmin(parse_chord(r + ":maj")), reduce_majmin(parse_chord(r + ":maj7")));
    EXPECT_EQ(reduce_majmin(parse_chord(r + ":maj")), reduce_majmin(parse_chord(r + ":9")));
    EXPECT_EQ(reduce_majmin(parse_chord(r + ":min")), reduce_majmin(parse_chord(r + ":min9")));
  }
}

TEST(ClassName, Spelling) {
  EXPECT_EQ(class_name(ChordClass::major(9)), "A:maj");
  EXPECT_EQ(class_name(ChordClass::minor(1)), "C#:min");
  EXPECT_EQ(class_name(ChordClass::no_chord()), "N");
  EXPECT_EQ(class_name(ChordClass::excluded()), "X");
}

TEST(ParseLab, Examples) {
  const auto a = lab("0.0 2.5 C:maj\n2.5 4.0 N");
  ASSERT_EQ(a.segments.size(), 2u);
  EXPECT_EQ(a.segments[1].symbol.kind, ChordSymbol::Kind::no_chord);
  EXPECT_DOUBLE_EQ(a.end_time(), 4.0);
  const auto b = lab("0.0 1.0 A:min7");
  EXPECT_EQ(b.segments[0].symbol.quality, "min7");
  EXPECT_EQ(b.segments[0].symbol.root_pc, 9);
  EXPECT_THROW(lab("1.0 0.5 C"), DataError);
}

TEST(ParseLab, CommentsBlankLinesAndOrdering) {
  const auto a = lab("# header\n\n  2.0\t3.0  G\r\n0 2 C\n");
  ASSERT_EQ(a.segments.size(), 2u);
  EXPECT_EQ(a.segments[0].symbol.root_pc, 0);
  EXPECT_EQ(a.segments[1].symbol.root_pc, 7);
  EXPECT_EQ(a.song_id, "song");
  EXPECT_THROW(lab("0 2 C # trailing"), DataError);
}

TEST(ParseLab, Errors) {
  EXPECT_THROW(lab("0 1 C\n0.5 2 G"), DataError);
  EXPECT_THROW(lab("0 x C"), DataError);
  EXPECT_THROW(lab("0 1"), DataError);
  EXPECT_THROW(lab("0 1 C:what"), DataError);
  EXPECT_THROW(lab("-1 1 C"), DataError);
  EXPECT_THROW(lab("0 nan C"), DataError);
}

TEST(ParseLab, FormatThenParseIsIdentity) {
  std::mt19937 rng(5);
  const char* labels[] = {"C:maj", "D#:min7", "N", "X", "A:sus4", "G:7/5", "F:maj(9)", "B:hdim7"};
  for (int trial = 0; trial < 50; ++trial) {
    ChordAnnotation ann;
    double t = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double len = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
      ann.segments.push_back({t, t + len, parse_chord(labels[rng() % 8])});
      t += len + (rng() % 3 == 0 ? 0.25 : 0.0);
    }
    const auto back = parse_lab(format_lab(ann));
    ASSERT_EQ(back.segments.size(), ann.segments.size());
    for (std::size_t k = 0; k < ann.segments.size(); ++k) {
      EXPECT_EQ(back.segments[k].start, ann.segments[k].start);
      EXPECT_EQ(back.segments[k].end, ann.segments[k].end);
      EXPECT_EQ(back.segments[k].symbol, ann.segments[k].symbol);
    }
  }
}

TEST(FrameLabels, Examples) {
  const auto one = lab("0 1 C:maj");
  for (auto c : frame_labels(one, 10)) EXPECT_EQ(c, ChordClass::major(0));
  const auto split = lab("0 0.5 C\n0.5 1 A:min");
  const auto l = frame_labels(split, 10);
  EXPECT_EQ(l[4], ChordClass::major(0));
  EXPECT_EQ(l[5], ChordClass::minor(9));
  const auto more = frame_labels(one, 12);
  EXPECT_EQ(more[10], ChordClass::no_chord());
  EXPECT_EQ(more[11], ChordClass::no_chord());
  EXPECT_THROW(frame_labels(one, 3, 0.0), UsageError);
}

TEST(FrameLabels, GapsAreNoChord) {
  const auto l = frame_labels(lab("0 0.3 C\n0.6 1 G"), 10);
  EXPECT_EQ(l[2], ChordClass::major(0));
  EXPECT_EQ(l[3], ChordClass::no_chord());
  EXPECT_EQ(l[6], ChordClass::major(7));
}

TEST(FrameTargets, RowsEqualTemplates) {
  const auto ann = lab("0 1 C:maj\n1 2 N\n2 3 A:min7\n3 4 D:sus2");
  const auto t = frame_targets(ann, 40);
  const TargetChroma cmaj{1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0};
  EXPECT_EQ(t[0], cmaj);
  EXPECT_TRUE(pcs(t[15]).empty());
  EXPECT_EQ(pcs(t[25]), (std::set<int>{0, 4, 7, 9}));
  for (std::size_t f = 0; f < t.size(); ++f) EXPECT_EQ(t[f], chord_template(symbol_at(ann, static_cast<double>(f) / 10.0)));
  const RowMatrix m = targets_matrix(t);
  EXPECT_EQ(m.rows(), 40);
  EXPECT_EQ(m(0, 4), 1.0);
  EXPECT_EQ(m(0, 5), 0.0);
}

TEST(LabelFile, RoundTripAndValidation) {
  const auto labels = frame_labels(lab("0 1 C\n1 2 D:sus4\n2 3 N\n3 4 B:min"), 40);
  const auto bytes = encode_dcl(label_bytes(labels));
  EXPECT_EQ(bytes.size(), 4u + 4u + 40u);
  EXPECT_EQ(decode_dcl(bytes), label_bytes(labels));
  auto bad = bytes;
  bad[8] = 30;
  EXPECT_THROW(decode_dcl(bad), DataError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_dcl(bad), DataError);
}
