#ifndef DEEPCHROMA_CORPUS_HPP
#define DEEPCHROMA_CORPUS_HPP

// In-memory corpus of annotated songs and per-song feature computation.

#include <filesystem>
#include <string>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/dsp.hpp"
#include "deepchroma/features.hpp"
#include "deepchroma/synth.hpp"

namespace deepchroma {

struct Song {
  std::string id;
  std::string group;
  ChordAnnotation annotation;
  QuarterToneSpectrogram spectrum;  // linear S

  std::size_t frames() const { return static_cast<std::size_t>(spectrum.data.rows()); }
};

struct Corpus {
  std::vector<Song> songs;
};

inline Song make_song(std::string id, std::string group, const AudioClip& clip, ChordAnnotation ann) {
  Song s{std::move(id), std::move(group), std::move(ann), quarter_tone_spectrogram(clip)};
  s.annotation.song_id = s.id;
  return s;
}

/// Loads every song listed in `dir/manifest.txt`.
inline Corpus load_corpus(const std::filesystem::path& dir) {
  const auto bytes = read_file_bytes(dir / "manifest.txt");
  const auto entries = parse_manifest({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  if (entries.empty()) throw DataError("empty manifest in " + dir.string());
  Corpus c;
  for (const auto& e : entries) {
    const auto lab = read_file_bytes(dir / e.lab);
    c.songs.push_back(make_song(e.id, e.group, load_audio(dir / e.wav),
                                parse_lab({reinterpret_cast<const char*>(lab.data()), lab.size()}, e.id)));
  }
  return c;
}

/// Generates the corpus in memory without touching the filesystem.
inline Corpus synth_corpus(const SynthConfig& cfg) {
  Corpus c;
  for (int i = 0; i < cfg.n_songs; ++i) {
    SynthSong s = gen_song(cfg, i);
    c.songs.push_back(make_song(s.id, "synth", s.clip, std::move(s.annotation)));
  }
  return c;
}

/// Unstacked per-frame features of one song. `extractor` is required for deep.
inline RowMatrix song_features(const Song& song, FeatureKind kind, const MLPModel* extractor = nullptr) {
  switch (kind) {
    case FeatureKind::slog:
      return log_compress(song.spectrum).data;
    case FeatureKind::c:
      return fold_chroma(song.spectrum).data;
    case FeatureKind::cwlog:
      return fold_chroma_weighted_log(song.spectrum).data;
    case FeatureKind::ideal:
      return ideal_chroma(song.annotation, song.frames(), song.spectrum.fps).data;
    case FeatureKind::deep:
      if (extractor == nullptr) throw UsageError("deep features need a trained extractor");
      return deep_chroma(*extractor, log_compress(song.spectrum)).data;
  }
  throw UsageError("unknown feature kind");
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_CORPUS_HPP
