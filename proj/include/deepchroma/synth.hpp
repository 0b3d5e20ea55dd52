#ifndef DEEPCHROMA_SYNTH_HPP
#define DEEPCHROMA_SYNTH_HPP

// Deterministic synthetic chord-labelled audio: additive harmonic tones for
// each chord plus percussive interference, fully keyed by (seed, song index).

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/nn.hpp"
#include "deepchroma/wav.hpp"

namespace deepchroma {

struct VocabEntry {
  std::string quality;  // Harte quality token, or "N" for no-chord
  double weight = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  int n_songs = 20;
  double song_seconds = 45.0;
  double chord_min_seconds = 1.0;
  double chord_max_seconds = 4.0;
  std::vector<VocabEntry> vocabulary = {{"maj", 0.35}, {"min", 0.3}, {"min7", 0.1}, {"7", 0.1}, {"N", 0.15}};
  int overtones = 8;               // harmonics per note, including the fundamental
  double overtone_decay = 0.7;     // mean amplitude ratio between successive harmonics
  double decay_spread = 0.15;      // per-song timbre: decay drawn from decay +- spread
  double melody_amplitude = 0.8;   // high-register melody with passing tones; 0 disables
  double arpeggio_fraction = 0.8;  // share of chords rendered as broken chords
  double noise_rate = 3.0;         // broadband bursts per second
  double noise_amplitude = 1.5;    // relative to one note's fundamental
  double kick_amplitude = 1.0;     // pitched low drum on every beat; 0 disables
  double detune_cents = 40.0;      // per-song tuning offset drawn from [-x, x]

  void validate() const {
    if (n_songs < 1) throw UsageError("synth: n_songs must be >= 1");
    if (!(song_seconds > 0.0 && chord_min_seconds > 0.0 && chord_max_seconds >= chord_min_seconds))
      throw UsageError("synth: durations must be positive with min <= max");
    double total = 0.0;
    for (const auto& v : vocabulary) {
      if (v.weight < 0.0) throw UsageError("synth: negative vocabulary weight");
      if (v.quality != "N") parse_chord("C:" + v.quality);
      total += v.weight;
    }
    if (!(total > 0.0)) throw UsageError("synth: vocabulary weights must sum to a positive value");
    if (overtones < 1 || overtone_decay < 0.0 || decay_spread < 0.0 || melody_amplitude < 0.0 || arpeggio_fraction < 0.0 || arpeggio_fraction > 1.0 || noise_rate < 0.0 || noise_amplitude < 0.0 || kick_amplitude < 0.0 ||
        detune_cents < 0.0)
      throw UsageError("synth: negative synthesis parameter");
  }
};

/// Restricts the vocabulary to major, minor and no-chord.
inline SynthConfig majmin_only(SynthConfig cfg) {
  cfg.vocabulary = {{"maj", 0.45}, {"min", 0.4}, {"N", 0.15}};
  return cfg;
}

struct SynthSong {
  std::string id;
  AudioClip clip;
  ChordAnnotation annotation;
};

inline std::string song_id(int index, int n_songs) {
  const int width = std::max(2, static_cast<int>(std::to_string(std::max(0, n_songs - 1)).size()));
  std::string s = std::to_string(index);
  return "song" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

namespace detail {

inline Rng song_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5eedu};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline void add_partial(std::vector<double>& out, std::size_t begin, std::size_t end, double hz, double amp,
                        double phase, double decay_s, int sr) {
  const double fade = 0.005 * sr;
  const double w = 2.0 * std::numbers::pi * hz / sr;
  const double len = static_cast<double>(end - begin);
  for (std::size_t n = begin; n < end; ++n) {
    const double k = static_cast<double>(n - begin);
    const double env = std::min({1.0, k / fade, (len - k) / fade}) * std::exp(-k / (decay_s * sr));
    out[n] += amp * env * std::sin(w * k + phase);
  }
}

}  // namespace detail

/// Renders song `index`: a random chord progression as additive tones, noise
/// bursts and a low pitched drum, with a per-song detune. Annotation times are
/// exact to the millisecond and match the rendered boundaries.
inline SynthSong gen_song(const SynthConfig& cfg, int index) {
  cfg.validate();
  Rng rng = detail::song_rng(cfg.seed, index);
  const int sr = kSampleRate;
  const auto total = static_cast<std::size_t>(std::llround(cfg.song_seconds * sr));
  SynthSong song;
  song.id = song_id(index, cfg.n_songs);
  song.annotation.song_id = song.id;
  std::vector<double> audio(total, 0.0);

  const double detune = std::exp2(detail::uniform(rng, -cfg.detune_cents, cfg.detune_cents) / 1200.0);
  const double decay = std::max(0.0, detail::uniform(rng, cfg.overtone_decay - cfg.decay_spread, cfg.overtone_decay + cfg.decay_spread));
  auto render_note = [&](std::size_t from, std::size_t to, int midi, double amp, double decay_s) {
    const double f0 = 440.0 * std::exp2((midi - 69) / 12.0) * detune;
    for (int h = 1; h <= cfg.overtones; ++h) {
      const double hz = f0 * h;
      if (hz > 0.45 * sr) break;
      detail::add_partial(audio, from, to, hz, amp * std::pow(decay, h - 1), detail::uniform(rng, 0.0, 2.0 * std::numbers::pi),
                          decay_s, sr);
    }
  };
  double weight_sum = 0.0;
  for (const auto& v : cfg.vocabulary) weight_sum += v.weight;

  // Roots are dealt from a reshuffled deck of all 12 pitch classes so short
  // corpora still cover every class.
  std::array<int, 12> deck{};
  std::iota(deck.begin(), deck.end(), 0);
  std::size_t dealt = deck.size();
  double t = 0.0;
  while (t < cfg.song_seconds - 1e-9) {
    double end = std::round((t + detail::uniform(rng, cfg.chord_min_seconds, cfg.chord_max_seconds)) * 1000.0) / 1000.0;
    if (end > cfg.song_seconds - 0.5 * cfg.chord_min_seconds) end = cfg.song_seconds;
    double pick = uniform01(rng) * weight_sum;
    std::size_t q = 0;
    while (q + 1 < cfg.vocabulary.size() && pick >= cfg.vocabulary[q].weight) pick -= cfg.vocabulary[q++].weight;
    const std::string& quality = cfg.vocabulary[q].quality;
    if (quality != "N" && dealt == deck.size()) {
      for (std::size_t i = deck.size(); i > 1; --i) std::swap(deck[i - 1], deck[static_cast<std::size_t>(rng() % i)]);
      dealt = 0;
    }
    const int root = quality == "N" ? 0 : deck[dealt++];
    const std::string label = quality == "N" ? "N" : std::string(kPitchClassNames[static_cast<std::size_t>(root)]) + ":" + quality;
    ChordSegment seg{t, end, parse_chord(label)};

    const auto begin_s = static_cast<std::size_t>(std::llround(t * sr));
    const auto end_s = std::min(total, static_cast<std::size_t>(std::llround(end * sr)));
    if (seg.symbol.is_chord()) {
      const TargetChroma tmpl = chord_template(seg.symbol);
      const int base_octave = 3 + static_cast<int>(rng() % 2);
      const int span = 2 + static_cast<int>(rng() % 2);
      const double decay_s = detail::uniform(rng, 1.0, 4.0);
      std::vector<int> notes;
      for (int pc = 0; pc < 12; ++pc) {
        if (!tmpl[static_cast<std::size_t>(pc)]) continue;
        for (int o = 0; o < span; ++o)
          if (o == 0 || uniform01(rng) < 0.7) notes.push_back(12 * (base_octave + 1 + o) + pc);
      }
      const int bass = 12 * base_octave + root;  // one octave below the voicing
      render_note(begin_s, end_s, bass, detail::uniform(rng, 0.5, 1.0), decay_s);
      if (uniform01(rng) < cfg.arpeggio_fraction) {
        // Broken chord: one voicing note at a time, so single frames show only part of the harmony.
        std::sort(notes.begin(), notes.end());
        const auto step = static_cast<std::size_t>(detail::uniform(rng, 0.15, 0.35) * sr);
        std::size_t k = rng() % notes.size();
        for (std::size_t m = begin_s; m < end_s; m += step, k = (k + 1) % notes.size())
          render_note(m, std::min(end_s, m + 2 * step), notes[k], detail::uniform(rng, 0.7, 1.2), 0.3);
      } else {
        for (int midi : notes) render_note(begin_s, end_s, midi, detail::uniform(rng, 0.5, 1.0), decay_s);
      }
      // Melody over the chord: mostly chord tones, some passing tones.
      if (cfg.melody_amplitude > 0.0) {
        std::vector<int> chord_pcs;
        for (int pc = 0; pc < 12; ++pc)
          if (tmpl[static_cast<std::size_t>(pc)]) chord_pcs.push_back(pc);
        for (std::size_t m = begin_s; m < end_s;) {
          const auto len = static_cast<std::size_t>(detail::uniform(rng, 0.2, 0.6) * sr);
          const std::size_t m_end = std::min(end_s, m + len);
          const int pc = uniform01(rng) < 0.6 ? chord_pcs[rng() % chord_pcs.size()] : static_cast<int>(rng() % 12);
          if (m_end > m + sr / 50) render_note(m, m_end, 72 + 12 * static_cast<int>(rng() % 2) + pc, cfg.melody_amplitude, 0.5);
          m = m_end;
        }
      }
    }
    song.annotation.segments.push_back(std::move(seg));
    t = end;
  }

  // Broadband bursts (snare-like) at random times.
  if (cfg.noise_amplitude > 0.0 && cfg.noise_rate > 0.0) {
    const auto n_bursts = static_cast<int>(std::lround(cfg.noise_rate * cfg.song_seconds));
    for (int b = 0; b < n_bursts; ++b) {
      const auto start = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(total));
      const double len_s = detail::uniform(rng, 0.03, 0.15);
      const double amp = cfg.noise_amplitude * detail::uniform(rng, 0.5, 1.5);
      const auto len = static_cast<std::size_t>(len_s * 3.0 * sr);
      for (std::size_t k = 0; k < len && start + k < total; ++k)
        audio[start + k] += amp * (2.0 * uniform01(rng) - 1.0) * std::exp(-static_cast<double>(k) / (len_s * sr));
    }
  }
  // Pitched kick drum on a per-song beat grid.
  if (cfg.kick_amplitude > 0.0) {
    const double beat = 60.0 / detail::uniform(rng, 90.0, 130.0);
    const double f_start = detail::uniform(rng, 70.0, 110.0);
    for (double bt = detail::uniform(rng, 0.0, beat); bt < cfg.song_seconds; bt += beat) {
      const auto start = static_cast<std::size_t>(bt * sr);
      double phase = 0.0;
      for (std::size_t k = 0; k < static_cast<std::size_t>(0.3 * sr) && start + k < total; ++k) {
        const double s = static_cast<double>(k) / sr;
        const double hz = 40.0 + (f_start - 40.0) * std::exp(-s / 0.04);
        phase += 2.0 * std::numbers::pi * hz / sr;
        audio[start + k] += cfg.kick_amplitude * std::exp(-s / 0.08) * std::sin(phase);
      }
    }
  }

  double peak = 0.0;
  for (double v : audio) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : audio) v *= 0.9 / peak;
  song.clip.samples = std::move(audio);
  song.clip.sample_rate = sr;
  return song;
}

struct ManifestEntry {
  std::string id;
  std::filesystem::path wav;
  std::filesystem::path lab;
  double duration = 0.0;
  std::string group = "synth";
};

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries)
    out += e.id + ' ' + e.wav.generic_string() + ' ' + e.lab.generic_string() + ' ' + format_time(e.duration) + ' ' +
           e.group + '\n';
  return out;
}

inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream fields(line);
    ManifestEntry e;
    std::string wav, lab;
    if (!(fields >> e.id >> wav >> lab >> e.duration >> e.group))
      throw DataError("manifest line " + std::to_string(line_no) + ": expected 'id wav lab duration group'");
    e.wav = wav;
    e.lab = lab;
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> gen_corpus(const SynthConfig& cfg, const std::filesystem::path& dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string());
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < cfg.n_songs; ++i) {
    SynthSong song = gen_song(cfg, i);
    ManifestEntry e{song.id, song.id + ".wav", song.id + ".lab", song.clip.duration(), "synth"};
    save_wav16(dir / e.wav, song.clip.samples);
    write_text_atomic(dir / e.lab, format_lab(song.annotation));
    entries.push_back(std::move(e));
  }
  write_text_atomic(dir / "manifest.txt", format_manifest(entries));
  return entries;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_SYNTH_HPP
