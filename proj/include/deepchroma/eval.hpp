#ifndef DEEPCHROMA_EVAL_HPP
#define DEEPCHROMA_EVAL_HPP

// WCSR scoring, fold construction, cross-validation and context sweeps.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/classifier.hpp"
#include "deepchroma/corpus.hpp"
#include "deepchroma/features.hpp"
#include "deepchroma/nn.hpp"

namespace deepchroma {

struct SongScore {
  double correct = 0.0;   // seconds
  double mappable = 0.0;  // seconds

  double ratio() const { return mappable > 0.0 ? correct / mappable : 0.0; }
};

/// Frame-based WCSR of one song. Each frame stands for 1/fps seconds and is
/// judged at its centre time; excluded reference frames count nowhere.
/// Predictions shorter than the annotation are padded with no-chord.
inline SongScore wcsr(std::span<const ChordClass> predictions, const ChordAnnotation& reference, double fps = 10.0) {
  if (reference.segments.empty()) throw DataError("wcsr: empty reference annotation");
  if (!(fps > 0.0)) throw UsageError("wcsr: fps must be positive");
  const double end = reference.end_time();
  const double dt = 1.0 / fps;
  std::size_t correct = 0, mappable = 0;
  for (std::size_t t = 0; static_cast<double>(t) / fps < end; ++t) {
    const ChordClass ref = reduce_majmin(symbol_at(reference, static_cast<double>(t) / fps));
    if (ref.is_excluded()) continue;
    ++mappable;
    const ChordClass pred = t < predictions.size() ? predictions[t] : ChordClass::no_chord();
    if (pred == ref) ++correct;
  }
  return {static_cast<double>(correct) * dt, static_cast<double>(mappable) * dt};
}

struct FoldRotation {
  int test_fold = 0;
  std::vector<std::size_t> train, val, test;  // song indices
};

struct FoldSplit {
  int k = 8;
  std::vector<int> assignment;  // fold of each song
  std::vector<FoldRotation> rotations;
};

/// Seeded shuffle, then round-robin assignment. Songs are ordered by group tag
/// before dealing so every group spreads evenly over the folds. Rotation i tests
/// fold i, validates on fold i+1 and trains on the rest; with k = 2 the
/// validation songs are every fourth song of the non-test fold (at least one).
inline FoldSplit make_folds(std::size_t n_songs, int k = 8, std::uint64_t seed = 0,
                            std::span<const std::string> groups = {}) {
  if (k < 2) throw UsageError("make_folds: need at least 2 folds");
  if (n_songs < static_cast<std::size_t>(k))
    throw UsageError("make_folds: " + std::to_string(n_songs) + " songs cannot fill " + std::to_string(k) + " folds");
  if (!groups.empty() && groups.size() != n_songs) throw UsageError("make_folds: group tags do not match songs");
  std::vector<std::size_t> order(n_songs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  if (!groups.empty())
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return groups[a] < groups[b]; });

  FoldSplit split;
  split.k = k;
  split.assignment.assign(n_songs, 0);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int f = static_cast<int>(pos % static_cast<std::size_t>(k));
    split.assignment[order[pos]] = f;
    folds[static_cast<std::size_t>(f)].push_back(order[pos]);
  }
  for (int i = 0; i < k; ++i) {
    FoldRotation r;
    r.test_fold = i;
    r.test = folds[static_cast<std::size_t>(i)];
    if (k >= 3) {
      const int v = (i + 1) % k;
      r.val = folds[static_cast<std::size_t>(v)];
      for (int f = 0; f < k; ++f)
        if (f != i && f != v) r.train.insert(r.train.end(), folds[static_cast<std::size_t>(f)].begin(), folds[static_cast<std::size_t>(f)].end());
    } else {
      const auto& rest = folds[static_cast<std::size_t>(1 - i)];
      for (std::size_t j = 0; j < rest.size(); ++j) (j % 4 == 3 ? r.val : r.train).push_back(rest[j]);
      if (r.val.empty()) {
        r.val.push_back(r.train.back());
        if (r.train.size() > 1) r.train.pop_back();
      }
    }
    split.rotations.push_back(std::move(r));
  }
  return split;
}

inline FoldSplit make_folds(std::span<const std::string> song_ids, int k = 8, std::uint64_t seed = 0,
                            std::span<const std::string> groups = {}) {
  return make_folds(song_ids.size(), k, seed, groups);
}

struct SongResult {
  std::string song_id;
  int fold = 0;
  double correct = 0.0;
  double mappable = 0.0;

  double wcsr() const { return mappable > 0.0 ? correct / mappable : 0.0; }
};

struct EvalResult {
  std::string feature;
  double context_seconds = 0.0;
  std::vector<SongResult> songs;

  /// Duration-weighted corpus ratio.
  double total() const {
    double c = 0.0, m = 0.0;
    for (const auto& s : songs) {
      c += s.correct;
      m += s.mappable;
    }
    return m > 0.0 ? c / m : 0.0;
  }
};

struct ExperimentConfig {
  std::vector<int> hidden = {512, 512, 512};
  TrainConfig extractor = [] {
    TrainConfig c;
    c.max_epochs = 100;
    return c;
  }();
  TrainConfig classifier = default_classifier_config();
  std::function<void(const std::string&)> log;
};

/// Trains a chroma extractor on super-frames of the given songs.
inline TrainResult train_extractor(const Corpus& corpus, std::span<const std::size_t> train_songs,
                                   std::span<const std::size_t> val_songs, int context_frames,
                                   std::span<const int> hidden, const TrainConfig& cfg) {
  if (context_frames < 1 || context_frames % 2 == 0) throw UsageError("train_extractor: context must be odd");
  auto make_set = [&](std::span<const std::size_t> songs) {
    TrainingSet set{WindowedFrames(context_frames / 2), {}, {}, {}};
    std::vector<RowMatrix> targets;
    Eigen::Index rows = 0;
    for (std::size_t i : songs) {
      const Song& s = corpus.songs.at(i);
      set.inputs.add(log_compress(s.spectrum).data);
      targets.push_back(targets_matrix(frame_targets(s.annotation, s.frames(), s.spectrum.fps)));
      rows += targets.back().rows();
    }
    set.targets.resize(rows, 12);
    Eigen::Index r = 0;
    for (const auto& t : targets) {
      set.targets.middleRows(r, t.rows()) = t;
      r += t.rows();
    }
    set.select_all();
    return set;
  };
  TrainingSet train_set = make_set(train_songs);
  TrainingSet val_set = make_set(val_songs);
  const InputAffine norm = fit_standardizer(train_set.inputs);
  train_set.inputs.set_affine(norm);
  val_set.inputs.set_affine(norm);
  std::vector<int> sizes = {static_cast<int>(context_frames * corpus.songs.front().spectrum.data.cols())};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(12);
  TrainConfig c = cfg;
  c.loss = LossKind::bce;
  MLPModel model = make_mlp(sizes, Activation::relu, Activation::sigmoid, c.seed, static_cast<std::uint32_t>(context_frames));
  TrainResult r = train(std::move(model), train_set, val_set, c);
  fold_input_affine(r.model, norm, context_frames);
  round_to_storage_precision(r.model);
  return r;
}

inline std::vector<LabeledSequence> labeled_sequences(const Corpus& corpus, std::span<const std::size_t> songs,
                                                      const std::vector<RowMatrix>& features) {
  std::vector<LabeledSequence> out;
  for (std::size_t i : songs) {
    const Song& s = corpus.songs[i];
    out.push_back({features[i], frame_labels(s.annotation, static_cast<std::size_t>(features[i].rows()), s.spectrum.fps)});
  }
  return out;
}

struct CVResult {
  EvalResult test;
  EvalResult validation;
};

/// For every rotation: optionally train the extractor, train logistic
/// regression on the training songs with early stopping on the validation
/// songs, and score WCSR on both the test and validation songs.
inline CVResult cross_validate(const Corpus& corpus, FeatureKind kind, double context_seconds,
                               const ExperimentConfig& cfg, const FoldSplit& split) {
  if (corpus.songs.empty()) throw UsageError("cross_validate: empty corpus");
  if (split.assignment.size() != corpus.songs.size()) throw UsageError("cross_validate: fold split does not match corpus");
  const double fps = corpus.songs.front().spectrum.fps;
  const int frames = context_frames_for(context_seconds, fps);
  const int classifier_frames = kind == FeatureKind::deep ? 1 : frames;
  CVResult result;
  result.test.feature = result.validation.feature = std::string(feature_name(kind));
  result.test.context_seconds = result.validation.context_seconds = frames / fps;

  std::vector<RowMatrix> shared;
  if (kind != FeatureKind::deep)
    for (const auto& s : corpus.songs) shared.push_back(song_features(s, kind));

  for (std::size_t r = 0; r < split.rotations.size(); ++r) {
    const FoldRotation& rot = split.rotations[r];
    std::vector<RowMatrix> deep;
    if (kind == FeatureKind::deep) {
      TrainConfig ec = cfg.extractor;
      ec.seed += r;
      const TrainResult tr = train_extractor(corpus, rot.train, rot.val, frames, cfg.hidden, ec);
      if (cfg.log)
        cfg.log("fold " + std::to_string(rot.test_fold) + ": extractor stopped after " +
                std::to_string(tr.history.size()) + " epochs, best val bit accuracy " + std::to_string(tr.best_metric));
      for (const auto& s : corpus.songs) deep.push_back(song_features(s, kind, &tr.model));
    }
    const auto& feats = kind == FeatureKind::deep ? deep : shared;
    TrainConfig cc = cfg.classifier;
    cc.seed += r;
    const auto train_seqs = labeled_sequences(corpus, rot.train, feats);
    const auto val_seqs = labeled_sequences(corpus, rot.val, feats);
    const MLPModel clf = train_logreg(train_seqs, val_seqs, classifier_frames, cc);
    auto score = [&](std::span<const std::size_t> songs, EvalResult& into) {
      for (std::size_t i : songs) {
        const auto pred = predict_frames(clf, feats[i]);
        const SongScore sc = wcsr(pred.classes, corpus.songs[i].annotation, fps);
        into.songs.push_back({corpus.songs[i].id, rot.test_fold, sc.correct, sc.mappable});
      }
    };
    score(rot.test, result.test);
    score(rot.val, result.validation);
    if (cfg.log)
      cfg.log("fold " + std::to_string(rot.test_fold) + ": " + std::string(feature_name(kind)) + " done");
  }
  auto by_id = [](const SongResult& a, const SongResult& b) { return a.song_id < b.song_id; };
  std::stable_sort(result.test.songs.begin(), result.test.songs.end(), by_id);
  return result;
}

struct SweepRow {
  double context_seconds = 0.0;
  double validation_wcsr = 0.0;
  double test_wcsr = 0.0;
};

inline std::vector<SweepRow> sweep_context(const Corpus& corpus, FeatureKind kind, std::span<const double> contexts,
                                           const ExperimentConfig& cfg, const FoldSplit& split) {
  std::vector<SweepRow> rows;
  for (double c : contexts) {
    const CVResult r = cross_validate(corpus, kind, c, cfg, split);
    rows.push_back({r.validation.context_seconds, r.validation.total(), r.test.total()});
  }
  return rows;
}

inline std::string format_number(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline constexpr std::string_view kEvalCsvHeader = "song_id,feature,fold,correct_s,mappable_s,wcsr";

inline std::string format_eval_csv(const EvalResult& r) {
  std::string out = std::string(kEvalCsvHeader) + '\n';
  for (const auto& s : r.songs)
    out += s.song_id + ',' + r.feature + ',' + std::to_string(s.fold) + ',' + format_number(s.correct, 3) + ',' +
           format_number(s.mappable, 3) + ',' + format_number(s.wcsr()) + '\n';
  return out;
}

/// Parses one or more feature result sets from CSV text.
inline std::vector<EvalResult> parse_eval_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string(kEvalCsvHeader), 0) != 0)
    throw DataError("evaluation CSV: missing header '" + std::string(kEvalCsvHeader) + "'");
  std::vector<EvalResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 6) throw DataError("evaluation CSV line " + std::to_string(line_no) + ": expected 6 columns");
    SongResult s;
    try {
      s.song_id = cols[0];
      s.fold = std::stoi(cols[2]);
      s.correct = std::stod(cols[3]);
      s.mappable = std::stod(cols[4]);
    } catch (const std::exception&) {
      throw DataError("evaluation CSV line " + std::to_string(line_no) + ": malformed number");
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const EvalResult& r) { return r.feature == cols[1]; });
    if (it == out.end()) {
      out.push_back({cols[1], 0.0, {}});
      it = std::prev(out.end());
    }
    it->songs.push_back(std::move(s));
  }
  return out;
}

inline std::string format_eval_table(const EvalResult& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %5s %10s %10s %8s\n", "song", "fold", "correct_s", "mappable_s", "WCSR");
  out += buf;
  for (const auto& s : r.songs) {
    std::snprintf(buf, sizeof buf, "%-12s %5d %10.1f %10.1f %8.4f\n", s.song_id.c_str(), s.fold, s.correct, s.mappable, s.wcsr());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-12s %5s %10s %10s %8.4f  (feature %s, context %.1f s)\n", "TOTAL", "", "", "",
                r.total(), r.feature.c_str(), r.context_seconds);
  out += buf;
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_EVAL_HPP
