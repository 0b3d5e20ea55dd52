#ifndef DEEPCHROMA_CLI_HPP
#define DEEPCHROMA_CLI_HPP

// Command-line front end. `run` parses arguments, dispatches to one
// subcommand and maps failures to exit codes: 0 success, 1 usage, 2 data.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deepchroma/deepchroma.hpp"

namespace deepchroma::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Fixed context per feature, used when --context is not given.
inline double default_context(FeatureKind k) {
  switch (k) {
    case FeatureKind::deep:
      return 1.5;
    case FeatureKind::slog:
      return 1.1;
    case FeatureKind::cwlog:
      return 3.1;
    case FeatureKind::c:
      return 2.7;
    case FeatureKind::ideal:
      return 0.1;
  }
  return 0.1;
}

/// Parses a flat `key = value` file. Blank lines and lines starting with '#'
/// or ';' are skipped; keys are long flag names without the dashes.
inline std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

/// Saliency maps are stored as one row per map (context_frames x bands
/// flattened). Rows whose width is a multiple of the band count are unfolded
/// into frames; anything else is returned unchanged.
inline RowMatrix saliency_layout(const RowMatrix& m) {
  if (m.cols() <= kBands || m.cols() % kBands != 0) return m;
  const Eigen::Index frames = m.cols() / kBands;
  RowMatrix out(m.rows() * frames, kBands);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    out.middleRows(r * frames, frames) = Eigen::Map<const RowMatrix>(m.row(r).data(), frames, kBands);
  return out;
}

namespace detail {

/// Expands `--config FILE` into explicit flags for keys not already on the
/// command line, so the command line always wins over the file.
inline std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(*path);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  for (const auto& [key, value] : parse_config({reinterpret_cast<const char*>(bytes.data()), bytes.size()})) {
    if (given(key)) continue;
    if (value == "true") rest.push_back("--" + key);
    else if (value != "false") rest.push_back("--" + key + "=" + value);
  }
  return rest;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0.0;
    const auto b = tok.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    auto [ptr, ec] = std::from_chars(tok.data() + b, tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw UsageError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty list '" + s + "'");
  return out;
}

inline ChordAnnotation load_lab(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_lab({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, path.stem().string());
}

inline std::vector<std::string> groups_of(const Corpus& c) {
  std::vector<std::string> g;
  for (const auto& s : c.songs) g.push_back(s.group);
  return g;
}

/// Options shared by every command that trains a network.
struct TrainOptions {
  int max_epochs = 100;
  int patience = 20;
  std::size_t batch_size = 512;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  std::string hidden = "512,512,512";

  void add_to(CLI::App* app) {
    app->add_option("--max-epochs", max_epochs, "Epoch cap for the extractor")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--patience", patience, "Early-stopping patience in epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--dropout", dropout, "Dropout probability on hidden layers")->capture_default_str()->check(CLI::Range(0.0, 0.99));
    app->add_option("--learning-rate", learning_rate, "ADAM step size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--hidden", hidden, "Hidden layer widths, comma separated")->capture_default_str();
  }

  TrainConfig extractor_config(std::uint64_t seed) const {
    TrainConfig c;
    c.max_epochs = max_epochs;
    c.patience = patience;
    c.batch_size = batch_size;
    c.dropout_p = dropout;
    c.adam.alpha = learning_rate;
    c.seed = seed;
    return c;
  }

  std::vector<int> hidden_sizes() const {
    std::vector<int> out;
    for (double v : parse_list(hidden)) {
      if (v < 1 || v != std::floor(v)) throw UsageError("--hidden: widths must be positive integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
};

inline const FoldRotation& pick_rotation(const FoldSplit& split, int fold) {
  if (fold < 0 || fold >= split.k) throw UsageError("--fold must be in [0, " + std::to_string(split.k - 1) + "]");
  return split.rotations[static_cast<std::size_t>(fold)];
}

inline std::string format_history(const std::vector<EpochStats>& h) {
  std::string out = "epoch,train_loss,val_metric\n";
  for (const auto& e : h) out += std::to_string(e.epoch) + ',' + format_number(e.train_loss, 8) + ',' + format_number(e.val_metric, 8) + '\n';
  return out;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Deep chroma extraction, evaluation and saliency toolkit", "deepchroma"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.add_option("--config", "Flat key = value file supplying defaults for unspecified flags");

  std::uint64_t seed = 7;
  int folds = 8, fold = 0;
  std::string corpus_dir, out_path, wav_path, lab_path, model_path, feature_name_s = "deep", chord_label;
  std::optional<double> context;
  detail::TrainOptions topt;

  // synth
  SynthConfig sc;
  bool majmin = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic chord-labelled corpus");
  synth->add_option("--songs", sc.n_songs, "Number of songs")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seconds", sc.song_seconds, "Song length in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out_path, "Output directory")->required();
  synth->add_option("--overtones", sc.overtones, "Harmonics per note")->capture_default_str();
  synth->add_option("--noise-amplitude", sc.noise_amplitude, "Noise burst amplitude; 0 disables")->capture_default_str();
  synth->add_option("--noise-rate", sc.noise_rate, "Noise bursts per second")->capture_default_str();
  synth->add_option("--kick-amplitude", sc.kick_amplitude, "Kick drum amplitude; 0 disables")->capture_default_str();
  synth->add_option("--melody-amplitude", sc.melody_amplitude, "Melody amplitude; 0 disables")->capture_default_str();
  synth->add_option("--arpeggio-fraction", sc.arpeggio_fraction, "Share of broken chords")->capture_default_str();
  synth->add_option("--detune-cents", sc.detune_cents, "Per-song tuning offset range")->capture_default_str();
  synth->add_flag("--majmin-only", majmin, "Restrict the vocabulary to maj, min and N");

  // spectrogram
  bool linear = false;
  auto* spectrogram = app.add_subcommand("spectrogram", "Quarter-tone spectrogram of a WAV file as DCF1");
  spectrogram->add_option("--wav", wav_path, "Input WAV")->required();
  spectrogram->add_option("--out", out_path, "Output DCF1 file")->required();
  spectrogram->add_flag("--linear", linear, "Store S instead of log(1 + S)");

  // targets
  std::optional<std::size_t> n_frames;
  std::string labels_out;
  auto* targets = app.add_subcommand("targets", "Frame-wise chroma targets and maj/min labels from a .lab file");
  targets->add_option("--lab", lab_path, "Input annotation")->required();
  targets->add_option("--out", out_path, "Output DCF1 chroma targets")->required();
  targets->add_option("--frames", n_frames, "Frame count (default: from --wav, else the annotation end)");
  targets->add_option("--wav", wav_path, "Audio the annotation belongs to, for the frame count");
  targets->add_option("--labels-out", labels_out, "Also write DCL1 class labels");

  // train-extractor
  std::string history_out;
  auto* train_ext = app.add_subcommand("train-extractor", "Train the chroma extractor on one fold rotation");
  train_ext->add_option("--corpus", corpus_dir, "Corpus directory with manifest.txt")->required();
  train_ext->add_option("--out", out_path, "Output DCX1 model")->required();
  train_ext->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
  train_ext->add_option("--fold", fold, "Rotation whose training songs are used")->capture_default_str();
  train_ext->add_option("--context", context, "Total context in seconds (default 1.5)");
  train_ext->add_option("--seed", seed, "Random seed")->capture_default_str();
  train_ext->add_option("--history-out", history_out, "Write per-epoch loss and validation metric as CSV");
  topt.add_to(train_ext);

  // extract
  auto* extract = app.add_subcommand("extract", "Compute a feature matrix for one WAV file");
  extract->add_option("--wav", wav_path, "Input WAV")->required();
  extract->add_option("--out", out_path, "Output DCF1 file")->required();
  extract->add_option("--feature", feature_name_s, "deep | c | cwlog | slog | ideal")->capture_default_str();
  extract->add_option("--model", model_path, "Extractor model (deep)");
  extract->add_option("--lab", lab_path, "Annotation (ideal)");

  // train-classifier
  auto* train_clf = app.add_subcommand("train-classifier", "Train logistic regression on one fold rotation");
  train_clf->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  train_clf->add_option("--out", out_path, "Output DCX1 classifier")->required();
  train_clf->add_option("--feature", feature_name_s, "deep | c | cwlog | slog | ideal")->capture_default_str();
  train_clf->add_option("--context", context, "Classifier context in seconds (default per feature)");
  train_clf->add_option("--model", model_path, "Extractor model (deep)");
  train_clf->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
  train_clf->add_option("--fold", fold, "Rotation whose training songs are used")->capture_default_str();
  train_clf->add_option("--seed", seed, "Random seed")->capture_default_str();

  // evaluate
  std::string val_out;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated WCSR of one feature");
  evaluate->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  evaluate->add_option("--feature", feature_name_s, "deep | c | cwlog | slog | ideal")->capture_default_str();
  evaluate->add_option("--context", context, "Context in seconds (default per feature)");
  evaluate->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
  evaluate->add_option("--seed", seed, "Random seed")->capture_default_str();
  evaluate->add_option("--out", out_path, "Per-song test results as CSV");
  evaluate->add_option("--val-out", val_out, "Per-song validation results as CSV");
  topt.add_to(evaluate);

  // sweep-context
  std::string contexts_s = "0.1,0.3,0.5,0.7,0.9,1.1,1.5,2.1,2.7,3.1";
  auto* sweep = app.add_subcommand("sweep-context", "Validation WCSR over a range of context sizes");
  sweep->add_option("--corpus", corpus_dir, "Corpus directory")->default_str("corpus");
  sweep->add_option("--feature", feature_name_s, "deep | c | cwlog | slog | ideal")->capture_default_str();
  sweep->add_option("--contexts", contexts_s, "Context sizes in seconds, comma separated")->capture_default_str();
  sweep->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
  sweep->add_option("--seed", seed, "Random seed")->capture_default_str();
  sweep->add_option("--out", out_path, "CSV output (default: standard output)");
  topt.add_to(sweep);

  // saliency
  std::optional<std::size_t> frame_index;
  std::string profile_out;
  auto* saliency = app.add_subcommand("saliency", "Guided-backprop saliency of the extractor on one song");
  saliency->add_option("--model", model_path, "Extractor model")->required();
  saliency->add_option("--wav", wav_path, "Input WAV")->required();
  saliency->add_option("--out", out_path, "Output DCF1 map, one row of context frames x bands")->required();
  saliency->add_option("--lab", lab_path, "Annotation, required with --chord");
  saliency->add_option("--chord", chord_label, "Average over frames of this chord, seeding its template units");
  saliency->add_option("--frame", frame_index, "Single super-frame instead of an average");
  saliency->add_option("--profile-out", profile_out, "Write time and frequency aggregations as CSV");

  // render
  bool as_saliency = false;
  std::string in_path;
  auto* render = app.add_subcommand("render", "Render a DCF1 matrix as PGM (chroma) or PPM (saliency)");
  render->add_option("--in", in_path, "Input DCF1 file")->required();
  render->add_option("--out", out_path, "Output image")->required();
  render->add_flag("--saliency", as_saliency, "Diverging colour map; implied by a .ppm output");

  // report
  std::vector<std::string> result_files;
  auto* report_cmd = app.add_subcommand("report", "Compare evaluation CSVs with paired t-tests");
  report_cmd->add_option("results", result_files, "Evaluation CSV files")->required()->expected(1, -1);
  report_cmd->add_option("--out", out_path, "Also write the report to this file");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough(false);

  try {
    std::vector<std::string> args = detail::apply_config(raw_args);
    std::vector<const char*> argv{"deepchroma"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  auto log = [&](const std::string& s) { err << s << '\n'; };
  auto feature = [&] {
    try {
      return parse_feature(feature_name_s);
    } catch (const std::exception&) {
      throw UsageError("unknown feature '" + feature_name_s + "' (deep, c, cwlog, slog, ideal)");
    }
  };

  try {
    if (synth->parsed()) {
      const SynthConfig cfg = majmin ? majmin_only(sc) : sc;
      const auto entries = gen_corpus(cfg, out_path);
      out << "wrote " << entries.size() << " songs to " << out_path << '\n';
    } else if (spectrogram->parsed()) {
      const QuarterToneSpectrogram s = quarter_tone_spectrogram(load_audio(wav_path));
      const QuarterToneSpectrogram v = linear ? s : log_compress(s);
      save_dcf(out_path, v.data, static_cast<float>(v.fps));
      out << v.data.rows() << " frames x " << v.data.cols() << " bands\n";
    } else if (targets->parsed()) {
      const ChordAnnotation ann = detail::load_lab(lab_path);
      std::size_t n = 0;
      if (n_frames) n = *n_frames;
      else if (!wav_path.empty()) n = static_cast<std::size_t>(quarter_tone_spectrogram(load_audio(wav_path)).data.rows());
      else n = static_cast<std::size_t>(std::ceil(ann.end_time() * 10.0 - 1e-9));
      save_dcf(out_path, targets_matrix(frame_targets(ann, n)), 10.0f);
      if (!labels_out.empty()) write_file_atomic(labels_out, encode_dcl(label_bytes(frame_labels(ann, n))));
      out << n << " frames\n";
    } else if (train_ext->parsed()) {
      const Corpus corpus = load_corpus(corpus_dir);
      const auto groups = detail::groups_of(corpus);
      const FoldSplit split = make_folds(corpus.songs.size(), folds, seed, groups);
      const FoldRotation& rot = detail::pick_rotation(split, fold);
      const int frames = context_frames_for(context.value_or(1.5));
      const auto hidden = topt.hidden_sizes();
      const TrainResult r = train_extractor(corpus, rot.train, rot.val, frames, hidden, topt.extractor_config(seed));
      save_model(r.model, out_path);
      if (!history_out.empty()) write_text_atomic(history_out, detail::format_history(r.history));
      out << "trained " << r.history.size() << " epochs, best epoch " << r.best_epoch << ", validation bit accuracy "
          << format_number(r.best_metric, 4) << '\n';
    } else if (extract->parsed()) {
      const FeatureKind kind = feature();
      const QuarterToneSpectrogram s = quarter_tone_spectrogram(load_audio(wav_path));
      RowMatrix f;
      switch (kind) {
        case FeatureKind::deep: {
          if (model_path.empty()) throw UsageError("extract --feature deep needs --model");
          f = deep_chroma(load_model(model_path), log_compress(s)).data;
          break;
        }
        case FeatureKind::ideal: {
          if (lab_path.empty()) throw UsageError("extract --feature ideal needs --lab");
          f = ideal_chroma(detail::load_lab(lab_path), static_cast<std::size_t>(s.data.rows()), s.fps).data;
          break;
        }
        case FeatureKind::c:
          f = fold_chroma(s).data;
          break;
        case FeatureKind::cwlog:
          f = fold_chroma_weighted_log(s).data;
          break;
        case FeatureKind::slog:
          f = log_compress(s).data;
          break;
      }
      save_dcf(out_path, f, static_cast<float>(s.fps));
      out << f.rows() << " frames x " << f.cols() << " dims\n";
    } else if (train_clf->parsed()) {
      const FeatureKind kind = feature();
      if (kind == FeatureKind::deep && model_path.empty()) throw UsageError("train-classifier --feature deep needs --model");
      const Corpus corpus = load_corpus(corpus_dir);
      const FoldSplit split = make_folds(corpus.songs.size(), folds, seed, detail::groups_of(corpus));
      const FoldRotation& rot = detail::pick_rotation(split, fold);
      std::optional<MLPModel> extractor;
      if (kind == FeatureKind::deep) extractor = load_model(model_path);
      std::vector<RowMatrix> feats;
      for (const auto& s : corpus.songs) feats.push_back(song_features(s, kind, extractor ? &*extractor : nullptr));
      const int frames = kind == FeatureKind::deep ? 1 : context_frames_for(context.value_or(default_context(kind)));
      TrainConfig cc = default_classifier_config();
      cc.seed = seed;
      const MLPModel clf = train_logreg(labeled_sequences(corpus, rot.train, feats), labeled_sequences(corpus, rot.val, feats), frames, cc);
      save_model(clf, out_path);
      out << "classifier over " << clf.input_dim() << " inputs (" << frames << " frames)\n";
    } else if (evaluate->parsed()) {
      const FeatureKind kind = feature();
      const Corpus corpus = load_corpus(corpus_dir);
      const FoldSplit split = make_folds(corpus.songs.size(), folds, seed, detail::groups_of(corpus));
      ExperimentConfig cfg;
      cfg.hidden = topt.hidden_sizes();
      cfg.extractor = topt.extractor_config(seed);
      cfg.classifier.seed = seed;
      cfg.log = log;
      const CVResult r = cross_validate(corpus, kind, context.value_or(default_context(kind)), cfg, split);
      if (!out_path.empty()) write_text_atomic(out_path, format_eval_csv(r.test));
      if (!val_out.empty()) write_text_atomic(val_out, format_eval_csv(r.validation));
      out << format_eval_table(r.test);
    } else if (sweep->parsed()) {
      const FeatureKind kind = feature();
      const std::vector<double> contexts = detail::parse_list(contexts_s);
      for (double c : contexts)
        if (!(c > 0.0)) throw UsageError("--contexts: sizes must be positive");
      const Corpus corpus = load_corpus(corpus_dir.empty() ? "corpus" : corpus_dir);
      const FoldSplit split = make_folds(corpus.songs.size(), folds, seed, detail::groups_of(corpus));
      ExperimentConfig cfg;
      cfg.hidden = topt.hidden_sizes();
      cfg.extractor = topt.extractor_config(seed);
      cfg.classifier.seed = seed;
      cfg.log = log;
      std::string csv = "feature,context_s,validation_wcsr,test_wcsr\n";
      for (const SweepRow& row : sweep_context(corpus, kind, contexts, cfg, split))
        csv += std::string(feature_name(kind)) + ',' + format_number(row.context_seconds, 1) + ',' +
               format_number(row.validation_wcsr) + ',' + format_number(row.test_wcsr) + '\n';
      if (out_path.empty()) out << csv;
      else write_text_atomic(out_path, csv);
    } else if (saliency->parsed()) {
      const MLPModel model = load_model(model_path);
      const QuarterToneSpectrogram s = log_compress(quarter_tone_spectrogram(load_audio(wav_path)));
      WindowedFrames windows(static_cast<int>(model.context_frames / 2));
      windows.add(s.data);
      if (windows.dim() != model.input_dim()) throw DataError("saliency: model input does not match the spectrogram");
      std::vector<std::size_t> samples;
      std::vector<UnitSelector> selectors;
      if (frame_index) {
        if (*frame_index >= windows.size()) throw UsageError("--frame beyond the last frame");
        samples.push_back(*frame_index);
      } else if (!chord_label.empty()) {
        if (lab_path.empty()) throw UsageError("--chord needs --lab");
        const ChordSymbol target = parse_chord(chord_label);
        const ChordAnnotation ann = detail::load_lab(lab_path);
        const std::string want = to_string(target);
        for (std::size_t t = 0; t < windows.size(); ++t)
          if (to_string(symbol_at(ann, static_cast<double>(t) / s.fps)) == want) samples.push_back(t);
        if (samples.empty()) throw DataError("no frames labelled " + want);
        selectors.assign(samples.size(), UnitSelector::from_template(chord_template(target)));
      } else {
        samples.resize(windows.size());
        std::iota(samples.begin(), samples.end(), std::size_t{0});
      }
      const SaliencyMap map = average_maps(model, windows, samples, selectors);
      save_dcf(out_path, Eigen::Map<const RowMatrix>(map.data.data(), 1, map.data.size()), static_cast<float>(s.fps));
      if (!profile_out.empty()) {
        const AggregatedSaliency f = sum_over_time(map);
        const AggregatedSaliency t = sum_over_freq_signed(map);
        const auto& centers = default_band_centers();
        std::string csv = "axis,index,position,value,positive,negative\n";
        for (Eigen::Index b = 0; b < f.values.size(); ++b)
          csv += "frequency," + std::to_string(b) + ',' +
                 format_number(static_cast<std::size_t>(b) < centers.size() ? centers[static_cast<std::size_t>(b)] : 0.0, 3) + ',' +
                 format_number(f.values[b], 9) + ",,\n";
        const int half = static_cast<int>(model.context_frames / 2);
        for (Eigen::Index k = 0; k < t.values.size(); ++k)
          csv += "time," + std::to_string(k) + ',' + format_number((static_cast<double>(k) - half) / s.fps, 3) + ',' +
                 format_number(t.values[k], 9) + ',' + format_number((*t.positive)[k], 9) + ',' + format_number((*t.negative)[k], 9) + '\n';
        write_text_atomic(profile_out, csv);
      }
      out << "saliency over " << samples.size() << " super-frames\n";
    } else if (render->parsed()) {
      const FeatureFile f = load_dcf(in_path);
      const bool color = as_saliency || fs::path(out_path).extension() == ".ppm";
      const Image img = color ? render_saliency(saliency_layout(f.data)) : render_grayscale(f.data);
      write_file_atomic(out_path, encode_netpbm(img));
      out << img.width << " x " << img.height << " pixels\n";
    } else if (report_cmd->parsed()) {
      std::vector<EvalResult> results;
      for (const auto& p : result_files) {
        const auto bytes = read_file_bytes(p);
        for (auto& r : parse_eval_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()})) results.push_back(std::move(r));
      }
      const std::string text = report(results);
      if (!out_path.empty()) write_text_atomic(out_path, text);
      out << text;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace deepchroma::cli

#endif  // DEEPCHROMA_CLI_HPP
