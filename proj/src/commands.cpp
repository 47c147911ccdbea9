#include "endovqa/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "endovqa/blackmask.hpp"
#include "endovqa/config.hpp"
#include "endovqa/error.hpp"
#include "endovqa/image_io.hpp"
#include "endovqa/metrics.hpp"

namespace endovqa::cli {

namespace fs = std::filesystem;

fs::path resolve_image(const fs::path& dir, const std::string& image_id) {
    for (const char* ext : {"", ".png", ".jpg", ".jpeg"}) {
        fs::path p = dir / (image_id + ext);
        if (fs::is_regular_file(p)) return p;
    }
    throw DataError("no image for '" + image_id + "' in '" + dir.string() + "'");
}

std::vector<fusion::Sample> build_samples(std::span<const dataprep::QARecord> records, const fs::path& image_dir,
                                          const dataprep::AnswerVocabulary& vocab) {
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> slot;
    for (const auto& r : records) {
        if (slot.emplace(r.image_id, ids.size()).second) ids.push_back(r.image_id);
    }
    std::vector<std::vector<double>> features(ids.size());
    std::vector<std::string> errors(ids.size());
    const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            features[static_cast<std::size_t>(i)] =
                fusion::image_features(load_image(resolve_image(image_dir, ids[static_cast<std::size_t>(i)])));
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw DataError(e);
    }

    std::vector<fusion::Sample> samples;
    samples.reserve(records.size());
    for (const auto& r : records) {
        fusion::Sample s;
        s.question_id = r.question_id;
        s.input = fusion::concat_features(features[slot.at(r.image_id)], fusion::question_features(r.question_id));
        const auto bits = dataprep::binarize(r.answers, vocab);
        s.target.assign(bits.begin(), bits.end());
        samples.push_back(std::move(s));
    }
    return samples;
}

namespace {

std::vector<std::string> question_names() {
    const auto& q = dataprep::standard_questions();
    return {q.begin(), q.end()};
}

struct ConfigFlags {
    std::string config_file;
    std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_file, "key=value file applied over the defaults");
    cmd->add_option("--set", flags.overrides, "key=value override, repeatable; applied after --config");
}

RunConfig resolve_config(const ConfigFlags& flags) {
    RunConfig cfg;
    if (!flags.config_file.empty()) cfg.load_file(flags.config_file);
    for (const auto& kv : flags.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        cfg.set(dataprep::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    return cfg;
}

// ---------------------------------------------------------------- enhance

struct EnhanceArgs {
    std::string in_dir;
    std::string out_dir;
    std::string dump_dir;
    std::string manifest;
    int threshold = -1;
    double sigma = 0.0;
    bool black_box = false;
    int jobs = 1;
    ConfigFlags config;
};

struct EnhanceOutcome {
    bool ok = false;
    std::string message;
    blackmask::StageTimings timings;
};

std::map<std::string, bool> black_box_flags(const std::string& manifest) {
    std::map<std::string, bool> flags;
    if (manifest.empty()) return flags;
    for (const auto& e : dataprep::read_image_manifest(manifest)) {
        flags[e.image_id] = e.has_black_box;
        if (!e.path.empty()) flags[fs::path(e.path).filename().string()] = e.has_black_box;
    }
    return flags;
}

void dump_stages(const blackmask::EnhanceStages& st, const fs::path& dir, const std::string& stem) {
    save_image(st.grayscale, dir / (stem + "_1_gray.png"));
    save_mask(st.highlight_mask, dir / (stem + "_2_mask.png"));
    save_image(st.feathered.quantized(), dir / (stem + "_3_feathered.png"));
    save_image(st.blurred, dir / (stem + "_4_blurred.png"));
    save_image(st.restored, dir / (stem + "_5_restored.png"));
    save_image(st.highlights_removed, dir / (stem + "_6_inpainted.png"));
    save_mask(st.frame_mask, dir / (stem + "_7_frame_mask.png"));
    save_image(st.final_image, dir / (stem + "_8_final.png"));
}

int cmd_enhance(const EnhanceArgs& args, CLI::App* cmd, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve_config(args.config);
    if (cmd->count("--threshold")) cfg.enhance.highlight.threshold = args.threshold;
    if (cmd->count("--sigma")) cfg.enhance.blackmask.sigma = args.sigma;
    if (args.black_box) cfg.enhance.blackmask.has_black_box = true;
    cfg.validate();
    if (args.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");

    if (!fs::is_directory(args.in_dir)) throw DataError("input directory '" + args.in_dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.in_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        err << "warning: no files in '" << args.in_dir << "'\n";
        out << "enhanced 0 of 0 images\n";
        return kOk;
    }
    fs::create_directories(args.out_dir);
    if (!args.dump_dir.empty()) fs::create_directories(args.dump_dir);
    const auto per_image_box = black_box_flags(args.manifest);

    std::vector<EnhanceOutcome> results(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(args.jobs)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const fs::path& file = files[static_cast<std::size_t>(i)];
        auto& res = results[static_cast<std::size_t>(i)];
        try {
            const RasterImage img = load_image(file);
            blackmask::EnhanceConfig ecfg = cfg.enhance;
            for (const auto& key : {file.filename().string(), file.stem().string()}) {
                const auto it = per_image_box.find(key);
                if (it != per_image_box.end()) {
                    ecfg.blackmask.has_black_box = ecfg.blackmask.has_black_box || it->second;
                    break;
                }
            }
            const auto stages = blackmask::enhance_with_stages(img, ecfg);
            save_image(stages.final_image, fs::path(args.out_dir) / file.filename());
            if (!args.dump_dir.empty()) dump_stages(stages, args.dump_dir, file.stem().string());
            res.timings = stages.timings;
            res.ok = true;
        } catch (const std::exception& e) {
            res.message = e.what();
        }
    }

    std::size_t ok = 0;
    blackmask::StageTimings total;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!r.ok) {
            err << "warning: skipped '" << files[i].string() << "': " << r.message << '\n';
            continue;
        }
        ++ok;
        total.detect += r.timings.detect;
        total.restore += r.timings.restore;
        total.telea += r.timings.telea;
        total.blackmask += r.timings.blackmask;
    }
    out << "enhanced " << ok << " of " << files.size() << " images" << std::fixed << std::setprecision(1)
        << "; stage ms: detect=" << total.detect << " restore=" << total.restore << " telea=" << total.telea
        << " blackmask=" << total.blackmask << '\n';
    return ok == 0 ? kDataError : kOk;
}

// ---------------------------------------------------------------- split / vocab

struct SplitArgs {
    std::string manifest;
    std::string qa;
    std::string out_dir;
    std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& args, std::ostream& out, std::ostream& err) {
    const auto entries = dataprep::read_image_manifest(args.manifest);
    const auto split = dataprep::stratified_split(entries, args.seed);
    for (const auto& w : split.warnings) err << "warning: " << w << '\n';
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    dataprep::write_image_manifest(split.train, dir / "train.jsonl");
    dataprep::write_image_manifest(split.val, dir / "val.jsonl");
    dataprep::write_image_manifest(split.test, dir / "test.jsonl");
    out << "split " << entries.size() << " images: train=" << split.train.size() << " val=" << split.val.size()
        << " test=" << split.test.size() << '\n';

    if (!args.qa.empty()) {
        const auto records = dataprep::read_qa_manifest(args.qa);
        const auto index = dataprep::index_answers(records);
        const auto& questions = dataprep::standard_questions();
        const std::pair<const char*, const std::vector<dataprep::ImageEntry>*> parts[] = {
            {"train", &split.train}, {"val", &split.val}, {"test", &split.test}};
        out << "qa records:";
        for (const auto& [name, part] : parts) {
            const auto qa = dataprep::expand_qa(*part, questions, &index);
            dataprep::write_qa_manifest(qa, dir / (std::string(name) + "_qa.jsonl"));
            out << ' ' << name << '=' << qa.size();
        }
        out << '\n';
    }
    return kOk;
}

int cmd_vocab(const std::vector<std::string>& qa_files, const std::string& out_file, std::ostream& out) {
    std::vector<dataprep::QARecord> all;
    for (const auto& f : qa_files) {
        auto recs = dataprep::read_qa_manifest(f);
        all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    const auto vocab = dataprep::build_vocabulary(all);
    if (vocab.empty()) throw DataError("no answers found; vocabulary would be empty");
    dataprep::write_vocabulary(vocab, out_file);
    out << "vocabulary of " << vocab.size() << " answers from " << all.size() << " records\n";
    return kOk;
}

// ---------------------------------------------------------------- train / eval / report

struct TrainArgs {
    std::string train_file, val_file, images, vocab, out, history;
    int epochs = 0, batch_size = 0, hidden = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
    ConfigFlags config;
};

int cmd_train(const TrainArgs& args, CLI::App* cmd, std::ostream& out) {
    RunConfig cfg = resolve_config(args.config);
    if (cmd->count("--epochs")) cfg.train.epochs = args.epochs;
    if (cmd->count("--batch-size")) cfg.train.batch_size = args.batch_size;
    if (cmd->count("--hidden")) cfg.train.hidden = args.hidden;
    if (cmd->count("--lr")) cfg.train.lr0 = args.lr;
    if (cmd->count("--seed")) cfg.train.seed = args.seed;
    cfg.validate();

    const auto vocab = dataprep::read_vocabulary(args.vocab);
    if (vocab.empty()) throw DataError("vocabulary '" + args.vocab + "' is empty");
    const auto train_samples = build_samples(dataprep::read_qa_manifest(args.train_file), args.images, vocab);
    const auto val_samples = build_samples(dataprep::read_qa_manifest(args.val_file), args.images, vocab);
    if (train_samples.empty() || val_samples.empty()) throw DataError("training and validation sets must be non-empty");

    auto model = fusion::FusionModel::initialized(static_cast<int>(vocab.size()), cfg.train.seed + 1, cfg.train.hidden);
    const auto result = fusion::train(std::move(model), train_samples, val_samples, cfg.train);
    for (const auto& r : result.history) {
        out << "epoch " << r.epoch << std::scientific << std::setprecision(4) << " lr=" << r.lr << std::fixed
            << std::setprecision(4) << " train_loss=" << r.train_loss << " val_loss=" << r.val_loss
            << " val_acc=" << r.val.accuracy << " val_f1=" << r.val.f1 << '\n';
    }
    fusion::save_checkpoint(result.best, vocab.hash(), args.out);
    const std::string history = args.history.empty() ? args.out + ".history.csv" : args.history;
    fusion::write_history_csv(result.history, history);
    out << "best epoch " << result.best_epoch << " (val_f1=" << std::fixed << std::setprecision(4)
        << result.history[static_cast<std::size_t>(result.best_epoch)].val.f1 << "); checkpoint " << args.out << '\n';
    return kOk;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f << text;
}

struct EvalArgs {
    std::string ckpt, test_file, images, vocab, report, pred_out;
    double threshold = 0.5;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
    const auto vocab = dataprep::read_vocabulary(args.vocab);
    const auto model = fusion::load_checkpoint(args.ckpt, vocab.hash());
    const auto records = dataprep::read_qa_manifest(args.test_file);
    if (records.empty()) throw DataError("test set '" + args.test_file + "' is empty");
    const auto samples = build_samples(records, args.images, vocab);
    const auto ev = fusion::evaluate(model, samples, args.threshold);

    const auto names = question_names();
    const std::string table = metrics::format_table(ev.report, names);
    out << table;
    write_text(args.report, table);
    write_text(args.report + ".json", metrics::to_json(ev.report, names) + "\n");

    if (!args.pred_out.empty()) {
        std::vector<dataprep::QARecord> preds;
        preds.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            dataprep::QARecord p = records[i];
            p.answers = fusion::predict(model, samples[i].input, vocab, args.threshold);
            preds.push_back(std::move(p));
        }
        dataprep::write_qa_manifest(preds, args.pred_out);
    }
    return kOk;
}

struct ReportArgs {
    std::string pred, truth, vocab, json;
};

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    const auto vocab = dataprep::read_vocabulary(args.vocab);
    const auto truth = dataprep::read_qa_manifest(args.truth);
    const auto pred_index = dataprep::index_answers(dataprep::read_qa_manifest(args.pred));

    std::vector<metrics::ScoredSample> scored;
    scored.reserve(truth.size());
    std::size_t missing = 0;
    for (const auto& t : truth) {
        const auto it = pred_index.find({t.image_id, t.question_id});
        const dataprep::AnswerSet empty;
        if (it == pred_index.end()) ++missing;
        const auto& p = it == pred_index.end() ? empty : it->second;
        try {
            scored.push_back({t.question_id, metrics::sample_score(dataprep::binarize(t.answers, vocab),
                                                                   dataprep::binarize(p, vocab))});
        } catch (const std::invalid_argument& e) {
            throw DataError(std::string(e.what()) + " (image '" + t.image_id + "', question " +
                            std::to_string(t.question_id) + ")");
        }
    }
    if (missing) err << "warning: " << missing << " truth record(s) had no prediction; scored as empty\n";
    if (scored.empty()) throw DataError("no truth records to score");
    const auto report = metrics::aggregate(scored);
    const auto names = question_names();
    out << metrics::format_table(report, names);
    if (!args.json.empty()) write_text(args.json, metrics::to_json(report, names) + "\n");
    return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Endoscopy image enhancement and VQA experiment tool"};
    app.require_subcommand(1);
    app.footer("Settings precedence: defaults, then --config FILE, then --set key=value, then dedicated flags.\n"
               "Config keys: " + [] {
                   std::string s;
                   for (const auto& k : RunConfig::keys()) s += (s.empty() ? "" : ", ") + k;
                   return s;
               }() + "\nExit codes: 0 ok, 1 usage/invalid settings, 2 data error.");

    EnhanceArgs enhance;
    auto* c_enh = app.add_subcommand("enhance", "Remove specular highlights and the black frame from every image in a directory");
    c_enh->add_option("--in", enhance.in_dir, "Input image directory")->required();
    c_enh->add_option("--out", enhance.out_dir, "Output directory (same filenames, PNG content)")->required();
    c_enh->add_option("--threshold", enhance.threshold, "Highlight gray threshold [0,255]");
    c_enh->add_option("--sigma", enhance.sigma, "Frame circle radius multiplier (> 1)");
    c_enh->add_flag("--black-box", enhance.black_box, "Preserve a bottom-left text box in every image");
    c_enh->add_option("--manifest", enhance.manifest, "Image manifest supplying per-image has_black_box");
    c_enh->add_option("--dump-stages", enhance.dump_dir, "Write per-stage intermediates here");
    c_enh->add_option("--jobs", enhance.jobs, "Images processed concurrently");
    add_config_flags(c_enh, enhance.config);

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Stratified 8:1:1 train/val/test split of an image manifest");
    c_split->add_option("--manifest", split.manifest, "Image manifest (JSONL)")->required();
    c_split->add_option("--seed", split.seed, "Shuffle seed")->required();
    c_split->add_option("--out", split.out_dir, "Output directory for train/val/test.jsonl")->required();
    c_split->add_option("--qa", split.qa, "QA manifest; also writes {train,val,test}_qa.jsonl with 18 records per image");

    std::vector<std::string> vocab_in;
    std::string vocab_out;
    auto* c_vocab = app.add_subcommand("vocab", "Build the sorted answer vocabulary from QA manifests");
    c_vocab->add_option("--qa", vocab_in, "QA manifest(s)")->required();
    c_vocab->add_option("--out", vocab_out, "Vocabulary text file")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train the fusion classifier and keep the best-F1 epoch");
    c_train->add_option("--train", train.train_file, "Training QA manifest")->required();
    c_train->add_option("--val", train.val_file, "Validation QA manifest")->required();
    c_train->add_option("--images", train.images, "Image directory")->required();
    c_train->add_option("--vocab", train.vocab, "Vocabulary file")->required();
    c_train->add_option("--out", train.out, "Checkpoint path")->required();
    c_train->add_option("--history", train.history, "History CSV (default: <out>.history.csv)");
    c_train->add_option("--epochs", train.epochs, "Epochs");
    c_train->add_option("--batch-size", train.batch_size, "Minibatch size");
    c_train->add_option("--lr", train.lr, "Initial learning rate");
    c_train->add_option("--hidden", train.hidden, "Hidden layer width");
    c_train->add_option("--seed", train.seed, "Seed for initialization, shuffling and dropout");
    add_config_flags(c_train, train.config);

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Score a checkpoint on a QA manifest");
    c_eval->add_option("--ckpt", eval.ckpt, "Checkpoint")->required();
    c_eval->add_option("--test", eval.test_file, "Test QA manifest")->required();
    c_eval->add_option("--images", eval.images, "Image directory")->required();
    c_eval->add_option("--vocab", eval.vocab, "Vocabulary file")->required();
    c_eval->add_option("--report", eval.report, "Text report path; JSON goes to <report>.json")->required();
    c_eval->add_option("--pred-out", eval.pred_out, "Write predictions as a QA manifest");
    c_eval->add_option("--pred-threshold", eval.threshold, "Probability threshold (inclusive)");

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Score externally produced predictions against ground truth");
    c_report->add_option("--pred", report.pred, "Predicted QA manifest")->required();
    c_report->add_option("--truth", report.truth, "Ground-truth QA manifest")->required();
    c_report->add_option("--vocab", report.vocab, "Vocabulary file")->required();
    c_report->add_option("--json", report.json, "Also write the report as JSON");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*c_enh) return cmd_enhance(enhance, c_enh, out, err);
        if (*c_split) return cmd_split(split, out, err);
        if (*c_vocab) return cmd_vocab(vocab_in, vocab_out, out);
        if (*c_train) return cmd_train(train, c_train, out);
        if (*c_eval) return cmd_eval(eval, out);
        if (*c_report) return cmd_report(report, out, err);
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace endovqa::cli
