// Command-line surface for the toolkit. Exit codes: 0 success, 1 data or
// runtime error, 2 usage error. Diagnostics go to stderr; data goes to the
// files named by flags.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xlda/augment.hpp"
#include "xlda/corpus.hpp"
#include "xlda/harness.hpp"
#include "xlda/report.hpp"
#include "xlda/span_align.hpp"
#include "xlda/synthetic.hpp"

using namespace xlda;

namespace {

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out.push_back(' ');
        out += argv[i];
    }
    return out;
}

std::string default_manifest_path(const std::string& primary_out) {
    return primary_out + ".manifest.json";
}

// Options shared by the dataset-building commands.
struct PolicyOptions {
    std::string mode = "both";
    bool include_monolingual = false;
    std::string balance = "all";
    size_t sample_size = 0;
    bool sample_size_set = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "Cross direction policy: both|single-random")
            ->check(CLI::IsMember({"both", "single-random"}))
            ->capture_default_str();
        cmd->add_flag("--include-monolingual", include_monolingual,
                      "Also emit the target-monolingual example per id");
        cmd->add_option("--balance", balance, "Multi-augmentor composition: all|uniform-sample")
            ->check(CLI::IsMember({"all", "uniform-sample"}))
            ->capture_default_str();
        cmd->add_option("--sample-size", sample_size, "Examples to draw under uniform-sample")
            ->each([this](const std::string&) { sample_size_set = true; });
    }

    CompositionPolicy to_policy(uint64_t seed) const {
        CompositionPolicy p;
        p.direction_mode = mode == "both" ? DirectionMode::both : DirectionMode::single_random;
        p.include_monolingual = include_monolingual;
        p.balance = balance == "all" ? BalanceMode::all : BalanceMode::uniform_sample;
        if (sample_size_set) p.sample_size = sample_size;
        p.seed = seed;
        return p;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["mode"] = mode;
        j["include_monolingual"] = include_monolingual;
        j["balance"] = balance;
        if (sample_size_set) j["sample_size"] = sample_size;
        return j;
    }
};

struct TrainerOptions {
    size_t feature_dim = size_t{1} << 18;
    std::vector<int> ngram_orders = {1, 2};
    size_t epochs = 3;
    size_t batch_size = 32;
    double peak_lr = 0.1;
    double warmup = 0.10;
    std::string kind = "builtin";
    std::string command;

    void attach(CLI::App* cmd) {
        cmd->add_option("--feature-dim", feature_dim, "Hashed feature count (power of two)")
            ->capture_default_str();
        cmd->add_option("--ngrams", ngram_orders, "N-gram orders over whitespace tokens")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--epochs", epochs)->capture_default_str();
        cmd->add_option("--batch-size", batch_size)->capture_default_str();
        cmd->add_option("--lr", peak_lr, "Peak learning rate")->capture_default_str();
        cmd->add_option("--warmup", warmup, "Warmup fraction of total updates")
            ->capture_default_str();
        cmd->add_option("--trainer", kind, "builtin|external")
            ->check(CLI::IsMember({"builtin", "external"}))
            ->capture_default_str();
        cmd->add_option("--trainer-cmd", command,
                        "Command for the external trainer subprocess protocol");
    }

    TrainerSpec to_spec(uint64_t seed) const {
        TrainerSpec s;
        s.kind = kind == "builtin" ? TrainerKind::builtin_linear : TrainerKind::external;
        s.feature_dim = feature_dim;
        s.ngram_orders = std::set<int>(ngram_orders.begin(), ngram_orders.end());
        s.epochs = epochs;
        s.batch_size = batch_size;
        s.peak_lr = peak_lr;
        s.warmup_fraction = warmup;
        s.seed = seed;
        s.external_command = command;
        s.check();
        return s;
    }
};

std::vector<LanguageId> parse_languages(const std::vector<std::string>& codes) {
    std::vector<LanguageId> out;
    for (const auto& c : codes) out.emplace_back(c);
    return out;
}

AlignedCorpus load_corpus_checked(const std::string& path) {
    AlignedCorpus c = load_nli_jsonl(path);
    if (c.size() == 0) throw Error(path + ": corpus is empty");
    return c;
}

nlohmann::ordered_json report_to_json(const ValidationReport& rep) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json counts;
    for (const auto& [lang, n] : rep.per_language_counts) counts[lang.str()] = n;
    j["per_language_counts"] = counts;
    nlohmann::ordered_json mism = nlohmann::ordered_json::array();
    for (const auto& m : rep.label_mismatches) {
        nlohmann::ordered_json e;
        e["id"] = m.id;
        nlohmann::ordered_json versions;
        for (const auto& [lang, label] : m.versions) versions[lang.str()] = label_name(label);
        e["labels"] = versions;
        mism.push_back(e);
    }
    j["label_mismatches"] = mism;
    nlohmann::ordered_json missing = nlohmann::ordered_json::array();
    for (const auto& [id, lang] : rep.missing) {
        nlohmann::ordered_json e;
        e["id"] = id;
        e["lang"] = lang.str();
        missing.push_back(e);
    }
    j["missing"] = missing;
    j["duplicate_ids"] = rep.duplicate_ids;
    j["fully_aligned"] = rep.fully_aligned();
    return j;
}

nlohmann::ordered_json cells_to_json(const std::vector<GridCell>& cells) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json e;
        e["target"] = c.target.str();
        e["augmentor"] = c.augmentor.str();
        std::ostringstream seed_hex;
        seed_hex << std::hex << c.seed;
        e["seed"] = seed_hex.str();
        e["accuracy"] = c.result.accuracy();
        e["correct"] = c.result.correct;
        e["n_eval"] = c.result.n_eval;
        e["train_size"] = c.result.train_size;
        e["wall_ms"] = c.millis;
        arr.push_back(e);
    }
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xlda: cross-lingual data augmentation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value defaults for trainer/policy options");
    std::string command_line = join_args(argc, argv);

    // ---- ingest ----------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Convert and merge corpora into canonical JSONL");
    std::vector<std::string> ingest_jsonl;
    std::vector<std::string> ingest_tsv;
    std::string ingest_default_lang;
    std::string col_premise = "sentence1", col_hypothesis = "sentence2", col_label = "gold_label";
    std::string col_id;
    std::string ingest_out;
    ingest->add_option("--jsonl", ingest_jsonl, "Input JSONL corpus files (repeatable)");
    ingest->add_option("--tsv", ingest_tsv, "TSV inputs as LANG=PATH (repeatable)");
    ingest->add_option("--default-lang", ingest_default_lang,
                       "Language for JSONL records lacking a lang field");
    ingest->add_option("--col-premise", col_premise)->capture_default_str();
    ingest->add_option("--col-hypothesis", col_hypothesis)->capture_default_str();
    ingest->add_option("--col-label", col_label)->capture_default_str();
    ingest->add_option("--col-id", col_id, "Optional id column (row order otherwise)");
    ingest->add_option("--out", ingest_out, "Canonical corpus JSONL")->required();
    ingest->callback([&] {
        if (ingest_jsonl.empty() && ingest_tsv.empty())
            throw CLI::ValidationError("ingest", "need at least one --jsonl or --tsv input");
        RunManifest manifest;
        manifest.command_line = command_line;
        AlignedCorpus corpus;
        for (const auto& path : ingest_jsonl) {
            std::optional<LanguageId> dl;
            if (!ingest_default_lang.empty()) dl = LanguageId(ingest_default_lang);
            corpus = merge(corpus, load_nli_jsonl(path, dl));
            manifest.add_input(path);
        }
        std::map<std::string, TsvRole> columns;
        columns[col_premise] = TsvRole::premise;
        columns[col_hypothesis] = TsvRole::hypothesis;
        columns[col_label] = TsvRole::label;
        if (!col_id.empty()) columns[col_id] = TsvRole::id;
        for (const auto& spec : ingest_tsv) {
            auto eq = spec.find('=');
            if (eq == std::string::npos) throw Error("--tsv expects LANG=PATH, got '" + spec + "'");
            LanguageId lang(spec.substr(0, eq));
            std::string path = spec.substr(eq + 1);
            corpus = merge(corpus, load_nli_tsv(path, lang, columns));
            manifest.add_input(path);
        }
        write_nli_jsonl(corpus, ingest_out);
        manifest.config_digest = fnv1a64(command_line);
        manifest.stamp_now();
        nlohmann::ordered_json extra;
        extra["ids"] = corpus.size();
        extra["languages"] = corpus.languages().size();
        write_manifest(manifest, default_manifest_path(ingest_out), extra);
        std::cerr << "ingested " << corpus.size() << " ids across " << corpus.languages().size()
                  << " languages -> " << ingest_out << "\n";
    });

    // ---- validate --------------------------------------------------------
    auto* validate_cmd = app.add_subcommand("validate", "Audit corpus alignment");
    std::string validate_in, validate_out;
    bool validate_strict = false;
    validate_cmd->add_option("--in", validate_in, "Corpus JSONL")->required();
    validate_cmd->add_option("--out", validate_out, "Write the report as JSON");
    validate_cmd->add_flag("--strict", validate_strict, "Exit 1 unless fully aligned");
    validate_cmd->callback([&] {
        AlignedCorpus corpus = load_nli_jsonl(validate_in);
        ValidationReport rep = validate(corpus);
        auto j = report_to_json(rep);
        std::cout << j.dump(2) << "\n";
        if (!validate_out.empty()) {
            std::ofstream out(validate_out, std::ios::binary);
            if (!out) throw Error("cannot write " + validate_out);
            out << j.dump(2) << "\n";
        }
        if (validate_strict && !rep.fully_aligned()) throw Error("corpus is not fully aligned");
    });

    // ---- augment ---------------------------------------------------------
    auto* augment = app.add_subcommand("augment", "Materialize a training set");
    std::string aug_in, aug_setting, aug_target, aug_out;
    std::vector<std::string> aug_augmentors, aug_languages;
    uint64_t aug_seed = 0;
    PolicyOptions aug_policy;
    augment->add_option("--in", aug_in, "Aligned corpus JSONL")->required();
    augment->add_option("--setting", aug_setting, "mono|dmt|xlda-pair|xlda-multi")
        ->required()
        ->check(CLI::IsMember({"mono", "dmt", "xlda-pair", "xlda-multi"}));
    augment->add_option("--target", aug_target, "Target language");
    augment->add_option("--augmentor", aug_augmentors, "Augmentor language (repeatable)");
    augment->add_option("--languages", aug_languages, "Language list for dmt")->delimiter(',');
    augment->add_option("--seed", aug_seed)->capture_default_str();
    aug_policy.attach(augment);
    augment->add_option("--out", aug_out, "Output dataset JSONL")->required();
    augment->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.global_seed = aug_seed;
        manifest.add_input(aug_in);
        AlignedCorpus corpus = load_corpus_checked(aug_in);
        CompositionPolicy policy = aug_policy.to_policy(aug_seed);
        AugmentedDataset ds;
        if (aug_setting == "mono") {
            if (aug_target.empty()) throw Error("--setting mono requires --target");
            ds = build_monolingual(corpus, LanguageId(aug_target));
        } else if (aug_setting == "dmt") {
            auto langs = parse_languages(aug_languages.empty() ? aug_augmentors : aug_languages);
            ds = build_dmt(corpus, langs, policy);
        } else if (aug_setting == "xlda-pair") {
            if (aug_target.empty() || aug_augmentors.size() != 1)
                throw Error("--setting xlda-pair requires --target and exactly one --augmentor");
            ds = build_xlda_pairwise(corpus, LanguageId(aug_target), LanguageId(aug_augmentors[0]),
                                     policy);
        } else {
            if (aug_target.empty() || aug_augmentors.empty())
                throw Error("--setting xlda-multi requires --target and --augmentor entries");
            ds = build_xlda_multi(corpus, LanguageId(aug_target), parse_languages(aug_augmentors),
                                  policy);
        }
        write_dataset(ds, aug_out);
        manifest.config_digest = fnv1a64(aug_policy.to_json().dump());
        manifest.stamp_now();
        nlohmann::ordered_json extra;
        extra["setting"] = aug_setting;
        extra["examples"] = ds.size();
        extra["skipped_ids"] = ds.skipped_ids;
        extra["policy"] = aug_policy.to_json();
        write_manifest(manifest, default_manifest_path(aug_out), extra);
        std::cerr << "wrote " << ds.size() << " examples (" << ds.skipped_ids << " ids skipped) -> "
                  << aug_out << "\n";
    });

    // ---- align-squad -----------------------------------------------------
    auto* align = app.add_subcommand("align-squad", "Two-phase answer span recovery");
    std::string squad_in, align_dest, align_source = "en";
    std::string translator_kind = "identity", translator_cmd;
    std::string align_marker = kDefaultMarker;
    bool include_marker_phase = false;
    std::string align_out, align_report;
    align->add_option("--squad", squad_in, "SQuAD v1.1 JSON")->required();
    align->add_option("--dest", align_dest, "Destination language")->required();
    align->add_option("--source", align_source)->capture_default_str();
    align->add_option("--translator", translator_kind,
                      "identity|word-cipher|chunk-shuffle|subprocess")
        ->check(CLI::IsMember({"identity", "word-cipher", "chunk-shuffle", "subprocess"}))
        ->capture_default_str();
    align->add_option("--translator-cmd", translator_cmd, "Command for --translator subprocess");
    align->add_option("--marker", align_marker, "Span marker symbol")->capture_default_str();
    align->add_flag("--include-marker-phase", include_marker_phase,
                    "Keep marker-recovered examples in the training output");
    align->add_option("--out", align_out, "Aligned training JSONL")->required();
    align->add_option("--report", align_report, "Recovery statistics CSV");
    align->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.add_input(squad_in);
        SquadLoadResult loaded = load_squad_json(squad_in);
        if (loaded.skipped > 0)
            std::cerr << "warning: skipped " << loaded.skipped
                      << " examples with inconsistent answer offsets\n";
        std::unique_ptr<Translator> translator;
        if (translator_kind == "subprocess") {
            if (translator_cmd.empty())
                throw Error("--translator subprocess requires --translator-cmd");
            translator = std::make_unique<SubprocessTranslator>(translator_cmd);
        } else {
            translator = make_mock_translator(translator_kind, align_marker);
        }
        auto [records, stats] =
            align_qa_dataset(loaded.examples, *translator, LanguageId(align_dest), align_marker,
                             include_marker_phase, LanguageId(align_source));
        write_aligned_jsonl(records, align_out, include_marker_phase);
        if (!align_report.empty()) write_recovery_report({stats}, align_report);
        manifest.config_digest = fnv1a64(translator_kind + "\x1f" + align_marker);
        manifest.stamp_now();
        nlohmann::ordered_json extra;
        extra["translator"] = translator->name();
        extra["total"] = stats.total;
        extra["exact_count"] = stats.exact_count;
        extra["marker_count"] = stats.marker_count;
        extra["unrecovered_count"] = stats.unrecovered_count;
        write_manifest(manifest, default_manifest_path(align_out), extra);
        std::cerr << "recovered " << stats.exact_count << " exact + " << stats.marker_count
                  << " marked of " << stats.total << " -> " << align_out << "\n";
    });

    // ---- pairwise --------------------------------------------------------
    auto* pairwise = app.add_subcommand("pairwise", "Run the pairwise augmentor grid");
    std::string pw_train, pw_eval, pw_matrix_out, pw_heatmap_out;
    std::vector<std::string> pw_languages;
    uint64_t pw_seed = 0;
    size_t pw_jobs = 1;
    TrainerOptions pw_trainer;
    PolicyOptions pw_policy;
    pairwise->add_option("--train", pw_train, "Aligned training corpus JSONL")->required();
    pairwise->add_option("--eval", pw_eval, "Aligned eval corpus JSONL")->required();
    pairwise->add_option("--languages", pw_languages, "Languages to evaluate")
        ->required()
        ->delimiter(',');
    pairwise->add_option("--seed", pw_seed)->capture_default_str();
    pairwise->add_option("--jobs", pw_jobs, "Worker threads")->envname("XLDA_JOBS");
    pw_trainer.attach(pairwise);
    pw_policy.attach(pairwise);
    pairwise->add_option("--matrix", pw_matrix_out, "Output matrix CSV")->required();
    pairwise->add_option("--heatmap", pw_heatmap_out, "Optional plot-ready heatmap CSV");
    pairwise->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.global_seed = pw_seed;
        manifest.add_input(pw_train);
        manifest.add_input(pw_eval);
        AlignedCorpus train = load_corpus_checked(pw_train);
        AlignedCorpus eval = load_corpus_checked(pw_eval);
        TrainerSpec spec = pw_trainer.to_spec(pw_seed);
        CompositionPolicy policy = pw_policy.to_policy(pw_seed);
        GridRun run = pairwise_grid(train, eval, parse_languages(pw_languages), spec, policy, pw_jobs);
        write_matrix_csv(run.matrix, pw_matrix_out);
        if (!pw_heatmap_out.empty()) emit_heatmap_csv(run.matrix, pw_heatmap_out);
        manifest.config_digest =
            fnv1a64(spec.to_json().dump() + pw_policy.to_json().dump());
        manifest.stamp_now();
        nlohmann::ordered_json extra;
        extra["spec"] = spec.to_json();
        extra["policy"] = pw_policy.to_json();
        extra["cells"] = cells_to_json(run.cells);
        write_manifest(manifest, default_manifest_path(pw_matrix_out), extra);
        std::cerr << "grid of " << run.cells.size() << " cells -> " << pw_matrix_out << "\n";
    });

    // ---- greedy ----------------------------------------------------------
    auto* greedy = app.add_subcommand("greedy", "Greedy augmentor schedule and curve");
    std::string gr_train, gr_eval, gr_target, gr_matrix_in, gr_schedule_out, gr_curve_out;
    uint64_t gr_seed = 0;
    size_t gr_jobs = 1;
    TrainerOptions gr_trainer;
    PolicyOptions gr_policy;
    greedy->add_option("--train", gr_train, "Aligned training corpus JSONL")->required();
    greedy->add_option("--eval", gr_eval, "Aligned eval corpus JSONL")->required();
    greedy->add_option("--target", gr_target, "Target language")->required();
    greedy->add_option("--matrix", gr_matrix_in, "Pairwise matrix CSV")->required();
    greedy->add_option("--seed", gr_seed)->capture_default_str();
    greedy->add_option("--jobs", gr_jobs, "Worker threads")->envname("XLDA_JOBS");
    gr_trainer.attach(greedy);
    gr_policy.attach(greedy);
    greedy->add_option("--schedule", gr_schedule_out, "Output schedule JSON")->required();
    greedy->add_option("--curve", gr_curve_out, "Output curve CSV")->required();
    greedy->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.global_seed = gr_seed;
        manifest.add_input(gr_train);
        manifest.add_input(gr_eval);
        manifest.add_input(gr_matrix_in);
        AlignedCorpus train = load_corpus_checked(gr_train);
        AlignedCorpus eval = load_corpus_checked(gr_eval);
        PairwiseMatrix matrix = load_matrix_csv(gr_matrix_in);
        TrainerSpec spec = gr_trainer.to_spec(gr_seed);
        CompositionPolicy policy = gr_policy.to_policy(gr_seed);
        GreedyRun run =
            greedy_curve_run(train, eval, LanguageId(gr_target), matrix, spec, policy, gr_jobs);
        {
            std::ofstream out(gr_schedule_out, std::ios::binary);
            if (!out) throw Error("cannot write " + gr_schedule_out);
            out << schedule_to_json(run.schedule).dump(2) << "\n";
        }
        write_curve_csv(run.curve, gr_curve_out);
        manifest.config_digest = fnv1a64(spec.to_json().dump() + gr_policy.to_json().dump());
        manifest.stamp_now();
        nlohmann::ordered_json extra;
        extra["spec"] = spec.to_json();
        extra["policy"] = gr_policy.to_json();
        extra["points"] = cells_to_json(run.points);
        extra["best_k"] = run.best_k;
        extra["best_accuracy"] = run.best_accuracy;
        write_manifest(manifest, default_manifest_path(gr_curve_out), extra);
        std::cerr << "curve with " << run.curve.points.size() << " points, best k=" << run.best_k
                  << " -> " << gr_curve_out << "\n";
    });

    // ---- report ----------------------------------------------------------
    auto* report = app.add_subcommand("report", "Plot-ready CSV emission from a matrix");
    std::string rp_matrix, rp_heatmap, rp_bleu, rp_scatter;
    report->add_option("--matrix", rp_matrix, "Pairwise matrix CSV")->required();
    report->add_option("--heatmap", rp_heatmap, "Emit heatmap CSV here");
    report->add_option("--bleu", rp_bleu, "BLEU table CSV (lang,bleu)");
    report->add_option("--scatter", rp_scatter, "Emit BLEU-vs-delta scatter CSV here");
    report->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.add_input(rp_matrix);
        PairwiseMatrix matrix = load_matrix_csv(rp_matrix);
        if (rp_heatmap.empty() && rp_scatter.empty())
            throw Error("report: nothing to do (need --heatmap and/or --scatter)");
        std::string primary;
        if (!rp_heatmap.empty()) {
            emit_heatmap_csv(matrix, rp_heatmap);
            primary = rp_heatmap;
        }
        if (!rp_scatter.empty()) {
            if (rp_bleu.empty()) throw Error("--scatter requires --bleu");
            manifest.add_input(rp_bleu);
            BleuTable bleu = load_bleu_csv(rp_bleu);
            size_t warnings = emit_bleu_scatter(matrix, bleu, rp_scatter);
            if (warnings > 0)
                std::cerr << "warning: " << warnings
                          << " augmentor language(s) lack BLEU scores; their rows were omitted\n";
            primary = rp_scatter;
        }
        manifest.config_digest = fnv1a64(command_line);
        manifest.stamp_now();
        write_manifest(manifest, default_manifest_path(primary));
    });

    // ---- synth -----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate the synthetic cipher-language benchmark");
    size_t sy_ids = 500, sy_eval_ids = 2000, sy_vocab = 120;
    std::vector<std::string> sy_languages = {"x1", "x2", "x3", "x4"};
    uint64_t sy_seed = 0;
    std::string sy_train_out, sy_eval_out, sy_squad_out;
    size_t sy_qa = 500;
    synth->add_option("--ids", sy_ids, "Training ids per language")->capture_default_str();
    synth->add_option("--eval-ids", sy_eval_ids)->capture_default_str();
    synth->add_option("--vocab", sy_vocab)->capture_default_str();
    synth->add_option("--languages", sy_languages)->delimiter(',')->capture_default_str();
    synth->add_option("--seed", sy_seed)->capture_default_str();
    synth->add_option("--train-out", sy_train_out, "Training corpus JSONL");
    synth->add_option("--eval-out", sy_eval_out, "Eval corpus JSONL");
    synth->add_option("--squad-out", sy_squad_out, "Synthetic QA corpus in SQuAD JSON form");
    synth->add_option("--qa-examples", sy_qa, "QA corpus size for --squad-out")
        ->capture_default_str();
    synth->callback([&] {
        RunManifest manifest;
        manifest.command_line = command_line;
        manifest.global_seed = sy_seed;
        if (!sy_train_out.empty() || !sy_eval_out.empty()) {
            if (sy_train_out.empty() || sy_eval_out.empty())
                throw Error("synth: --train-out and --eval-out go together");
            SyntheticCorpusSpec spec;
            spec.n_ids = sy_ids;
            spec.n_eval_ids = sy_eval_ids;
            spec.vocab_size = sy_vocab;
            spec.cipher_seed = sy_seed;
            spec.languages = parse_languages(sy_languages);
            auto [train, eval] = generate_synthetic_corpus(spec);
            write_nli_jsonl(train, sy_train_out);
            write_nli_jsonl(eval, sy_eval_out);
            manifest.stamp_now();
            manifest.config_digest = fnv1a64(command_line);
            write_manifest(manifest, default_manifest_path(sy_train_out));
            std::cerr << "synthetic corpus: " << train.size() << " train / " << eval.size()
                      << " eval ids x " << spec.languages.size() << " languages\n";
        }
        if (!sy_squad_out.empty()) {
            auto examples = generate_synthetic_qa(sy_qa, sy_seed);
            nlohmann::ordered_json root;
            nlohmann::ordered_json paragraphs = nlohmann::ordered_json::array();
            for (const auto& ex : examples) {
                nlohmann::ordered_json qa;
                qa["id"] = ex.id;
                qa["question"] = ex.question;
                nlohmann::ordered_json answer;
                answer["text"] = ex.answer_text;
                answer["answer_start"] = ex.answer_start;
                qa["answers"] = nlohmann::ordered_json::array({answer});
                nlohmann::ordered_json para;
                para["context"] = ex.context;
                para["qas"] = nlohmann::ordered_json::array({qa});
                paragraphs.push_back(para);
            }
            nlohmann::ordered_json article;
            article["title"] = "synthetic";
            article["paragraphs"] = paragraphs;
            root["data"] = nlohmann::ordered_json::array({article});
            std::ofstream out(sy_squad_out, std::ios::binary);
            if (!out) throw Error("cannot write " + sy_squad_out);
            out << root.dump() << "\n";
            std::cerr << "synthetic QA corpus: " << examples.size() << " examples -> "
                      << sy_squad_out << "\n";
        }
        if (sy_train_out.empty() && sy_squad_out.empty())
            throw Error("synth: nothing to do (need --train-out/--eval-out or --squad-out)");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
