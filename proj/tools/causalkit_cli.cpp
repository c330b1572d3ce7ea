// Command-line entry point for the corpus-to-causal-graph toolkit.
//
// Exit codes: 0 on success, 1 for configuration/validation/contract problems
// (including guideline violations found by `validate`), 2 for I/O failures.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causalkit/annotation.hpp"
#include "causalkit/corpus.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/encoder.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/experiment.hpp"
#include "causalkit/graph.hpp"
#include "causalkit/iaa.hpp"
#include "causalkit/io.hpp"
#include "causalkit/masking.hpp"
#include "causalkit/mst.hpp"
#include "causalkit/sst.hpp"
#include "causalkit/text.hpp"

namespace {

using namespace causalkit;
namespace fs = std::filesystem;

std::string tagger_kind(const fs::path& model_dir) {
  const Json j = read_json_file(model_dir / "heads.json");
  const std::string schema = j.value("schema", std::string());
  if (schema == "causalkit-sst-v1") return "sst";
  if (schema == "causalkit-mst-v1") return "mst";
  fail(ErrorKind::Parse, model_dir.string() + ": not a tagger model directory");
}

std::vector<std::string> pick_annotators(const fs::path& corpus,
                                         const std::vector<std::string>& requested,
                                         size_t want = 0) {
  std::vector<std::string> annotators =
      requested.empty() ? corpus_annotators(corpus) : requested;
  require(!annotators.empty(), ErrorKind::Config,
          "no annotators requested and none found in " + corpus.string());
  if (want > 0) {
    require(annotators.size() >= want, ErrorKind::Config,
            "need " + std::to_string(want) + " annotators, found " +
                std::to_string(annotators.size()));
    annotators.resize(want);
  }
  return annotators;
}

// ---------------------------------------------------------------- ingest ----

void register_ingest(CLI::App& app) {
  struct Opts {
    std::vector<std::string> fmea, slides;
    std::string failure_mode_col = "Failure Mode";
    std::string effect_col = "Effect";
    std::string cause_col = "Cause";
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("ingest", "Ingest source documents into a corpus directory");
  cmd->add_option("--fmea", opts->fmea, "FMEA table file (.csv or .tsv)");
  cmd->add_option("--slides", opts->slides, "slide text-box JSON file");
  cmd->add_option("--failure-mode-col", opts->failure_mode_col,
                  "failure-mode column header or zero-based index");
  cmd->add_option("--effect-col", opts->effect_col, "effect column header or zero-based index");
  cmd->add_option("--cause-col", opts->cause_col, "cause column header or zero-based index");
  cmd->add_option("-o,--out", opts->out, "corpus directory to create")->required();
  cmd->callback([opts] {
    require(!opts->fmea.empty() || !opts->slides.empty(), ErrorKind::Config,
            "ingest: give at least one --fmea or --slides input");
    ColumnMap map;
    map.failure_mode_column = opts->failure_mode_col;
    map.effect_column = opts->effect_col;
    map.cause_column = opts->cause_col;

    std::vector<TextUnit> units;
    IngestSummary total;
    for (const std::string& file : opts->fmea) {
      IngestSummary s;
      for (TextUnit& u : ingest_fmea(file, map, &s)) units.push_back(std::move(u));
      total.units += s.units;
      total.skipped_empty += s.skipped_empty;
    }
    for (const std::string& file : opts->slides) {
      IngestSummary s;
      for (TextUnit& u : ingest_slide_boxes(file, &s)) units.push_back(std::move(u));
      total.units += s.units;
      total.skipped_empty += s.skipped_empty;
    }
    write_corpus(opts->out, units, total);
    std::cout << "wrote " << units.size() << " text units to " << opts->out << " ("
              << total.skipped_empty << " empty cells skipped)\n";
  });
}

// -------------------------------------------------------------- validate ----

void register_validate(CLI::App& app, int& exit_code) {
  struct Opts {
    std::string corpus;
    std::vector<std::string> annotators;
    std::string json;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("validate", "Machine-check annotations against the guidelines");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("--annotator", opts->annotators, "annotator id (default: all found)");
  cmd->add_option("--json", opts->json, "write a machine-readable violation report here");
  cmd->callback([opts, &exit_code] {
    const std::vector<std::string> annotators = pick_annotators(opts->corpus, opts->annotators);
    const std::vector<TextUnit> units = read_corpus(opts->corpus);

    long files = 0, bad_files = 0;
    Json records = Json::array();
    for (const TextUnit& unit : units) {
      for (const std::string& annotator : annotators) {
        const fs::path file = annotation_path(opts->corpus, unit.id, annotator);
        if (!fs::exists(file)) continue;
        ++files;
        std::vector<Violation> violations;
        try {
          const AnnotationSet set =
              parse_standoff(read_text_file(file), unit.text, unit.id, annotator);
          violations = validate_guidelines(set, unit.text);
        } catch (const Error& e) {
          violations.push_back(Violation{0, std::string("standoff: ") + e.what(), {}});
        }
        if (violations.empty()) continue;
        ++bad_files;
        for (const Violation& v : violations) {
          std::cout << unit.id << " [" << annotator << "] rule " << v.rule_id << ": " << v.message;
          if (!v.ids.empty()) {
            std::cout << " (";
            for (size_t i = 0; i < v.ids.size(); ++i) std::cout << (i ? ", " : "") << v.ids[i];
            std::cout << ")";
          }
          std::cout << "\n";
          Json r;
          r["text_id"] = unit.id;
          r["annotator"] = annotator;
          r["rule_id"] = v.rule_id;
          r["message"] = v.message;
          r["ids"] = v.ids;
          records.push_back(r);
        }
      }
    }
    if (!opts->json.empty()) {
      Json doc;
      doc["schema"] = "causalkit-validate-v1";
      doc["files_checked"] = files;
      doc["files_with_violations"] = bad_files;
      doc["violations"] = records;
      write_json_file(opts->json, doc);
    }
    if (records.empty()) {
      std::cout << "all " << files << " annotation files conform\n";
    } else {
      std::cout << records.size() << " violation(s) in " << bad_files << " of " << files
                << " annotation files\n";
      exit_code = 1;
    }
  });
}

// ------------------------------------------------------------------- iaa ----

void register_iaa(CLI::App& app) {
  struct Opts {
    std::string corpus;
    std::string a, b;
    std::string tokenizer = "ws";
    std::string json;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("iaa", "Token-level inter-annotator agreement table");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("--annotator-a", opts->a, "first annotator id");
  cmd->add_option("--annotator-b", opts->b, "second annotator id");
  cmd->add_option("--tokenizer", opts->tokenizer, "tokenizer id");
  cmd->add_option("--json", opts->json, "write per-cell records here");
  cmd->callback([opts] {
    std::string a = opts->a, b = opts->b;
    if (a.empty() || b.empty()) {
      const std::vector<std::string> found = pick_annotators(opts->corpus, {}, 2);
      a = found[0];
      b = found[1];
    }
    const std::vector<AnnotatedText> texts = load_annotated_corpus(opts->corpus, {a, b});
    const IaaReport report = iaa_report(texts, a, b, opts->tokenizer);
    std::cout << render_iaa(report);
    if (report.skipped_texts > 0)
      std::cout << "(" << report.skipped_texts << " texts lacked one of the annotators)\n";
    if (!opts->json.empty()) write_json_file(opts->json, iaa_records(report));
  });
}

// --------------------------------------------------------- build-dataset ----

void register_build_dataset(CLI::App& app) {
  struct Opts {
    std::string corpus;
    std::vector<std::string> annotators;
    std::string tokenizer = "ws";
    std::string out;
    std::string folds;
    uint64_t seed = 42;
    double test_fraction = 0.2;
    int num_folds = kNumFolds;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd =
      app.add_subcommand("build-dataset", "Aggregate annotators into model-ready instances");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("--annotators", opts->annotators, "annotator ids to aggregate (default: all found)")
      ->delimiter(',');
  cmd->add_option("--tokenizer", opts->tokenizer, "tokenizer id");
  cmd->add_option("-o,--out", opts->out, "dataset JSON output path")->required();
  cmd->add_option("--folds", opts->folds, "also write a cross-validation fold plan here");
  cmd->add_option("--seed", opts->seed, "seed for the fold plan");
  cmd->add_option("--test-fraction", opts->test_fraction, "held-out test fraction per source");
  cmd->add_option("--num-folds", opts->num_folds, "number of folds");
  cmd->callback([opts] {
    const std::vector<std::string> annotators = pick_annotators(opts->corpus, opts->annotators);
    const std::vector<AnnotatedText> texts = load_annotated_corpus(opts->corpus, annotators);
    const Dataset ds = build_dataset(texts, opts->tokenizer, annotators);
    save_dataset(opts->out, ds);

    long with_groups = 0;
    for (const MstInstance& m : ds.mst)
      if (!m.groups.empty()) ++with_groups;
    std::cout << "dataset: " << ds.sst.size() << " texts, " << with_groups
              << " with causal relations -> " << opts->out << "\n";

    if (!opts->folds.empty()) {
      std::vector<std::pair<std::string, SourceKind>> ids;
      for (const AnnotatedText& t : texts) ids.emplace_back(t.unit.id, t.unit.source_kind);
      const FoldPlan plan =
          make_folds(ids, opts->seed, opts->test_fraction, opts->num_folds);
      save_fold_plan(opts->folds, plan);
      std::cout << "folds: " << plan.test_ids.size() << " test ids, " << plan.folds.size()
                << " folds -> " << opts->folds << "\n";
    }
  });
}

// ------------------------------------------------------------- pmi-vocab ----

void register_pmi_vocab(CLI::App& app) {
  struct Opts {
    std::string corpus;
    std::string out;
    std::string tokenizer = "ws";
    PmiConfig config;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("pmi-vocab", "Score corpus collocations for span masking");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("-o,--out", opts->out, "collocation vocabulary output path")->required();
  cmd->add_option("--tokenizer", opts->tokenizer, "tokenizer id");
  cmd->add_option("--min-n", opts->config.min_n, "shortest n-gram length");
  cmd->add_option("--max-n", opts->config.max_n, "longest n-gram length");
  cmd->add_option("--min-count", opts->config.min_count, "minimum occurrence count");
  cmd->add_option("--top-k", opts->config.top_k, "how many collocations to keep");
  cmd->callback([opts] {
    const Tokenizer& tok = tokenizer_by_id(opts->tokenizer);
    std::vector<std::vector<std::string>> docs;
    for (const TextUnit& unit : read_corpus(opts->corpus))
      docs.push_back(token_surfaces(tok.tokenize(unit.text)));
    const PmiVocabulary vocab = build_pmi_vocab(docs, opts->config);
    vocab.save(opts->out);
    std::cout << "kept " << vocab.entries().size() << " collocations -> " << opts->out << "\n";
  });
}

// -------------------------------------------------------------- pretrain ----

void register_pretrain(CLI::App& app) {
  struct Opts {
    std::string corpus;
    std::string out;
    std::string strategy = "um";
    std::string pmi;
    std::string tokenizer = "ws";
    EncoderConfig encoder;
    MlmConfig mlm;
    double mask_rate = 0.15;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("pretrain", "Adapt an encoder with masked-token prediction");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("-o,--out", opts->out, "encoder checkpoint directory to write")->required();
  cmd->add_option("--strategy", opts->strategy, "masking strategy: um or pmi");
  cmd->add_option("--pmi", opts->pmi, "collocation vocabulary (required for --strategy pmi)");
  cmd->add_option("--tokenizer", opts->tokenizer, "tokenizer id");
  cmd->add_option("--dim", opts->encoder.dim, "embedding width");
  cmd->add_option("--layers", opts->encoder.layers, "encoder layers");
  cmd->add_option("--ffn-dim", opts->encoder.ffn_dim, "feed-forward width");
  cmd->add_option("--max-len", opts->encoder.max_len, "maximum sequence length");
  cmd->add_option("--epochs", opts->mlm.epochs, "training epochs");
  cmd->add_option("--batch-size", opts->mlm.batch_size, "texts per update");
  cmd->add_option("--lr", opts->mlm.lr, "learning rate");
  cmd->add_option("--mask-rate", opts->mask_rate, "fraction of tokens to mask");
  cmd->add_option("--seed", opts->mlm.seed, "random seed");
  cmd->callback([opts] {
    opts->mlm.strategy = masking_strategy_from(opts->strategy);
    opts->mlm.mask_rate = opts->mask_rate;
    PmiVocabulary pmi;
    const bool use_pmi = opts->mlm.strategy == MaskingStrategy::Pmi;
    if (use_pmi) {
      require(!opts->pmi.empty(), ErrorKind::Config,
              "pretrain: --strategy pmi requires --pmi <vocabulary>");
      pmi = PmiVocabulary::load(opts->pmi);
    }

    const Tokenizer& tok = tokenizer_by_id(opts->tokenizer);
    std::vector<std::vector<Token>> docs;
    std::vector<std::vector<std::string>> surfaces;
    for (const TextUnit& unit : read_corpus(opts->corpus)) {
      docs.push_back(tok.tokenize(unit.text));
      surfaces.push_back(token_surfaces(docs.back()));
    }
    const Vocab vocab = Vocab::build(surfaces);
    auto encoder = make_tiny_encoder(vocab, opts->tokenizer, opts->mlm.seed, opts->encoder);
    const MlmResult result = pretrain_mlm(*encoder, docs, opts->mlm, use_pmi ? &pmi : nullptr);
    encoder->save(opts->out);

    for (const MlmEpochLog& e : result.epochs) {
      char line[128];
      std::snprintf(line, sizeof(line), "epoch %d  loss %.4f  masked %ld\n", e.epoch, e.loss,
                    e.masked_tokens);
      std::cout << line;
    }
    char tail[160];
    std::snprintf(tail, sizeof(tail), "realized mask fraction %.4f over %ld tokens\n",
                  result.realized_mask_fraction, result.total_tokens);
    std::cout << tail << "saved encoder to " << opts->out << "\n";
  });
}

// ----------------------------------------------------------------- train ----

void register_train(CLI::App& app) {
  struct Opts {
    std::string dataset, folds, out;
    RunConfig config;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("train", "Cross-validated tagger training");
  cmd->add_option("--dataset", opts->dataset, "dataset JSON")->required();
  cmd->add_option("--folds", opts->folds, "fold plan JSON")->required();
  cmd->add_option("-o,--out", opts->out, "run directory to write")->required();
  cmd->add_option("--model", opts->config.model, "tagger kind: sst or mst");
  cmd->add_option("--encoder", opts->config.encoder_spec,
                  "encoder: 'tiny' or a checkpoint directory");
  cmd->add_flag("--freeze-encoder", opts->config.freeze_encoder, "do not update encoder weights");
  cmd->add_option("--seed", opts->config.seed, "base random seed");
  cmd->add_option("--dim", opts->config.encoder.dim, "embedding width (tiny encoder)");
  cmd->add_option("--layers", opts->config.encoder.layers, "encoder layers (tiny encoder)");
  cmd->add_option("--ffn-dim", opts->config.encoder.ffn_dim, "feed-forward width (tiny encoder)");
  cmd->add_option("--max-len", opts->config.encoder.max_len, "maximum sequence length");

  auto* lr = cmd->add_option("--lr", opts->config.sst.lr, "learning rate");
  auto* bs = cmd->add_option("--batch-size", opts->config.sst.batch_size, "texts per update");
  auto* me = cmd->add_option("--max-epochs", opts->config.sst.max_epochs, "epoch cap");
  auto* pa = cmd->add_option("--patience", opts->config.sst.patience,
                             "epochs without improvement before stopping");
  cmd->add_option("--threshold", opts->config.sst.threshold, "sigmoid decision threshold (sst)");
  cmd->add_option("--theta-t", opts->config.mst.theta_t, "trigger threshold (mst)");
  cmd->add_option("--theta-g", opts->config.mst.theta_g, "grouping threshold (mst)");
  cmd->add_option("--lambda1", opts->config.mst.lambda1, "trigger loss weight (mst)");
  cmd->add_option("--lambda2", opts->config.mst.lambda2, "grouping loss weight (mst)");
  cmd->add_option("--lambda3", opts->config.mst.lambda3, "argument loss weight (mst)");
  (void)lr;
  (void)bs;
  (void)me;
  (void)pa;
  cmd->callback([opts] {
    // the shared hyperparameters were parsed into the sst block; mirror them
    opts->config.mst.lr = opts->config.sst.lr;
    opts->config.mst.batch_size = opts->config.sst.batch_size;
    opts->config.mst.max_epochs = opts->config.sst.max_epochs;
    opts->config.mst.patience = opts->config.sst.patience;
    opts->config.sst.seed = opts->config.seed;
    opts->config.mst.seed = opts->config.seed;

    const Dataset ds = load_dataset(opts->dataset);
    const FoldPlan plan = load_fold_plan(opts->folds);
    opts->config.tokenizer_id = ds.tokenizer_id;
    ensure_dir(opts->out);
    write_json_file(fs::path(opts->out) / "config.json", opts->config.to_json());

    const MetricsReport report = run_cv(ds, plan, opts->config, opts->out);
    write_json_file(fs::path(opts->out) / "metrics.json", metrics_records(report));
    const std::string table =
        render_metrics_table(report.row_names, report.col_names, aggregate_report(report));
    write_text_file(fs::path(opts->out) / "report.txt", table);
    std::cout << table;
  });
}

// -------------------------------------------------------------- evaluate ----

void register_evaluate(CLI::App& app) {
  struct Opts {
    std::string model, dataset, folds;
    std::string split = "test";
    double threshold = 0.5, theta_t = 0.5, theta_g = 0.5;
    std::string json;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("evaluate", "Score a trained tagger on a dataset split");
  cmd->add_option("--model", opts->model, "tagger model directory")->required();
  cmd->add_option("--dataset", opts->dataset, "dataset JSON")->required();
  cmd->add_option("--folds", opts->folds, "fold plan JSON")->required();
  cmd->add_option("--split", opts->split, "test | all | fold<i>");
  cmd->add_option("--threshold", opts->threshold, "sigmoid decision threshold (sst)");
  cmd->add_option("--theta-t", opts->theta_t, "trigger threshold (mst)");
  cmd->add_option("--theta-g", opts->theta_g, "grouping threshold (mst)");
  cmd->add_option("--json", opts->json, "write per-cell records here");
  cmd->callback([opts] {
    const Dataset ds = load_dataset(opts->dataset);
    const FoldPlan plan = load_fold_plan(opts->folds);

    std::vector<std::string> ids;
    if (opts->split == "test") {
      ids = plan.test_ids;
    } else if (opts->split == "all") {
      for (const SstInstance& inst : ds.sst) ids.push_back(inst.text_id);
    } else if (opts->split.rfind("fold", 0) == 0) {
      const size_t i = static_cast<size_t>(std::stoul(opts->split.substr(4)));
      require(i < plan.folds.size(), ErrorKind::Config,
              "evaluate: fold index out of range: " + opts->split);
      ids = plan.folds[i];
    } else {
      fail(ErrorKind::Config, "evaluate: unknown --split '" + opts->split + "'");
    }
    require(!ids.empty(), ErrorKind::Config, "evaluate: selected split is empty");

    const std::string kind = tagger_kind(opts->model);
    MetricsReport report;
    report.model = kind;
    report.col_names = kMetricCols;
    CvFoldResult result;
    if (kind == "sst") {
      auto tagger = SstTagger::load(opts->model);
      report.row_names = kSstRows;
      result.values = evaluate_sst(*tagger, select_sst(ds.sst, ids), opts->threshold);
    } else {
      auto tagger = MstTagger::load(opts->model);
      report.row_names = kMstRows;
      result.values = evaluate_mst(*tagger, select_mst(ds.mst, ids), opts->theta_t, opts->theta_g);
    }
    report.folds.push_back(std::move(result));
    std::cout << render_metrics_table(report.row_names, report.col_names,
                                      aggregate_report(report));
    if (!opts->json.empty()) write_json_file(opts->json, metrics_records(report));
  });
}

// --------------------------------------------------------------- extract ----

void register_extract(CLI::App& app) {
  struct Opts {
    std::string model, corpus, out;
    double threshold = 0.5, theta_t = 0.5, theta_g = 0.5;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd =
      app.add_subcommand("extract", "Run a tagger over a corpus and build the causal graph");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("--model", opts->model, "tagger model directory")->required();
  cmd->add_option("-o,--out", opts->out, "output directory")->required();
  cmd->add_option("--threshold", opts->threshold, "sigmoid decision threshold (sst)");
  cmd->add_option("--theta-t", opts->theta_t, "trigger threshold (mst)");
  cmd->add_option("--theta-g", opts->theta_g, "grouping threshold (mst)");
  cmd->callback([opts] {
    const std::vector<TextUnit> units = read_corpus(opts->corpus);
    const std::string kind = tagger_kind(opts->model);
    ensure_dir(opts->out);

    std::vector<DecodedAnnotations> decoded(units.size());
    if (kind == "mst") {
      auto tagger = MstTagger::load(opts->model);
      const Tokenizer& tok = tokenizer_by_id(tagger->encoder().tokenizer_id());
      for (size_t i = 0; i < units.size(); ++i) {
        const std::vector<Token> tokens = tok.tokenize(units[i].text);
        const MstPrediction pred = tagger->predict(tokens, opts->theta_t, opts->theta_g);
        decoded[i] = decode_mst_prediction(units[i].id, units[i].text, tokens, pred);
      }
    } else {
      auto tagger = SstTagger::load(opts->model);
      const Tokenizer& tok = tokenizer_by_id(tagger->encoder().tokenizer_id());
      for (size_t i = 0; i < units.size(); ++i) {
        const std::vector<Token> tokens = tok.tokenize(units[i].text);
        decoded[i].set = decode_sst_prediction(units[i].id, units[i].text, tokens,
                                               tagger->predict(tokens, opts->threshold));
      }
    }

    std::vector<GraphInput> inputs;
    long relations = 0;
    for (size_t i = 0; i < units.size(); ++i) {
      write_text_file(annotation_path(opts->out, units[i].id, "model"),
                      serialize_standoff(decoded[i].set));
      inputs.push_back(GraphInput{&units[i], &decoded[i].set, decoded[i].relation_confidence});
      relations += static_cast<long>(decoded[i].set.relations.size());
    }
    const CausalGraph graph = build_graph(inputs);
    write_json_file(fs::path(opts->out) / "graph.json", graph_json(graph));
    std::cout << "extracted " << relations << " relations from " << units.size()
              << " texts; graph: " << graph.nodes.size() << " nodes, " << graph.edges.size()
              << " edges -> " << opts->out << "\n";
  });
}

// ----------------------------------------------------------- split-cells ----

void register_split_cells(CLI::App& app) {
  struct Opts {
    std::string corpus, out;
    std::string annotator;
    std::string model;
    double theta_t = 0.5, theta_g = 0.5;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand(
      "split-cells", "Propose splits for cells that mention several causes or effects");
  cmd->add_option("corpus", opts->corpus, "corpus directory")->required();
  cmd->add_option("-o,--out", opts->out, "proposals JSON output path")->required();
  cmd->add_option("--annotator", opts->annotator, "use this annotator's gold annotations");
  cmd->add_option("--model", opts->model, "or run this tagger model instead");
  cmd->add_option("--theta-t", opts->theta_t, "trigger threshold (mst model)");
  cmd->add_option("--theta-g", opts->theta_g, "grouping threshold (mst model)");
  cmd->callback([opts] {
    require(opts->annotator.empty() != opts->model.empty(), ErrorKind::Config,
            "split-cells: give exactly one of --annotator or --model");

    std::vector<TextUnit> units = read_corpus(opts->corpus);
    std::vector<AnnotationSet> sets(units.size());
    std::vector<std::map<std::string, double>> confidences(units.size());
    std::vector<size_t> usable;

    if (!opts->annotator.empty()) {
      for (size_t i = 0; i < units.size(); ++i) {
        const fs::path file = annotation_path(opts->corpus, units[i].id, opts->annotator);
        if (!fs::exists(file)) continue;
        sets[i] = parse_standoff(read_text_file(file), units[i].text, units[i].id, opts->annotator);
        usable.push_back(i);
      }
      require(!usable.empty(), ErrorKind::Config,
              "split-cells: no annotations by '" + opts->annotator + "' in " + opts->corpus);
    } else {
      const std::string kind = tagger_kind(opts->model);
      require(kind == "mst", ErrorKind::Config,
              "split-cells: --model requires a multi-stage tagger (relations are needed)");
      auto tagger = MstTagger::load(opts->model);
      const Tokenizer& tok = tokenizer_by_id(tagger->encoder().tokenizer_id());
      for (size_t i = 0; i < units.size(); ++i) {
        const std::vector<Token> tokens = tok.tokenize(units[i].text);
        const MstPrediction pred = tagger->predict(tokens, opts->theta_t, opts->theta_g);
        DecodedAnnotations dec = decode_mst_prediction(units[i].id, units[i].text, tokens, pred);
        sets[i] = std::move(dec.set);
        confidences[i] = std::move(dec.relation_confidence);
        usable.push_back(i);
      }
    }

    std::vector<GraphInput> inputs;
    for (const size_t i : usable)
      inputs.push_back(GraphInput{&units[i], &sets[i], confidences[i]});
    const std::vector<CellSplitProposal> proposals = split_merged_cells(inputs);
    write_json_file(opts->out, split_proposals_json(proposals));
    long recommended = 0;
    for (const CellSplitProposal& p : proposals)
      if (p.split_recommended) ++recommended;
    std::cout << proposals.size() << " proposals (" << recommended << " recommended splits) -> "
              << opts->out << "\n";
  });
}

// ---------------------------------------------------------------- report ----

void register_report(CLI::App& app) {
  struct Opts {
    std::string run;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  CLI::App* cmd = app.add_subcommand("report", "Render the metrics of a training run");
  cmd->add_option("run", opts->run, "run directory (or a metrics JSON file)")->required();
  cmd->add_option("--out", opts->out, "also write the table here");
  cmd->callback([opts] {
    fs::path metrics = opts->run;
    if (fs::is_directory(metrics)) metrics /= "metrics.json";
    const Json doc = read_json_file(metrics);
    require(doc.value("schema", std::string()) == "causalkit-metrics-v1", ErrorKind::Parse,
            metrics.string() + ": unsupported metrics schema");

    const auto rows = doc.at("rows").get<std::vector<std::string>>();
    const auto cols = doc.at("cols").get<std::vector<std::string>>();
    std::map<std::string, std::map<std::string, ReportCell>> cells;
    for (const auto& rec : doc.at("records")) {
      ReportCell cell;
      cell.n = rec.at("n").get<int>();
      if (cell.n > 0) {
        cell.mean = rec.at("mean").get<double>();
        cell.stdev = rec.at("std").get<double>();
      }
      cells[rec.at("row").get<std::string>()][rec.at("col").get<std::string>()] = cell;
    }
    const std::string table = render_metrics_table(rows, cols, cells);
    std::cout << table;
    if (!opts->out.empty()) write_text_file(opts->out, table);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus-to-causal-graph toolkit for industrial failure documentation"};
  app.require_subcommand(1);
  int exit_code = 0;

  register_ingest(app);
  register_validate(app, exit_code);
  register_iaa(app);
  register_build_dataset(app);
  register_pmi_vocab(app);
  register_pretrain(app);
  register_train(app);
  register_evaluate(app);
  register_extract(app);
  register_split_cells(app);
  register_report(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const causalkit::Error& e) {
    std::cerr << "error (" << causalkit::error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == causalkit::ErrorKind::Io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
