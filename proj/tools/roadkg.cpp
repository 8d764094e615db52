// roadkg: knowledge-graph based road user behavior prediction.
//
// Subcommands: synth, build-kg, train, predict, evaluate, explain.
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "roadkg/bayes.hpp"
#include "roadkg/discretize.hpp"
#include "roadkg/explain.hpp"
#include "roadkg/fuzzy_rules.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ingest.hpp"
#include "roadkg/llm_http.hpp"
#include "roadkg/metrics.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/pipeline.hpp"
#include "roadkg/train.hpp"
#include "roadkg/triple_store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roadkg;

namespace {

std::string default_run_dir(uint64_t seed) {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return std::string("runs/") + buf + "-seed" + std::to_string(seed);
}

fs::path ensure_out_dir(const std::string& out, uint64_t seed) {
  fs::path dir = out.empty() ? default_run_dir(seed) : out;
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) fail("write failure on '" + path.string() + "'");
}

GraphMode parse_mode(const std::string& mode) {
  if (mode == "vehicle") return GraphMode::Vehicle;
  if (mode == "pedestrian") return GraphMode::Pedestrian;
  fail("unknown mode '" + mode + "' (expected vehicle or pedestrian)");
}

struct CommonOpts {
  std::string mode = "vehicle";
  std::string ontology_path;
  std::string thresholds_path;
  std::string out;
  uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_files = true) {
  cmd->add_option("--mode", o.mode, "Road user mode: vehicle or pedestrian")
      ->check(CLI::IsMember({"vehicle", "pedestrian"}));
  if (with_files) {
    cmd->add_option("--ontology", o.ontology_path, "Ontology JSON file")->required();
    cmd->add_option("--thresholds", o.thresholds_path, "Threshold config JSON file")->required();
  }
  cmd->add_option("--out", o.out, "Output directory (default: runs/<timestamp>-seed<seed>)");
  cmd->add_option("--seed", o.seed, "RNG seed for reproducible runs");
}

struct TrainOpts {
  std::string scorer = "transe";
  int dim = 100;
  int negatives = 5;
  double lr = 5e-4;
  int batch = 10000;
  int epochs = 100;
  int burn_in = 5;
  int frequency = 5;
  int patience = 5;
  int validation_batch = 100;
  double margin = 5.0;
  double alpha = 1.0;

  TrainConfig to_config(uint64_t seed) const {
    TrainConfig cfg;
    cfg.scorer = scorer_from_name(scorer);
    cfg.dim = dim;
    cfg.negatives = negatives;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.max_epochs = epochs;
    cfg.burn_in = burn_in;
    cfg.frequency = frequency;
    cfg.patience = patience;
    cfg.validation_batch = validation_batch;
    cfg.margin = margin;
    cfg.adversarial_alpha = alpha;
    cfg.seed = seed;
    return cfg;
  }
};

void add_train_opts(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--scorer", o.scorer, "Scoring model: transe or complex")
      ->check(CLI::IsMember({"transe", "complex"}));
  cmd->add_option("--dim", o.dim, "Embedding dimension k");
  cmd->add_option("--negatives", o.negatives, "Corruptions per positive triple");
  cmd->add_option("--lr", o.lr, "Learning rate");
  cmd->add_option("--batch", o.batch, "Training batch size");
  cmd->add_option("--epochs", o.epochs, "Maximum training epochs");
  cmd->add_option("--burn-in", o.burn_in, "Epochs before the validation baseline");
  cmd->add_option("--frequency", o.frequency, "Epochs between validations");
  cmd->add_option("--patience", o.patience, "Non-improving validations before early stop");
  cmd->add_option("--validation-batch", o.validation_batch, "Validation evaluation chunk size");
  cmd->add_option("--margin", o.margin, "Loss margin gamma");
  cmd->add_option("--alpha", o.alpha, "Self-adversarial temperature");
}

// Reads data, discretizes, builds the graph (optionally with rules and
// inference-support triples). Shared by build-kg and evaluate.
struct BuiltGraph {
  std::vector<LinguisticFrame> frames;
  TripleStore store;
};

json store_stats(const TripleStore& store) {
  return {{"triples", store.size()},
          {"entities", store.entity_count()},
          {"relations", store.relation_count()}};
}

int cmd_build_kg(const CommonOpts& common, const std::string& data_path,
                 const std::string& rules_path, const std::vector<double>& horizons,
                 bool inject, int stride) {
  Ontology onto = load_ontology(common.ontology_path);
  ThresholdConfig thresholds = load_thresholds(common.thresholds_path);
  validate_thresholds(thresholds, &onto);
  GraphMode mode = parse_mode(common.mode);

  std::vector<LinguisticFrame> frames;
  if (mode == GraphMode::Vehicle) {
    auto records = read_vehicle_tracks(data_path, horizons);
    for (const auto& r : records) frames.push_back(discretize_vehicle(r, thresholds));
  } else {
    auto records = read_pedestrian_features(data_path);
    for (const auto& r : records) {
      if (stride > 1 && r.frame % stride != 0) continue;
      frames.push_back(discretize_pedestrian(r, thresholds));
    }
  }
  if (frames.empty()) fail("no frames produced from '" + data_path + "'");

  TripleStore store = build_graph(frames, onto, mode);
  if (!rules_path.empty()) {
    if (mode != GraphMode::Pedestrian) fail("--rules requires pedestrian mode");
    auto rules = parse_rules(rules_path, onto);
    store = attach_rules(std::move(store), rules, frames, onto);
  }
  if (inject) inject_inference_triples(store, onto, frames);
  validate_store(store, onto);

  fs::path dir = ensure_out_dir(common.out, common.seed);
  store.export_triples((dir / "triples.tsv").string());
  json stats = store_stats(store);
  stats["ontology"] = onto.name;
  stats["frames"] = frames.size();
  write_text(dir / "stats.json", stats.dump(2) + "\n");
  std::cout << "knowledge graph: " << store.size() << " triples, " << store.entity_count()
            << " entities, " << store.relation_count() << " relations\n"
            << "written to " << (dir / "triples.tsv").string() << "\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& triples_path, const TrainOpts& topts,
              int n_valid) {
  TripleStore store = TripleStore::import_triples(triples_path);
  TrainConfig cfg = topts.to_config(common.seed);
  auto [train_store, valid] = split_no_unseen(store, n_valid, common.seed);
  auto result = train(train_store, valid, cfg);

  fs::path dir = ensure_out_dir(common.out, common.seed);
  fs::path ckpt = dir / "model.ckpt";
  save_checkpoint(result.table, cfg, ckpt.string());
  json report = {{"epochs_run", result.report.epochs_run},
                 {"validations", result.report.validations},
                 {"baseline_mrr", result.report.baseline_metric},
                 {"best_mrr", result.report.best_metric},
                 {"best_epoch", result.report.best_epoch},
                 {"stopped_early", result.report.stopped_early},
                 {"train_triples", train_store.size()},
                 {"validation_triples", valid.size()}};
  write_text(dir / "train_report.json", report.dump(2) + "\n");
  std::cout << "trained " << scorer_name(cfg.scorer) << " k=" << cfg.dim << " on "
            << train_store.size() << " triples; best validation MRR "
            << result.report.best_metric << " at epoch " << result.report.best_epoch << "\n"
            << "checkpoint written to " << ckpt.string() << "\n";
  return 0;
}

int cmd_predict(const CommonOpts& common, const std::string& checkpoint_path,
                const std::string& data_path, const std::string& rules_path, bool rag,
                const std::string& corpus_path, int topk, const std::string& backend_name,
                const std::string& endpoint, const std::string& model,
                const std::vector<double>& horizons, double cal_scale, double cal_offset) {
  Ontology onto = load_ontology(common.ontology_path);
  ThresholdConfig thresholds = load_thresholds(common.thresholds_path);
  validate_thresholds(thresholds, &onto);
  GraphMode mode = parse_mode(common.mode);
  auto ck = load_checkpoint(checkpoint_path);
  Calibration cal{cal_scale, cal_offset};

  std::vector<FuzzyRule> rules;
  if (!rules_path.empty()) rules = parse_rules(rules_path, onto);

  std::vector<LinguisticFrame> frames;
  if (mode == GraphMode::Vehicle) {
    for (const auto& r : read_vehicle_tracks(data_path, horizons))
      frames.push_back(discretize_vehicle(r, thresholds));
  } else {
    for (const auto& r : read_pedestrian_features(data_path))
      frames.push_back(discretize_pedestrian(r, thresholds));
  }
  if (frames.empty()) fail("no frames produced from '" + data_path + "'");

  // RAG machinery is set up once and reused across frames.
  std::unique_ptr<VectorStore> vstore;
  std::unique_ptr<TextEmbedder> embedder;
  std::vector<Chunk> chunks;
  std::unique_ptr<LlmBackend> backend;
  if (rag) {
    if (corpus_path.empty()) fail("--rag requires --corpus");
    std::ifstream cf(corpus_path, std::ios::binary);
    if (!cf) fail("cannot open corpus '" + corpus_path + "'");
    std::string doc((std::istreambuf_iterator<char>(cf)), std::istreambuf_iterator<char>());
    chunks = chunk_corpus(doc, 384, fs::path(corpus_path).filename().string());
    embedder = std::make_unique<HashingEmbedder>(64);
    vstore = std::make_unique<VectorStore>(embedder->dimension());
    for (const auto& c : chunks) vstore->add(c.id, embedder->embed(c.text));
    if (backend_name == "stub")
      backend = std::make_unique<StubBackend>();
    else
      backend = std::make_unique<HttpBackend>(endpoint, model);
  }

  fs::path dir = ensure_out_dir(common.out, common.seed);
  std::ofstream pred_out(dir / "predictions.jsonl", std::ios::binary);
  std::ofstream expl_out(dir / "explanations.txt", std::ios::binary);
  if (!pred_out || !expl_out) fail("cannot open prediction outputs under " + dir.string());

  for (const auto& frame : frames) {
    Prediction pred = predict(frame, onto, ck.table, cal);
    pred_out << pred.to_json().dump() << "\n";
    auto activated = matching_rule_ids(rules, frame, onto);
    std::string text = render_template(pred, frame, activated);
    if (rag) {
      PromptBundle bundle;
      bundle.system_prompt =
          "You explain road user behavior predictions from linguistic scene descriptions. "
          "Answer with a short, factual explanation grounded in the provided context.";
      bundle.user_query = build_query(frame, pred);
      auto query_vec = embedder->embed(bundle.user_query);
      for (const auto& hit : vstore->retrieve(query_vec, static_cast<size_t>(topk)))
        for (const auto& c : chunks)
          if (c.id == hit.chunk_id) bundle.retrieved.push_back(c);
      text += "\nRAG: " + generate(bundle, *backend);
    }
    expl_out << text << "\n";
  }
  std::cout << "predicted " << frames.size() << " frames\n"
            << "trace records: " << (dir / "predictions.jsonl").string() << "\n"
            << "explanations:  " << (dir / "explanations.txt").string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& data_path,
                 const std::string& rules_path, const TrainOpts& topts,
                 const std::vector<double>& horizons, double train_fraction, int n_valid,
                 bool inject, bool platt, int stride) {
  PipelineConfig cfg;
  cfg.ontology = load_ontology(common.ontology_path);
  cfg.thresholds = load_thresholds(common.thresholds_path);
  cfg.mode = parse_mode(common.mode);
  cfg.train = topts.to_config(common.seed);
  cfg.split = {train_fraction, n_valid, common.seed};
  cfg.inject_inference = inject;
  cfg.platt_calibration = platt;
  cfg.pedestrian_stride = stride;
  if (!rules_path.empty()) cfg.rules = parse_rules(rules_path, cfg.ontology);

  PipelineResult result;
  if (cfg.mode == GraphMode::Vehicle) {
    auto records = read_vehicle_tracks(data_path, horizons);
    result = horizon_sweep(records, horizons, cfg);
  } else {
    auto records = read_pedestrian_features(data_path);
    result = run_pedestrian_pipeline(records, cfg);
  }

  fs::path dir = ensure_out_dir(common.out, common.seed);
  std::string table = cfg.mode == GraphMode::Vehicle ? format_horizon_table(result)
                                                     : format_class_report(result.overall);
  write_text(dir / "report.txt", table);
  json j = {{"train_records", result.train_records},
            {"test_records", result.test_records},
            {"train_triples", result.train_triples},
            {"validation_triples", result.validation_triples},
            {"overall_macro_f1", result.overall.macro_f1},
            {"overall_accuracy", result.overall.accuracy},
            {"warnings", result.warnings}};
  j["horizons"] = json::array();
  for (const auto& hr : result.horizons)
    j["horizons"].push_back({{"horizon_s", hr.horizon_s}, {"macro_f1", hr.report.macro_f1}});
  write_text(dir / "report.json", j.dump(2) + "\n");
  std::cout << table;
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "reports written under " << dir.string() << "\n";
  return 0;
}

int cmd_synth(const CommonOpts& common, const std::string& counts_arg, double noise) {
  ScenarioSpec spec;
  spec.seed = common.seed;
  spec.noise = noise;
  for (const auto& part : split(counts_arg, ',')) {
    auto kv = split(part, '=');
    if (kv.size() != 2) fail("--counts expects label=N[,label=N...], got '" + counts_arg + "'");
    spec.counts[trim(kv[0])] = static_cast<int>(parse_long(trim(kv[1]), "--counts"));
  }
  fs::path dir = ensure_out_dir(common.out, common.seed);
  fs::path csv;
  size_t n = 0;
  if (parse_mode(common.mode) == GraphMode::Vehicle) {
    auto records = generate_synthetic_vehicles(spec);
    csv = dir / "synthetic_vehicle.csv";
    write_vehicle_csv(records, csv.string());
    n = records.size();
  } else {
    auto records = generate_synthetic_pedestrians(spec);
    csv = dir / "synthetic_pedestrian.csv";
    write_pedestrian_csv(records, csv.string());
    n = records.size();
  }
  std::cout << "generated " << n << " records -> " << csv.string() << "\n";
  return 0;
}

int cmd_explain(const std::string& corpus_path, const std::string& query, int topk,
                const std::string& backend_name, const std::string& endpoint,
                const std::string& model) {
  std::ifstream cf(corpus_path, std::ios::binary);
  if (!cf) fail("cannot open corpus '" + corpus_path + "'");
  std::string doc((std::istreambuf_iterator<char>(cf)), std::istreambuf_iterator<char>());
  auto chunks = chunk_corpus(doc, 384, fs::path(corpus_path).filename().string());
  HashingEmbedder embedder(64);
  VectorStore store(embedder.dimension());
  for (const auto& c : chunks) store.add(c.id, embedder.embed(c.text));

  PromptBundle bundle;
  bundle.system_prompt =
      "You explain road user behavior predictions from linguistic scene descriptions. "
      "Answer with a short, factual explanation grounded in the provided context.";
  bundle.user_query = query;
  for (const auto& hit : store.retrieve(embedder.embed(query), static_cast<size_t>(topk)))
    for (const auto& c : chunks)
      if (c.id == hit.chunk_id) bundle.retrieved.push_back(c);

  std::unique_ptr<LlmBackend> backend;
  if (backend_name == "stub")
    backend = std::make_unique<StubBackend>();
  else
    backend = std::make_unique<HttpBackend>(endpoint, model);
  std::cout << generate(bundle, *backend) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph based prediction of road user behaviors"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI/TOML config file with one [subcommand] section per command; "
                 "flags given on the command line win");

  // synth
  CommonOpts synth_common;
  std::string counts = "LLC=100,LK=100,RLC=100";
  double noise = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate labeled synthetic scenario CSVs");
  add_common(synth, synth_common, false);
  synth->add_option("--counts", counts, "Per-label record counts, e.g. LLC=100,LK=100,RLC=100");
  synth->add_option("--noise", noise, "Probability of perturbing each planted feature")
      ->check(CLI::Range(0.0, 1.0));

  // build-kg
  CommonOpts bkg_common;
  std::string bkg_data, bkg_rules;
  std::vector<double> bkg_horizons = {1, 2, 3, 4};
  bool bkg_inject = true;
  int bkg_stride = 2;
  auto* bkg = app.add_subcommand("build-kg", "Build a knowledge graph from a feature table");
  add_common(bkg, bkg_common);
  bkg->add_option("--data", bkg_data, "Input CSV feature table")->required();
  bkg->add_option("--rules", bkg_rules, "Fuzzy rule file (pedestrian mode)");
  bkg->add_option("--horizons", bkg_horizons, "Sampling horizons in seconds (vehicle mode)");
  bkg->add_flag("--inject-inference,!--no-inject-inference", bkg_inject,
                "Add generic/reified inference-support triples (default on)");
  bkg->add_option("--stride", bkg_stride, "Pedestrian instance sampling stride in frames");

  // train
  CommonOpts train_common;
  std::string train_triples;
  TrainOpts train_opts;
  int train_nvalid = 2000;
  auto* tr = app.add_subcommand("train", "Train knowledge graph embeddings on a triple file");
  add_common(tr, train_common, false);
  tr->add_option("--triples", train_triples, "Training triple TSV file")->required();
  tr->add_option("--valid-count", train_nvalid, "Validation triples carved with no unseen ids");
  add_train_opts(tr, train_opts);

  // predict
  CommonOpts pred_common;
  std::string pred_ckpt, pred_data, pred_rules, pred_corpus;
  std::string pred_backend = "stub", pred_endpoint = "http://localhost:8080",
              pred_model = "gpt-4";
  std::vector<double> pred_horizons = {1, 2, 3, 4};
  bool pred_rag = false;
  int pred_topk = 4;
  double cal_scale = 1.0, cal_offset = 0.0;
  auto* pr = app.add_subcommand("predict", "Predict behaviors and explain them");
  add_common(pr, pred_common);
  pr->add_option("--checkpoint", pred_ckpt, "Trained embedding checkpoint")->required();
  pr->add_option("--data", pred_data, "Input CSV feature table")->required();
  pr->add_option("--rules", pred_rules, "Fuzzy rule file for activated-rule reporting");
  pr->add_option("--horizons", pred_horizons, "Sampling horizons in seconds (vehicle mode)");
  pr->add_flag("--rag", pred_rag, "Augment explanations through retrieval + generation");
  pr->add_option("--corpus", pred_corpus, "Explanation corpus (one sentence per line)");
  pr->add_option("--topk", pred_topk, "Retrieved chunks per query");
  pr->add_option("--backend", pred_backend, "Generation backend: stub or http")
      ->check(CLI::IsMember({"stub", "http"}));
  pr->add_option("--endpoint", pred_endpoint, "Chat completion endpoint URL");
  pr->add_option("--model", pred_model, "Remote model name");
  pr->add_option("--cal-scale", cal_scale, "Calibration scale a in sigma(a*score+b)");
  pr->add_option("--cal-offset", cal_offset, "Calibration offset b in sigma(a*score+b)");

  // evaluate
  CommonOpts eval_common;
  std::string eval_data, eval_rules;
  TrainOpts eval_train;
  std::vector<double> eval_horizons = {1, 2, 3, 4};
  double eval_fraction = 0.8;
  int eval_nvalid = 2000;
  bool eval_inject = true, eval_platt = false;
  int eval_stride = 2;
  auto* ev = app.add_subcommand("evaluate", "Run the full pipeline and report metrics");
  add_common(ev, eval_common);
  ev->add_option("--data", eval_data, "Labeled CSV feature table")->required();
  ev->add_option("--rules", eval_rules, "Fuzzy rule file (pedestrian mode)");
  ev->add_option("--horizons", eval_horizons, "Evaluation horizons in seconds (vehicle mode)");
  ev->add_option("--train-fraction", eval_fraction, "Track/video fraction used for training");
  ev->add_option("--valid-count", eval_nvalid, "Validation triples carved with no unseen ids");
  ev->add_flag("--inject-inference,!--no-inject-inference", eval_inject,
               "Add generic/reified inference-support triples (default on)");
  ev->add_flag("--platt", eval_platt, "Fit Platt calibration on the validation triples");
  ev->add_option("--stride", eval_stride, "Pedestrian instance sampling stride in frames");
  add_train_opts(ev, eval_train);

  // explain
  std::string ex_corpus, ex_query;
  std::string ex_backend = "stub", ex_endpoint = "http://localhost:8080", ex_model = "gpt-4";
  int ex_topk = 4;
  auto* ex = app.add_subcommand("explain", "Retrieve and generate an explanation for a query");
  ex->add_option("--corpus", ex_corpus, "Explanation corpus (one sentence per line)")->required();
  ex->add_option("--query", ex_query, "Query text")->required();
  ex->add_option("--topk", ex_topk, "Retrieved chunks");
  ex->add_option("--backend", ex_backend, "Generation backend: stub or http")
      ->check(CLI::IsMember({"stub", "http"}));
  ex->add_option("--endpoint", ex_endpoint, "Chat completion endpoint URL");
  ex->add_option("--model", ex_model, "Remote model name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_common, counts, noise);
    if (bkg->parsed())
      return cmd_build_kg(bkg_common, bkg_data, bkg_rules, bkg_horizons, bkg_inject, bkg_stride);
    if (tr->parsed()) return cmd_train(train_common, train_triples, train_opts, train_nvalid);
    if (pr->parsed())
      return cmd_predict(pred_common, pred_ckpt, pred_data, pred_rules, pred_rag, pred_corpus,
                         pred_topk, pred_backend, pred_endpoint, pred_model, pred_horizons,
                         cal_scale, cal_offset);
    if (ev->parsed())
      return cmd_evaluate(eval_common, eval_data, eval_rules, eval_train, eval_horizons,
                          eval_fraction, eval_nvalid, eval_inject, eval_platt, eval_stride);
    if (ex->parsed())
      return cmd_explain(ex_corpus, ex_query, ex_topk, ex_backend, ex_endpoint, ex_model);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
