// Command-line front end: run experiments, build corpora, train predictors.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atpe/atpe.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::string> parse_benchmarks(const std::string& arg) {
  if (arg == "all") return atpe::bench::names();
  auto names = split_list(arg);
  for (const auto& n : names) atpe::bench::get(n);
  return names;
}

std::vector<atpe::Variant> parse_variants(const std::string& arg) {
  std::vector<atpe::Variant> out;
  if (arg == "all") return {atpe::kAllVariants.begin(), atpe::kAllVariants.end()};
  for (const auto& n : split_list(arg)) out.push_back(atpe::variant_from_string(n));
  return out;
}

std::shared_ptr<const atpe::ParamController> load_controller(const std::string& path) {
  return std::make_shared<atpe::predictor::ParamModel>(atpe::predictor::load_model(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive TPE hyperparameter optimisation toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run benchmark experiments and write CSV summaries");
  std::string benchmarks = "all", variants = "tpe,atpe", out_dir = "results";
  std::size_t rounds = 25, steps = 200, threads = atpe::default_threads();
  std::uint64_t seed = 42;
  std::vector<std::string> models;
  bool plots = false;
  run->add_option("--benchmarks", benchmarks, "Comma-separated benchmark names or 'all'");
  run->add_option("--variants", variants, "Comma-separated variants or 'all'");
  run->add_option("--rounds", rounds, "Rounds per (benchmark, variant)")->check(CLI::PositiveNumber);
  run->add_option("--steps", steps, "Evaluations per round")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--model", models, "Predictor model file, or VARIANT=FILE; fallback defaults when absent");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--plots", plots, "Also write SVG plots");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Generate a surrogate-function corpus (JSON lines)");
  std::size_t count = 200, max_dims = 6;
  std::string atoms = "base", corpus_out = "corpus.jsonl";
  std::uint64_t corpus_seed = 1;
  corpus->add_option("--count", count, "Number of functions")->check(CLI::PositiveNumber);
  corpus->add_option("--max-dims", max_dims, "Maximum dimensionality")->check(CLI::Range(1, 64));
  corpus->add_option("--atoms", atoms, "Atom pool: base or extended")->check(CLI::IsMember({"base", "extended"}));
  corpus->add_option("--seed", corpus_seed, "Seed");
  corpus->add_option("--out", corpus_out, "Output file");

  // train
  auto* train = app.add_subcommand("train", "Train a parameter predictor on a surrogate corpus");
  std::string corpus_in, model_out = "model.bin", train_variant = "atpe";
  std::size_t runs = 8, train_steps = 50, representatives = 40, probe_budget = 200;
  std::uint64_t train_seed = 1;
  train->add_option("--corpus", corpus_in, "Corpus file (JSON lines)")->required();
  train->add_option("--out", model_out, "Model output file");
  train->add_option("--runs", runs, "Exploratory runs per function")->check(CLI::Range(4, 1 << 20));
  train->add_option("--steps", train_steps, "Evaluations per exploratory run")->check(CLI::PositiveNumber);
  train->add_option("--seed", train_seed, "Seed");
  train->add_option("--representatives", representatives, "Cluster representatives kept from the corpus")
      ->check(CLI::PositiveNumber);
  train->add_option("--probe-budget", probe_budget, "Random probes per function profile")->check(CLI::PositiveNumber);
  train->add_option("--variant", train_variant, "Variant whose pipeline generates the training runs");
  train->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  // bench
  auto* benchc = app.add_subcommand("bench", "Benchmark registry");
  bool list = false;
  benchc->add_flag("--list", list, "List benchmarks with dimensions and domains");

  // plot
  auto* plot = app.add_subcommand("plot", "Write SVG plots from a results directory");
  std::string plot_dir;
  plot->add_option("dir", plot_dir, "Results directory")->required();

  // features
  auto* features = app.add_subcommand("features", "Print the predictor feature manifest");
  std::string features_out;
  features->add_option("--out", features_out, "Write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      atpe::harness::ExperimentConfig cfg;
      cfg.benchmarks = parse_benchmarks(benchmarks);
      cfg.variants = parse_variants(variants);
      cfg.rounds = rounds;
      cfg.steps = steps;
      cfg.seed = seed;
      cfg.threads = threads;
      for (const auto& m : models) {
        if (auto eq = m.find('='); eq != std::string::npos)
          cfg.models[atpe::variant_from_string(m.substr(0, eq))] = load_controller(m.substr(eq + 1));
        else
          cfg.default_model = load_controller(m);
      }
      atpe::harness::prepare_output_dir(out_dir);
      const auto result = atpe::harness::run_experiment(cfg);
      atpe::harness::summarize(result, out_dir, plots);
      std::cout << atpe::harness::summary_csv(result);
    } else if (*corpus) {
      atpe::RngStream rng(corpus_seed);
      const auto pool = atoms == "extended" ? atpe::surrogate::extended_pool() : atpe::surrogate::base_pool();
      const auto functions = atpe::surrogate::generate_corpus(count, max_dims, pool, rng);
      std::ofstream out(corpus_out);
      if (!out) throw std::runtime_error("cannot write " + corpus_out);
      atpe::surrogate::write_corpus(out, functions);
      std::cerr << "wrote " << functions.size() << " functions to " << corpus_out << "\n";
    } else if (*train) {
      std::ifstream in(corpus_in);
      if (!in) throw std::runtime_error("cannot read " + corpus_in);
      const auto functions = atpe::surrogate::read_corpus(in);
      if (functions.empty()) throw std::runtime_error("corpus is empty");
      atpe::RngStream rng(train_seed, 1);
      const auto reps = atpe::surrogate::cluster_corpus(functions, std::min(representatives, functions.size()),
                                                        probe_budget, rng);
      std::vector<atpe::surrogate::SurrogateFunction> chosen;
      for (auto i : reps) chosen.push_back(functions[i]);
      std::cerr << "clustered " << functions.size() << " functions into " << chosen.size() << " representatives\n";

      atpe::predictor::TrainingSetConfig tcfg;
      tcfg.runs = runs;
      tcfg.steps = train_steps;
      tcfg.variant = atpe::variant_from_string(train_variant);
      tcfg.threads = threads;
      const auto examples = atpe::predictor::build_training_set(chosen, tcfg, train_seed);
      std::cerr << "built " << examples.size() << " training examples\n";
      const auto model = atpe::predictor::train(examples, tcfg.variant, {}, threads);
      atpe::predictor::save_model(model, model_out);
      const auto manifest = std::filesystem::path(model_out).parent_path() / "features.txt";
      atpe::harness::write_file(manifest, atpe::predictor::feature_manifest());
      std::cerr << "wrote " << model_out << " and " << manifest.string() << "\n";
    } else if (*benchc) {
      for (const auto& b : atpe::bench::registry()) {
        std::cout << b.name << "\t" << b.dims << "\t";
        for (std::size_t i = 0; i < b.dims; ++i)
          std::cout << (i ? "x" : "") << "[" << b.domain[i].first << "," << b.domain[i].second << "]";
        std::cout << "\n";
      }
    } else if (*plot) {
      for (const auto& p : atpe::harness::write_plots(plot_dir)) std::cout << p.string() << "\n";
    } else if (*features) {
      if (features_out.empty()) std::cout << atpe::predictor::feature_manifest();
      else atpe::harness::write_file(features_out, atpe::predictor::feature_manifest());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
