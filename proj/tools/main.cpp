#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "scenematch/errors.hpp"
#include "scenematch/gradcheck.hpp"
#include "scenematch/train.hpp"

namespace sm = scenematch;

namespace {

void print_report(const sm::RetrievalReport& rep) {
  std::cout.precision(17);
  std::cout << "image_as_query\tR@1\t" << rep.image_as_query[0] << "\tR@5\t"
            << rep.image_as_query[1] << "\tR@10\t" << rep.image_as_query[2] << "\n";
  std::cout << "text_as_query\tR@1\t" << rep.text_as_query[0] << "\tR@5\t"
            << rep.text_as_query[1] << "\tR@10\t" << rep.text_as_query[2] << "\n";
  std::cout << "rsum\t" << rep.rsum << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"scene-graph fusion retrieval"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  std::string config_path, data_path, out_path, resume_path, log_path;
  train_cmd->add_option("--config", config_path, "config file (JSON)")->required();
  train_cmd->add_option("--data", data_path, "dataset file")->required();
  train_cmd->add_option("--out", out_path, "checkpoint to write")->required();
  train_cmd->add_option("--resume", resume_path, "checkpoint to continue from");
  train_cmd->add_option("--log", log_path, "also append epoch lines to this file");

  auto* eval_cmd = app.add_subcommand("eval", "score a dataset with a checkpoint");
  std::string eval_ckpt, eval_data;
  double eval_delta = -1.0;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset file")->required();
  eval_cmd->add_option("--delta", eval_delta, "override the local-similarity weight");

  auto* retr_cmd = app.add_subcommand("retrieve", "rank a gallery against one query");
  std::string retr_ckpt, retr_query, retr_gallery, retr_direction = "image";
  int retr_topk = 10;
  bool retr_explain = false;
  retr_cmd->add_option("--ckpt", retr_ckpt, "checkpoint file")->required();
  retr_cmd->add_option("--query", retr_query, "pair id in the gallery, or a graph file")
      ->required();
  retr_cmd->add_option("--gallery", retr_gallery, "dataset file")->required();
  retr_cmd->add_option("--topk", retr_topk, "results to keep");
  retr_cmd->add_flag("--explain", retr_explain,
                     "list the best hit's strongest region-word cells");
  retr_cmd->add_option("--direction", retr_direction,
                       "'image' queries texts, 'text' queries images")
      ->check(CLI::IsMember({"image", "text"}));

  auto* grad_cmd = app.add_subcommand("gradcheck", "compare gradients to the oracle");
  uint64_t grad_seed = 7;
  grad_cmd->add_option("--seed", grad_seed, "instance seed");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  uint64_t synth_seed = 0;
  int synth_pairs = 64, synth_n = 4, synth_m = 5, synth_d = 16;
  std::string synth_out;
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--pairs", synth_pairs, "record count");
  synth_cmd->add_option("--n", synth_n, "image nodes per graph");
  synth_cmd->add_option("--m", synth_m, "text nodes per graph");
  synth_cmd->add_option("--d", synth_d, "feature dimension");
  synth_cmd->add_option("--out", synth_out, "dataset file to write")->required();

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    const sm::TrainConfig cfg = sm::load_train_config(config_path);
    const sm::Dataset ds = sm::load_dataset(data_path);
    sm::Checkpoint resume;
    const bool resuming = !resume_path.empty();
    if (resuming) resume = sm::load_checkpoint(resume_path);
    std::ofstream log_file;
    if (!log_path.empty()) {
      log_file.open(log_path, std::ios::app);
      if (!log_file) throw sm::FormatError("train: cannot open log file " + log_path);
    }
    struct Tee : std::ostream, std::streambuf {
      std::ostream* a;
      std::ostream* b;
      Tee(std::ostream* x, std::ostream* y) : std::ostream(this), a(x), b(y) {}
      int overflow(int c) override {
        if (c != EOF) {
          a->put(static_cast<char>(c));
          if (b) b->put(static_cast<char>(c));
        }
        return c;
      }
    } tee{&std::cout, log_file.is_open() ? &log_file : nullptr};
    sm::TrainResult result = sm::train(cfg, ds, resuming ? &resume : nullptr, &tee);
    sm::save_checkpoint(out_path, result.checkpoint);
    std::cerr << "checkpoint written to " << out_path << " after "
              << result.checkpoint.epoch << " epochs\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    const sm::Checkpoint cp = sm::load_checkpoint(eval_ckpt);
    const sm::Dataset ds = sm::load_dataset(eval_data);
    print_report(sm::evaluate(cp.tensors, cp.config, ds, eval_delta, &std::cerr));
    return 0;
  }

  if (retr_cmd->parsed()) {
    const sm::Checkpoint cp = sm::load_checkpoint(retr_ckpt);
    const sm::Dataset gallery = sm::load_dataset(retr_gallery);
    const bool as_image = retr_direction == "image";
    sm::SceneGraph query;
    if (const sm::PairRecord* rec = gallery.find(retr_query)) {
      query = as_image ? rec->image : rec->text;
    } else {
      query = sm::parse_graph_file(retr_query);
    }
    const sm::RetrieveResult res =
        sm::retrieve(cp.tensors, cp.config, query, gallery, retr_topk, retr_explain,
                     as_image);
    std::cout.precision(17);
    for (size_t r = 0; r < res.hits.size(); ++r) {
      std::cout << (r + 1) << "\t" << res.hits[r].id << "\t" << res.hits[r].score
                << "\n";
    }
    for (const auto& cell : res.explanation) {
      std::cout << "explain\tregion " << cell.region << "\tword " << cell.word << "\t"
                << cell.score << "\n";
    }
    return 0;
  }

  if (grad_cmd->parsed()) {
    sm::GradcheckOptions opt;
    opt.seed = grad_seed;
    const sm::GradcheckReport rep = sm::run_gradcheck(opt);
    std::cout << rep.summary() << "\n";
    return rep.pass ? 0 : 1;
  }

  if (synth_cmd->parsed()) {
    sm::save_dataset(sm::synth_dataset(synth_seed, synth_pairs, synth_n, synth_m,
                                       synth_d),
                     synth_out);
    std::cerr << "wrote " << synth_pairs << " pairs to " << synth_out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
