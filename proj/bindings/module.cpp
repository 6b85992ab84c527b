#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scenematch/gradcheck.hpp"
#include "scenematch/train.hpp"

namespace py = pybind11;
namespace sm = scenematch;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

sm::Matrix to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  sm::Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + m.size(), m.v.begin());
  return m;
}

py::array_t<double> to_array(const sm::Matrix& m) {
  py::array_t<double> a({m.rows, m.cols});
  std::copy(m.v.begin(), m.v.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const sm::RetrievalReport& rep) {
  py::dict d;
  d["image_as_query"] = py::make_tuple(rep.image_as_query[0], rep.image_as_query[1],
                                       rep.image_as_query[2]);
  d["text_as_query"] =
      py::make_tuple(rep.text_as_query[0], rep.text_as_query[1], rep.text_as_query[2]);
  d["rsum"] = rep.rsum;
  return d;
}

}  // namespace

PYBIND11_MODULE(_scenematch, mod) {
  mod.doc() = "scene-graph fusion retrieval core";

  mod.def(
      "matmul",
      [](const DoubleArray& a, const DoubleArray& b) {
        return to_array(sm::matmul(to_matrix(a), to_matrix(b)));
      },
      py::arg("a"), py::arg("b"));

  mod.def(
      "row_softmax",
      [](const DoubleArray& x) { return to_array(sm::row_softmax(to_matrix(x))); },
      py::arg("x"));

  mod.def(
      "masked_row_softmax",
      [](const DoubleArray& x, const DoubleArray& mask) {
        return to_array(sm::masked_row_softmax(to_matrix(x), to_matrix(mask)));
      },
      py::arg("x"), py::arg("mask"));

  mod.def(
      "elu", [](const DoubleArray& x) { return to_array(sm::elu(to_matrix(x))); },
      py::arg("x"));

  mod.def(
      "leaky_relu",
      [](const DoubleArray& x, double slope) {
        return to_array(sm::leaky_relu(to_matrix(x), slope));
      },
      py::arg("x"), py::arg("slope") = sm::kLeakySlope);

  mod.def("two_way_softmax", &sm::two_way_softmax, py::arg("alpha"), py::arg("beta"),
          "Softmax over two logits; the pair sums to exactly 1.0.");

  mod.def(
      "mean_row_cosine",
      [](const DoubleArray& a, const DoubleArray& b) {
        return sm::mean_row_cosine(to_matrix(a), to_matrix(b)).at(0, 0);
      },
      py::arg("a"), py::arg("b"));

  mod.def(
      "triplet_loss",
      [](const DoubleArray& scores, double margin) {
        return sm::triplet_loss(to_matrix(scores), margin);
      },
      py::arg("scores"), py::arg("margin"),
      "Bidirectional hard-negative hinge loss of a square score grid.");

  mod.def(
      "mine_hard_negatives",
      [](const DoubleArray& scores) {
        const sm::HardNegatives hn = sm::mine_hard_negatives(to_matrix(scores));
        return py::make_tuple(hn.text_for_row, hn.image_for_col);
      },
      py::arg("scores"),
      "Per-row and per-column hardest off-diagonal indices of a score grid.");

  mod.def(
      "rank_rows",
      [](const DoubleArray& scores) { return sm::rank_rows(to_matrix(scores)); },
      py::arg("scores"));

  mod.def("recall_at_k", &sm::recall_at_k, py::arg("rank_lists"), py::arg("truth"),
          py::arg("k"));

  mod.def("rsum", &sm::rsum, py::arg("recalls"),
          "Left-to-right sum of six recall percentages.");

  mod.def(
      "synth_dataset",
      [](uint64_t seed, int pairs, int n, int m, int d) {
        return sm::serialize_dataset(sm::synth_dataset(seed, pairs, n, m, d));
      },
      py::arg("seed"), py::arg("pairs"), py::arg("n"), py::arg("m"), py::arg("d"),
      "Synthetic matched-pair dataset as a JSON string.");

  mod.def(
      "train",
      [](const std::string& config_json, const std::string& dataset_json) {
        const sm::TrainConfig cfg = sm::parse_train_config(config_json);
        const sm::Dataset ds = sm::parse_dataset(dataset_json);
        sm::TrainResult res = sm::train(cfg, ds);
        py::list lines;
        for (const auto& log : res.logs) lines.append(log.line());
        return py::make_tuple(sm::serialize_checkpoint(res.checkpoint), lines);
      },
      py::arg("config_json"), py::arg("dataset_json"),
      "Train on a dataset; returns (checkpoint_json, epoch_log_lines).");

  mod.def(
      "evaluate",
      [](const std::string& checkpoint_json, const std::string& dataset_json,
         double delta) {
        const sm::Checkpoint cp = sm::parse_checkpoint(checkpoint_json);
        const sm::Dataset ds = sm::parse_dataset(dataset_json);
        return report_dict(sm::evaluate(cp.tensors, cp.config, ds, delta));
      },
      py::arg("checkpoint_json"), py::arg("dataset_json"), py::arg("delta") = -1.0,
      "Both-direction R@1/5/10 and their sum over matched pairs.");

  mod.def(
      "pair_score",
      [](const std::string& checkpoint_json, const std::string& dataset_json,
         const std::string& image_id, const std::string& text_id) {
        const sm::Checkpoint cp = sm::parse_checkpoint(checkpoint_json);
        const sm::Dataset ds = sm::parse_dataset(dataset_json);
        const sm::PairRecord* img = ds.find(image_id);
        const sm::PairRecord* txt = ds.find(text_id);
        if (!img || !txt) throw py::value_error("unknown pair id");
        const auto ps = sm::score_pair(cp.tensors, cp.config, img->image, txt->text);
        py::dict d;
        d["score"] = ps.score.at(0, 0);
        d["global"] = ps.s_g.at(0, 0);
        d["local"] = ps.s_l.at(0, 0);
        d["grid"] = to_array(ps.A);
        return d;
      },
      py::arg("checkpoint_json"), py::arg("dataset_json"), py::arg("image_id"),
      py::arg("text_id"),
      "Similarity of one image graph against one text graph.");

  mod.def(
      "fusion_ratios",
      [](const std::string& checkpoint_json) {
        return sm::fusion_ratios(sm::parse_checkpoint(checkpoint_json).tensors);
      },
      py::arg("checkpoint_json"),
      "Object-branch mixing weight per modality (image, text).");

  mod.def(
      "gradcheck",
      [](uint64_t seed) {
        sm::GradcheckOptions opt;
        opt.seed = seed;
        const sm::GradcheckReport rep = sm::run_gradcheck(opt);
        py::dict d;
        d["pass"] = rep.pass;
        d["max_rel_err"] = rep.max_rel_err;
        d["worst_param"] = rep.worst_param;
        d["attempts"] = rep.attempts;
        d["summary"] = rep.summary();
        return d;
      },
      py::arg("seed") = 7,
      "Recorded gradients vs central differences on a small synthetic batch.");
}
