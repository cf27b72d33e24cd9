#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchorkit/error.hpp"
#include "anchorkit/loss.hpp"
#include "anchorkit/matching.hpp"
#include "anchorkit/netgraph.hpp"
#include "anchorkit/priors.hpp"
#include "anchorkit/records.hpp"
#include "commands.hpp"
#include "util.hpp"

namespace anchorkit::cli {

namespace {

struct Options {
  std::string netcfg;
  std::string priorcfg;
  std::string labels;
  std::string rows;
  std::string input = "512x2048";
  double alpha = 1.0;
  double beta = 1.0;
  double iou = 0.3;
  std::string negatives = "hard";
  double negative_ratio = 3.0;
  bool multiclass = false;
};

struct ImageGt {
  std::vector<BoundingBox> boxes;
  std::vector<State> states;
};

/// Dense audit rows: every image referenced must carry exactly one row per
/// prior. Kept in memory; this subcommand audits desk-scale instances, not
/// full datasets.
struct RowTables {
  std::map<std::string, std::vector<PredictionRow>> binary;
  std::map<std::string, std::vector<MulticlassRow>> multiclass;
  std::map<std::string, std::vector<bool>> seen;
};

double number_at(const nlohmann::json& arr, std::size_t i) { return arr.at(i).get<double>(); }

void load_rows(const Options& opt, std::size_t prior_count, RowTables& tables) {
  std::ifstream in(opt.rows);
  if (!in) throw ParseError(opt.rows, "cannot open file");
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = opt.rows + ":" + std::to_string(line_no);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where, e.what());
    }
    try {
      const std::string image_id = doc.at("image_id").get<std::string>();
      const std::size_t prior = doc.at("prior").get<std::size_t>();
      if (prior >= prior_count) {
        throw ParseError(where, "prior index " + std::to_string(prior) + " out of range (" +
                                    std::to_string(prior_count) + " priors)");
      }
      auto& seen = tables.seen[image_id];
      if (seen.empty()) seen.assign(prior_count, false);
      if (seen[prior]) throw ParseError(where, "duplicate row for prior " + std::to_string(prior));
      seen[prior] = true;

      if (opt.multiclass) {
        auto& rows = tables.multiclass[image_id];
        if (rows.empty()) rows.resize(prior_count);
        MulticlassRow& row = rows[prior];
        const auto& classes = doc.at("classes");
        if (!classes.is_array() || classes.size() != row.classes.size()) {
          throw ParseError(where, "'classes' must be an array of 5 numbers");
        }
        for (std::size_t i = 0; i < row.classes.size(); ++i) row.classes[i] = number_at(classes, i);
        const auto& loc = doc.at("loc");
        if (!loc.is_array() || loc.size() != 4) throw ParseError(where, "'loc' must be 4 numbers");
        for (std::size_t i = 0; i < 4; ++i) row.loc[i] = number_at(loc, i);
      } else {
        auto& rows = tables.binary[image_id];
        if (rows.empty()) rows.resize(prior_count);
        PredictionRow& row = rows[prior];
        row.background = doc.at("background").get<double>();
        row.foreground = doc.at("foreground").get<double>();
        const auto& loc = doc.at("loc");
        if (!loc.is_array() || loc.size() != 4) throw ParseError(where, "'loc' must be 4 numbers");
        for (std::size_t i = 0; i < 4; ++i) row.loc[i] = number_at(loc, i);
        const auto& state = doc.at("state");
        if (!state.is_array() || state.size() != row.state.size()) {
          throw ParseError(where, "'state' must be an array of 4 numbers");
        }
        for (std::size_t i = 0; i < row.state.size(); ++i) row.state[i] = number_at(state, i);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where, e.what());
    }
  }
  for (const auto& [image_id, seen] : tables.seen) {
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw ParseError(opt.rows, "image '" + image_id + "' is missing a row for prior " +
                                       std::to_string(i));
      }
    }
  }
}

void run(const Options& opt) {
  RunManifest manifest = make_manifest("loss");
  add_input(manifest, opt.netcfg);
  add_input(manifest, opt.priorcfg);
  add_input(manifest, opt.labels);
  add_input(manifest, opt.rows);

  LossConfig config;
  config.alpha = opt.alpha;
  config.beta = opt.beta;
  config.negative_ratio = opt.negative_ratio;
  if (opt.negatives == "hard") {
    config.negatives = NegativesPolicy::hard_negative_mining;
  } else if (opt.negatives == "all") {
    config.negatives = NegativesPolicy::all_negatives;
  } else {
    throw std::invalid_argument("unknown negatives policy '" + opt.negatives +
                                "' (hard or all)");
  }

  const Size2d input = parse_size(opt.input);
  const NetGraph graph = NetGraph::from_file(opt.netcfg);
  const NetAnalysis analysis = analyze(graph, input.h, input.w);
  const PriorLayout layout = load_priorcfg_file(opt.priorcfg, analysis);
  const PriorBoxSet priors = generate(layout, static_cast<double>(input.h),
                                      static_cast<double>(input.w));

  std::map<std::string, ImageGt> gts;
  stream_labels_file(opt.labels, [&](GroundTruthRecord&& record) {
    ImageGt& image = gts[record.image_id];
    image.boxes.push_back(record.box);
    image.states.push_back(record.state);
  });

  RowTables tables;
  load_rows(opt, priors.size(), tables);

  double sum_conf = 0.0;
  double sum_loc = 0.0;
  double sum_state = 0.0;
  std::int64_t matched = 0;
  std::int64_t images = 0;
  auto accumulate = [&](const std::string& image_id, const LossBreakdown& breakdown) {
    sum_conf += breakdown.conf;
    sum_loc += breakdown.loc;
    sum_state += breakdown.state;
    matched += breakdown.matched;
    ++images;
    log_debug("loss: image " + image_id + " matched " + std::to_string(breakdown.matched));
  };

  if (opt.multiclass) {
    for (const auto& [image_id, rows] : tables.multiclass) {
      const ImageGt& image = gts[image_id];
      const MatchResult m = match(priors, image.boxes, opt.iou);
      accumulate(image_id,
                 evaluate_multiclass_loss(priors.boxes, m, rows, image.boxes, image.states, config));
    }
  } else {
    for (const auto& [image_id, rows] : tables.binary) {
      const ImageGt& image = gts[image_id];
      const MatchResult m = match(priors, image.boxes, opt.iou);
      accumulate(image_id,
                 evaluate_loss(priors.boxes, m, rows, image.boxes, image.states, config));
    }
  }

  const double total =
      matched > 0 ? (sum_conf + opt.alpha * sum_loc + opt.beta * sum_state) /
                        static_cast<double>(matched)
                  : 0.0;

  nlohmann::ordered_json out;
  out["images"] = images;
  out["matched"] = matched;
  out["conf"] = sum_conf;
  out["loc"] = sum_loc;
  out["state"] = sum_state;
  out["alpha"] = opt.alpha;
  out["beta"] = opt.beta;
  out["multiclass"] = opt.multiclass;
  out["total"] = total;
  std::cout << out.dump(2) << "\n";
}

}  // namespace

void register_loss(CLI::App& app) {
  auto opt = std::make_shared<Options>();
  CLI::App* cmd =
      app.add_subcommand("loss", "audit the training objective on dense prediction rows");
  cmd->add_option("netcfg", opt->netcfg, "network config (.netcfg)")->required();
  cmd->add_option("priorcfg", opt->priorcfg, "prior layout config (.priorcfg)")->required();
  cmd->add_option("labels", opt->labels, "ground-truth labels (.jsonl)")->required();
  cmd->add_option("rows", opt->rows,
                  "prediction rows (.jsonl): {image_id, prior, background, foreground, "
                  "loc[4], state[4]} or with --multiclass {image_id, prior, classes[5], loc[4]}")
      ->required();
  cmd->add_option("--input", opt->input, "input size HxW (default 512x2048)");
  cmd->add_option("--alpha", opt->alpha, "localization weight (default 1.0)");
  cmd->add_option("--beta", opt->beta, "state weight (default 1.0)");
  cmd->add_option("--iou", opt->iou, "matching IoU threshold (default 0.3)");
  cmd->add_option("--negatives", opt->negatives, "negatives policy: hard or all (default hard)");
  cmd->add_option("--negative-ratio", opt->negative_ratio,
                  "negatives per positive under hard mining (default 3)");
  cmd->add_flag("--multiclass", opt->multiclass,
                "fold states into a five-class head instead of the separate state branch");
  cmd->callback([opt] { run(*opt); });
}

}  // namespace anchorkit::cli
